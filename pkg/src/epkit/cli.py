"""``epkit`` command line: analyze, compose, perturb, evolve, figure1.

Exit codes: 0 success, 2 input/validation error, 3 numerical failure,
4 violated modelling assumption (e.g. a subsystem that is not degenerate).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .composite import SubsystemSpec, compose, predict, verify_composite
from .dynamics import bell_traces, degenerate_structure, evolve, recovery_period
from .ensembles import random_perturbation
from .errors import EpkitError, InvalidArgumentError, MatrixFileError, NotNilpotentError
from .io import (FORMAT, ExperimentConfig, atomic_write, canonical_json, complex_list, csv_text,
                 epsilon_grid, read_config, read_matrix, tolerance_from)
from .linalg import fix_phase, identity
from .models import bell_states
from .perturbation import (PerturbationSpec, composite_ep_signature, locality_experiment,
                           perturb_and_split)
from .spectral import analyze

log = logging.getLogger("epkit")

DEFAULT_T_MAX = 30.0
DEFAULT_SAMPLES = 400


def _tolerances(args, base=None):
    overrides = {}
    if args.rank_rtol is not None:
        overrides["rank_rtol"] = args.rank_rtol
    if args.cluster_atol is not None:
        overrides["cluster_atol"] = args.cluster_atol
    return tolerance_from(overrides, base)


def _emit(args, payload: dict) -> None:
    text = canonical_json(payload)
    if getattr(args, "out", None) and args.command in ("analyze", "compose"):
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)


def _out_dir(args) -> Path:
    return Path(args.out) if args.out else Path.cwd()


def _subsystem(ref, tol, index):
    mf = read_matrix(ref) if isinstance(ref, str) else ref
    return SubsystemSpec(mf.matrix, None, label=mf.label or f"S{index}", tol=tol)


# -- commands ---------------------------------------------------------------

def cmd_analyze(args) -> int:
    mf = read_matrix(args.matrix)
    tol = _tolerances(args)
    sigs = analyze(mf.matrix, tol)
    dominant = max(sigs, key=lambda s: (s.order, s.algebraic_multiplicity))
    _emit(args, {
        "format": FORMAT,
        "kind": "analyze",
        "label": mf.label,
        "dimension": mf.rows,
        "clusters": [s.to_dict() for s in sigs],
        "dominant": dominant.to_dict(),
    })
    return 0


def cmd_compose(args) -> int:
    tol = _tolerances(args)
    parts = [_subsystem(ref, tol, i) for i, ref in enumerate(args.matrices)]
    prediction = predict(parts)
    payload = {
        "format": FORMAT,
        "kind": "compose",
        "subsystems": [{"label": p.label, "dimension": p.dim,
                        "eigenvalue": [p.eigenvalue.real, p.eigenvalue.imag]} for p in parts],
        "prediction": prediction.to_dict(),
    }
    if args.verify:
        payload["verification"] = verify_composite(parts, prediction, tol).to_dict()
    _emit(args, payload)
    return 0


def _perturb_system(cfg: ExperimentConfig):
    p = cfg.params
    if "subsystems" in p:
        parts = [_subsystem(cfg.matrix(ref), cfg.tolerances, i) for i, ref in enumerate(p["subsystems"])]
        return compose(parts), parts, composite_ep_signature(parts, cfg.tolerances)
    if "matrix" in p:
        h = cfg.matrix(p["matrix"]).matrix
        sigs = [s for s in analyze(h, cfg.tolerances) if s.is_ep]
        if not sigs:
            raise InvalidArgumentError("the matrix has no exceptional point to perturb")
        return h, None, max(sigs, key=lambda s: s.order)
    raise MatrixFileError("perturb config needs 'matrix' or 'subsystems'")


def _report_csv(report) -> str:
    return csv_text(["epsilon", "max_splitting", "bound_rhs", "slack"], report.rows())


def cmd_perturb(args) -> int:
    cfg = read_config(args.config)
    if cfg.kind != "perturb":
        raise MatrixFileError(f"{args.config}: expected a perturb config, got {cfg.kind!r}")
    cfg.tolerances = _tolerances(args, cfg.tolerances)
    eps = args.epsilon if args.epsilon else epsilon_grid(cfg.params.get("epsilons", []))
    seed = args.seed if args.seed is not None else cfg.params.get("seed", 0)
    rng = np.random.default_rng(seed)
    h, parts, sig = _perturb_system(cfg)
    log.debug("perturbing an order-%d EP (xi=%g) over %d strengths", sig.order, sig.xi, len(eps))
    pert = cfg.params.get("perturbation", {"kind": "global"})
    out = _out_dir(args)
    stem = cfg.params.get("name", "perturb")

    if pert.get("kind", "global") == "local":
        if parts is None:
            raise MatrixFileError("a local perturbation needs 'subsystems'")
        op = cfg.matrix(pert["operator"]).matrix
        local, glob = locality_experiment(parts, int(pert.get("subsystem", 0)), op, eps, rng,
                                          jobs=args.jobs, tol=cfg.tolerances)
        atomic_write(out / f"{stem}_local.csv", _report_csv(local))
        atomic_write(out / f"{stem}_global.csv", _report_csv(glob))
        payload = {"format": FORMAT, "kind": "perturb", "seed": seed,
                   "local": local.to_dict(), "global": glob.to_dict(),
                   "slopes": {"local": local.fitted_exponent, "global": glob.fitted_exponent}}
    else:
        norm = float(pert.get("norm", 1.0))
        if "operator" in pert:
            hp = cfg.matrix(pert["operator"]).matrix
        else:
            hp = random_perturbation(h.shape[0], rng, norm)
        report = perturb_and_split(h, sig, PerturbationSpec(hp, eps), jobs=args.jobs)
        atomic_write(out / f"{stem}.csv", _report_csv(report))
        payload = {"format": FORMAT, "kind": "perturb", "seed": seed,
                   "global": report.to_dict(), "slopes": {"global": report.fitted_exponent}}
    atomic_write(out / f"{stem}.json", canonical_json(payload))
    sys.stdout.write(canonical_json({"slopes": payload["slopes"], "out": str(out)}))
    return 0


def _initial_state(ref, m):
    bell = bell_states()
    if ref in bell:
        if m != 4:
            raise InvalidArgumentError(f"Bell state {ref} needs a 4-dimensional system, got {m}")
        return bell[ref]
    v = read_matrix(ref).matrix.reshape(-1)
    if v.size != m:
        raise InvalidArgumentError(f"initial state has dimension {v.size}, expected {m}")
    return v


def _time_grid(args, default_t_max, default_samples):
    t_max = default_t_max if args.t_max is None else args.t_max
    samples = default_samples if args.samples is None else args.samples
    if t_max <= 0 or samples < 2:
        raise InvalidArgumentError("--t-max must be positive and --samples at least 2")
    return np.linspace(0.0, t_max, samples)


def cmd_evolve(args) -> int:
    mf = read_matrix(args.matrix)
    h = mf.matrix
    times = _time_grid(args, DEFAULT_T_MAX, DEFAULT_SAMPLES)
    v0 = _initial_state(args.initial, h.shape[0])
    ep_state = None
    try:
        e, n = degenerate_structure(h, _tolerances(args))
        if n >= 2:
            u, _, _ = np.linalg.svd(np.linalg.matrix_power(h - e * identity(h.shape[0]), n - 1))
            ep_state = fix_phase(u[:, 0])
    except NotNilpotentError:
        pass
    trace = evolve(h, args.method, v0, times, ep_state=ep_state)

    header = ["t", "norm"]
    cols = [trace.times, trace.norms]
    if trace.concurrence is not None:
        header.append("concurrence")
        cols.append(trace.concurrence)
    if trace.ep_overlap is not None:
        header.append("ep_overlap")
        cols.append(trace.ep_overlap)
    for j in range(h.shape[0]):
        header += [f"re_{j}", f"im_{j}"]
        cols += [trace.states[:, j].real, trace.states[:, j].imag]
    out = _out_dir(args)
    atomic_write(out / "evolve.csv", csv_text(header, zip(*cols)))
    payload = {"format": FORMAT, "kind": "evolve", "label": mf.label, "method": trace.method,
               "t_max": float(times[-1]), "samples": int(times.size),
               "final_state": complex_list(trace.states[-1]),
               "ep_state": None if ep_state is None else complex_list(ep_state)}
    if trace.ep_overlap is not None:
        payload["final_ep_overlap"] = float(trace.ep_overlap[-1])
    atomic_write(out / "evolve.json", canonical_json(payload))
    sys.stdout.write(canonical_json(payload))
    return 0


def figure1_summary(eps, times, traces) -> dict:
    states = {}
    for name, tr in traces.items():
        c = tr.concurrence
        try:
            period = recovery_period(times, c, threshold=0.99)
        except InvalidArgumentError:
            period = None
        states[name] = {"final": float(c[-1]), "min": float(c.min()), "max": float(c.max()),
                        "recovery_period": period}
    out = {"format": FORMAT, "kind": "figure1", "epsilon": float(eps),
           "t_max": float(times[-1]), "samples": int(times.size),
           "method": traces["e1"].method, "states": states}
    if eps == 0:
        out["e1_closed_form_max_error"] = float(
            np.max(np.abs(traces["e1"].concurrence - 2.0 / (times ** 4 + 2.0))))
    return out


def cmd_figure1(args) -> int:
    eps = args.epsilon
    if eps is None and args.config:
        cfg = read_config(args.config)
        eps = float(cfg.params.get("epsilon", 0.0))
        args.t_max = args.t_max if args.t_max is not None else cfg.params.get("t_max")
        args.samples = args.samples if args.samples is not None else cfg.params.get("samples")
    eps = 0.0 if eps is None else float(eps)
    if not np.isfinite(eps):
        raise InvalidArgumentError("--epsilon must be finite")
    times = _time_grid(args, DEFAULT_T_MAX, DEFAULT_SAMPLES)
    traces = bell_traces(eps, times, jobs=args.jobs)
    names = ["e1", "e2", "e3", "e4"]
    rows = zip(times, *(traces[k].concurrence for k in names))
    out = _out_dir(args)
    atomic_write(out / "figure1.csv", csv_text(["t"] + [f"C_{k}" for k in names], rows))
    summary = figure1_summary(eps, times, traces)
    atomic_write(out / "figure1.json", canonical_json(summary))
    sys.stdout.write(canonical_json(summary))
    return 0


# -- parser -----------------------------------------------------------------

def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output file (analyze, compose) or directory")
    common.add_argument("--seed", type=int, default=None, help="seed for random perturbations")
    common.add_argument("--jobs", type=_positive_int, default=1, help="worker threads")
    common.add_argument("--rank-rtol", type=float, default=None)
    common.add_argument("--cluster-atol", type=float, default=None)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="epkit", description="Exceptional-point analysis of non-Hermitian matrices.")
    parser.add_argument("--version", action="version", version=f"epkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="EP structure of every eigenvalue cluster")
    p.add_argument("matrix", help="matrix file (or fixture:NAME)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("compose", parents=[common], help="predicted EP of a non-interacting composite")
    p.add_argument("matrices", nargs="+", help="subsystem matrix files")
    p.add_argument("--verify", action="store_true", help="check the prediction against the composite")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("perturb", parents=[common], help="eigenvalue splitting sweep")
    p.add_argument("config", help="perturb config file")
    p.add_argument("--epsilon", type=float, action="append", help="override the grid (repeatable)")
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("evolve", parents=[common], help="time evolution of one initial state")
    p.add_argument("matrix")
    p.add_argument("--initial", required=True, help="e1..e4 or a vector file")
    p.add_argument("--method", default="auto", choices=["auto", "truncated_nilpotent", "dense_expm"])
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--samples", type=int, default=None)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("figure1", parents=[common], help="Bell-state concurrence traces")
    p.add_argument("config", nargs="?", help="optional figure1 config file")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--samples", type=int, default=None)
    p.set_defaults(func=cmd_figure1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="epkit: %(levelname)s: %(message)s")
    try:
        return args.func(args)
    except EpkitError as exc:
        print(f"epkit: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, json.JSONDecodeError) as exc:
        print(f"epkit: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
