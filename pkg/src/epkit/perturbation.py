"""Eigenvalue splitting of an EP under ``H + eps * H_p``.

For an EP of order ``n`` with response strength ``xi`` the split eigenvalues
obey ``|E_j - E_EP|^n <= eps * ||H_p|| * xi`` for small ``eps``; a generic
perturbation therefore splits them like ``eps^(1/n)``. Perturbations that act
on a single subsystem of a composite only see that subsystem's EP.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .composite import SubsystemSpec, compose
from .ensembles import random_perturbation
from .errors import InvalidArgumentError, TrackingFailure, UnsupportedInputError
from .linalg import (DEFAULT_TOL, ToleranceConfig, as_square, eigenvalues, identity, kron,
                     spectral_norm)
from .spectral import EPSignature, nilpotent_signature

NOISE_FLOOR = 1e-12
BOUND_RTOL = 1e-6


def embed_local(op, dims, index: int) -> np.ndarray:
    """``1 (x) ... (x) op (x) ... (x) 1`` with ``op`` in slot ``index``."""
    op = as_square(op, "op")
    if op.shape[0] != dims[index]:
        raise InvalidArgumentError(
            f"operator of dimension {op.shape[0]} does not fit subsystem {index} (dim {dims[index]})")
    out = np.ones((1, 1), dtype=complex)
    for i, d in enumerate(dims):
        out = kron(out, op if i == index else identity(d))
    return out


def local_factor(hp, dims, subsystems, atol: float = 1e-12):
    """Return ``A`` if ``hp`` is ``A`` on ``subsystems`` times the identity elsewhere, else None."""
    hp = as_square(hp, "hp")
    dims = [int(d) for d in dims]
    if math.prod(dims) != hp.shape[0]:
        raise InvalidArgumentError(f"subsystem dims {dims} do not multiply to {hp.shape[0]}")
    keep = sorted(set(subsystems))
    if not keep or keep[0] < 0 or keep[-1] >= len(dims):
        raise InvalidArgumentError(f"invalid subsystem indices {subsystems}")
    rest = [i for i in range(len(dims)) if i not in keep]
    n = len(dims)
    t = hp.reshape(dims + dims)
    perm = keep + rest
    t = t.transpose(perm + [n + p for p in perm])
    ds = math.prod(dims[i] for i in keep)
    dr = math.prod(dims[i] for i in rest)
    t = t.reshape(ds, dr, ds, dr)
    a = np.einsum("irjr->ij", t) / dr
    rebuilt = np.einsum("ij,rs->irjs", a, np.eye(dr))
    if np.max(np.abs(rebuilt - t)) > atol * max(1.0, np.max(np.abs(hp))):
        return None
    return a


@dataclass(frozen=True)
class PerturbationSpec:
    """Perturbation operator, strength grid and locality.

    ``locality="local"`` needs ``dims`` (subsystem dimensions) and
    ``subsystems``; the operator must act as the identity on all others.
    """

    hp: np.ndarray = field(repr=False)
    epsilons: tuple
    locality: str = "global"
    subsystems: tuple = ()
    dims: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "hp", as_square(self.hp, "hp"))
        eps = tuple(float(e) for e in np.atleast_1d(self.epsilons))
        if not eps:
            raise InvalidArgumentError("the epsilon grid is empty")
        if eps[0] <= 0 or any(b <= a for a, b in zip(eps, eps[1:])):
            raise InvalidArgumentError("epsilons must be positive and strictly increasing")
        object.__setattr__(self, "epsilons", eps)
        if self.locality not in ("global", "local"):
            raise InvalidArgumentError(f"unknown locality {self.locality!r}")
        if self.locality == "local":
            if not self.dims or not self.subsystems:
                raise InvalidArgumentError("a local perturbation needs dims and subsystems")
            if local_factor(self.hp, self.dims, self.subsystems) is None:
                raise InvalidArgumentError(
                    f"perturbation does not act as the identity outside subsystems {self.subsystems}")


@dataclass
class PerturbationReport:
    epsilons: np.ndarray
    eigenvalue: complex
    order: int
    xi: float
    hp_norm: float
    split_eigenvalues: list = field(repr=False)
    max_splitting: np.ndarray = field(repr=False)
    max_spread: np.ndarray = field(repr=False)
    bound_rhs: np.ndarray = field(repr=False)
    slack: np.ndarray = field(repr=False)
    bound_satisfied: np.ndarray = field(repr=False)
    fitted_exponent: float
    exponent_halfwidth: float
    locality: str = "global"

    @property
    def all_bounds_hold(self) -> bool:
        return bool(np.all(self.bound_satisfied))

    def rows(self):
        """``(epsilon, max_splitting, bound_rhs, slack)`` per grid point."""
        return list(zip(self.epsilons.tolist(), self.max_splitting.tolist(),
                        self.bound_rhs.tolist(), self.slack.tolist()))

    def to_dict(self) -> dict:
        return {
            "locality": self.locality,
            "eigenvalue": [self.eigenvalue.real, self.eigenvalue.imag],
            "order": self.order,
            "xi": self.xi,
            "hp_norm": self.hp_norm,
            "fitted_exponent": self.fitted_exponent,
            "exponent_halfwidth": self.exponent_halfwidth,
            "all_bounds_hold": self.all_bounds_hold,
            "points": [
                {"epsilon": e, "max_splitting": s, "max_spread": sp, "bound_rhs": r,
                 "slack": sl, "bound_satisfied": bool(ok),
                 "split_eigenvalues": [[z.real, z.imag] for z in ev]}
                for e, s, sp, r, sl, ok, ev in zip(
                    self.epsilons.tolist(), self.max_splitting.tolist(), self.max_spread.tolist(),
                    self.bound_rhs.tolist(), self.slack.tolist(), self.bound_satisfied.tolist(),
                    self.split_eigenvalues)
            ],
        }


def fit_exponent(epsilons, splittings):
    """Least-squares slope of ``log(splitting)`` on ``log(eps)`` and its 95% half-width.

    Points under the noise floor are dropped; fewer than two points give NaN.
    """
    eps = np.asarray(epsilons, dtype=float)
    s = np.asarray(splittings, dtype=float)
    keep = s >= NOISE_FLOOR
    if np.count_nonzero(keep) < 2:
        return float("nan"), float("nan")
    x, y = np.log(eps[keep]), np.log(s[keep])
    if x.size == 2:
        return float((y[1] - y[0]) / (x[1] - x[0])), float("nan")
    fit = stats.linregress(x, y)
    return float(fit.slope), float(stats.t.ppf(0.975, x.size - 2) * fit.stderr)


def perturb_and_split(h, sig: EPSignature, spec: PerturbationSpec, jobs: int = 1) -> PerturbationReport:
    """Split eigenvalues of ``h + eps * hp`` around the EP of ``sig`` for every ``eps``.

    Eigenvalues within ``2 (eps ||hp|| xi)^(1/n)`` of the EP are attributed to it.
    """
    h = as_square(h)
    if sig.order < 2:
        raise UnsupportedInputError("the eigenvalue is semisimple (order 1); there is no EP to split")
    if spec.hp.shape != h.shape:
        raise InvalidArgumentError(f"perturbation shape {spec.hp.shape} does not match {h.shape}")
    n, xi, e0 = sig.order, sig.xi, sig.eigenvalue
    hp_norm = spectral_norm(spec.hp)

    def split(eps):
        w = eigenvalues(h + eps * spec.hp)
        radius = 2.0 * (eps * hp_norm * xi) ** (1.0 / n)
        near = w[np.abs(w - e0) <= radius]
        if near.size == 0:
            raise TrackingFailure(f"no eigenvalue within {radius:.3g} of the EP at eps={eps:g}")
        return near

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            groups = list(pool.map(split, spec.epsilons))
    else:
        groups = [split(e) for e in spec.epsilons]

    eps = np.array(spec.epsilons)
    max_split = np.array([np.max(np.abs(g - e0)) for g in groups])
    spread = np.array([np.max(np.abs(g - g.mean())) for g in groups])
    rhs = eps * hp_norm * xi
    slack = rhs - max_split ** n
    ok = max_split ** n <= rhs * (1 + BOUND_RTOL)
    slope, half = fit_exponent(eps, max_split)
    return PerturbationReport(eps, e0, n, xi, hp_norm, groups, max_split, spread, rhs, slack, ok,
                              slope, half, spec.locality)


def composite_ep_signature(parts, tol: ToleranceConfig = DEFAULT_TOL) -> EPSignature:
    h = compose(parts)
    e = complex(sum(p.eigenvalue for p in parts))
    return nilpotent_signature(e, h - e * identity(h.shape[0]), h.shape[0], tol,
                               max(1.0, spectral_norm(h)))


def locality_experiment(parts: list[SubsystemSpec], subsystem: int, hp_local, epsilons,
                        rng: np.random.Generator | None = None, jobs: int = 1,
                        tol: ToleranceConfig = DEFAULT_TOL):
    """Split the composite EP with a local and an equal-norm random global perturbation.

    Returns ``(local_report, global_report)``.
    """
    rng = np.random.default_rng() if rng is None else rng
    h = compose(parts)
    sig = composite_ep_signature(parts, tol)
    dims = tuple(p.dim for p in parts)
    hp = embed_local(hp_local, dims, subsystem)
    local = PerturbationSpec(hp, epsilons, "local", (subsystem,), dims)
    glob = PerturbationSpec(random_perturbation(h.shape[0], rng, spectral_norm(hp)), epsilons)
    return perturb_and_split(h, sig, local, jobs), perturb_and_split(h, sig, glob, jobs)
