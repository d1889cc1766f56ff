"""Matrix files, experiment configs, CSV traces and atomic output.

Matrix files are JSON::

    {"cols": 2, "data": [[0.0, 0.0], [1.0, 0.0], ...], "format": "epkit/1",
     "label": "...", "rows": 2}

with ``data`` the row-major entries as ``[re, im]`` pairs. Files written by
:func:`dump_matrix` are canonical (sorted keys, shortest round-trip floats),
so parsing and rewriting one reproduces it byte for byte.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import MatrixFileError
from .linalg import ToleranceConfig

FORMAT = "epkit/1"
KINDS = ("analyze", "compose", "perturb", "evolve", "figure1")
FIXTURE_PREFIX = "fixture:"


@dataclass
class MatrixFile:
    matrix: np.ndarray
    label: str = ""

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def cols(self) -> int:
        return self.matrix.shape[1]

    def to_dict(self) -> dict:
        d = {"format": FORMAT, "rows": self.rows, "cols": self.cols,
             "data": complex_list(self.matrix.reshape(-1))}
        if self.label:
            d["label"] = self.label
        return d


def complex_list(values) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(values, dtype=complex).reshape(-1)]


def _parse_json(text: str, source: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise MatrixFileError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def _entry(pair, k, source):
    if (not isinstance(pair, (list, tuple)) or len(pair) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)):
        raise MatrixFileError(f"{source}: data[{k}] must be a [re, im] pair of numbers")
    re, im = float(pair[0]), float(pair[1])
    if not (math.isfinite(re) and math.isfinite(im)):
        raise MatrixFileError(f"{source}: data[{k}] is not finite")
    return complex(re, im)


def matrix_from_dict(d, source: str = "<matrix>") -> MatrixFile:
    """Validate a parsed matrix object (see module docstring)."""
    if not isinstance(d, dict):
        raise MatrixFileError(f"{source}: expected a JSON object")
    if d.get("format", FORMAT) != FORMAT:
        raise MatrixFileError(f"{source}: unsupported format {d.get('format')!r}")
    rows, cols, data = d.get("rows"), d.get("cols"), d.get("data")
    for name, v in (("rows", rows), ("cols", cols)):
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise MatrixFileError(f"{source}: '{name}' must be a positive integer")
    if not isinstance(data, list) or len(data) != rows * cols:
        got = len(data) if isinstance(data, list) else type(data).__name__
        raise MatrixFileError(f"{source}: 'data' must hold rows*cols = {rows * cols} entries, got {got}")
    label = d.get("label", "")
    if not isinstance(label, str):
        raise MatrixFileError(f"{source}: 'label' must be a string")
    values = np.array([_entry(p, k, source) for k, p in enumerate(data)], dtype=complex)
    return MatrixFile(values.reshape(rows, cols), label)


def parse_matrix(text: str, source: str = "<string>") -> MatrixFile:
    return matrix_from_dict(_parse_json(text, source), source)


def dump_matrix(mf: MatrixFile) -> str:
    return canonical_json(mf.to_dict())


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def fixture_dir() -> Path:
    """Bundled fixture directory, overridable with ``EPKIT_FIXTURES``."""
    env = os.environ.get("EPKIT_FIXTURES")
    if env:
        return Path(env)
    return Path(str(resources.files("epkit") / "fixtures" / "reference"))


def resolve_path(ref: str, base: Path | None = None) -> Path:
    """``fixture:NAME`` resolves in :func:`fixture_dir`; relative paths against ``base``."""
    if ref.startswith(FIXTURE_PREFIX):
        path = fixture_dir() / ref[len(FIXTURE_PREFIX):]
    else:
        path = Path(ref)
        if not path.is_absolute() and base is not None:
            path = base / path
    if not path.is_file():
        raise MatrixFileError(f"file not found: {ref} ({path})")
    return path


def read_matrix(ref: str, base: Path | None = None) -> MatrixFile:
    path = resolve_path(ref, base)
    return parse_matrix(path.read_text(encoding="utf-8"), str(path))


def atomic_write(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


# -- experiment configs ---------------------------------------------------

@dataclass
class ExperimentConfig:
    """A parsed experiment description; ``base`` anchors relative paths."""

    kind: str
    params: dict = field(default_factory=dict)
    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)
    base: Path | None = None

    def matrix(self, ref) -> MatrixFile:
        """A matrix given as a path / ``fixture:`` reference or inline object."""
        if isinstance(ref, str):
            return read_matrix(ref, self.base)
        return matrix_from_dict(ref, f"inline matrix in {self.kind} config")


def tolerance_from(d: dict | None, base: ToleranceConfig | None = None) -> ToleranceConfig:
    d = dict(d or {})
    unknown = set(d) - {"rank_rtol", "cluster_atol", "nilpotency_rtol"}
    if unknown:
        raise MatrixFileError(f"unknown tolerance keys {sorted(unknown)}")
    base = base or ToleranceConfig()
    merged = {"rank_rtol": base.rank_rtol, "cluster_atol": base.cluster_atol,
              "nilpotency_rtol": base.nilpotency_rtol, **d}
    return ToleranceConfig(**merged)


def parse_config(text: str, source: str = "<config>", base: Path | None = None) -> ExperimentConfig:
    d = _parse_json(text, source)
    if not isinstance(d, dict):
        raise MatrixFileError(f"{source}: expected a JSON object")
    if d.get("format", FORMAT) != FORMAT:
        raise MatrixFileError(f"{source}: unsupported format {d.get('format')!r}")
    kind = d.get("kind")
    if kind not in KINDS:
        raise MatrixFileError(f"{source}: 'kind' must be one of {KINDS}, got {kind!r}")
    params = {k: v for k, v in d.items() if k not in ("format", "kind", "tolerances")}
    try:
        tol = tolerance_from(d.get("tolerances"))
    except (TypeError, ValueError) as exc:
        raise MatrixFileError(f"{source}: bad tolerances: {exc}") from exc
    return ExperimentConfig(kind, params, tol, base)


def read_config(ref: str) -> ExperimentConfig:
    path = resolve_path(ref)
    return parse_config(path.read_text(encoding="utf-8"), str(path), path.parent)


def epsilon_grid(spec) -> list[float]:
    """A list of values or ``{"logspace": [lo_exp, hi_exp, count]}``."""
    if isinstance(spec, dict):
        if set(spec) != {"logspace"} or len(spec["logspace"]) != 3:
            raise MatrixFileError("epsilon grid object must be {\"logspace\": [lo, hi, count]}")
        lo, hi, count = spec["logspace"]
        return [float(x) for x in np.logspace(float(lo), float(hi), int(count))]
    if not isinstance(spec, list):
        raise MatrixFileError("epsilons must be a list or a logspace object")
    return [float(x) for x in spec]
