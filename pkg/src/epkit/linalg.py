"""Dense complex linear algebra primitives.

Matrices are plain ``numpy`` complex128 arrays; :func:`as_cmatrix` and
:func:`as_cvector` are the validation gates used at every public entry point.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import CapacityError, InvalidArgumentError, NumericalFailure

# Largest number of stored entries a Kronecker product may produce.
MAX_KRON_ENTRIES = 1 << 26


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical cutoffs.

    ``cluster_atol=None`` means the default radius ``1e-8 * max(1, ||H||)``,
    resolved per matrix by :meth:`cluster_radius`.
    """

    rank_rtol: float = 1e-10
    cluster_atol: float | None = None
    nilpotency_rtol: float = 1e-10

    def __post_init__(self):
        for name in ("rank_rtol", "cluster_atol", "nilpotency_rtol"):
            value = getattr(self, name)
            if value is None and name == "cluster_atol":
                continue
            if not (0.0 < value < 1.0):
                raise InvalidArgumentError(f"{name} must lie in (0, 1), got {value!r}")

    def cluster_radius(self, h_norm: float) -> float:
        if self.cluster_atol is not None:
            return self.cluster_atol
        return 1e-8 * max(1.0, h_norm)


DEFAULT_TOL = ToleranceConfig()


def as_cmatrix(a, name="matrix") -> np.ndarray:
    arr = np.asarray(a, dtype=complex)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.size == 0:
        raise InvalidArgumentError(f"{name} must be a nonempty 2-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} has non-finite entries")
    return arr


def as_square(a, name="matrix") -> np.ndarray:
    arr = as_cmatrix(a, name)
    if arr.shape[0] != arr.shape[1]:
        raise InvalidArgumentError(f"{name} must be square, got shape {arr.shape}")
    return arr


def as_cvector(v, name="vector") -> np.ndarray:
    arr = np.asarray(v, dtype=complex).reshape(-1)
    if arr.size == 0:
        raise InvalidArgumentError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} has non-finite entries")
    return arr


def kron(a, b) -> np.ndarray:
    """Kronecker product. 1-d inputs are treated as vectors and give a vector."""
    vector_out = np.ndim(a) == 1 and np.ndim(b) == 1
    am, bm = as_cmatrix(a, "a"), as_cmatrix(b, "b")
    rows, cols = am.shape[0] * bm.shape[0], am.shape[1] * bm.shape[1]
    if rows * cols > MAX_KRON_ENTRIES:
        raise CapacityError(f"Kronecker product of size {rows}x{cols} exceeds the capacity cap")
    out = kernels.kron(np.ascontiguousarray(am), np.ascontiguousarray(bm))
    return out.reshape(-1) if vector_out else out


def kron_sum(a, b) -> np.ndarray:
    """Kronecker sum ``a (x) 1 + 1 (x) b``."""
    am, bm = as_square(a, "a"), as_square(b, "b")
    m = am.shape[0] * bm.shape[0]
    if m * m > MAX_KRON_ENTRIES:
        raise CapacityError(f"Kronecker sum of dimension {m} exceeds the capacity cap")
    return kernels.kron_sum(np.ascontiguousarray(am), np.ascontiguousarray(bm))


def spectral_norm(a) -> float:
    """Largest singular value."""
    arr = as_cmatrix(a)
    return float(np.linalg.norm(arr, 2))


def singular_values(a) -> np.ndarray:
    try:
        return np.linalg.svd(as_cmatrix(a), compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge: {exc}") from exc


def numerical_rank(a, tol: ToleranceConfig = DEFAULT_TOL, scale: float | None = None) -> int:
    """Number of singular values above ``rank_rtol * sigma_max``; 0 for the zero matrix.

    With ``scale`` the cutoff is ``rank_rtol * scale`` instead. Powers of a
    nearly nilpotent matrix need this: their own ``sigma_max`` may be pure
    rounding noise.
    """
    s = singular_values(a)
    ref = s[0] if scale is None else scale
    if ref == 0.0:
        return 0
    return int(np.count_nonzero(s > tol.rank_rtol * ref))


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Scale ``v`` to unit norm with its largest-magnitude entry real positive."""
    v = np.asarray(v, dtype=complex)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise InvalidArgumentError("cannot normalize the zero vector")
    k = int(np.argmax(np.abs(v)))
    return v * (abs(v[k]) / v[k]) / norm


def eigen_decompose(a) -> list[tuple[complex, np.ndarray]]:
    """All eigenpairs (with multiplicity) of a dense square matrix.

    Eigenvectors have unit norm and a deterministic phase (see
    :func:`fix_phase`). At defective eigenvalues the returned vectors are
    numerically parallel; use ranks, not vector counts, for multiplicities.
    """
    arr = as_square(a)
    try:
        w, v = np.linalg.eig(arr)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigensolver did not converge: {exc}") from exc
    return [(complex(w[i]), fix_phase(v[:, i])) for i in range(w.size)]


def eigenvalues(a) -> np.ndarray:
    try:
        return np.linalg.eigvals(as_square(a))
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigensolver did not converge: {exc}") from exc


def identity(m: int) -> np.ndarray:
    return np.eye(m, dtype=complex)


def random_unitary(m: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_conditioned(m: int, cond: float, rng: np.random.Generator) -> np.ndarray:
    """Random complex matrix with 2-norm condition number exactly ``cond``."""
    if m == 1:
        return np.array([[1.0 + 0j]])
    s = np.exp(np.linspace(0.0, np.log(cond), m))
    rng.shuffle(s)
    return random_unitary(m, rng) @ np.diag(s) @ random_unitary(m, rng)
