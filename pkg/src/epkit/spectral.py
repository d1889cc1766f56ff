"""Degeneracy structure of a single non-Hermitian Hamiltonian.

The exceptional-point order is read off the nilpotency index of the
traceless part restricted to a cluster, and the Jordan block sizes off the
rank sequence of its powers (the Weyr characteristic). Eigenvector counts
from the eigensolver are never used: they are unreliable at defective
eigenvalues.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.cluster import hierarchy
from scipy.spatial.distance import pdist

from .errors import (CapacityError, IllSeparatedSpectrumError, InconsistentRankError,
                     InvalidArgumentError, NotNilpotentError, NumericalFailure, SingularEvaluationError)
from .linalg import (DEFAULT_TOL, ToleranceConfig, as_square, identity,
                     numerical_rank, spectral_norm)

MAX_EXPANSION_DIM = 64


@dataclass(frozen=True)
class DegeneracyCluster:
    eigenvalue: complex
    algebraic_multiplicity: int
    member_indices: tuple[int, ...]


@dataclass(frozen=True)
class EPSignature:
    """Degeneracy report for one eigenvalue cluster.

    ``order == 1`` means the eigenvalue is semisimple (no EP); then ``xi`` is 0
    and ``nilpotent_power`` is the zero matrix.
    """

    eigenvalue: complex
    order: int
    geometric_multiplicity: int
    algebraic_multiplicity: int
    xi: float
    jordan_block_sizes: tuple[int, ...]
    nilpotent_power: np.ndarray = field(repr=False, compare=False)

    @property
    def is_ep(self) -> bool:
        return self.order >= 2

    def to_dict(self) -> dict:
        return {
            "eigenvalue": [self.eigenvalue.real, self.eigenvalue.imag],
            "order": self.order,
            "geometric_multiplicity": self.geometric_multiplicity,
            "algebraic_multiplicity": self.algebraic_multiplicity,
            "xi": self.xi,
            "jordan_block_sizes": list(self.jordan_block_sizes),
        }


@dataclass(frozen=True)
class SpectralTerm:
    eigenvalue: complex
    projector: np.ndarray = field(repr=False)
    nilpotent: np.ndarray = field(repr=False)
    order: int
    algebraic_multiplicity: int


@dataclass(frozen=True)
class SpectralExpansion:
    """``H = sum_l (E_l P_l + N_l)``; ``radius`` is the pole-exclusion radius."""

    terms: tuple[SpectralTerm, ...]
    radius: float

    @property
    def dim(self) -> int:
        return self.terms[0].projector.shape[0]

    def reconstruct(self) -> np.ndarray:
        return sum(t.eigenvalue * t.projector + t.nilpotent for t in self.terms)


# -- clustering -------------------------------------------------------------

def _reorder(t, select, job="N"):
    """Move the selected Schur diagonal to the leading block (relative order kept)."""
    n = t.shape[0]
    k = int(np.count_nonzero(select))
    ts, _, _, _, _, sep, info = sla.lapack.ztrsen(
        np.asarray(select, dtype=np.int32), t, np.eye(n, dtype=complex),
        job=job, wantq=0, lwork=max(1, 2 * k * (n - k)))
    if info != 0:
        raise NumericalFailure(f"Schur reordering failed (info={info})")
    return ts, sep


def _is_one_cluster(t, members, left, scale, tol):
    """Whether ``members`` (split into ``left`` and the rest) form one degenerate cluster.

    The operator restricted to their invariant subspace must be scalar plus
    nilpotent, and the two halves must be inseparable: their Sylvester
    ``sep`` is at most ``sqrt(rank_rtol) * scale``.
    """
    members = sorted(members)
    select = np.zeros(t.shape[0], dtype=bool)
    select[members] = True
    ts, _ = _reorder(t, select)
    k = len(members)
    t11 = np.ascontiguousarray(ts[:k, :k])
    a = t11 - (np.trace(t11) / k) * np.eye(k)
    nrm = spectral_norm(a)
    if spectral_norm(np.linalg.matrix_power(a, k)) > tol.nilpotency_rtol * nrm ** k:
        return False
    inner = np.zeros(k, dtype=bool)
    inner[[members.index(i) for i in left]] = True
    _, sep = _reorder(t11, inner, job="V")
    return sep <= np.sqrt(tol.rank_rtol) * scale


def _cluster_indices(h, tol):
    """Eigenvalue groups, cluster radius and the eigenvalues (Schur diagonal).

    Plain single linkage at ``radius`` is not enough: a defective eigenvalue
    of order k scatters roughly like eps^(1/k), far beyond ``radius``. The
    single-linkage tree is walked from the top and a node is kept whole when
    :func:`_is_one_cluster` holds, otherwise split at its longest edge.
    """
    try:
        t, _ = sla.schur(h, output="complex")
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"Schur decomposition did not converge: {exc}") from exc
    w = np.diagonal(t).copy()
    hn = spectral_norm(h)
    radius = tol.cluster_radius(hn)
    if w.size == 1:
        return [[0]], radius, w
    scale = max(1.0, hn)
    tree = hierarchy.to_tree(hierarchy.linkage(pdist(np.column_stack([w.real, w.imag])), "single"))

    def visit(node):
        members = node.pre_order()
        if node.is_leaf() or node.dist <= radius:
            return [members]
        if _is_one_cluster(t, members, node.get_left().pre_order(), scale, tol):
            return [members]
        return visit(node.get_left()) + visit(node.get_right())

    return visit(tree), radius, w


def cluster_spectrum(h, tol: ToleranceConfig = DEFAULT_TOL) -> list[DegeneracyCluster]:
    """Group eigenvalues into degeneracy clusters, ordered by (Re, Im) of the centroid."""
    h = as_square(h)
    groups, _, w = _cluster_indices(h, tol)
    clusters = []
    for g in groups:
        g = sorted(g)
        if len(g) == w.size:
            centroid = complex(np.trace(h) / w.size)
        else:
            centroid = complex(w[g].mean())
        clusters.append(DegeneracyCluster(centroid, len(g), tuple(g)))
    clusters.sort(key=lambda c: (c.eigenvalue.real, c.eigenvalue.imag))
    return clusters


# -- nilpotent structure ----------------------------------------------------

def traceless_part(h, e: complex) -> np.ndarray:
    h = as_square(h)
    return h - e * identity(h.shape[0])


def nilpotency_index(np_, tol: ToleranceConfig = DEFAULT_TOL, scale: float | None = None) -> int:
    """Smallest ``k`` with ``||np^k|| <= nilpotency_rtol * ||np||^k``.

    The matrix counts as zero (index 1) when ``||np|| <= nilpotency_rtol * scale``;
    without ``scale`` only the exact zero matrix does.
    """
    a = as_square(np_, "np")
    nrm = spectral_norm(a)
    if nrm == 0.0 or (scale is not None and nrm <= tol.nilpotency_rtol * scale):
        return 1
    power = a
    for k in range(2, a.shape[0] + 1):
        power = power @ a
        if spectral_norm(power) <= tol.nilpotency_rtol * nrm ** k:
            return k
    raise NotNilpotentError(
        f"no power up to {a.shape[0]} vanished; the matrix is not nilpotent to tolerance")


def _power_ranks(np_, order, r0, tol):
    ranks = [r0]
    nrm = spectral_norm(np_)
    power = np.eye(np_.shape[0], dtype=complex)
    for k in range(1, order):
        power = power @ np_
        ranks.append(numerical_rank(power, tol, scale=nrm ** k))
    ranks.append(0)
    return ranks


def _blocks_from_ranks(ranks):
    # w[k-1] = number of blocks of size >= k
    w = [ranks[k - 1] - ranks[k] for k in range(1, len(ranks))]
    if any(x < 0 for x in w) or any(w[k] > w[k - 1] for k in range(1, len(w))) or w[-1] < 1:
        raise InconsistentRankError(f"rank sequence {ranks} is not a Weyr characteristic")
    w.append(0)
    sizes = []
    for k in range(len(w) - 1, 0, -1):
        sizes.extend([k] * (w[k - 1] - w[k]))
    return tuple(sizes)


def jordan_block_sizes(np_, tol: ToleranceConfig = DEFAULT_TOL) -> tuple[int, ...]:
    """Jordan block sizes of a nilpotent matrix, largest first."""
    a = as_square(np_, "np")
    order = nilpotency_index(a, tol)
    return _blocks_from_ranks(_power_ranks(a, order, a.shape[0], tol))


def nilpotent_signature(e, nil, alpha, tol: ToleranceConfig = DEFAULT_TOL, scale=None) -> EPSignature:
    """EP signature from a cluster's nilpotent part ``nil`` of multiplicity ``alpha``."""
    order = nilpotency_index(nil, tol, scale=scale)
    if order == 1:
        blocks = (1,) * alpha
        power = np.zeros_like(nil)
        xi = 0.0
    else:
        blocks = _blocks_from_ranks(_power_ranks(nil, order, alpha, tol))
        power = np.linalg.matrix_power(nil, order - 1)
        xi = spectral_norm(power)
    if sum(blocks) != alpha:
        raise InconsistentRankError(f"block sizes {blocks} do not partition multiplicity {alpha}")
    gamma = len(blocks)
    if order >= 2 and gamma > alpha - order + 1:
        raise InconsistentRankError("geometric multiplicity exceeds alpha - n + 1")
    return EPSignature(complex(e), order, gamma, alpha, xi, blocks, power)


def ep_signature(h, cluster: DegeneracyCluster, tol: ToleranceConfig = DEFAULT_TOL) -> EPSignature:
    """Order, multiplicities, response strength and Jordan blocks of one cluster.

    A cluster that covers the whole spectrum is analysed through ``h - E``
    directly; otherwise ``h`` is first split by :func:`spectral_expansion`
    and the cluster's nilpotent part ``N_l = (h - E_l) P_l`` is used.
    """
    h = as_square(h)
    m = h.shape[0]
    scale = max(1.0, spectral_norm(h))
    if cluster.algebraic_multiplicity == m:
        e = complex(np.trace(h) / m)
        return nilpotent_signature(e, traceless_part(h, e), m, tol, scale)
    expansion = spectral_expansion(h, tol)
    term = min(expansion.terms, key=lambda t: abs(t.eigenvalue - cluster.eigenvalue))
    if term.algebraic_multiplicity != cluster.algebraic_multiplicity:
        raise InvalidArgumentError("cluster does not match the spectral decomposition of h")
    return nilpotent_signature(term.eigenvalue, term.nilpotent, term.algebraic_multiplicity, tol, scale)


def analyze(h, tol: ToleranceConfig = DEFAULT_TOL) -> list[EPSignature]:
    """EP signature of every eigenvalue cluster of ``h``."""
    h = as_square(h)
    clusters = cluster_spectrum(h, tol)
    if len(clusters) == 1:
        return [ep_signature(h, clusters[0], tol)]
    scale = max(1.0, spectral_norm(h))
    expansion = spectral_expansion(h, tol)
    return [nilpotent_signature(t.eigenvalue, t.nilpotent, t.algebraic_multiplicity, tol, scale)
            for t in expansion.terms]


# -- Kato expansion ---------------------------------------------------------

def _cluster_projector(h, w, members, others):
    def select(x):
        return np.min(np.abs(x - members)) < np.min(np.abs(x - others))

    t, q, sdim = sla.schur(h, output="complex", sort=select)
    k = members.size
    if sdim != k:
        raise IllSeparatedSpectrumError(
            f"Schur reordering captured {sdim} eigenvalues, expected {k}")
    t11, t12, t22 = t[:k, :k], t[:k, k:], t[k:, k:]
    # [[I, Y], [0, I]] block-diagonalizes t when t11 Y - Y t22 = -t12
    y = sla.solve_sylvester(t11, -t22, -t12)
    m = h.shape[0]
    pt = np.zeros((m, m), dtype=complex)
    pt[:k, :k] = np.eye(k)
    pt[:k, k:] = -y
    return q @ pt @ q.conj().T, complex(np.trace(t11) / k)


def spectral_expansion(h, tol: ToleranceConfig = DEFAULT_TOL) -> SpectralExpansion:
    """Spectral projectors and nilpotent parts of every eigenvalue cluster."""
    h = as_square(h)
    m = h.shape[0]
    if m > MAX_EXPANSION_DIM:
        raise CapacityError(f"spectral expansion is limited to dimension {MAX_EXPANSION_DIM}")
    groups, radius, w = _cluster_indices(h, tol)
    scale = max(1.0, spectral_norm(h))

    if len(groups) == 1:
        e = complex(np.trace(h) / m)
        nil = traceless_part(h, e)
        term = SpectralTerm(e, identity(m), nil, nilpotency_index(nil, tol, scale=scale), m)
        return SpectralExpansion((term,), radius)

    for a in range(len(groups)):
        for b in range(a + 1, len(groups)):
            gap = np.min(np.abs(w[groups[a]][:, None] - w[groups[b]][None, :]))
            if gap <= 10 * radius:
                raise IllSeparatedSpectrumError(
                    f"cluster gap {gap:.3g} is not above 10 * cluster radius {radius:.3g}")

    terms = []
    for g in groups:
        mask = np.zeros(m, dtype=bool)
        mask[g] = True
        proj, e = _cluster_projector(h, w, w[mask], w[~mask])
        nil = (h - e * identity(m)) @ proj
        order = nilpotency_index(nil, tol, scale=scale)
        terms.append(SpectralTerm(e, proj, nil, order, len(g)))
    terms.sort(key=lambda t: (t.eigenvalue.real, t.eigenvalue.imag))
    return SpectralExpansion(tuple(terms), radius)


def greens_function(expansion: SpectralExpansion, e: complex) -> np.ndarray:
    """Resolvent ``(e - H)^{-1}`` assembled from the Kato expansion."""
    g = np.zeros((expansion.dim, expansion.dim), dtype=complex)
    for term in expansion.terms:
        d = e - term.eigenvalue
        if abs(d) <= expansion.radius:
            raise SingularEvaluationError(f"energy {e} lies on the pole {term.eigenvalue}")
        g += term.projector / d
        power = term.nilpotent
        for k in range(2, term.order + 1):
            g += power / d ** k
            power = power @ term.nilpotent
    return g
