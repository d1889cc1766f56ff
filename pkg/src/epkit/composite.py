"""Composite Hamiltonians built from uncoupled, fully degenerate subsystems.

A composite of ``N`` subsystems whose traceless parts are nilpotent of
orders ``n_a`` is itself nilpotent of order ``n = 1 + sum(n_a - 1)``; its top
power is a single Kronecker product, which fixes the response strength and
the EP eigenstate. :func:`predict` evaluates those closed forms and
:func:`verify_composite` checks them against the composite matrix itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .dynamics import concurrence
from .errors import CapacityError, DegeneracyError, InvalidArgumentError, UnsupportedInputError
from .linalg import (DEFAULT_TOL, ToleranceConfig, as_square, fix_phase, identity, kron,
                     kron_sum, numerical_rank, spectral_norm)
from .spectral import EPSignature, nilpotent_signature, cluster_spectrum, ep_signature, nilpotency_index

DEFAULT_DIM_CAP = 256


@dataclass(frozen=True)
class SubsystemSpec:
    """One subsystem; its whole spectrum must sit at ``eigenvalue``.

    ``eigenvalue=None`` takes the spectral centroid ``tr(H)/m``.
    """

    hamiltonian: np.ndarray = field(repr=False)
    eigenvalue: complex | None = None
    label: str = ""
    tol: ToleranceConfig = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        h = as_square(self.hamiltonian, "hamiltonian")
        object.__setattr__(self, "hamiltonian", h)
        centroid = complex(np.trace(h) / h.shape[0])
        e = centroid if self.eigenvalue is None else complex(self.eigenvalue)
        object.__setattr__(self, "eigenvalue", e)
        clusters = cluster_spectrum(h, self.tol)
        radius = self.tol.cluster_radius(spectral_norm(h))
        if len(clusters) != 1:
            raise DegeneracyError(
                f"subsystem {self.label or '?'!r} has {len(clusters)} eigenvalue clusters, "
                "expected a fully degenerate spectrum")
        if abs(clusters[0].eigenvalue - e) > radius:
            raise DegeneracyError(
                f"subsystem {self.label or '?'!r} is degenerate at {clusters[0].eigenvalue}, "
                f"not at the declared eigenvalue {e}")

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @property
    def traceless(self) -> np.ndarray:
        return self.hamiltonian - self.eigenvalue * identity(self.dim)

    def signature(self) -> EPSignature:
        scale = max(1.0, spectral_norm(self.hamiltonian))
        return nilpotent_signature(self.eigenvalue, self.traceless, self.dim, self.tol, scale)


@dataclass(frozen=True)
class CompositePrediction:
    ep_eigenvalue: complex
    ep_order: int
    xi: float
    ep_state: np.ndarray = field(repr=False)
    max_geometric_multiplicity: int
    separable_state_count: int
    ep_state_unique: bool = True

    def to_dict(self) -> dict:
        return {
            "ep_eigenvalue": [self.ep_eigenvalue.real, self.ep_eigenvalue.imag],
            "ep_order": self.ep_order,
            "xi": self.xi,
            "ep_state": [[z.real, z.imag] for z in self.ep_state],
            "ep_state_unique": self.ep_state_unique,
            "max_geometric_multiplicity": self.max_geometric_multiplicity,
            "separable_state_count": self.separable_state_count,
        }


@dataclass(frozen=True)
class VerificationReport:
    order_matches: bool
    observed_order: int
    xi_matches: bool
    observed_xi: float
    xi_residual: float
    top_power_rank: int
    top_power_rank_one: bool
    ep_state_overlap: float
    ep_state_matches: bool
    geometric_multiplicity: int
    jordan_block_sizes: tuple[int, ...]
    multiplicity_bound_holds: bool
    entangled_extra_states: bool
    extra_states: tuple[np.ndarray, ...] = field(repr=False, default=())
    extra_state_concurrences: tuple[float, ...] = ()

    @property
    def passed(self) -> bool:
        return (self.order_matches and self.xi_matches and self.top_power_rank_one
                and self.ep_state_matches and self.multiplicity_bound_holds)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "order_matches": self.order_matches,
            "observed_order": self.observed_order,
            "xi_matches": self.xi_matches,
            "observed_xi": self.observed_xi,
            "xi_residual": self.xi_residual,
            "top_power_rank": self.top_power_rank,
            "top_power_rank_one": self.top_power_rank_one,
            "ep_state_overlap": self.ep_state_overlap,
            "ep_state_matches": self.ep_state_matches,
            "geometric_multiplicity": self.geometric_multiplicity,
            "jordan_block_sizes": list(self.jordan_block_sizes),
            "multiplicity_bound_holds": self.multiplicity_bound_holds,
            "entangled_extra_states": self.entangled_extra_states,
            "extra_states": [[[z.real, z.imag] for z in v] for v in self.extra_states],
            "extra_state_concurrences": list(self.extra_state_concurrences),
        }


def _matrix(part):
    return part.hamiltonian if isinstance(part, SubsystemSpec) else as_square(part)


def compose(parts, dim_cap: int = DEFAULT_DIM_CAP) -> np.ndarray:
    """Kronecker sum of all subsystem Hamiltonians, folded left to right."""
    if not parts:
        raise InvalidArgumentError("compose needs at least one subsystem")
    mats = [_matrix(p) for p in parts]
    dim = math.prod(m.shape[0] for m in mats)
    if dim > dim_cap:
        raise CapacityError(f"composite dimension {dim} exceeds the cap {dim_cap}")
    return reduce(kron_sum, mats)


def _top_image(power):
    u, s, _ = np.linalg.svd(power)
    return fix_phase(u[:, 0]), s


def predict(parts, sigs=None) -> CompositePrediction:
    """Closed-form EP order, response strength and eigenstate of the composite."""
    if not parts:
        raise InvalidArgumentError("predict needs at least one subsystem")
    if sigs is None:
        sigs = [p.signature() for p in parts]
    if len(sigs) != len(parts):
        raise InvalidArgumentError("one signature per subsystem is required")
    for p, s in zip(parts, sigs):
        if s.order < 2:
            raise UnsupportedInputError(
                f"subsystem {p.label or '?'} has no exceptional point (order 1)")

    order = 1 + sum(s.order - 1 for s in sigs)
    xi = float(math.factorial(order - 1))
    for s in sigs:
        xi *= s.xi / math.factorial(s.order - 1)

    states, unique = [], True
    for s in sigs:
        vec, sv = _top_image(s.nilpotent_power)
        unique &= bool(sv.size < 2 or sv[1] <= DEFAULT_TOL.rank_rtol * sv[0])
        states.append(vec)
    ep_state = reduce(kron, states)

    alpha = math.prod(p.dim for p in parts)
    return CompositePrediction(
        ep_eigenvalue=complex(sum(p.eigenvalue for p in parts)),
        ep_order=order,
        xi=xi,
        ep_state=ep_state / np.linalg.norm(ep_state),
        max_geometric_multiplicity=alpha - order + 1,
        separable_state_count=math.prod(s.geometric_multiplicity for s in sigs),
        ep_state_unique=unique,
    )


def _null_basis(a, tol):
    _, s, vh = np.linalg.svd(a)
    r = 0 if s[0] == 0.0 else int(np.count_nonzero(s > tol.rank_rtol * s[0]))
    return vh[r:].conj().T


def _entangled_states(parts, h_traceless, tol):
    """Eigenvectors of the composite orthogonal to every product eigenvector."""
    null = _null_basis(h_traceless, tol)
    product = reduce(kron, [_null_basis(p.traceless, tol) for p in parts])
    q, _ = np.linalg.qr(product)
    rest = null - q @ (q.conj().T @ null)
    u, s, _ = np.linalg.svd(rest, full_matrices=False)
    keep = null.shape[1] - product.shape[1]
    return [fix_phase(u[:, j]) for j in range(max(keep, 0))]


def verify_composite(parts, prediction: CompositePrediction | None = None,
                     tol: ToleranceConfig = DEFAULT_TOL,
                     dim_cap: int = DEFAULT_DIM_CAP) -> VerificationReport:
    """Check a prediction against direct analysis of the composite matrix."""
    if prediction is None:
        prediction = predict(parts)
    h = compose(parts, dim_cap)
    m = h.shape[0]
    scale = max(1.0, spectral_norm(h))
    hp = h - prediction.ep_eigenvalue * identity(m)

    observed_order = nilpotency_index(hp, tol, scale=scale)
    power = np.linalg.matrix_power(hp, prediction.ep_order - 1)
    observed_xi = spectral_norm(power)
    xi_residual = abs(observed_xi - prediction.xi)
    rank = numerical_rank(power, tol)
    image, _ = _top_image(power)
    overlap = float(abs(np.vdot(prediction.ep_state, image)))

    sig = nilpotent_signature(prediction.ep_eigenvalue, hp, m, tol, scale)
    gamma = sig.geometric_multiplicity
    entangled = gamma > prediction.separable_state_count
    extra, concs = [], []
    if entangled:
        extra = _entangled_states(parts, hp, tol)
        if m == 4:
            concs = [concurrence(v) for v in extra]

    return VerificationReport(
        order_matches=observed_order == prediction.ep_order,
        observed_order=observed_order,
        xi_matches=xi_residual <= 1e-8 * prediction.xi,
        observed_xi=observed_xi,
        xi_residual=xi_residual,
        top_power_rank=rank,
        top_power_rank_one=rank == 1,
        ep_state_overlap=overlap,
        ep_state_matches=overlap > 1 - 1e-8,
        geometric_multiplicity=gamma,
        jordan_block_sizes=sig.jordan_block_sizes,
        multiplicity_bound_holds=gamma <= m - observed_order + 1,
        entangled_extra_states=entangled,
        extra_states=tuple(extra),
        extra_state_concurrences=tuple(concs),
    )


def composite_signature(parts, tol: ToleranceConfig = DEFAULT_TOL) -> EPSignature:
    """Direct EP signature of the composite (its spectrum is one cluster)."""
    h = compose(parts)
    clusters = cluster_spectrum(h, tol)
    if len(clusters) != 1:
        raise DegeneracyError("composite spectrum is not a single cluster")
    return ep_signature(h, clusters[0], tol)
