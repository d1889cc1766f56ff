"""Non-unitary time evolution ``K(t) = exp(-i H t)`` (hbar = 1).

At a fully degenerate spectrum ``H = E + H'`` with ``H'`` nilpotent of order
``n``, the exponential series stops after ``n`` terms, so the propagator is an
exact matrix polynomial. A dense scaling-and-squaring exponential serves as
the independent oracle and covers everything else.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import expm_multiply

from . import kernels
from .errors import EPAlignedError, InvalidArgumentError, NotNilpotentError
from .linalg import (DEFAULT_TOL, ToleranceConfig, as_cvector, as_square, identity, kron,
                     kron_sum, spectral_norm)
from .spectral import nilpotency_index

METHODS = ("truncated_nilpotent", "dense_expm", "auto")


@dataclass(frozen=True)
class PropagatorPolicy:
    """How to build ``K(t)``. ``auto`` truncates when the spectrum allows it."""

    method: str = "auto"
    hbar: float = 1.0

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidArgumentError(f"unknown propagator method {self.method!r}")
        if self.hbar != 1.0:
            raise InvalidArgumentError("only dimensionless units (hbar = 1) are supported")


@dataclass
class EvolutionTrace:
    times: np.ndarray
    states: np.ndarray = field(repr=False)
    norms: np.ndarray = field(repr=False)
    concurrence: np.ndarray | None = field(default=None, repr=False)
    ep_overlap: np.ndarray | None = field(default=None, repr=False)
    method: str = ""


def degenerate_structure(h, tol: ToleranceConfig = DEFAULT_TOL):
    """``(E, n)`` when ``h - E`` is nilpotent for ``E = tr(h)/m``; raises otherwise."""
    h = as_square(h)
    e = complex(np.trace(h) / h.shape[0])
    n = nilpotency_index(h - e * identity(h.shape[0]), tol, scale=max(1.0, spectral_norm(h)))
    return e, n


def _check_order(hp, n, tol, scale):
    nrm = spectral_norm(hp)
    if nrm <= tol.nilpotency_rtol * scale:
        return
    power = np.linalg.matrix_power(hp, n)
    if spectral_norm(power) > tol.nilpotency_rtol * nrm ** n:
        raise NotNilpotentError(f"H - E is not nilpotent of order {n}; truncation is invalid")


def propagator(h, e_ep=None, n=None, t=0.0, method="truncated_nilpotent",
               tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Time-evolution operator at time ``t``.

    ``truncated_nilpotent`` returns ``exp(-i e_ep t) sum_{j<n} (-i t)^j / j! H'^j``
    with ``H' = h - e_ep``; missing ``e_ep``/``n`` are inferred from ``h``.
    ``dense_expm`` returns ``expm(-i h t)``.
    """
    h = as_square(h)
    if method == "auto":
        try:
            e_ep, n = degenerate_structure(h, tol)
            method = "truncated_nilpotent"
        except NotNilpotentError:
            method = "dense_expm"
    if method == "dense_expm":
        return sla.expm(-1j * t * h)
    if method != "truncated_nilpotent":
        raise InvalidArgumentError(f"unknown propagator method {method!r}")

    m = h.shape[0]
    if e_ep is None or n is None:
        e_guess, n_guess = degenerate_structure(h, tol)
        e_ep = e_guess if e_ep is None else e_ep
        n = n_guess if n is None else n
    hp = h - e_ep * identity(m)
    _check_order(hp, n, tol, max(1.0, spectral_norm(h)))
    k = identity(m)
    term = identity(m)
    for j in range(1, n):
        term = term @ hp * (-1j * t / j)
        k = k + term
    return np.exp(-1j * e_ep * t) * k


def concurrence(state) -> float:
    """Two-qubit pure-state concurrence ``2|a d - b c|`` of the normalized state."""
    v = as_cvector(state, "state")
    if v.size != 4:
        raise InvalidArgumentError(f"concurrence needs a 4-component state, got {v.size}")
    if np.linalg.norm(v) == 0.0:
        raise InvalidArgumentError("concurrence of the zero vector is undefined")
    return float(kernels.concurrence_rows(v[None, :])[0])


def _validate_times(times):
    times = np.asarray(times, dtype=float).reshape(-1)
    if times.size == 0:
        raise InvalidArgumentError("time grid is empty")
    if times[0] < 0 or np.any(np.diff(times) <= 0):
        raise InvalidArgumentError("times must be increasing and start at t >= 0")
    return times


def _expm_action(h, v, times):
    """``exp(-i h t) v`` per time without forming the exponential.

    The full matrix can be far larger than the state (growing modes), so a
    state inside a slow invariant subspace would drown in its rounding.
    """
    a = -1j * h
    steps = np.diff(times)
    if steps.size and np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        return expm_multiply(a, v, start=times[0], stop=times[-1], num=times.size, endpoint=True)
    return np.array([expm_multiply(a * t, v) for t in times])


def evolve(h, policy: PropagatorPolicy | str = "auto", initial=None, times=None,
           ep_state=None, tol: ToleranceConfig = DEFAULT_TOL) -> EvolutionTrace:
    """Evolve ``initial`` over ``times``; states are renormalized per sample.

    Raw norms ``||K(t) psi(0)||`` are kept in ``trace.norms``. Concurrence is
    filled for 4-dimensional states, the EP overlap ``|<psi_EP|psi(t)>|`` when
    ``ep_state`` is given.
    """
    if isinstance(policy, str):
        policy = PropagatorPolicy(policy)
    h = as_square(h)
    m = h.shape[0]
    v0 = as_cvector(initial, "initial")
    if v0.size != m:
        raise InvalidArgumentError(f"initial state has dimension {v0.size}, expected {m}")
    times = _validate_times(times)

    method = policy.method
    structure = None
    if method in ("auto", "truncated_nilpotent"):
        try:
            structure = degenerate_structure(h, tol)
            method = "truncated_nilpotent"
        except NotNilpotentError:
            if method == "truncated_nilpotent":
                raise
            method = "dense_expm"

    if method == "truncated_nilpotent":
        e, n = structure
        hp = h - e * identity(m)
        krylov = np.empty((n, m), dtype=complex)
        krylov[0] = v0
        for j in range(1, n):
            krylov[j] = hp @ krylov[j - 1]
        raw = kernels.nilpotent_trace(krylov, e, times)
    else:
        raw = _expm_action(h, v0, times)

    norms = np.linalg.norm(raw, axis=1)
    states = raw / norms[:, None]
    conc = kernels.concurrence_rows(states) if m == 4 else None
    overlap = None
    if ep_state is not None:
        ep = as_cvector(ep_state, "ep_state")
        overlap = np.abs(states @ ep.conj()) / np.linalg.norm(ep)
    return EvolutionTrace(times, states, norms, conc, overlap, method)


def evolve_many(h, initials: dict, times, policy="auto", ep_state=None, jobs: int = 1,
                tol: ToleranceConfig = DEFAULT_TOL) -> dict:
    """:func:`evolve` for several named initial states, optionally in threads."""
    def run(item):
        name, v = item
        return name, evolve(h, policy, v, times, ep_state=ep_state, tol=tol)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return dict(pool.map(run, initials.items()))
    return dict(map(run, initials.items()))


def kron_factorization_check(h_a, h_b, t: float, tol: float = 1e-10, method="auto"):
    """Check ``K_{A (+) B}(t) = K_A(t) (x) K_B(t)``; returns ``(ok, relative residual)``."""
    lhs = propagator(kron_sum(h_a, h_b), t=t, method=method)
    rhs = kron(propagator(h_a, t=t, method=method), propagator(h_b, t=t, method=method))
    residual = spectral_norm(lhs - rhs) / spectral_norm(rhs)
    return residual <= tol, residual


def asymptotic_order_probe(h, e_ep, times, v=None, rng=None,
                           tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """Polynomial growth degree of ``||K(t) v||`` over the last decade of ``times``.

    The phase factor ``exp(-i e_ep t)`` is divided out first, so a fully
    degenerate ``h`` with an order-``n`` EP gives a degree close to ``n - 1``.
    """
    h = as_square(h)
    times = _validate_times(times)
    if v is None:
        rng = np.random.default_rng() if rng is None else rng
        v = rng.standard_normal(h.shape[0]) + 1j * rng.standard_normal(h.shape[0])
    tail = times[times >= times[-1] / 10.0]
    tail = tail[tail > 0]
    if tail.size < 3:
        raise InvalidArgumentError("the last decade of the grid needs at least 3 positive times")
    trace = evolve(h, "auto", v, tail, tol=tol)
    growth = trace.norms * np.exp(-np.imag(e_ep) * tail)
    degree = float(np.polyfit(np.log(tail), np.log(growth), 1)[0])
    if degree < 0.5:
        raise EPAlignedError(f"no polynomial growth (fitted degree {degree:.3g}); "
                             "the probe state is aligned with the EP eigenvector")
    return degree


def recovery_period(times, values, threshold=0.9) -> float:
    """Mean spacing of the recurring maxima of ``values`` above ``threshold``.

    Maxima are refined by a three-point parabola. A maximum at the first
    sample counts when the trace starts above ``threshold`` and decreases.
    """
    t = np.asarray(times, dtype=float)
    c = np.asarray(values, dtype=float)
    peaks = []
    if c[0] >= threshold and c[1] < c[0]:
        peaks.append(t[0])
    for i in range(1, c.size - 1):
        if c[i] >= threshold and c[i] >= c[i - 1] and c[i] > c[i + 1]:
            denom = c[i - 1] - 2 * c[i] + c[i + 1]
            shift = 0.5 * (c[i - 1] - c[i + 1]) / denom if denom != 0 else 0.0
            peaks.append(t[i] + shift * (t[i + 1] - t[i]))
    if len(peaks) < 2:
        raise InvalidArgumentError("fewer than two maxima above threshold; extend the grid")
    return float(np.mean(np.diff(peaks)))


def bell_traces(eps: float, times, jobs: int = 1, policy="auto") -> dict:
    """Evolve the four Bell states under two uncoupled copies of ``[[0, 1], [eps, 0]]``.

    At ``eps = 0`` the composite sits at a third-order EP whose eigenstate is
    the separable ``|00>``; every Bell state but ``e4`` (an eigenstate) drifts
    toward it and loses its entanglement.
    """
    from .models import bell_states, toy_composite

    h = toy_composite(float(eps))
    ep_state = np.array([1, 0, 0, 0], dtype=complex)
    return evolve_many(h, bell_states(), times, policy=policy, ep_state=ep_state, jobs=jobs)
