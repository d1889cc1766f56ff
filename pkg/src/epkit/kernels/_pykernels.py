"""Pure-Python (numpy) implementations of the hot kernels.

Signatures and results match ``_ckernels`` exactly; this module is used
whenever the compiled extension is missing or ``EPKIT_PURE_PYTHON`` is set.
"""
import numpy as np


def kron(a, b):
    return np.kron(a, b)


def kron_sum(a, b):
    ma, mb = a.shape[0], b.shape[0]
    return np.kron(a, np.eye(mb, dtype=complex)) + np.kron(np.eye(ma, dtype=complex), b)


def nilpotent_trace(krylov, e_ep, times):
    """Evaluate ``exp(-i e t) * sum_j (-i t)^j / j! * krylov[j]`` at every ``t``.

    ``krylov[j]`` holds ``H'^j v``; the series is exact when ``H'`` is
    nilpotent of order ``len(krylov)``.
    """
    krylov = np.asarray(krylov, dtype=complex)
    times = np.asarray(times, dtype=float)
    order = krylov.shape[0]
    coef = np.ones((times.size, order), dtype=complex)
    for j in range(1, order):
        coef[:, j] = coef[:, j - 1] * (-1j * times) / j
    phase = np.exp(-1j * e_ep * times)
    return phase[:, None] * (coef @ krylov)


def concurrence_rows(states):
    """Two-qubit concurrence of every row of a ``(T, 4)`` array, after normalization."""
    states = np.asarray(states, dtype=complex)
    norm2 = np.einsum("ij,ij->i", states.conj(), states).real
    num = np.abs(states[:, 0] * states[:, 3] - states[:, 1] * states[:, 2])
    return 2.0 * num / norm2
