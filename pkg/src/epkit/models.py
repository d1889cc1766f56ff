"""Reference Hamiltonians and states: the two-level toy model, its composite,
Jordan blocks, and the four Bell states used as initial conditions."""
import numpy as np

from .linalg import kron_sum


def toy_hamiltonian(eps: float = 0.0) -> np.ndarray:
    """``[[0, 1], [eps, 0]]``: a second-order EP at ``eps = 0``, eigenvalues ``+-sqrt(eps)``."""
    return np.array([[0.0, 1.0], [eps, 0.0]], dtype=complex)


def toy_composite(eps: float = 0.0, parts: int = 2) -> np.ndarray:
    """Kronecker sum of ``parts`` copies of :func:`toy_hamiltonian`."""
    h = toy_hamiltonian(eps)
    out = h
    for _ in range(parts - 1):
        out = kron_sum(out, h)
    return out


def jordan_block(size: int, eigenvalue: complex = 0.0) -> np.ndarray:
    return eigenvalue * np.eye(size, dtype=complex) + np.eye(size, k=1, dtype=complex)


def jordan_matrix(sizes, eigenvalue: complex = 0.0) -> np.ndarray:
    """Block-diagonal Jordan matrix with the given block sizes."""
    m = sum(sizes)
    out = eigenvalue * np.eye(m, dtype=complex)
    start = 0
    for k in sizes:
        out[start:start + k, start:start + k] += np.eye(k, k=1)
        start += k
    return out


def bell_states() -> dict:
    """The four Bell states ``e1 .. e4`` in the (00, 01, 10, 11) basis."""
    r = 1 / np.sqrt(2)
    return {
        "e1": r * np.array([1, 0, 0, 1], dtype=complex),
        "e2": 1j * r * np.array([1, 0, 0, -1], dtype=complex),
        "e3": 1j * r * np.array([0, 1, 1, 0], dtype=complex),
        "e4": r * np.array([0, -1, 1, 0], dtype=complex),
    }
