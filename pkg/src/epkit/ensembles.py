"""Random test systems: similarity-transformed Jordan structures and perturbations.

Subsystems are ``V J V^{-1} + E`` with a single dominant Jordan block, optional
strictly smaller blocks, and ``V`` of controlled condition number, so that the
response strengths differ from 1 and the product formula is actually exercised.
"""
from __future__ import annotations

import math

import numpy as np

from .composite import SubsystemSpec
from .linalg import random_conditioned
from .models import jordan_matrix


def random_partition(total: int, largest: int, rng: np.random.Generator) -> list[int]:
    """Random block sizes summing to ``total``, each at most ``largest``."""
    sizes = []
    while total > 0:
        k = int(rng.integers(1, min(largest, total) + 1))
        sizes.append(k)
        total -= k
    return sizes


def random_jordan_subsystem(rng: np.random.Generator, order: int, dim: int | None = None,
                            cond_max: float = 10.0, eigenvalue=None,
                            label: str = "") -> SubsystemSpec:
    """Fully degenerate subsystem whose dominant EP has the given order.

    ``eigenvalue=None`` draws a random complex eigenvalue.
    """
    dim = order if dim is None else dim
    blocks = [order] + random_partition(dim - order, order - 1, rng) if dim > order else [order]
    if eigenvalue is None:
        eigenvalue = complex(rng.normal(0, 0.5), rng.normal(0, 0.5))
    cond = float(np.exp(rng.uniform(0.0, np.log(cond_max))))
    v = random_conditioned(dim, cond, rng)
    h = v @ jordan_matrix(blocks) @ np.linalg.inv(v) + eigenvalue * np.eye(dim)
    return SubsystemSpec(h, eigenvalue, label=label or f"J{blocks}")


def random_composite_parts(rng: np.random.Generator, max_parts: int = 3, orders=(2, 3, 4),
                           max_dim: int = 64, cond_max: float = 10.0,
                           max_extra: int = 2) -> list[SubsystemSpec]:
    """Two to ``max_parts`` random subsystems with composite dimension <= ``max_dim``."""
    while True:
        count = int(rng.integers(2, max_parts + 1))
        ords = [int(rng.choice(orders)) for _ in range(count)]
        dims = [n + int(rng.integers(0, max_extra + 1)) for n in ords]
        if math.prod(dims) <= max_dim:
            break
    return [random_jordan_subsystem(rng, n, d, cond_max=cond_max, label=f"S{i}")
            for i, (n, d) in enumerate(zip(ords, dims))]


def random_perturbation(m: int, rng: np.random.Generator, norm: float = 1.0) -> np.ndarray:
    """Standard complex Gaussian matrix rescaled to the given spectral norm."""
    z = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    return z * (norm / np.linalg.norm(z, 2))
