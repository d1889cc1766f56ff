"""Exceptional points of non-Hermitian matrices and of their non-interacting composites.

The numerical core: EP order, Jordan structure and response strength of an
eigenvalue cluster; closed-form predictions for Kronecker-sum composites;
eigenvalue splitting under perturbation; and the exact truncated propagator
used for the entanglement dynamics.
"""
from .composite import (CompositePrediction, SubsystemSpec, VerificationReport, compose, predict,
                        verify_composite)
from .dynamics import (EvolutionTrace, PropagatorPolicy, asymptotic_order_probe, bell_traces,
                       concurrence, evolve, kron_factorization_check, propagator, recovery_period)
from .errors import (AssumptionViolation, DegeneracyError, EpkitError, InvalidArgumentError,
                     NumericalFailure)
from .kernels import BACKEND
from .linalg import DEFAULT_TOL, ToleranceConfig, kron, kron_sum
from .perturbation import PerturbationReport, PerturbationSpec, fit_exponent, perturb_and_split
from .spectral import (EPSignature, SpectralExpansion, analyze, cluster_spectrum, ep_signature,
                       greens_function, spectral_expansion)

__version__ = "0.1.0"
