import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from epkit.errors import (CapacityError, IllSeparatedSpectrumError, InconsistentRankError,
                          NotNilpotentError, SingularEvaluationError)
from epkit.ensembles import random_partition
from epkit.linalg import ToleranceConfig, random_conditioned, spectral_norm
from epkit.models import jordan_block, jordan_matrix, toy_composite, toy_hamiltonian
from epkit.spectral import (_blocks_from_ranks, analyze, cluster_spectrum, ep_signature,
                            greens_function, jordan_block_sizes, nilpotency_index,
                            spectral_expansion, traceless_part)

from conftest import cmat


def sympy_blocks(h_int):
    """Exact Jordan block sizes per eigenvalue of an integer matrix (oracle)."""
    _, j = sympy.Matrix(h_int).jordan_form()
    sizes, k, m = [], 0, j.shape[0]
    while k < m:
        size = 1
        while k + size < m and j[k + size - 1, k + size] == 1:
            size += 1
        sizes.append((j[k, k], size))
        k += size
    return sizes


# -- clustering -------------------------------------------------------------

def test_cluster_composite_is_one_cluster(composite4):
    (c,) = cluster_spectrum(composite4)
    assert c.algebraic_multiplicity == 4 and abs(c.eigenvalue) < 1e-15
    assert c.member_indices == (0, 1, 2, 3)


def test_cluster_distinct_diagonal():
    clusters = cluster_spectrum(np.diag([3.0, 1.0, 2.0]))
    assert [c.eigenvalue for c in clusters] == [1, 2, 3]
    assert all(c.algebraic_multiplicity == 1 for c in clusters)


def test_cluster_perturbed_composite():
    eps = 1e-4
    clusters = cluster_spectrum(toy_composite(eps))
    assert [c.algebraic_multiplicity for c in clusters] == [1, 2, 1]
    np.testing.assert_allclose([c.eigenvalue for c in clusters], [-0.02, 0, 0.02], atol=1e-12)


def test_cluster_keeps_close_semisimple_values_apart():
    # distinct eigenvalues 1e-6 apart are not an EP: the restricted operator is not nilpotent
    assert len(cluster_spectrum(np.diag([0.0, 1e-6, 1.0]))) == 3
    # within the cluster radius they merge
    assert [c.algebraic_multiplicity for c in cluster_spectrum(np.diag([0.0, 1e-9, 1.0]))] == [2, 1]


def test_cluster_user_radius():
    tol = ToleranceConfig(cluster_atol=1e-3)
    assert [c.algebraic_multiplicity for c in cluster_spectrum(np.diag([0.0, 1e-4, 1.0]), tol)] == [2, 1]


@pytest.mark.parametrize("order", [2, 3, 4, 6, 8])
def test_scattered_defective_eigenvalue_is_one_cluster(order, rng):
    # rounding scatters an order-k EP by roughly eps^(1/k), far beyond the radius
    for _ in range(10):
        v = random_conditioned(order + 2, 20.0, rng)
        j = np.zeros((order + 2, order + 2), dtype=complex)
        j[:order, :order] = jordan_block(order, 0.3)
        j[order, order], j[order + 1, order + 1] = 3.0, -2.0 + 1j
        clusters = cluster_spectrum(v @ j @ np.linalg.inv(v))
        assert sorted(c.algebraic_multiplicity for c in clusters) == [1, 1, order]


def test_cluster_well_separated_from_strongly_nonnormal_ep(rng):
    # a simple eigenvalue at distance 3 from an order-7 EP with large off-diagonal couplings
    j = np.zeros((9, 9), dtype=complex)
    j[:7, :7] = 4.0 * jordan_block(7)
    j[7, 7], j[8, 8] = 3.0, -3.0j
    v = random_conditioned(9, 3.0, rng)
    clusters = cluster_spectrum(v @ j @ np.linalg.inv(v))
    assert sorted(c.algebraic_multiplicity for c in clusters) == [1, 1, 7]


# -- nilpotent structure ----------------------------------------------------

def test_traceless_part(jordan2):
    np.testing.assert_array_equal(traceless_part(jordan2, 0), jordan2)
    np.testing.assert_allclose(traceless_part(jordan2 + 5 * np.eye(2), 5), jordan2)


def test_nilpotency_index_examples(composite4):
    assert nilpotency_index(composite4) == 3
    assert nilpotency_index(np.zeros((3, 3))) == 1
    assert nilpotency_index(jordan_block(4)) == 4


def test_nilpotency_index_rejects_non_nilpotent():
    with pytest.raises(NotNilpotentError):
        nilpotency_index(np.diag([1.0, 2.0]))


def test_jordan_block_sizes_examples(composite4):
    assert jordan_block_sizes(composite4) == (3, 1)
    assert jordan_block_sizes(np.zeros((2, 2))) == (1, 1)
    assert jordan_block_sizes(toy_composite(0.0, parts=3)) == (4, 2, 2)


def test_rank_sequence_must_be_weyr():
    assert _blocks_from_ranks([4, 2, 1, 0]) == (3, 1)
    with pytest.raises(InconsistentRankError):
        _blocks_from_ranks([4, 1, 1, 0])   # a block count that grows with size


def test_ep_signature_examples(composite4, jordan2):
    (c,) = cluster_spectrum(composite4)
    s = ep_signature(composite4, c)
    assert (s.algebraic_multiplicity, s.geometric_multiplicity, s.order) == (4, 2, 3)
    assert s.jordan_block_sizes == (3, 1)
    assert s.xi == pytest.approx(2.0, abs=1e-12)
    s = analyze(jordan2)[0]
    assert (s.algebraic_multiplicity, s.geometric_multiplicity, s.order, s.xi) == (2, 1, 2, 1.0)
    s = analyze(np.eye(3))[0]
    assert (s.eigenvalue, s.algebraic_multiplicity, s.geometric_multiplicity, s.order, s.xi) == (1, 3, 3, 1, 0.0)
    assert not s.is_ep and s.jordan_block_sizes == (1, 1, 1)


def test_tied_maximal_blocks_are_reported():
    # two blocks of the maximal size: xi lumps them, the multiset shows the tie
    s = analyze(jordan_matrix([2, 2]))[0]
    assert s.jordan_block_sizes == (2, 2) and s.order == 2
    assert s.xi == pytest.approx(1.0)


@pytest.mark.parametrize("h_int", [
    [[2, 1, 0, 0], [0, 2, 0, 0], [0, 0, 2, 1], [0, 0, 0, 2]],
    [[1, 1, 0, 0, 0], [0, 1, 1, 0, 0], [0, 0, 1, 0, 0], [0, 0, 0, 4, 1], [0, 0, 0, 0, 4]],
    [[0, 1, 1, 0], [0, 0, 0, 1], [0, 0, 0, 1], [0, 0, 0, 0]],
])
def test_block_sizes_match_exact_jordan_form_under_integer_similarity(h_int):
    # unimodular integer similarity keeps everything exact for the sympy oracle
    v = np.eye(len(h_int), dtype=int) + np.triu(np.ones((len(h_int),) * 2, dtype=int), 1)
    v[-1, 0] = 1
    vi = np.array(sympy.Matrix(v).inv(), dtype=int)
    h = v @ np.array(h_int) @ vi
    oracle = {}
    for e, size in sympy_blocks(h):
        oracle.setdefault(complex(e), []).append(size)
    for sig in analyze(h):
        e = min(oracle, key=lambda z: abs(z - sig.eigenvalue))
        assert sig.jordan_block_sizes == tuple(sorted(oracle[e], reverse=True))


@given(st.integers(0, 2**32 - 1), st.integers(2, 8), st.data())
def test_signature_recovers_similarity_transformed_jordan_structure(seed, dim, data):
    rng = np.random.default_rng(seed)
    extra = data.draw(st.integers(0, min(2, dim - 1)))
    k = dim - extra
    blocks = tuple(sorted(random_partition(k, k, rng), reverse=True))
    j = np.zeros((dim, dim), dtype=complex)
    j[:k, :k] = jordan_matrix(blocks)
    for i in range(extra):
        j[k + i, k + i] = 2.0 + 1.5 * i + 1j
    e = complex(rng.normal(), rng.normal())
    v = random_conditioned(dim, float(np.exp(rng.uniform(0, np.log(99)))), rng)
    h = v @ (j + e * np.eye(dim)) @ np.linalg.inv(v)
    sigs = analyze(h)
    sig = min(sigs, key=lambda s: abs(s.eigenvalue - e))
    assert sig.jordan_block_sizes == blocks
    for s in sigs:
        assert sum(s.jordan_block_sizes) == s.algebraic_multiplicity
        assert max(s.jordan_block_sizes) == s.order
        assert len(s.jordan_block_sizes) == s.geometric_multiplicity
        if s.order >= 2:
            assert s.geometric_multiplicity <= s.algebraic_multiplicity - s.order + 1
            assert s.xi == pytest.approx(spectral_norm(s.nilpotent_power))
        else:
            assert s.xi == 0.0


# -- Kato expansion ---------------------------------------------------------

def test_expansion_fully_degenerate(composite4):
    ex = spectral_expansion(composite4)
    (t,) = ex.terms
    np.testing.assert_array_equal(t.projector, np.eye(4))
    np.testing.assert_allclose(t.nilpotent, composite4)
    assert t.order == 3


def test_expansion_diagonal():
    ex = spectral_expansion(np.diag([1.0, 2.0]))
    p1, p2 = (t.projector for t in ex.terms)
    np.testing.assert_allclose(p1, np.diag([1, 0]), atol=1e-15)
    np.testing.assert_allclose(p2, np.diag([0, 1]), atol=1e-15)
    assert all(np.abs(t.nilpotent).max() < 1e-15 for t in ex.terms)


def test_expansion_of_perturbed_composite():
    h = toy_composite(0.01)
    ex = spectral_expansion(h)
    assert [t.algebraic_multiplicity for t in ex.terms] == [1, 2, 1]
    assert np.linalg.norm(ex.reconstruct() - h, 2) < 1e-9


def _check_kato_identities(h, ex):
    nh = spectral_norm(h)
    assert spectral_norm(ex.reconstruct() - h) <= 1e-8 * nh
    for a, ta in enumerate(ex.terms):
        assert spectral_norm(ta.projector @ ta.nilpotent - ta.nilpotent) <= 1e-8 * max(1, nh)
        assert spectral_norm(ta.nilpotent @ ta.projector - ta.nilpotent) <= 1e-8 * max(1, nh)
        for b, tb in enumerate(ex.terms):
            pp = ta.projector @ tb.projector
            target = ta.projector if a == b else 0 * pp
            assert spectral_norm(pp - target) <= 1e-8 * max(1, spectral_norm(ta.projector))
            if a != b:
                assert spectral_norm(ta.nilpotent @ tb.nilpotent) <= 1e-8 * max(1, nh ** 2)


def test_expansion_identities_mixed_structure(rng):
    j = np.zeros((10, 10), dtype=complex)
    j[:8, :8] = jordan_matrix([4, 2, 2], 0.5)
    j[8, 8], j[9, 9] = -1.0, 2.0j
    v = random_conditioned(10, 5.0, rng)
    h = v @ j @ np.linalg.inv(v)
    ex = spectral_expansion(h)
    assert sorted((t.algebraic_multiplicity, t.order) for t in ex.terms) == [(1, 1), (1, 1), (8, 4)]
    _check_kato_identities(h, ex)


def test_greens_function_examples(composite4):
    ex = spectral_expansion(composite4)
    np.testing.assert_allclose(greens_function(ex, 1.0), np.linalg.inv(np.eye(4) - composite4),
                               atol=1e-9)
    ex1 = spectral_expansion(np.array([[2.0]]))
    assert greens_function(ex1, 3.0)[0, 0] == pytest.approx(1.0)


def test_greens_function_dominated_by_top_power_near_ep(composite4):
    delta = 1e-3
    g = greens_function(spectral_expansion(composite4), delta)
    top = composite4 @ composite4 / delta ** 3
    assert spectral_norm(g - top) / spectral_norm(top) < 5e-3


def test_greens_function_pole():
    ex = spectral_expansion(np.diag([1.0, 2.0]))
    with pytest.raises(SingularEvaluationError):
        greens_function(ex, 1.0)


def test_expansion_capacity_and_separation():
    with pytest.raises(CapacityError):
        spectral_expansion(np.eye(65))
    tol = ToleranceConfig(cluster_atol=1e-3)
    with pytest.raises(IllSeparatedSpectrumError):
        spectral_expansion(np.diag([0.0, 0.005]), tol)


def probe_energies(ex, rng, count=20):
    """Random energies 0.5 to 2 away from a random pole, and at least 0.5 from every pole."""
    poles = np.array([t.eigenvalue for t in ex.terms])
    out = []
    while len(out) < count:
        z = poles[rng.integers(poles.size)] + rng.uniform(0.5, 2.0) * np.exp(2j * np.pi * rng.uniform())
        if np.min(np.abs(z - poles)) >= 0.5:
            out.append(z)
    return out


@given(st.integers(0, 2**32 - 1), st.integers(2, 8))
def test_greens_function_matches_resolvent(seed, dim):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, dim + 1))
    j = np.diag(rng.normal(size=dim) * 2 + 2j * rng.normal(size=dim)).astype(complex)
    j[:k, :k] = jordan_block(k, j[0, 0])
    v = random_conditioned(dim, 10.0, rng)
    h = v @ j @ np.linalg.inv(v)
    try:
        ex = spectral_expansion(h)
    except IllSeparatedSpectrumError:
        return   # random eigenvalues landed too close together; nothing to compare
    _check_kato_identities(h, ex)
    for z in probe_energies(ex, rng):
        direct = np.linalg.inv(z * np.eye(dim) - h)
        assert spectral_norm(greens_function(ex, z) - direct) <= 1e-8 * spectral_norm(direct)
