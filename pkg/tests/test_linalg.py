import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp

from epkit.errors import CapacityError, InvalidArgumentError
from epkit.linalg import (MAX_KRON_ENTRIES, ToleranceConfig, as_cmatrix, eigen_decompose,
                          eigenvalues, fix_phase, identity, kron, kron_sum, numerical_rank,
                          random_conditioned, random_unitary, spectral_norm)
from epkit.models import toy_hamiltonian

from conftest import cmat


def test_kron_identities():
    np.testing.assert_array_equal(kron(identity(2), identity(2)), identity(4))


def test_kron_of_vectors_is_vector():
    out = kron(np.array([1, 0]), np.array([1, 0]))
    assert out.shape == (4,)
    np.testing.assert_array_equal(out, [1, 0, 0, 0])


def test_kron_of_jordan_blocks_has_single_corner_entry(jordan2):
    out = kron(jordan2, jordan2)
    expected = np.zeros((4, 4))
    expected[0, 3] = 1
    np.testing.assert_array_equal(out, expected)


def test_kron_block_rule(rng):
    a, b = cmat(rng, 2, 3), cmat(rng, 4, 2)
    out = kron(a, b)
    assert out.shape == (8, 6)
    for i in range(2):
        for j in range(3):
            np.testing.assert_allclose(out[4 * i:4 * i + 4, 2 * j:2 * j + 2], a[i, j] * b)


def test_kron_capacity():
    big = np.zeros((1 << 7, 1 << 7))
    assert big.size ** 2 > MAX_KRON_ENTRIES
    with pytest.raises(CapacityError):
        kron(big, big)


def test_kron_sum_of_jordan_pair(jordan2, composite4):
    expected = np.array([[0, 1, 1, 0], [0, 0, 0, 1], [0, 0, 0, 1], [0, 0, 0, 0]])
    np.testing.assert_array_equal(kron_sum(jordan2, jordan2), expected)
    np.testing.assert_array_equal(composite4, expected)


def test_kron_sum_of_zeros():
    np.testing.assert_array_equal(kron_sum(np.zeros((2, 2)), np.zeros((2, 2))), np.zeros((4, 4)))


def test_kron_sum_eigenvalues_of_diagonals():
    w = np.sort(eigenvalues(kron_sum(np.diag([1, 2]), np.diag([10, 20]))).real)
    np.testing.assert_allclose(w, [11, 12, 21, 22])


def test_kron_sum_rejects_non_square():
    with pytest.raises(InvalidArgumentError):
        kron_sum(np.zeros((2, 3)), np.eye(2))


def test_spectral_norm_examples(jordan2, composite4):
    assert spectral_norm(identity(3)) == pytest.approx(1.0)
    assert spectral_norm(jordan2) == pytest.approx(1.0)
    assert spectral_norm(composite4 @ composite4) == pytest.approx(2.0, abs=1e-14)


def test_numerical_rank_examples(composite4):
    assert numerical_rank(identity(4)) == 4
    assert numerical_rank(composite4) == 2
    assert numerical_rank(composite4 @ composite4) == 1
    assert numerical_rank(np.zeros((3, 3))) == 0


def test_eigen_decompose_examples(composite4):
    pairs = eigen_decompose(composite4)
    assert len(pairs) == 4
    assert all(abs(e) < 1e-12 for e, _ in pairs)
    for _, v in pairs:
        assert np.linalg.norm(v) == pytest.approx(1.0)
        k = np.argmax(np.abs(v))
        assert v[k].imag == 0 and v[k].real > 0
    w = np.sort([e.real for e, _ in eigen_decompose(toy_hamiltonian(0.04))])
    np.testing.assert_allclose(w, [-0.2, 0.2], atol=1e-14)
    w = np.sort([e.real for e, _ in eigen_decompose(np.diag([3, 3, 7]))])
    np.testing.assert_allclose(w, [3, 3, 7])


def test_fix_phase_zero_vector():
    with pytest.raises(InvalidArgumentError):
        fix_phase(np.zeros(3))


@pytest.mark.parametrize("bad", [np.zeros((0, 0)), np.array([[np.nan]]), np.zeros((2, 2, 2))])
def test_as_cmatrix_rejects(bad):
    with pytest.raises(InvalidArgumentError):
        as_cmatrix(bad)


@pytest.mark.parametrize("kwargs", [{"rank_rtol": 0.0}, {"rank_rtol": 1.0},
                                    {"cluster_atol": -1e-9}, {"nilpotency_rtol": 2.0}])
def test_tolerance_config_bounds(kwargs):
    with pytest.raises(InvalidArgumentError):
        ToleranceConfig(**kwargs)


def test_default_cluster_radius_scales_with_norm():
    tol = ToleranceConfig()
    assert tol.cluster_radius(0.5) == pytest.approx(1e-8)
    assert tol.cluster_radius(40.0) == pytest.approx(4e-7)
    assert ToleranceConfig(cluster_atol=1e-6).cluster_radius(40.0) == 1e-6


def test_random_conditioned_condition_number(rng):
    v = random_conditioned(6, 37.0, rng)
    assert np.linalg.cond(v) == pytest.approx(37.0, rel=1e-10)
    u = random_unitary(5, rng)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(5), atol=1e-13)


# -- properties -------------------------------------------------------------

complex_entries = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


def square(max_dim):
    return st.integers(1, max_dim).flatmap(
        lambda m: hnp.arrays(np.complex128, (m, m), elements=complex_entries))


def _matched(a, b):
    # greedy nearest matching of two eigenvalue lists
    b = list(b)
    err = 0.0
    for x in sorted(a, key=lambda z: (z.real, z.imag)):
        k = int(np.argmin([abs(x - y) for y in b]))
        err = max(err, abs(x - b.pop(k)))
    return err


@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(1, 5))
def test_kron_sum_spectrum_is_pairwise_sums(seed, ma, mb):
    rng = np.random.default_rng(seed)
    # a diagonalizable factor with a known spectrum and a well-conditioned basis
    v = random_conditioned(ma, 3.0, rng)
    wa = cmat(rng, ma, 1).ravel()
    a = v @ np.diag(wa) @ np.linalg.inv(v)
    b = cmat(rng, mb)
    wb = eigenvalues(b)
    sums = (wa[:, None] + wb[None, :]).ravel()
    assert _matched(eigenvalues(kron_sum(a, b)), sums) <= 1e-8 * max(1.0, np.abs(sums).max())


@given(square(5), square(5))
def test_kron_norm_is_multiplicative(a, b):
    lhs = spectral_norm(kron(a, b))
    assert abs(lhs - spectral_norm(a) * spectral_norm(b)) <= 1e-10 * max(1.0, lhs)


@given(square(6).flatmap(lambda a: st.tuples(st.just(a), hnp.arrays(
    np.complex128, a.shape, elements=complex_entries))))
def test_spectral_norm_submultiplicative(pair):
    a, b = pair
    assert spectral_norm(a @ b) <= spectral_norm(a) * spectral_norm(b) * (1 + 1e-12) + 1e-12


@given(st.integers(0, 2**32 - 1), st.integers(2, 7), st.data())
def test_numerical_rank_unitarily_invariant(seed, m, data):
    rng = np.random.default_rng(seed)
    r = data.draw(st.integers(0, m))
    a = cmat(rng, m, r) @ cmat(rng, r, m) if r else np.zeros((m, m), dtype=complex)
    u, w = random_unitary(m, rng), random_unitary(m, rng)
    assert numerical_rank(a) == r
    assert numerical_rank(u @ a @ w) == r
