import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from blockenc.linalg import (DimensionError, fwht, gray_code, gray_permutation,
                             hadamard_matrix, normalized_distance, random_unitary,
                             spectral_norm, sub_block, tensor)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def small_matrix(rows=st.integers(1, 6), cols=st.integers(1, 6)):
    return st.tuples(rows, cols).flatmap(lambda s: arrays(np.float64, s, elements=finite))


def test_spectral_norm_matches_numpy(rng):
    m = rng.normal(size=(7, 5))
    assert spectral_norm(m) == pytest.approx(np.linalg.norm(m, 2), rel=1e-12)


def test_power_iteration_branch(rng):
    m = rng.normal(size=(300, 300))
    assert spectral_norm(m) == pytest.approx(np.linalg.norm(m, 2), rel=1e-8)


def test_spectral_norm_rejects_bad_input():
    with pytest.raises(DimensionError):
        spectral_norm(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        spectral_norm(np.array([[np.nan, 1.0]]))


@given(small_matrix(), st.data())
@settings(max_examples=200, deadline=None)
def test_sub_block_norm_never_exceeds_full(m, data):
    r0 = data.draw(st.integers(0, m.shape[0] - 1))
    r1 = data.draw(st.integers(r0 + 1, m.shape[0]))
    c0 = data.draw(st.integers(0, m.shape[1] - 1))
    c1 = data.draw(st.integers(c0 + 1, m.shape[1]))
    assert spectral_norm(sub_block(m, (r0, r1), (c0, c1))) <= spectral_norm(m) * (1 + 1e-12) + 1e-12


def test_sub_block_bounds():
    with pytest.raises(DimensionError):
        sub_block(np.eye(3), (0, 4), (0, 1))


@given(small_matrix(st.integers(1, 3), st.integers(1, 3)),
       small_matrix(st.integers(1, 3), st.integers(1, 3)))
@settings(max_examples=100, deadline=None)
def test_tensor_norm_is_multiplicative(a, b):
    assert spectral_norm(tensor(a, b)) == pytest.approx(spectral_norm(a) * spectral_norm(b),
                                                        rel=1e-9, abs=1e-9)


def test_tensor_needs_factors():
    with pytest.raises(DimensionError):
        tensor()


@given(st.integers(0, 7).flatmap(lambda n: arrays(np.float64, 2 ** n, elements=finite)))
@settings(max_examples=100, deadline=None)
def test_fwht_matches_dense_and_is_involution(v):
    n = v.size.bit_length() - 1
    np.testing.assert_allclose(fwht(v), hadamard_matrix(n) @ v, atol=1e-9)
    np.testing.assert_allclose(fwht(fwht(v)), v, atol=1e-9)


def test_fwht_rejects_non_power_of_two():
    with pytest.raises(DimensionError):
        fwht(np.ones(6))


def test_gray_code_adjacent_words_differ_in_one_bit():
    g = gray_code(np.arange(64))
    assert sorted(g) == list(range(64))
    diffs = g[1:] ^ g[:-1]
    assert all(d & (d - 1) == 0 for d in diffs)


@given(st.integers(0, 8))
def test_gray_permutation_round_trip(n):
    v = np.arange(2 ** n) * 1.5
    np.testing.assert_array_equal(gray_permutation(gray_permutation(v), inverse=True), v)


def test_random_unitary(rng):
    u = random_unitary(5, rng)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(5), atol=1e-12)


def test_normalized_distance_is_scale_free(rng):
    a = rng.normal(size=(4, 4))
    assert normalized_distance(a, 3.7 * a) == pytest.approx(0.0, abs=1e-14)
