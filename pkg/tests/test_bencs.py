import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blockenc.bencs import (BlockEncoding, BoundInapplicable, LcuSpec, be_lcu, be_sequence,
                            be_tensor, combine_error_bb1, combine_error_bb2,
                            identity_encoding, lcu_brute_force, lemma_trials,
                            normalized_error_bound)
from blockenc.linalg import DimensionError, random_unitary, spectral_norm


def _enc(name, m, **kw):
    m = np.asarray(m, dtype=complex)
    return BlockEncoding(name, m, m.copy(), **kw)


def test_alpha_is_block_norm(rng):
    m = rng.normal(size=(4, 4))
    e = _enc("m", m, rows=np.array([0, 1]), cols=np.array([2]))
    assert e.alpha == pytest.approx(np.linalg.norm(m[[0, 1]][:, [2]], 2))
    assert e.block.shape == (2, 1)


def test_shape_mismatch():
    with pytest.raises(DimensionError):
        BlockEncoding("x", np.eye(2), np.eye(3))


def test_tensor_and_sequence(rng):
    a, b = _enc("a", rng.normal(size=(2, 2))), _enc("b", rng.normal(size=(2, 2)))
    t = be_tensor(a, b)
    np.testing.assert_allclose(t.encoded, np.kron(a.encoded, b.encoded))
    assert t.nominal_alpha == pytest.approx(a.alpha * b.alpha)
    assert t.alpha <= t.nominal_alpha * (1 + 1e-12)
    s = be_sequence(a, b)
    np.testing.assert_allclose(s.encoded, a.encoded @ b.encoded)
    assert s.alpha <= s.nominal_alpha * (1 + 1e-12)
    with pytest.raises(DimensionError):
        be_sequence(a, _enc("c", np.eye(3)))


def test_adjoint_swaps_support(rng):
    m = rng.normal(size=(3, 3))
    e = _enc("m", m, rows=np.array([0]), cols=np.array([1, 2])).adjoint()
    np.testing.assert_allclose(e.block, m[[0]][:, [1, 2]].T)


def test_identity_encoding():
    e = identity_encoding(4)
    assert e.alpha == 1.0 and e.normalized_error() == 0.0


@given(st.integers(1, 3), st.integers(0, 2 ** 31 - 1))
@settings(max_examples=60, deadline=None)
def test_lcu_matches_brute_force(n_anc, seed):
    rng = np.random.default_rng(seed)
    dim = 2 ** n_anc
    left, right = random_unitary(dim, rng), random_unitary(dim, rng)
    sels = {k: _enc(f"u{k}", random_unitary(2, rng)) for k in range(dim) if rng.uniform() < 0.7}
    if not sels:
        sels = {0: _enc("u", random_unitary(2, rng))}
    spec = LcuSpec(left, right, sels)
    np.testing.assert_allclose(be_lcu(spec).encoded, lcu_brute_force(spec), atol=1e-12)


def test_lcu_rejects_non_unitary_prep():
    with pytest.raises(ValueError):
        LcuSpec(np.ones((2, 2)), np.eye(2), {0: identity_encoding(2)})


# -- error lemmas -----------------------------------------------------------

def test_normalized_bound_examples():
    assert normalized_error_bound(0.0, 3.0) == 0.0
    # unary: 2 * 0.3867 / 0.0905
    assert normalized_error_bound(0.3867, 0.0905) == pytest.approx(8.546, abs=1e-3)
    with pytest.raises(BoundInapplicable):
        normalized_error_bound(0.5, 1.0, d=3.0)   # needs eps < 1/3
    with pytest.raises(BoundInapplicable):
        normalized_error_bound(0.1, 1.0, d=1.5)
    with pytest.raises(BoundInapplicable):
        normalized_error_bound(0.1, 0.0)


@given(st.integers(0, 2 ** 31 - 1), st.floats(1e-9, 0.99))
@settings(max_examples=300, deadline=None)
def test_normalized_bound_is_sound(seed, frac):
    # d = 2 holds without any second-order slack
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    e = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    na = spectral_norm(a)
    eps = frac * na
    at = a + e * (eps / spectral_norm(e))
    actual = spectral_norm(a / na - at / spectral_norm(at))
    assert actual <= normalized_error_bound(eps, na) * (1 + 1e-12)


def test_bb_examples():
    assert combine_error_bb1(0, 0, 1, 2, 3) == (0.0, 0.0)
    assert combine_error_bb2(0, 0, 0, 1, 1) == 0.0
    with pytest.raises(ValueError):
        combine_error_bb1(-1, 0, 1, 1, 1)


def test_lemma_soundness_thousand_instances():
    for lemma, insts in lemma_trials(np.random.default_rng(7), 1000).items():
        assert len(insts) == 1000
        bad = [i for i in insts if not i.holds]
        assert not bad, f"{lemma}: {len(bad)} violations"
