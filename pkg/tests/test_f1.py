import numpy as np
import pytest

from blockenc.f1 import (DIM, build_f1_algebraic, build_f1_elementwise, build_lattice,
                         f1_stats, grover6, hadamard_conjugate, unique_nonzero_values)


def test_dual_build_agrees(bundle):
    elem = build_f1_elementwise(build_lattice())
    assert np.abs(elem - bundle.f1).max() <= 1e-13


def test_statistics(bundle):
    st = f1_stats(bundle)
    assert st["nnz"] == 722
    assert st["unique"] == 14            # zero included
    assert st["unique_nonzero"] == 13
    assert st["count_rotations"] == 648
    assert st["count_maximal"] == 74
    assert st["norm"] == pytest.approx(5.790087, abs=1e-6)
    assert st["hadamard_max_abs"] == pytest.approx(1.001953, abs=1e-6)


def test_padding_rows_and_columns_vanish(bundle):
    pad = ~bundle.lattice.valid_mask
    assert pad.sum() == DIM - 27
    assert np.all(bundle.f1[pad] == 0) and np.all(bundle.f1[:, pad] == 0)


def test_lattice_vectors_are_unit_steps():
    lat = build_lattice()
    c = lat.c[lat.valid_mask]
    assert set(np.unique(c)) <= {-1, 0, 1}
    assert len({tuple(r) for r in c}) == 27


def test_grover_and_projector(bundle):
    np.testing.assert_allclose(grover6() @ grover6(), np.eye(DIM))
    np.testing.assert_array_equal(bundle.P @ bundle.P, bundle.P)


def test_matrices_are_frozen(bundle):
    with pytest.raises(ValueError):
        bundle.f1[0, 0] = 1.0


def test_hadamard_conjugate_is_involution(bundle):
    np.testing.assert_allclose(hadamard_conjugate(hadamard_conjugate(bundle.f1)), bundle.f1,
                               atol=1e-12)


def test_unique_values_sorted(bundle):
    v = unique_nonzero_values(bundle.f1)
    assert v.size == 13 and np.all(np.diff(v) > 0)
    assert v.max() == pytest.approx(1.0)


def test_rebuild_is_deterministic(bundle):
    np.testing.assert_array_equal(build_f1_algebraic().f1, bundle.f1)
