import math

import numpy as np
import pytest

from blockenc.f1 import DIM
from blockenc.linalg import fwht, gray_permutation
from blockenc.unstructured import (build_qrom, build_schedule, build_sfable,
                                   build_unary_iteration, fable_block, nonzero_entries,
                                   oracle_block, profile_csv, qrom_address_oracle,
                                   qrom_index, qrom_value_oracle, retained_rotations,
                                   sfable_angles, sfable_block, sfable_magnitude_profile)
from blockenc.circuit import toffoli_pair_count


@pytest.fixture(scope="module")
def unary(bundle):
    return build_unary_iteration(bundle)


@pytest.fixture(scope="module")
def angles(bundle):
    return sfable_angles(bundle.f1)


def test_traversal_orders(bundle):
    row = nonzero_entries(bundle.f1, "row")
    col = nonzero_entries(bundle.f1, "col")
    assert len(row) == len(col) == 722
    assert row[0][:2] < row[1][:2]
    assert sorted(row) == sorted(col)


def test_schedule_counts(bundle):
    s = build_schedule(bundle.f1)
    assert s.toffoli_pairs == 1085
    assert 11 * 722 - sum(e.eliminated for e in s.entries) == 1085
    assert s.rotations == 648 and s.flips == 74
    # column-major keeps the 64i+j bitstrings, which are then out of order
    assert build_schedule(bundle.f1, "col").toffoli_pairs == 5300


def test_schedule_csv(bundle):
    text = build_schedule(bundle.f1).to_csv()
    lines = text.splitlines()
    assert lines[0] == "bitstring,payload,pairs_eliminated"
    assert len(lines) == 723
    assert len(lines[1].split(",")[0]) == 12


def test_unary_circuit_block(unary, bundle):
    enc = unary.encoding
    assert enc.alpha == pytest.approx(0.0905, abs=2e-4)
    assert enc.normalized_error() <= 1e-10
    assert toffoli_pair_count(unary.circuit) == 1085
    assert enc.ancilla == (11, 7)


def test_unary_cost(unary):
    c = unary.encoding.cost
    assert c.slope == pytest.approx(1490.4)
    assert c.constant == pytest.approx(22368, abs=5)
    assert unary.encoding.meta["error_factor"] == pytest.approx(8.55, abs=0.01)


def test_oracle_block_matches_circuit(unary, bundle):
    blk = oracle_block(bundle.f1)
    np.testing.assert_allclose(blk, unary.encoding.encoded, atol=1e-14)


def test_qrom_structure(bundle):
    u, vals = qrom_index(bundle.f1)
    assert vals.size == 13 and u.max() == 13
    assert np.all((u == 0) == (bundle.f1 == 0))
    value = qrom_value_oracle(bundle.f1)
    assert sum(g.kind == "MCRy" for g in value) == 12
    assert 4 * 2 * toffoli_pair_count(qrom_address_oracle(bundle.f1)) == 8680


def test_qrom_cost_without_simulation(bundle):
    q = build_qrom(bundle, simulate=False)
    assert q.cost.slope == pytest.approx(27.6)
    assert q.cost.constant == pytest.approx(9062, abs=5)
    assert q.cost.evaluate(1e-10) == pytest.approx(9979, abs=1)


def test_retained_rotations():
    assert retained_rotations(1e-2) == 628
    assert retained_rotations(5.5e-4) == 628
    assert retained_rotations(1e-8) == 4096
    assert retained_rotations(1e-5) == 4096      # envelope already saturates
    k = retained_rotations(1e-4)
    assert k == math.ceil((4 - 3) / 0.00039)
    with pytest.raises(ValueError):
        retained_rotations(0.0)


def test_angle_round_trip(angles):
    back = fwht(gray_permutation(angles.theta_hat * DIM))
    np.testing.assert_allclose(back, angles.theta, atol=1e-12)


def test_sfable_exact_block(angles, bundle):
    blk = sfable_block(angles.theta_hat)
    assert np.abs(blk - bundle.f1 / (DIM * angles.max_abs)).max() <= 1e-14
    assert np.linalg.norm(blk, 2) == pytest.approx(0.0903, abs=2e-4)


def test_truncation_error_shrinks(angles, bundle):
    target = bundle.f1 / (DIM * angles.max_abs)
    errs = []
    for k in (628, 2000, 4096):
        blk = sfable_block(angles.theta_hat, keep=angles.retained_mask(k))
        errs.append(np.linalg.norm(blk - target, 2))
    assert errs[0] > errs[1] > errs[2] and errs[2] < 1e-13


def test_fable_block_accepts_unitary_stack(angles):
    from blockenc.circuit import ry
    us = np.stack([ry(2 * t) for t in angles.theta_hat])
    np.testing.assert_allclose(fable_block(angles.theta_hat, unitaries=us),
                               fable_block(angles.theta_hat), atol=1e-14)


def test_magnitude_profile(angles):
    p = sfable_magnitude_profile(angles)
    assert 600 <= p.count_above <= 700
    assert p.envelope_ok
    assert np.sum(angles.sorted_mags) < 4096 * angles.sorted_mags[0]
    text = profile_csv(p)
    assert text.startswith("rank,magnitude\n1,")
    assert len(text.splitlines()) == 4097


def test_sfable_cost(bundle):
    enc = build_sfable(bundle).encoding
    pw = enc.meta["cost_piecewise"]
    assert pw.low[0] == pytest.approx(4096 * 1.15)
    assert pw.low[1] == pytest.approx(86999, abs=50)
    assert enc.meta["error_factor"] == pytest.approx(1418, abs=1)
    ka, kb, ra, rb = pw.high
    assert ka == pytest.approx(771.8, abs=0.2) and ra == 1.15
    assert rb == pytest.approx(21.24, abs=0.01)


@pytest.mark.slow
def test_sfable_full_circuit(bundle):
    enc = build_sfable(bundle, simulate=True).encoding
    assert enc.normalized_error() <= 1e-10
    assert enc.alpha == pytest.approx(0.0903, abs=2e-4)
