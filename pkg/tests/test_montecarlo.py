import math

import numpy as np
import pytest

from blockenc.circuit import ry
from blockenc.montecarlo import (ANGLE_SCALE, FitResult, InsufficientSamples, PerturbationSpec,
                                 controlled, draw_specs, fit_cost, perturb_rotation,
                                 perturb_stack, qrom_correlation_note, rotation_deviation,
                                 simulate_average, trials_csv)

GRID3 = (1e-4, 1e-5, 1e-7)


def test_zero_eps_is_exact(rng):
    np.testing.assert_allclose(perturb_rotation(0.7, 0.0, rng), ry(0.7), atol=1e-15)


def test_spec_validation():
    with pytest.raises(ValueError):
        PerturbationSpec(1e-3, 1.5, (1, 1), 0.0)
    s = PerturbationSpec(1e-3, 0.3, (1, -1), 0.2)
    u = s.matrix()
    np.testing.assert_allclose(u.conj().T @ u, np.eye(2), atol=1e-14)


def test_deviation_grows_linearly():
    means = []
    for eps in (1e-2, 1e-3, 1e-4):
        rng = np.random.default_rng(5)
        thetas = rng.uniform(-math.pi, math.pi, 1000)
        us = perturb_stack(thetas, eps, rng)
        means.append(rotation_deviation(us, thetas).mean())
    assert means[0] / means[1] == pytest.approx(10, rel=0.05)
    assert means[1] / means[2] == pytest.approx(10, rel=0.05)


def test_deviation_scale_convention(rng):
    # worst-case deviation is eps (full-angle convention)
    thetas = rng.uniform(-3, 3, 2000)
    dev = rotation_deviation(perturb_stack(thetas, 1e-6, rng), thetas)
    assert dev.max() <= 1e-6 * (1 + 1e-6)
    assert dev.max() > 0.95e-6
    assert ANGLE_SCALE == 2.0


def test_draw_specs_reproduce_stack():
    thetas = np.array([0.1, 0.5])
    specs = draw_specs(thetas, 1e-3, np.random.default_rng(3))
    stack = perturb_stack(thetas, 1e-3, np.random.default_rng(3))
    np.testing.assert_allclose(np.stack([s.matrix() for s in specs]), stack, atol=1e-15)


def test_controlled_layout():
    u = ry(0.3)
    c = controlled(u)
    np.testing.assert_allclose(c[:2, :2], np.eye(2))
    np.testing.assert_allclose(c[2:, 2:], u)


def test_fit_recovers_line():
    from blockenc.montecarlo import TrialRecord
    recs = [TrialRecord("x", e, e, 3.0 * math.log2(1 / e) + 7.0, e, e)
            for e in np.logspace(-3, -9, 25)]
    a, b, resid = fit_cost(recs)
    assert (a, b) == (pytest.approx(3.0), pytest.approx(7.0))
    assert resid < 1e-9


def test_sample_guards():
    with pytest.raises(InsufficientSamples):
        FitResult("x", 1, 1, 0, 10)
    with pytest.raises(InsufficientSamples):
        simulate_average("unary", GRID3, trials=2)
    with pytest.raises(ValueError):
        simulate_average("unary", (1e-4, 1e-5), trials=20)
    with pytest.raises(ValueError):
        simulate_average("bogus", GRID3, trials=20)


@pytest.mark.parametrize("method", ["unary", "qrom", "gate_opt", "sub_opt"])
def test_small_run_sound_and_deterministic(method):
    a = simulate_average(method, GRID3, trials=20, rng_seed=11)
    b = simulate_average(method, GRID3, trials=20, rng_seed=11)
    assert (a.a, a.b, a.residual) == (b.a, b.b, b.residual)
    assert a.samples == 60 and a.sound()
    for r in a.records:
        assert 0 < r.error <= r.bound
        # measured rotation deviations never exceed the budget
        assert r.deviation_bound <= r.bound * (1 + 1e-6)


def test_seed_changes_result():
    a = simulate_average("unary", GRID3, trials=20, rng_seed=1)
    b = simulate_average("unary", GRID3, trials=20, rng_seed=2)
    assert a.b != b.b


def test_sfable_guard():
    with pytest.raises(ValueError):
        simulate_average("sfable", (1e-2, 1e-3, 1e-5), trials=20)


def test_trials_csv_and_note():
    u = simulate_average("unary", GRID3, trials=20)
    q = simulate_average("qrom", GRID3, trials=20)
    text = trials_csv(u)
    assert text.splitlines()[0] == "method,eps_budgeted,error_achieved,t_charged"
    assert len(text.splitlines()) == 61
    note = qrom_correlation_note(u, q, 22367.17, 9061.84)
    assert note.unary_gap > 0 and note.qrom_gap > 0 and note.qrom_smaller
