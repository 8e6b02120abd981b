import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blockenc.circuit import (Circuit, CircuitBuilder, Gate, apply, circuit_from_text,
                              circuit_unitary, eliminate_toffoli_pairs, extract_block,
                              gate_dense, rotation_count, ry, ry_angle, toffoli_pair_count)
from blockenc.linalg import DimensionError


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate("Q", (0,))
    with pytest.raises(ValueError):
        Gate("CNOT", (0,), ((0, 1),))
    with pytest.raises(ValueError):
        Gate("Ry", (0,))
    with pytest.raises(ValueError):
        Gate("Toffoli", (2,), ((0, 1),))
    with pytest.raises(ValueError):
        Circuit(2, (Gate("X", (2,)),))


def test_cnot_semantics():
    c = Circuit(2, (Gate("CNOT", (1,), ((0, 1),)),))
    u = circuit_unitary(c)
    # qubit 0 is the least significant bit
    assert u[3, 1] == 1 and u[1, 3] == 1 and u[0, 0] == 1 and u[2, 2] == 1


def test_negative_control():
    c = Circuit(2, (Gate("MCX", (1,), ((0, 0),)),))
    u = circuit_unitary(c)
    assert u[2, 0] == 1 and u[1, 1] == 1


@given(st.lists(st.sampled_from(["H", "X", "Ry", "CNOT", "CRy", "SWAP"]), max_size=8),
       st.floats(-3, 3))
@settings(max_examples=50, deadline=None)
def test_inverse_undoes_circuit(kinds, angle):
    b = CircuitBuilder(3)
    for k in kinds:
        if k == "CNOT":
            b.add(k, 2, ((0, 1),))
        elif k == "CRy":
            b.add(k, 1, ((2, 1),), angle=angle)
        elif k == "SWAP":
            b.add(k, (0, 2))
        elif k == "Ry":
            b.add(k, 1, angle=angle)
        else:
            b.add(k, 0)
    c = b.build()
    u = circuit_unitary(c + c.inverse())
    np.testing.assert_allclose(u, np.eye(8), atol=1e-12)


def test_apply_matches_dense(rng):
    c = Circuit(3, (Gate("H", (0,)), Gate("Toffoli", (2,), ((0, 1), (1, 1))),
                    Gate("Ry", (1,), angle=0.3)))
    psi = rng.normal(size=8) + 0j
    dense = np.eye(8)
    for g in c.gates:
        dense = gate_dense(g, 3) @ dense
    np.testing.assert_allclose(apply(c, psi), dense @ psi, atol=1e-12)


def test_ry_angle_round_trip():
    for t in (-2.0, -0.1, 0.0, 0.7, 3.0):
        assert ry_angle(ry(t)) == pytest.approx(t)


def test_extract_block_of_single_rotation():
    # <0|Ry(t)|0> = cos(t/2) on the data qubit subspace
    c = Circuit(2, (Gate("CRy", (1,), ((0, 1),), angle=1.0),))
    eb = extract_block(c, 1)
    np.testing.assert_allclose(eb.raw, np.diag([1.0, np.cos(0.5)]), atol=1e-14)
    assert eb.persistent == 1 and eb.clean == 0


def test_extract_block_counts_clean_ancilla():
    c = Circuit(2, (Gate("X", (1,)), Gate("X", (1,))))
    assert extract_block(c, 1).clean == 1
    with pytest.raises(DimensionError):
        extract_block(c, 3)


def test_toffoli_pair_sharing():
    assert eliminate_toffoli_pairs("0000", "0001") == 3
    assert eliminate_toffoli_pairs("0000", "1000") == 1
    g1 = Gate("MCX", (5,), tuple((q, 0) for q in range(4)))
    g2 = Gate("MCX", (5,), ((0, 1), (1, 0), (2, 0), (3, 0)))
    assert toffoli_pair_count([g1]) == 3
    assert toffoli_pair_count([g1, g1]) == 3
    assert toffoli_pair_count([g1, g2]) == 3 + (3 - 3)


def test_rotation_count():
    c = Circuit(2, (Gate("Ry", (0,), angle=1.0), Gate("X", (1,)),
                    Gate("U", (1,), matrix=np.eye(2))))
    assert rotation_count(c) == 2


def test_text_round_trip():
    c = Circuit(4, (Gate("MCRy", (3,), ((0, 1), (1, 0)), angle=0.123456789),
                    Gate("U", (2,), matrix=ry(0.4) * 1j), Gate("SWAP", (0, 1))))
    back = circuit_from_text(c.to_text(), 4)
    np.testing.assert_allclose(circuit_unitary(back), circuit_unitary(c), atol=1e-15)


def test_controlled_adds_controls():
    c = Circuit(2, (Gate("X", (0,)),)).controlled([(2, 1)])
    assert c.width == 3 and c.gates[0].kind == "MCX"
