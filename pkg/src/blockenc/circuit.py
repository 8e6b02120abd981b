"""A small statevector simulator for checking block-encoding circuits.

Qubit ``k`` is bit ``k`` of the basis-state index (qubit 0 is the least
significant).  Data qubits are ``0 .. n_data-1``; everything above is
ancilla, and a block is read off with all ancilla in ``|0>``.

Multi-controlled gates are simulated directly, without a Toffoli
decomposition; Toffoli accounting lives in :func:`toffoli_pair_count`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .linalg import DimensionError, spectral_norm

MAX_WIDTH = 17

_H = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
_X = np.array([[0.0, 1.0], [1.0, 0.0]])
_Z = np.diag([1.0, -1.0])

KINDS = {"X", "Z", "H", "SWAP", "CNOT", "Toffoli", "MCX", "Ry", "Rz", "Rx",
         "CRy", "CH", "MCRy", "U"}
ROTATIONS = {"Ry", "Rz", "Rx", "CRy", "MCRy"}
_N_CONTROLS = {"CNOT": 1, "Toffoli": 2, "CRy": 1, "CH": 1}


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]])


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry_angle(m: np.ndarray) -> float:
    """Angle of a real rotation matrix given in ``[[c, -s], [s, c]]`` form."""
    return float(2.0 * np.arctan2(m[1, 0], m[0, 0]))


@dataclass(frozen=True, eq=False)
class Gate:
    kind: str
    targets: tuple[int, ...]
    controls: tuple[tuple[int, int], ...] = ()
    angle: float | None = None
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        tq = set(self.targets)
        cq = {q for q, _ in self.controls}
        if tq & cq:
            raise ValueError("targets and controls overlap")
        if len(tq) != len(self.targets) or len(cq) != len(self.controls):
            raise ValueError("repeated qubit index")
        if self.kind == "SWAP" and len(self.targets) != 2:
            raise ValueError("SWAP needs two targets")
        need = _N_CONTROLS.get(self.kind)
        if need is not None and len(self.controls) != need:
            raise ValueError(f"{self.kind} needs {need} controls")
        if self.kind in ROTATIONS and self.angle is None:
            raise ValueError(f"{self.kind} needs an angle")
        if self.kind == "U" and (self.matrix is None or self.matrix.shape != (2, 2)):
            raise ValueError("U gate needs a 2x2 matrix")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.targets + tuple(q for q, _ in self.controls)

    def unitary(self) -> np.ndarray:
        """2x2 matrix applied to each target (SWAP excluded)."""
        k = self.kind
        if k in ("X", "CNOT", "Toffoli", "MCX"):
            return _X
        if k == "Z":
            return _Z
        if k in ("H", "CH"):
            return _H
        if k in ("Ry", "CRy", "MCRy"):
            return ry(self.angle)
        if k == "Rz":
            return rz(self.angle)
        if k == "Rx":
            return rx(self.angle)
        if k == "U":
            return self.matrix
        raise ValueError(f"{k} has no single-qubit matrix")

    def inverse(self) -> "Gate":
        if self.kind in ROTATIONS:
            return Gate(self.kind, self.targets, self.controls, -self.angle)
        if self.kind == "U":
            return Gate("U", self.targets, self.controls, matrix=self.matrix.conj().T)
        return self


@dataclass(frozen=True)
class Circuit:
    width: int
    gates: tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not 0 < self.width <= MAX_WIDTH:
            raise ValueError(f"width {self.width} outside 1..{MAX_WIDTH}")
        for g in self.gates:
            if max(g.qubits) >= self.width or min(g.qubits) < 0:
                raise ValueError(f"gate {g.kind} acts outside width {self.width}")

    def __add__(self, other: "Circuit") -> "Circuit":
        return Circuit(max(self.width, other.width), self.gates + other.gates)

    def inverse(self) -> "Circuit":
        return Circuit(self.width, tuple(g.inverse() for g in reversed(self.gates)))

    def controlled(self, controls: Sequence[tuple[int, int]]) -> "Circuit":
        """Add extra controls to every gate (global-phase free gates only)."""
        extra = tuple(controls)
        out = []
        for g in self.gates:
            kind = g.kind
            if kind in ("X", "CNOT", "Toffoli"):
                kind = "MCX"
            elif kind in ("Ry", "CRy"):
                kind = "MCRy"
            elif kind == "CH":
                kind = "H"
            out.append(Gate(kind, g.targets, g.controls + extra, g.angle, g.matrix))
        width = max(self.width, 1 + max(q for q, _ in extra))
        return Circuit(width, tuple(out))

    def to_text(self) -> str:
        return "\n".join(gate_to_line(g) for g in self.gates)


class CircuitBuilder:
    """Mutable helper that accumulates gates and freezes into a Circuit."""

    def __init__(self, width: int):
        self.width = width
        self.gates: list[Gate] = []

    def add(self, kind, targets, controls=(), angle=None, matrix=None):
        if isinstance(targets, int):
            targets = (targets,)
        self.gates.append(Gate(kind, tuple(targets), tuple(controls), angle, matrix))
        return self

    def extend(self, c: Circuit | Iterable[Gate]):
        gates = c.gates if isinstance(c, Circuit) else c
        self.gates.extend(gates)
        return self

    def build(self) -> Circuit:
        return Circuit(self.width, tuple(self.gates))


# -- simulation ----------------------------------------------------------

def _index(width: int, fixed: dict[int, int]):
    idx = [slice(None)] * (width + 1)
    for q, v in fixed.items():
        idx[width - 1 - q] = v
    return tuple(idx)


def _apply_gate(state: np.ndarray, g: Gate, width: int) -> None:
    ctrl = {q: int(p) for q, p in g.controls}
    if g.kind == "SWAP":
        a, b = g.targets
        i01 = _index(width, {**ctrl, a: 0, b: 1})
        i10 = _index(width, {**ctrl, a: 1, b: 0})
        tmp = state[i01].copy()
        state[i01] = state[i10]
        state[i10] = tmp
        return
    m = g.unitary()
    for t in g.targets:
        i0 = _index(width, {**ctrl, t: 0})
        i1 = _index(width, {**ctrl, t: 1})
        a = state[i0].copy()
        b = state[i1].copy()
        state[i0] = m[0, 0] * a + m[0, 1] * b
        state[i1] = m[1, 0] * a + m[1, 1] * b


def apply(c: Circuit, state) -> np.ndarray:
    """Apply ``c`` to a state vector, or to a ``(2**width, batch)`` array of columns."""
    state = np.asarray(state, dtype=complex)
    single = state.ndim == 1
    if state.shape[0] != 2 ** c.width:
        raise DimensionError(f"state length {state.shape[0]} != 2**{c.width}")
    batch = 1 if single else state.shape[1]
    psi = state.reshape((2,) * c.width + (batch,)).copy()
    for g in c.gates:
        _apply_gate(psi, g, c.width)
    out = psi.reshape(2 ** c.width, batch)
    return out[:, 0] if single else out


def circuit_unitary(c: Circuit) -> np.ndarray:
    if c.width > 12:
        raise DimensionError("dense unitary only for width <= 12")
    return apply(c, np.eye(2 ** c.width, dtype=complex))


def gate_dense(g: Gate, width: int) -> np.ndarray:
    """Dense ``2**width`` matrix of one gate, built entry by entry.

    Independent of :func:`apply`; used as a test oracle.
    """
    dim = 2 ** width
    out = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        if any(((col >> q) & 1) != p for q, p in g.controls):
            out[col, col] = 1.0
            continue
        if g.kind == "SWAP":
            a, b = g.targets
            ba, bb = (col >> a) & 1, (col >> b) & 1
            row = col & ~(1 << a) & ~(1 << b) | (bb << a) | (ba << b)
            out[row, col] = 1.0
            continue
        amps = {col: 1.0 + 0j}
        m = g.unitary()
        for t in g.targets:
            new: dict[int, complex] = {}
            for basis, amp in amps.items():
                bit = (basis >> t) & 1
                for nb in (0, 1):
                    row = (basis & ~(1 << t)) | (nb << t)
                    new[row] = new.get(row, 0) + m[nb, bit] * amp
            amps = new
        for row, amp in amps.items():
            out[row, col] += amp
    return out


# -- block extraction -----------------------------------------------------

@dataclass(frozen=True)
class EncodedBlock:
    raw: np.ndarray
    alpha: float
    clean: int
    persistent: int

    @property
    def block(self) -> np.ndarray:
        return self.raw / self.alpha


def extract_block(c: Circuit, n_data: int, chunk: int | None = None,
                  clean_tol: float = 1e-20) -> EncodedBlock:
    """Top-left block ``<0|^a U |0>^a`` with the ancilla on the high qubits.

    The block is assembled column by column from the ``2**n_data`` basis
    inputs.  An ancilla counts as clean when it returns to ``|0>`` for every
    input.
    """
    if not 0 < n_data <= c.width:
        raise DimensionError(f"n_data={n_data} incompatible with width {c.width}")
    dd = 2 ** n_data
    chunk = chunk or (dd if c.width <= 14 else 16)
    raw = np.zeros((dd, dd), dtype=complex)
    leak = np.zeros(c.width - n_data)
    for start in range(0, dd, chunk):
        cols = np.arange(start, min(start + chunk, dd))
        psi = np.zeros((2 ** c.width, cols.size), dtype=complex)
        psi[cols, np.arange(cols.size)] = 1.0
        out = apply(c, psi)
        raw[:, cols] = out[:dd]
        prob = (np.abs(out) ** 2).sum(axis=1)
        basis = np.arange(2 ** c.width)
        for k in range(c.width - n_data):
            leak[k] += prob[((basis >> (n_data + k)) & 1) == 1].sum()
    clean = int(np.sum(leak < clean_tol))
    alpha = spectral_norm(raw)
    return EncodedBlock(raw=raw, alpha=alpha, clean=clean,
                        persistent=c.width - n_data - clean)


# -- structural counts --------------------------------------------------

def rotation_count(c: Circuit) -> int:
    return sum(1 for g in c.gates if g.kind in ROTATIONS or g.kind == "U")


def control_string(g: Gate) -> str:
    """Control polarities ordered from the most significant control qubit."""
    return "".join(str(p) for _, p in sorted(g.controls, key=lambda qp: -qp[0]))


def eliminate_toffoli_pairs(prev: str, nxt: str) -> int:
    """Toffoli pairs saved between adjacent multi-controlled gates.

    If the control strings first differ at position ``k`` (1-based), ``k-1``
    pairs are shared; a difference in the first position still saves one.
    """
    if len(prev) != len(nxt):
        raise DimensionError("control strings of unequal length")
    k = 0
    while k < len(prev) and prev[k] == nxt[k]:
        k += 1
    return max(k, 1)


def toffoli_pair_count(c: Circuit | Sequence[Gate]) -> int:
    """Toffoli pairs needed for the multi-control ladders of ``c``.

    A gate with ``n >= 2`` controls costs ``n-1`` pairs; consecutive gates on
    the same control qubits share pairs per :func:`eliminate_toffoli_pairs`.
    Gates with identical control strings share the whole ladder.
    """
    gates = c.gates if isinstance(c, Circuit) else c
    total = 0
    prev: Gate | None = None
    for g in gates:
        n = len(g.controls)
        if n < 2:
            prev = None
            continue
        cost = n - 1
        if prev is not None and {q for q, _ in prev.controls} == {q for q, _ in g.controls}:
            a, b = control_string(prev), control_string(g)
            cost = 0 if a == b else cost - eliminate_toffoli_pairs(a, b)
        total += cost
        prev = g
    return total


# -- text serialization ---------------------------------------------------

def gate_to_line(g: Gate) -> str:
    ctrl = ",".join(f"{q}:{p}" for q, p in g.controls) or "-"
    tgt = ",".join(str(q) for q in g.targets)
    if g.kind == "U":
        extra = " ".join(f"{float(z.real)!r}{float(z.imag):+.17g}j" for z in g.matrix.ravel())
    else:
        extra = "-" if g.angle is None else repr(float(g.angle))
    return f"{g.kind} {ctrl} {tgt} {extra}"


def gate_from_line(line: str) -> Gate:
    parts = line.split()
    kind, ctrl, tgt = parts[:3]
    controls = () if ctrl == "-" else tuple(
        (int(a), int(b)) for a, b in (t.split(":") for t in ctrl.split(","))
    )
    targets = tuple(int(t) for t in tgt.split(","))
    if kind == "U":
        mat = np.array([complex(z) for z in parts[3:7]]).reshape(2, 2)
        return Gate(kind, targets, controls, matrix=mat)
    angle = None if parts[3] == "-" else float(parts[3])
    return Gate(kind, targets, controls, angle)


def circuit_from_text(text: str, width: int) -> Circuit:
    gates = tuple(gate_from_line(ln) for ln in text.splitlines() if ln.strip())
    return Circuit(width, gates)
