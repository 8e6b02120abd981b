"""Unstructured oracle encodings of F1: unary iteration, QROM and S-FABLE.

All three share the rearrangement circuit

    U_A = (I (x) H^n (x) I) (I (x) SWAP) O_A (I (x) H^n (x) I)

on a 13-qubit register: data ``j`` on qubits 0-5, row index ``i`` on
qubits 6-11 and the rotation target on qubit 12.  With O_A placing
``a_ij`` in the ``<0|.|1>`` corner of a 2x2 gate on the target, the top
block is ``A / 64``.  The QROM adds a 4-qubit element register (13-16).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .bencs import BlockEncoding, from_circuit
from .circuit import (Circuit, CircuitBuilder, Gate,
                      eliminate_toffoli_pairs, ry, toffoli_pair_count)
from .costs import (T_PER_TOFFOLI_PAIR, CostExpr, SFableCost, constant_cost,
                    price_rotation)
from .f1 import DIM, N_QUBITS, F1Bundle, hadamard_conjugate
from .linalg import fwht, gray_code, gray_permutation, hadamard_matrix, spectral_norm

N_INDEX = 2 * N_QUBITS           # 12 control qubits (i and j registers)
TOP = N_INDEX                    # rotation target
ROW_QUBITS = tuple(range(N_QUBITS, N_INDEX))
U_REGISTER = (13, 14, 15, 16)    # QROM element index, bit b on qubit 13+b
LADDER_ANCILLA = N_INDEX - 1     # clean qubits of a 12-control Toffoli ladder

ENVELOPE_SLOPE = 0.00039
ENVELOPE_OFFSET = 3.0
RETAIN_THRESHOLD = 5.5e-4
RETAIN_LARGE = 628
RETAIN_ALL_BELOW = 4.99e-7


def _rot_angle(a: float) -> float:
    """Angle with ``<0|Ry(theta)|1> = a``."""
    return -2.0 * math.asin(a)


def nonzero_entries(f: np.ndarray, order: str = "row") -> list[tuple[int, int, float]]:
    """Nonzero ``(i, j, value)`` in row-major or column-major traversal."""
    if order not in ("row", "col"):
        raise ValueError(f"unknown traversal order {order!r}")
    ii, jj = np.nonzero(f if order == "row" else f.T)
    if order == "col":
        ii, jj = jj, ii
    return [(int(i), int(j), float(f[i, j])) for i, j in zip(ii, jj)]


def index_controls(i: int, j: int) -> tuple[tuple[int, int], ...]:
    m = DIM * i + j
    return tuple((q, (m >> q) & 1) for q in range(N_INDEX))


# -- multi-control schedule -------------------------------------------------

@dataclass(frozen=True)
class ScheduleEntry:
    bits: str          # 12 control polarities, most significant qubit first
    i: int
    j: int
    value: float
    payload: str       # "X" for maximal entries, "Ry" otherwise
    angle: float | None
    eliminated: int    # pairs shared with the previous entry


@dataclass(frozen=True)
class MultiControlSchedule:
    entries: tuple[ScheduleEntry, ...]
    toffoli_pairs: int
    order: str = "row"

    @property
    def rotations(self) -> int:
        return sum(e.payload == "Ry" for e in self.entries)

    @property
    def flips(self) -> int:
        return sum(e.payload == "X" for e in self.entries)

    def to_csv(self) -> str:
        lines = ["bitstring,payload,pairs_eliminated"]
        for e in self.entries:
            pay = "X" if e.payload == "X" else f"Ry({e.angle!r})"
            lines.append(f"{e.bits},{pay},{e.eliminated}")
        return "\n".join(lines) + "\n"


def build_schedule(f: np.ndarray, order: str = "row") -> MultiControlSchedule:
    max_abs = float(np.abs(f).max())
    entries = []
    prev = None
    pairs = 0
    for i, j, v in nonzero_entries(f, order):
        bits = format(DIM * i + j, f"0{N_INDEX}b")
        saved = 0 if prev is None else eliminate_toffoli_pairs(prev, bits)
        pairs += (N_INDEX - 1) - saved
        maximal = math.isclose(abs(v), max_abs)
        entries.append(ScheduleEntry(
            bits=bits, i=i, j=j, value=v,
            payload="X" if maximal and v > 0 else "Ry",
            angle=None if maximal and v > 0 else _rot_angle(v / max_abs),
            eliminated=saved,
        ))
        prev = bits
    return MultiControlSchedule(tuple(entries), pairs, order)


# -- circuits ---------------------------------------------------------------

def _wrap(width: int, oracle: Sequence[Gate], hadamard_data: bool = False) -> Circuit:
    """Surround an oracle with the H / SWAP rearrangement."""
    b = CircuitBuilder(width)
    if hadamard_data:
        for q in range(N_QUBITS):
            b.add("H", q)
    for q in ROW_QUBITS:
        b.add("H", q)
    b.extend(oracle)
    for q in range(N_QUBITS):
        b.add("SWAP", (q, q + N_QUBITS))
    for q in ROW_QUBITS:
        b.add("H", q)
    if hadamard_data:
        for q in range(N_QUBITS):
            b.add("H", q)
    return b.build()


def unary_oracle(schedule: MultiControlSchedule,
                 unitaries: dict[int, np.ndarray] | None = None) -> list[Gate]:
    """O_A as one multi-controlled gate per nonzero entry.

    ``unitaries`` optionally replaces the rotation of entry ``k`` with an
    arbitrary 2x2 matrix (used for perturbed builds).
    """
    gates = [Gate("X", (TOP,))]
    for k, e in enumerate(schedule.entries):
        ctrl = index_controls(e.i, e.j)
        if e.payload == "X":
            gates.append(Gate("MCX", (TOP,), ctrl))
        elif unitaries is not None and k in unitaries:
            gates.append(Gate("U", (TOP,), ctrl, matrix=unitaries[k]))
        else:
            gates.append(Gate("MCRy", (TOP,), ctrl, angle=e.angle))
    return gates


class UnaryBuild(NamedTuple):
    circuit: Circuit
    schedule: MultiControlSchedule
    encoding: BlockEncoding


def unary_error_factor(f: np.ndarray) -> float:
    """Normalized-error growth per unit rotation error (about 8.55 for F1).

    A rotation error ``eps`` moves each non-maximal entry by at most ``eps``;
    the resulting block error is bounded by ``eps * ||mask|| / 64`` and the
    normalized bound doubles that relative to ``||A|| / 64``.
    """
    max_abs = np.abs(f).max()
    mask = ((f != 0) & ~np.isclose(np.abs(f), max_abs)).astype(float)
    return 2.0 * spectral_norm(mask) / spectral_norm(f)


def unary_cost(pairs: int, rotations: int, factor: float) -> CostExpr:
    rot = price_rotation(controlled=True, label="eps")
    # cost charged at eps/factor per rotation: log2(factor/eps)
    per = CostExpr(rot.terms, rot.constant + rot.slope * math.log2(factor))
    return constant_cost(T_PER_TOFFOLI_PAIR * pairs) + rotations * per


def build_unary_iteration(b: F1Bundle, order: str = "row",
                          simulate: bool = True) -> UnaryBuild:
    f = b.f1
    sched = build_schedule(f, order)
    circ = _wrap(N_INDEX + 1, unary_oracle(sched))
    max_abs = float(np.abs(f).max())
    factor = unary_error_factor(f)
    cost = unary_cost(toffoli_pair_count(circ), sched.rotations, factor)
    meta = {"error_factor": factor, "toffoli_pairs": sched.toffoli_pairs,
            "rotations": sched.rotations, "order": order}
    target = f / (DIM * max_abs)
    if simulate:
        enc = from_circuit("unary", circ, N_QUBITS, target, cost=cost, meta=meta)
        enc = _add_ladder(enc)
    else:
        enc = BlockEncoding("unary", target.astype(complex), target.astype(complex),
                            clean=LADDER_ANCILLA, persistent=N_QUBITS + 1,
                            cost=cost, meta=meta)
    return UnaryBuild(circ, sched, enc)


def _add_ladder(enc: BlockEncoding) -> BlockEncoding:
    return replace(enc, clean=enc.clean + LADDER_ANCILLA, err_bound=enc.err_bound)


def oracle_block(f: np.ndarray, corner: Callable[[int, int, float], complex] | None = None
                 ) -> np.ndarray:
    """Analytic top block of the rearranged oracle, ``O / 64``.

    ``corner(i, j, a)`` returns the ``<0|U|1>`` element realized for entry
    ``a``; by default the exact value ``a / max|A|``.
    """
    max_abs = float(np.abs(f).max())
    out = np.zeros(f.shape, dtype=complex)
    for i, j, v in nonzero_entries(f):
        out[i, j] = v / max_abs if corner is None else corner(i, j, v)
    return out / DIM


# -- QROM -------------------------------------------------------------------

class QromBuild(NamedTuple):
    circuit: Circuit
    encoding: BlockEncoding
    cost: CostExpr


def qrom_index(f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Element register contents ``u_ij`` and the value table.

    Index 0 stands for zero entries; nonzero values are numbered from 1 in
    ascending order.
    """
    vals = np.unique(np.round(f[f != 0], 12))
    u = np.zeros(f.shape, dtype=int)
    nz = f != 0
    u[nz] = 1 + np.searchsorted(vals, np.round(f[nz], 12))
    return u, vals


def qrom_address_oracle(f: np.ndarray, order: str = "row") -> list[Gate]:
    u, _ = qrom_index(f)
    gates = []
    for i, j, _v in nonzero_entries(f, order):
        tg = tuple(U_REGISTER[b] for b in range(len(U_REGISTER)) if (u[i, j] >> b) & 1)
        gates.append(Gate("MCX", tg, index_controls(i, j)))
    return gates


def qrom_value_oracle(f: np.ndarray,
                      unitaries: dict[int, np.ndarray] | None = None) -> list[Gate]:
    """One gate per unique nonzero element, controlled on the element register."""
    _, vals = qrom_index(f)
    max_abs = float(np.abs(f).max())
    gates = []
    for n, v in enumerate(vals, start=1):
        ctrl = tuple((U_REGISTER[b], (n >> b) & 1) for b in range(len(U_REGISTER)))
        if math.isclose(v, max_abs):
            gates.append(Gate("MCX", (TOP,), ctrl))
        elif unitaries is not None and n in unitaries:
            gates.append(Gate("U", (TOP,), ctrl, matrix=unitaries[n]))
        else:
            gates.append(Gate("MCRy", (TOP,), ctrl, angle=_rot_angle(v / max_abs)))
    return gates


def qrom_cost(address_pairs: int, value_pairs: int, rotations: int,
              factor: float) -> CostExpr:
    rot = price_rotation(controlled=True, label="eps")
    per = CostExpr(rot.terms, rot.constant + rot.slope * math.log2(factor))
    return constant_cost(T_PER_TOFFOLI_PAIR * (address_pairs + value_pairs)) + rotations * per


def build_qrom_circuit(f: np.ndarray, order: str = "row",
                       unitaries: dict[int, np.ndarray] | None = None) -> Circuit:
    addr = qrom_address_oracle(f, order)
    oracle = ([Gate("X", (TOP,))] + addr + qrom_value_oracle(f, unitaries)
              + [g.inverse() for g in reversed(addr)])
    return _wrap(max(U_REGISTER) + 1, oracle)


def build_qrom(b: F1Bundle, order: str = "row", simulate: bool = True) -> QromBuild:
    f = b.f1
    circ = build_qrom_circuit(f, order)
    addr = qrom_address_oracle(f, order)
    value = qrom_value_oracle(f)
    rotations = sum(g.kind == "MCRy" for g in value)
    factor = unary_error_factor(f)
    cost = qrom_cost(2 * toffoli_pair_count(addr), toffoli_pair_count(value),
                     rotations, factor)
    meta = {"error_factor": factor, "rotations": rotations,
            "address_T": T_PER_TOFFOLI_PAIR * 2 * toffoli_pair_count(addr),
            "value_pairs": toffoli_pair_count(value)}
    target = f / (DIM * float(np.abs(f).max()))
    if simulate:
        enc = _add_ladder(from_circuit("qrom", circ, N_QUBITS, target, cost=cost, meta=meta))
    else:
        enc = BlockEncoding("qrom", target.astype(complex), target.astype(complex),
                            clean=LADDER_ANCILLA + len(U_REGISTER),
                            persistent=N_QUBITS + 1, cost=cost, meta=meta)
    return QromBuild(circ, enc, cost)


# -- S-FABLE ----------------------------------------------------------------

def retained_rotations(eps: float) -> int:
    """Rotations kept at per-rotation accuracy ``eps`` under the envelope model.

    The envelope ``|theta_hat_i| < 10**(-0.00039 i - 3)`` lets every rotation
    past ``(log10(1/eps) - 3) / 0.00039`` be dropped.  The count is capped at
    4096, which the envelope already reaches near ``eps = 2.5e-5``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if eps >= RETAIN_THRESHOLD:
        return RETAIN_LARGE
    if eps < RETAIN_ALL_BELOW:
        return DIM * DIM
    k = math.ceil((math.log10(1.0 / eps) - ENVELOPE_OFFSET) / ENVELOPE_SLOPE)
    return min(k, DIM * DIM)


@dataclass(frozen=True, eq=False)
class SFableAngles:
    theta: np.ndarray       # arccos of the max-normalized transformed entries
    theta_hat: np.ndarray   # uncontrolled rotation angles in Gray order
    sorted_mags: np.ndarray
    max_abs: float          # max |H F1 H|

    def k_of_eps(self, eps: float) -> int:
        return retained_rotations(eps)

    def retained_mask(self, k: int) -> np.ndarray:
        """Keep the ``k`` largest-magnitude angles (stable order for ties)."""
        order = np.argsort(-np.abs(self.theta_hat), kind="stable")
        mask = np.zeros(self.theta_hat.size, dtype=bool)
        mask[order[:k]] = True
        return mask


def sfable_angles(f: np.ndarray) -> SFableAngles:
    m = hadamard_conjugate(f)
    max_abs = float(np.abs(m).max())
    theta = np.arccos(np.clip(m.ravel() / max_abs, -1.0, 1.0))
    theta_hat = gray_permutation(fwht(theta), inverse=True) / DIM
    mags = np.sort(np.abs(theta_hat))[::-1]
    return SFableAngles(theta, theta_hat, mags, max_abs)


def fable_oracle(theta_hat: np.ndarray, keep: np.ndarray | None = None,
                 unitaries: dict[int, np.ndarray] | None = None) -> list[Gate]:
    """Gray-walk oracle: ``Ry(2 theta_hat_k)`` then a CNOT on the flipping bit.

    Dropped rotations leave their CNOT in place so the parity frame is intact.
    """
    n = theta_hat.size
    g = gray_code(np.arange(n))
    gates = []
    for k in range(n):
        if unitaries is not None and k in unitaries:
            gates.append(Gate("U", (TOP,), matrix=unitaries[k]))
        elif keep is None or keep[k]:
            gates.append(Gate("Ry", (TOP,), angle=2.0 * float(theta_hat[k])))
        flip = int(g[k] ^ g[(k + 1) % n])
        gates.append(Gate("CNOT", (TOP,), ((flip.bit_length() - 1, 1),)))
    return gates


def fable_block(theta_hat: np.ndarray, unitaries: np.ndarray | None = None,
                keep: np.ndarray | None = None) -> np.ndarray:
    """Top block of the Gray-walk oracle circuit without the data Hadamards.

    Each control state ``m`` sees a 2x2 product on the target; the recurrence
    is vectorized over all ``m``.  ``unitaries`` is an optional ``(n, 2, 2)``
    stack replacing the rotations.
    """
    n = theta_hat.size
    g = gray_code(np.arange(n))
    m = np.arange(n)
    psi = np.zeros((n, 2), dtype=complex)
    psi[:, 0] = 1.0
    for k in range(n):
        if unitaries is not None:
            u = unitaries[k]
        elif keep is None or keep[k]:
            u = ry(2.0 * theta_hat[k])
        else:
            u = None
        if u is not None:
            psi = psi @ u.T
        flip = g[k] ^ g[(k + 1) % n]
        sel = (m & flip) != 0
        psi[sel] = psi[sel][:, ::-1]
    return psi[:, 0].reshape(DIM, DIM) / DIM


def sfable_block(theta_hat: np.ndarray, **kw) -> np.ndarray:
    h = hadamard_matrix(N_QUBITS)
    return h @ fable_block(theta_hat, **kw) @ h


def sfable_error_factor(f: np.ndarray, max_abs: float) -> float:
    """Normalized error per unit rotation error, about 1418 for F1."""
    n_rot = DIM * DIM
    return 2.0 * n_rot / (spectral_norm(f) / max_abs)


def sfable_cost(factor: float) -> SFableCost:
    n_rot = DIM * DIM
    slope_k = 1.0 / (ENVELOPE_SLOPE * math.log2(10.0))
    # k(eps/factor) = 2564 log10(factor/eps) - 7692, written in log2(1/eps)
    kb = (math.log10(factor) - ENVELOPE_OFFSET) / ENVELOPE_SLOPE
    rb = 1.15 * math.log2(factor) + 9.2
    low = (n_rot * 1.15, n_rot * rb)
    return SFableCost(high=(slope_k, kb, 1.15, rb), low=low,
                      boundary=RETAIN_ALL_BELOW * factor)


class SFableBuild(NamedTuple):
    angles: SFableAngles
    circuit_for: Callable[[float | None], Circuit]
    encoding: BlockEncoding


def build_sfable(b: F1Bundle, simulate: bool = False) -> SFableBuild:
    """S-FABLE encoding of F1.

    ``circuit_for(eps)`` returns the 13-qubit circuit keeping ``k(eps)``
    rotations (all of them for ``eps=None``).  With ``simulate`` the
    encoding is read off the full circuit; otherwise from the vectorized
    recurrence, which realizes the same gates.
    """
    f = b.f1
    ang = sfable_angles(f)

    def circuit_for(eps: float | None = None) -> Circuit:
        keep = None if eps is None else ang.retained_mask(ang.k_of_eps(eps))
        return _wrap(N_INDEX + 1, fable_oracle(ang.theta_hat, keep), hadamard_data=True)

    factor = sfable_error_factor(f, ang.max_abs)
    cost = sfable_cost(factor)
    meta = {"error_factor": factor, "max_abs_transformed": ang.max_abs,
            "cost_piecewise": cost}
    target = f / (DIM * ang.max_abs)
    low_cost = CostExpr(((cost.low[0], "eps"),), cost.low[1])
    if simulate:
        enc = from_circuit("sfable", circuit_for(None), N_QUBITS, target,
                           cost=low_cost, meta=meta)
    else:
        blk = sfable_block(ang.theta_hat)
        enc = BlockEncoding("sfable", blk, target.astype(complex), clean=0,
                            persistent=N_QUBITS + 1, cost=low_cost, meta=meta)
    return SFableBuild(ang, circuit_for, enc)


@dataclass(frozen=True)
class ProfileRecord:
    sorted_mags: np.ndarray
    count_above: int
    threshold: float
    envelope_ok: bool
    envelope_max_ratio: float
    tail_start: int


def sfable_magnitude_profile(a: SFableAngles, threshold: float = RETAIN_THRESHOLD,
                             tail_start: int = RETAIN_LARGE, tol: float = 0.05
                             ) -> ProfileRecord:
    """Compare sorted angle magnitudes with the exponential envelope.

    Ranks are 1-based; the envelope is checked from ``tail_start`` on.
    """
    mags = a.sorted_mags
    rank = np.arange(1, mags.size + 1)
    env = 10.0 ** (-ENVELOPE_SLOPE * rank - ENVELOPE_OFFSET)
    tail = slice(tail_start, None)
    ratio = float((mags[tail] / env[tail]).max())
    return ProfileRecord(
        sorted_mags=mags, count_above=int(np.sum(mags > threshold)),
        threshold=threshold, envelope_ok=ratio <= 1.0 + tol,
        envelope_max_ratio=ratio, tail_start=tail_start,
    )


def profile_csv(p: ProfileRecord) -> str:
    rows = ["rank,magnitude"] + [f"{i},{m!r}" for i, m in enumerate(p.sorted_mags, 1)]
    return "\n".join(rows) + "\n"
