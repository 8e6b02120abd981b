"""The 64x64 lattice-stencil matrix F1 and its algebraic constituents.

Row index ``i = 16*d2 + 4*d1 + d0`` is read as base-4 digits; a digit of 3
marks a padding row that lies outside the 3x3x3 lattice.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import hadamard_matrix, spectral_norm, tensor

DIM = 64
N_QUBITS = 6

ONES_VEC = np.array([1.0, 1.0, 1.0, 1.0])
X_VEC = np.array([1.0, -1.0, 0.0, 0.0])
W_FACTOR = np.array([0.25, 0.25, 1.0, 1.0])


@dataclass(frozen=True)
class LatticeModel:
    c: np.ndarray  # (64, 3) integer lattice vectors, padded rows included
    w: np.ndarray  # (64,) weights (1/4)**nnz(c_i)
    valid_mask: np.ndarray  # (64,) True iff no base-4 digit equals 3


@dataclass(frozen=True)
class F1Bundle:
    f1: np.ndarray
    C: np.ndarray
    W: np.ndarray
    P: np.ndarray
    ones6: np.ndarray
    G6: np.ndarray
    lattice: LatticeModel
    norm_f1: float = field(default=0.0)


def base4_digits(i: int) -> tuple[int, int, int]:
    return (i >> 4) & 3, (i >> 2) & 3, i & 3


def build_lattice() -> LatticeModel:
    cx = tensor(ONES_VEC, ONES_VEC, X_VEC)
    cy = tensor(ONES_VEC, X_VEC, ONES_VEC)
    cz = tensor(X_VEC, ONES_VEC, ONES_VEC)
    c = np.stack([cx, cy, cz], axis=1).astype(int)
    valid = np.array([3 not in base4_digits(i) for i in range(DIM)])
    w = tensor(W_FACTOR, W_FACTOR, W_FACTOR)
    return LatticeModel(c=c, w=w, valid_mask=valid)


def build_f1_elementwise(m: LatticeModel) -> np.ndarray:
    """F1 from its entry formulas; rows and columns of padding indices are zero."""
    f = np.zeros((DIM, DIM))
    idx = np.flatnonzero(m.valid_mask)
    for i in idx:
        ci = m.c[i]
        for j in idx:
            dot = float(ci @ m.c[j])
            if i == j:
                f[i, i] = -1.0 + m.w[i] + 3.0 * m.w[i] * dot
            else:
                f[i, j] = m.w[i] * (1.0 + 3.0 * dot)
    return f


def grover6() -> np.ndarray:
    ones6 = np.ones((DIM, DIM))
    return ones6 / 32.0 - np.eye(DIM)


def build_f1_algebraic(m: LatticeModel | None = None) -> F1Bundle:
    """Assemble ``F1 = P (W (1_6 + 3 C) - I) P`` from the lattice model."""
    if m is None:
        m = build_lattice()
    c = m.c.astype(float)
    C = c @ c.T
    W = np.diag(m.w)
    P = np.diag(m.valid_mask.astype(float))
    ones6 = np.ones((DIM, DIM))
    f1 = P @ (W @ (ones6 + 3.0 * C) - np.eye(DIM)) @ P
    G6 = grover6()
    for a in (f1, C, W, P, ones6, G6):
        a.flags.writeable = False
    return F1Bundle(
        f1=f1, C=C, W=W, P=P, ones6=ones6, G6=G6, lattice=m,
        norm_f1=spectral_norm(f1),
    )


def hadamard_conjugate(a: np.ndarray) -> np.ndarray:
    """``H^{(x)6} a H^{(x)6}`` for a 64x64 matrix."""
    h = hadamard_matrix(N_QUBITS)
    return h @ a @ h


def f1_stats(b: F1Bundle) -> dict:
    f = b.f1
    nz = f[f != 0]
    max_abs = float(np.abs(f).max())
    return {
        "nnz": int(nz.size),
        # zero counts as one of the unique elements
        "unique": int(np.unique(np.round(f, 12)).size),
        "unique_nonzero": int(np.unique(np.round(nz, 12)).size),
        "norm": b.norm_f1,
        "norm_over_64": b.norm_f1 / DIM,
        "max_abs": max_abs,
        "count_maximal": int(np.sum(np.isclose(np.abs(nz), max_abs))),
        "count_rotations": int(np.sum(~np.isclose(np.abs(nz), max_abs))),
        "hadamard_max_abs": float(np.abs(hadamard_conjugate(f)).max()),
        "symmetric": bool(np.allclose(f, f.T)),
    }


def unique_nonzero_values(f: np.ndarray) -> np.ndarray:
    """Sorted distinct nonzero entries (rounded to 12 digits to merge float noise)."""
    vals = np.unique(np.round(f[f != 0], 12))
    return vals


_DEFAULT: F1Bundle | None = None


def default_bundle() -> F1Bundle:
    """Cached algebraic F1 bundle (the construction is deterministic)."""
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = build_f1_algebraic()
    return _DEFAULT
