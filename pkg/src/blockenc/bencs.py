"""Block-encoding records, combinators and error-propagation lemmas.

A :class:`BlockEncoding` carries the exact block it realizes (``encoded``)
next to the ideal block at the same scale (``target``).  For an exact build
the two coincide; perturbed builds differ and the gap is measurable.

``alpha`` is always the spectral norm of the encoded block restricted to
its support.  ``nominal_alpha`` follows multiplicative bookkeeping through
tensor products and sequences (``alpha_a * alpha_b``), which is an upper
bound on ``alpha`` by submultiplicativity.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .circuit import Circuit, extract_block
from .costs import CostExpr
from .linalg import DimensionError, spectral_norm


class BoundInapplicable(ValueError):
    """The hypotheses of an error bound are not met."""


def _support(n: int, idx) -> np.ndarray:
    return np.arange(n) if idx is None else np.asarray(idx, dtype=int)


@dataclass(frozen=True, eq=False)
class BlockEncoding:
    name: str
    encoded: np.ndarray
    target: np.ndarray
    rows: np.ndarray | None = None
    cols: np.ndarray | None = None
    clean: int = 0
    persistent: int = 0
    raw_err: float = 0.0
    err_bound: float | None = None
    nominal_alpha: float | None = None
    cost: CostExpr | None = None
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.encoded.shape != self.target.shape:
            raise DimensionError("encoded and target shapes differ")
        if self.nominal_alpha is None:
            object.__setattr__(self, "nominal_alpha", self.alpha)
        if self.err_bound is None:
            bound = 0.0 if self.raw_err == 0 else normalized_error_bound(
                self.raw_err, spectral_norm(self.target_block), d=2.0)
            object.__setattr__(self, "err_bound", bound)
        if self.err_bound < 0:
            raise ValueError("negative error bound")

    @property
    def row_support(self) -> np.ndarray:
        return _support(self.encoded.shape[0], self.rows)

    @property
    def col_support(self) -> np.ndarray:
        return _support(self.encoded.shape[1], self.cols)

    @property
    def block(self) -> np.ndarray:
        return self.encoded[np.ix_(self.row_support, self.col_support)]

    @property
    def target_block(self) -> np.ndarray:
        return self.target[np.ix_(self.row_support, self.col_support)]

    @property
    def alpha(self) -> float:
        return spectral_norm(self.block)

    @property
    def ancilla(self) -> tuple[int, int]:
        return self.clean, self.persistent

    def normalized_error(self) -> float:
        """Measured ``||target/||target|| - encoded/||encoded|| ||`` on the support."""
        t = self.target_block
        e = self.block
        return spectral_norm(t / spectral_norm(t) - e / spectral_norm(e))

    def adjoint(self, name: str | None = None) -> "BlockEncoding":
        """Encoding realized by the inverse circuit (block becomes its adjoint)."""
        return replace(
            self, name=name or self.name + "^dag",
            encoded=self.encoded.conj().T, target=self.target.conj().T,
            rows=self.cols, cols=self.rows, err_bound=None,
            nominal_alpha=self.nominal_alpha,
        )

    def with_support(self, rows=None, cols=None, name=None, **kw) -> "BlockEncoding":
        return replace(self, name=name or self.name, rows=rows, cols=cols,
                       err_bound=None, **kw)


def from_circuit(name: str, circ: Circuit, n_data: int, target: np.ndarray,
                 rows=None, cols=None, **kw) -> BlockEncoding:
    """Lift a simulated circuit to a BlockEncoding (ancilla counts measured)."""
    eb = extract_block(circ, n_data)
    return BlockEncoding(name=name, encoded=eb.raw, target=np.asarray(target, dtype=complex),
                         rows=rows, cols=cols, clean=eb.clean,
                         persistent=eb.persistent, **kw)


def identity_encoding(dim: int, name: str = "I") -> BlockEncoding:
    eye = np.eye(dim, dtype=complex)
    return BlockEncoding(name=name, encoded=eye, target=eye.copy())


# -- combinators ------------------------------------------------------------

def _first_order(norm_a: float, err_b: float, norm_b: float, err_a: float) -> float:
    return norm_a * err_b + norm_b * err_a


def be_tensor(a: BlockEncoding, b: BlockEncoding, name: str | None = None) -> BlockEncoding:
    nb_r, nb_c = b.encoded.shape
    rows = (a.row_support[:, None] * nb_r + b.row_support[None, :]).ravel()
    cols = (a.col_support[:, None] * nb_c + b.col_support[None, :]).ravel()
    cost = None if a.cost is None or b.cost is None else a.cost + b.cost
    return BlockEncoding(
        name=name or f"({a.name} x {b.name})",
        encoded=np.kron(a.encoded, b.encoded), target=np.kron(a.target, b.target),
        rows=rows, cols=cols,
        clean=a.clean + b.clean, persistent=a.persistent + b.persistent,
        raw_err=_first_order(spectral_norm(a.target_block), b.raw_err,
                             spectral_norm(b.target_block), a.raw_err),
        nominal_alpha=a.nominal_alpha * b.nominal_alpha, cost=cost,
    )


def be_sequence(a: BlockEncoding, b: BlockEncoding, name: str | None = None) -> BlockEncoding:
    """Encoding of the product ``a @ b`` (circuit ``b`` runs first).

    Ancilla registers are kept separate, so ancilla counts add.
    """
    if a.encoded.shape[1] != b.encoded.shape[0]:
        raise DimensionError(f"cannot multiply {a.encoded.shape} by {b.encoded.shape}")
    cost = None if a.cost is None or b.cost is None else a.cost + b.cost
    return BlockEncoding(
        name=name or f"{a.name}.{b.name}",
        encoded=a.encoded @ b.encoded, target=a.target @ b.target,
        rows=a.rows, cols=b.cols,
        clean=a.clean + b.clean, persistent=a.persistent + b.persistent,
        raw_err=_first_order(spectral_norm(a.target), b.raw_err,
                             spectral_norm(b.target), a.raw_err),
        nominal_alpha=a.nominal_alpha * b.nominal_alpha, cost=cost,
    )


@dataclass(frozen=True, eq=False)
class LcuSpec:
    """LCU over an ancilla register.

    ``prep_left`` is the unitary applied after SELECT exactly as written
    (not daggered); ``prep_right`` prepares the ancilla before SELECT.
    Ancilla basis states missing from ``selectors`` select the identity.
    """
    prep_left: np.ndarray
    prep_right: np.ndarray
    selectors: Mapping[int, BlockEncoding]

    def __post_init__(self):
        for name, m in (("prep_left", self.prep_left), ("prep_right", self.prep_right)):
            if not np.allclose(m.conj().T @ m, np.eye(m.shape[0]), atol=1e-12):
                raise ValueError(f"{name} is not unitary")
        if self.prep_left.shape != self.prep_right.shape:
            raise DimensionError("prep matrices differ in size")
        shapes = {s.encoded.shape for s in self.selectors.values()}
        if len(shapes) > 1:
            raise DimensionError(f"selector blocks have different shapes {shapes}")
        for k in self.selectors:
            if not 0 <= k < self.prep_left.shape[0]:
                raise DimensionError(f"selector index {k} outside ancilla space")

    def weights(self) -> np.ndarray:
        return self.prep_left[0, :] * self.prep_right[:, 0]


def be_lcu(spec: LcuSpec, name: str = "lcu", raw_err: float = 0.0,
           err_bound: float | None = None, cost: CostExpr | None = None,
           meta: Mapping | None = None) -> BlockEncoding:
    """``sum_k L[0,k] R[k,0] B_k`` over the ancilla basis.

    The error is not propagated here; callers pass the bound derived from
    :func:`combine_error_bb1` / :func:`combine_error_bb2`.
    """
    w = spec.weights()
    shape = next(iter(spec.selectors.values())).encoded.shape if spec.selectors else None
    if shape is None:
        raise DimensionError("LCU with no selectors")
    eye = np.eye(shape[0], dtype=complex)
    enc = np.zeros(shape, dtype=complex)
    tgt = np.zeros(shape, dtype=complex)
    for k, wk in enumerate(w):
        sel = spec.selectors.get(k)
        enc += wk * (eye if sel is None else sel.encoded)
        tgt += wk * (eye if sel is None else sel.target)
    n_anc = int(np.log2(spec.prep_left.shape[0]))
    distinct = {id(s): s for s in spec.selectors.values()}.values()
    return BlockEncoding(
        name=name, encoded=enc, target=tgt,
        clean=sum(s.clean for s in distinct),
        persistent=n_anc + sum(s.persistent for s in distinct),
        raw_err=raw_err, err_bound=err_bound, cost=cost, meta=meta or {},
    )


def lcu_brute_force(spec: LcuSpec) -> np.ndarray:
    """Top-left block of ``(L (x) I) SELECT (R (x) I)`` built as full matrices.

    Identity selectors are used where the map has no entry; selector blocks
    are embedded as-is (their own ancilla already projected out).
    """
    n = spec.prep_left.shape[0]
    d = next(iter(spec.selectors.values())).encoded.shape[0]
    select = np.zeros((n * d, n * d), dtype=complex)
    for k in range(n):
        blk = spec.selectors[k].encoded if k in spec.selectors else np.eye(d)
        select[k * d:(k + 1) * d, k * d:(k + 1) * d] = blk
    full = np.kron(spec.prep_left, np.eye(d)) @ select @ np.kron(spec.prep_right, np.eye(d))
    return full[:d, :d]


# -- error lemmas ----------------------------------------------------------

def normalized_error_bound(eps: float, norm_a: float, d: float = 2.0) -> float:
    """Bound on ``||A/||A|| - B/||B|| ||`` given ``||A - B|| < eps``.

    For ``d > 2`` the bound ``d*eps/||A||`` requires ``eps < ||A||(1 - 2/d)``.
    ``d = 2`` needs no side condition, since
    ``||A/|A| - B/|B| || <= ||A-B||/|A| + | |B| - |A| |/|A| <= 2 eps/|A|``.
    """
    if norm_a <= 0:
        raise BoundInapplicable("norm of A must be positive")
    if eps < 0:
        raise BoundInapplicable("negative error")
    if d < 2:
        raise BoundInapplicable(f"d={d} < 2")
    if d > 2 and not eps < norm_a * (1 - 2 / d):
        raise BoundInapplicable(f"eps={eps} not below ||A||(1-2/d)={norm_a * (1 - 2 / d)}")
    return d * eps / norm_a


def combine_error_bb1(eps0: float, eps1: float, normC: float, normA: float,
                      normB: float) -> tuple[float, float]:
    """Two-term LCU bounds with prep error ``eps0`` and operator error ``eps1``.

    Returns ``(bound_product, bound_difference)`` for
    ``|p1|^2 C A + |p2|^2 C B`` and ``|p1|^2 C - |p2|^2 A`` respectively; in
    the second form ``normB`` is unused and ``normA`` pairs with ``normC``.
    """
    for v in (eps0, eps1, normC, normA, normB):
        if v < 0:
            raise ValueError("inputs must be non-negative")
    product = (2 * normC * eps0 + eps1) * np.hypot(normA, normB)
    difference = 2 * eps0 * np.hypot(normA, normC) + eps1
    return float(product), float(difference)


def combine_error_bb2(eps0: float, epsA: float, epsB: float, normA: float,
                      normB: float) -> float:
    """Two-term LCU bound when both selected operators carry errors."""
    for v in (eps0, epsA, epsB, normA, normB):
        if v < 0:
            raise ValueError("inputs must be non-negative")
    return float(2 * eps0 * np.hypot(normA, normB) + np.hypot(epsA, epsB))


# -- random lemma instances -------------------------------------------------

def _rand_op(rng, n: int) -> np.ndarray:
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))


def _perturb_op(rng, m: np.ndarray, eps: float) -> np.ndarray:
    e = _rand_op(rng, m.shape[0])
    return m + e * (rng.uniform() * eps / spectral_norm(e))


def _perturb_amplitudes(rng, eps0: float) -> tuple[np.ndarray, np.ndarray]:
    p = rng.normal(size=2) + 1j * rng.normal(size=2)
    p /= np.linalg.norm(p)
    d = rng.normal(size=2) + 1j * rng.normal(size=2)
    return p, p + d * (rng.uniform() * eps0 / np.linalg.norm(d))


@dataclass(frozen=True)
class LemmaInstance:
    lemma: str
    actual: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.actual < self.bound


def sample_bound_instance(rng, n: int = 3) -> LemmaInstance:
    a = _rand_op(rng, n)
    na = spectral_norm(a)
    eps = na * 10.0 ** rng.uniform(-8, -1)
    at = _perturb_op(rng, a, eps)
    actual = spectral_norm(a / na - at / spectral_norm(at))
    return LemmaInstance("normalized", actual, normalized_error_bound(eps, na))


def sample_bb1_instances(rng, n: int = 2) -> tuple[LemmaInstance, LemmaInstance]:
    eps0, eps1 = 10.0 ** rng.uniform(-7, -2, size=2)
    p, pt = _perturb_amplitudes(rng, eps0)
    w, wt = np.abs(p) ** 2, np.abs(pt) ** 2
    A, B, C = (_rand_op(rng, n) for _ in range(3))
    Ct = _perturb_op(rng, C, eps1)
    lhs0 = spectral_norm((w[0] * C @ A + w[1] * C @ B) - (wt[0] * Ct @ A + wt[1] * Ct @ B))
    lhs1 = spectral_norm((w[0] * C - w[1] * A) - (wt[0] * Ct - wt[1] * A))
    nA, nB, nC = spectral_norm(A), spectral_norm(B), spectral_norm(C)
    b0 = combine_error_bb1(eps0, eps1, nC, nA, nB)[0]
    b1 = combine_error_bb1(eps0, eps1, nC, nA, nB)[1]
    return LemmaInstance("bb1-product", lhs0, b0), LemmaInstance("bb1-difference", lhs1, b1)


def sample_bb2_instance(rng, n: int = 2) -> LemmaInstance:
    eps0, ea, eb = 10.0 ** rng.uniform(-7, -2, size=3)
    p, pt = _perturb_amplitudes(rng, eps0)
    w, wt = np.abs(p) ** 2, np.abs(pt) ** 2
    A, B = _rand_op(rng, n), _rand_op(rng, n)
    At, Bt = _perturb_op(rng, A, ea), _perturb_op(rng, B, eb)
    lhs = spectral_norm((w[0] * A + w[1] * B) - (wt[0] * At + wt[1] * Bt))
    return LemmaInstance("bb2", lhs, combine_error_bb2(eps0, ea, eb, spectral_norm(A),
                                                       spectral_norm(B)))


def lemma_trials(rng, count: int = 1000) -> dict[str, list[LemmaInstance]]:
    """``count`` random small instances of every error lemma."""
    out: dict[str, list[LemmaInstance]] = {"normalized": [], "bb1-product": [],
                                           "bb1-difference": [], "bb2": []}
    for _ in range(count):
        out["normalized"].append(sample_bound_instance(rng))
        i0, i1 = sample_bb1_instances(rng)
        out["bb1-product"].append(i0)
        out["bb1-difference"].append(i1)
        out["bb2"].append(sample_bb2_instance(rng))
    return out
