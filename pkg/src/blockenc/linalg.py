"""Dense linear algebra helpers: spectral norms, Kronecker products,
Walsh-Hadamard transforms and Gray-code permutations.

Matrices are plain ``numpy.ndarray`` objects throughout the package.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

# above this dimension the spectral norm falls back to power iteration
SVD_DIM_LIMIT = 256


class DimensionError(ValueError):
    """Raised when array shapes are incompatible with an operation."""


def _check_finite(m: np.ndarray) -> None:
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains NaN or Inf entries")


def spectral_norm(m, tol: float = 1e-13, maxiter: int = 100_000) -> float:
    """Largest singular value of ``m``.

    Uses a full SVD when ``max(m.shape) <= 256`` and power iteration on
    ``m^H m`` otherwise.
    """
    m = np.asarray(m)
    if m.size == 0:
        raise DimensionError("spectral norm of an empty matrix")
    if m.ndim == 1:
        return float(np.linalg.norm(m))
    _check_finite(m)
    if max(m.shape) <= SVD_DIM_LIMIT:
        return float(np.linalg.svd(m, compute_uv=False)[0])
    return _power_norm(m, tol, maxiter)


def _power_norm(m: np.ndarray, tol: float, maxiter: int) -> float:
    rng = np.random.default_rng(0)
    v = rng.standard_normal(m.shape[1]) + 0j
    v /= np.linalg.norm(v)
    prev = 0.0
    for _ in range(maxiter):
        w = m.conj().T @ (m @ v)
        lam = float(np.linalg.norm(w))
        if lam == 0.0:
            return 0.0
        v = w / lam
        if abs(lam - prev) <= tol * lam:
            break
        prev = lam
    return float(np.linalg.norm(m @ v))


def tensor(*mats) -> np.ndarray:
    """Kronecker product of any number of arrays (left to right)."""
    if not mats:
        raise DimensionError("tensor of zero factors")
    return reduce(np.kron, (np.asarray(a) for a in mats))


def _log2_length(n: int) -> int:
    if n < 1 or n & (n - 1):
        raise DimensionError(f"length {n} is not a power of two")
    return n.bit_length() - 1


def fwht(v) -> np.ndarray:
    """Normalized fast Walsh-Hadamard transform, ``H^{(x)n} v``.

    Each factor carries ``1/sqrt(2)`` so the transform is an involution.
    """
    v = np.array(v, dtype=float)
    if v.ndim != 1:
        raise DimensionError("fwht expects a vector")
    n = _log2_length(v.shape[0])
    out = v.copy()
    h = 1
    for _ in range(n):
        out = out.reshape(-1, 2, h)
        a = out[:, 0, :].copy()
        b = out[:, 1, :]
        out = np.stack((a + b, a - b), axis=1).reshape(-1)
        h *= 2
    return out / np.sqrt(2.0) ** n


def hadamard_matrix(n: int) -> np.ndarray:
    """Dense normalized ``H^{(x)n}``."""
    h = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    if n == 0:
        return np.ones((1, 1))
    return tensor(*([h] * n))


def gray_code(i):
    """Binary-reflected Gray code ``i ^ (i >> 1)``; works on arrays."""
    return i ^ (i >> 1)


def gray_permutation(v, inverse: bool = False) -> np.ndarray:
    """Reorder ``v`` by the Gray code.

    The forward map places input entry ``i`` at output position
    ``gray_code(i)``; ``inverse=True`` undoes it, i.e. ``out[i] = v[gray_code(i)]``.
    """
    v = np.asarray(v)
    _log2_length(v.shape[0])
    g = gray_code(np.arange(v.shape[0]))
    out = np.empty_like(v)
    if inverse:
        out[...] = v[g]
    else:
        out[g] = v
    return out


def sub_block(m, row_range, col_range) -> np.ndarray:
    """Contiguous sub-block ``m[r0:r1, c0:c1]`` with bounds checking."""
    m = np.asarray(m)
    r0, r1 = row_range
    c0, c1 = col_range
    if not (0 <= r0 < r1 <= m.shape[0] and 0 <= c0 < c1 <= m.shape[1]):
        raise DimensionError(
            f"block rows {row_range} cols {col_range} outside shape {m.shape}"
        )
    return m[r0:r1, c0:c1].copy()


def random_unitary(dim: int, rng) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def normalized_distance(a, b) -> float:
    """``|| a/||a|| - b/||b|| ||`` in the spectral norm."""
    return spectral_norm(np.asarray(a) / spectral_norm(a) - np.asarray(b) / spectral_norm(b))
