"""Exact linear algebra over a prime field F_p.

Matrices are numpy int64 arrays with entries in [0, p). Row reduction runs in
the compiled kernel when it is importable, otherwise in the numpy fallback.
Set GALOISRES_PURE=1 to force the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _fallback

DEFAULT_PRIME = 32003
# p^2 * (inner dimension) must stay inside int64 for matmul
MAX_PRIME = 1 << 26

try:
    if os.environ.get("GALOISRES_PURE"):
        raise ImportError("pure mode requested")
    from . import _kernels as _backend_mod

    BACKEND = "cython"
except ImportError:  # pragma: no cover - depends on build
    _backend_mod = _fallback
    BACKEND = "numpy"


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def _prime_from_env() -> int:
    raw = os.environ.get("P_FIELD_PRIME")
    if not raw:
        return DEFAULT_PRIME
    p = int(raw)
    if not _is_prime(p) or p >= MAX_PRIME:
        raise ValueError(f"P_FIELD_PRIME={raw} is not a prime below {MAX_PRIME}")
    return p


_PRIME = _prime_from_env()


def prime() -> int:
    return _PRIME


def set_prime(p: int) -> None:
    global _PRIME
    if not _is_prime(p) or p >= MAX_PRIME:
        raise ValueError(f"{p} is not a prime below {MAX_PRIME}")
    _PRIME = p


def mat(obj, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    """Coerce to a reduced int64 matrix. Shape hints disambiguate empty input."""
    a = np.asarray(obj, dtype=np.int64)
    if a.size == 0 and rows is not None and cols is not None:
        return np.zeros((rows, cols), dtype=np.int64)
    if a.ndim == 1:
        a = a.reshape(1, -1) if a.size else np.zeros((rows or 0, cols or 0), np.int64)
    return np.mod(a, _PRIME)


def zeros(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=np.int64)


def eye(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.int64)


def mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"cannot multiply {a.shape} by {b.shape}")
    if a.shape[1] == 0:
        return zeros(a.shape[0], b.shape[1])
    return (a @ b) % _PRIME


def chain_mul(*ms: np.ndarray) -> np.ndarray:
    out = ms[0]
    for m in ms[1:]:
        out = mul(out, m)
    return out


def neg(a: np.ndarray) -> np.ndarray:
    return (-a) % _PRIME


def add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (a + b) % _PRIME


def sub(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (a - b) % _PRIME


def inv_scalar(x: int) -> int:
    return pow(int(x) % _PRIME, -1, _PRIME)


def centered(a: np.ndarray) -> np.ndarray:
    """Representatives in (-p/2, p/2], for printing small signed entries."""
    a = np.asarray(a, dtype=np.int64)
    return np.where(a > _PRIME // 2, a - _PRIME, a)


def rref(m: np.ndarray) -> tuple[np.ndarray, list[int]]:
    a = np.ascontiguousarray(np.mod(np.asarray(m, dtype=np.int64), _PRIME))
    if a.size == 0:
        return a, []
    pivots = _backend_mod.rref_inplace(a, _PRIME)
    return a, list(pivots)


def rank(m: np.ndarray) -> int:
    return len(rref(m)[1])


def kernel(m: np.ndarray) -> np.ndarray:
    """Null space basis as columns; column j has a 1 at the j-th free variable."""
    m = np.asarray(m, dtype=np.int64)
    cols = m.shape[1]
    r, pivots = rref(m)
    free = [c for c in range(cols) if c not in set(pivots)]
    k = zeros(cols, len(free))
    for j, fc in enumerate(free):
        k[fc, j] = 1
        for row, pc in enumerate(pivots):
            k[pc, j] = (-r[row, fc]) % _PRIME
    return k


def inverse(m: np.ndarray) -> np.ndarray:
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError("inverse of a non-square matrix")
    r, pivots = rref(np.hstack([m, eye(n)]))
    if n and pivots[:n] != list(range(n)):
        raise ValueError("matrix is singular")
    return r[:, n:].copy()


def is_invertible(m: np.ndarray) -> bool:
    return m.shape[0] == m.shape[1] and rank(m) == m.shape[0]


@dataclass(frozen=True)
class Reduction:
    rank: int
    kernel_basis: np.ndarray  # cols x (cols - rank)
    image_basis: np.ndarray  # rows x rank, pivot columns of m
    coker_projection: np.ndarray  # (rows - rank) x rows, annihilates m
    pivots: tuple[int, ...]
    complement: tuple[int, ...]  # standard basis rows completing the image


def reduce(m: np.ndarray) -> Reduction:
    m = np.asarray(m, dtype=np.int64) % _PRIME
    rows, cols = m.shape
    _, pivots = rref(m)
    rk = len(pivots)
    image = m[:, pivots].copy() if rk else zeros(rows, 0)
    # greedily extend the image basis by standard vectors, then invert
    _, piv2 = rref(np.hstack([image, eye(rows)]))
    comp = tuple(c - rk for c in piv2 if c >= rk)
    basis = np.hstack([image, eye(rows)[:, list(comp)]]) if rows else zeros(0, 0)
    if rows:
        q = inverse(basis)[rk:, :]
    else:
        q = zeros(0, 0)
    return Reduction(rk, kernel(m), image, q, tuple(pivots), comp)


def solve(a: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """Some x with a x = b, or None. Free variables are set to zero."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[0] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    n = a.shape[1]
    r, pivots = rref(np.hstack([a % _PRIME, b % _PRIME]))
    if any(p >= n for p in pivots):
        return None
    x = zeros(n, b.shape[1])
    for row, pc in enumerate(pivots):
        x[pc, :] = r[row, n:]
    return x


def left_inverse(m: np.ndarray) -> np.ndarray:
    """L with L m = I for m of full column rank."""
    rows, cols = m.shape
    sol = solve(m.T.copy(), eye(cols))
    if sol is None:
        raise ValueError("matrix does not have full column rank")
    return sol.T.copy()


def block_diag(*ms: np.ndarray) -> np.ndarray:
    rows = sum(m.shape[0] for m in ms)
    cols = sum(m.shape[1] for m in ms)
    out = zeros(rows, cols)
    r = c = 0
    for m in ms:
        out[r : r + m.shape[0], c : c + m.shape[1]] = m
        r += m.shape[0]
        c += m.shape[1]
    return out
