"""Dense linear algebra over a prime field F_p.

Matrices are plain ``numpy`` int64 arrays with entries in ``[0, p)``.  The
row-reduction kernel is compiled (Cython) when the extension is available
and falls back to a numpy implementation otherwise; ``BACKEND`` names the
one selected at import.
"""
from __future__ import annotations

import numpy as np

try:
    from pmedit._kernels import rref_inplace as _rref_inplace

    BACKEND = "cython"
except ImportError:  # pragma: no cover - exercised when the extension is absent
    from pmedit._kernels_py import rref_inplace as _rref_inplace

    BACKEND = "python"

# keeps p*p*n well inside int64 for matmul accumulation
MAX_PRIME = 1 << 20

DTYPE = np.int64


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    k = 3
    while k * k <= p:
        if p % k == 0:
            return False
        k += 2
    return True


def check_prime(p: int) -> int:
    if not isinstance(p, (int, np.integer)) or not is_prime(int(p)):
        raise ValueError(f"field modulus must be prime, got {p!r}")
    if p >= MAX_PRIME:
        raise ValueError(f"field modulus {p} too large (must be < {MAX_PRIME})")
    return int(p)


def as_matrix(rows, p: int, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Build a matrix from nested sequences (or an array), reducing mod ``p``."""
    a = np.array(rows, dtype=DTYPE)
    if shape is not None:
        a = a.reshape(shape)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    return np.ascontiguousarray(a % p)


def zeros(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=DTYPE)


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=DTYPE)


def matmul(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"shape mismatch: {a.shape} @ {b.shape}")
    if a.shape[1] == 0:
        return zeros(a.shape[0], b.shape[1])
    return (a @ b) % p


def rref(a: np.ndarray, p: int) -> tuple[np.ndarray, tuple[int, ...]]:
    """Reduced row-echelon form of ``a`` and its pivot columns."""
    r = np.array(a, dtype=DTYPE, order="C", copy=True) % p
    if r.size == 0:
        return r, ()
    pivots = _rref_inplace(r, p)
    return r, tuple(pivots)


def rank(a: np.ndarray, p: int) -> int:
    return len(rref(a, p)[1])


def solve(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray | None:
    """Some ``x`` with ``a @ x == b`` (mod p), or ``None`` if inconsistent."""
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"row mismatch: {a.shape} vs {b.shape}")
    n = a.shape[1]
    aug = np.concatenate([a % p, b % p], axis=1)
    r, pivots = rref(aug, p)
    if any(c >= n for c in pivots):
        return None
    x = zeros(n, b.shape[1])
    for row, c in enumerate(pivots):
        x[c] = r[row, n:]
    return x


def nullspace_basis(a: np.ndarray, p: int) -> np.ndarray:
    """Columns form a basis of ``ker(a)``."""
    n = a.shape[1]
    r, pivots = rref(a, p)
    free = [c for c in range(n) if c not in set(pivots)]
    basis = zeros(n, len(free))
    for k, c in enumerate(free):
        basis[c, k] = 1
        for row, pc in enumerate(pivots):
            basis[pc, k] = (-r[row, c]) % p
    return basis


def inverse(a: np.ndarray, p: int) -> np.ndarray | None:
    """Inverse of a square matrix, or ``None`` when singular."""
    n, m = a.shape
    if n != m:
        return None
    if n == 0:
        return zeros(0, 0)
    r, pivots = rref(np.concatenate([a % p, identity(n)], axis=1), p)
    if pivots[:n] != tuple(range(n)):
        return None
    return np.ascontiguousarray(r[:, n:])


def is_invertible(a: np.ndarray, p: int) -> bool:
    return a.shape[0] == a.shape[1] and rank(a, p) == a.shape[0]


def equal(a: np.ndarray, b: np.ndarray, p: int) -> bool:
    return a.shape == b.shape and bool(np.all((a - b) % p == 0))
