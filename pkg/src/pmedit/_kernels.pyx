# cython: language_level=3
"""Compiled row reduction over a prime field.

Matrices arrive as C-contiguous int64 buffers with entries already reduced
into [0, p).  p must satisfy p * p < 2**63.
"""

cdef long long _inv_mod(long long a, long long p) nogil:
    cdef long long t = 0, new_t = 1, r = p, new_r = a, q, tmp
    while new_r != 0:
        q = r // new_r
        tmp = t - q * new_t
        t = new_t
        new_t = tmp
        tmp = r - q * new_r
        r = new_r
        new_r = tmp
    if t < 0:
        t += p
    return t


def rref_inplace(long long[:, ::1] a, long long p):
    """Reduce ``a`` to reduced row-echelon form in place; return pivot columns."""
    cdef Py_ssize_t rows = a.shape[0], cols = a.shape[1]
    cdef Py_ssize_t r = 0, c, i, j, sel
    cdef long long inv, factor
    pivots = []
    for c in range(cols):
        if r >= rows:
            break
        sel = -1
        for i in range(r, rows):
            if a[i, c] != 0:
                sel = i
                break
        if sel < 0:
            continue
        if sel != r:
            for j in range(c, cols):
                a[sel, j], a[r, j] = a[r, j], a[sel, j]
        inv = _inv_mod(a[r, c], p)
        if inv != 1:
            for j in range(c, cols):
                a[r, j] = (a[r, j] * inv) % p
        for i in range(rows):
            if i == r:
                continue
            factor = a[i, c]
            if factor == 0:
                continue
            for j in range(c, cols):
                if a[r, j] != 0:
                    a[i, j] = (a[i, j] - factor * a[r, j]) % p
                    if a[i, j] < 0:
                        a[i, j] += p
        pivots.append(c)
        r += 1
    return pivots
