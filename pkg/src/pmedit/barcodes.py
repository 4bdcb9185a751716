"""One-parameter barcodes and the bottleneck distance.

For d = 1 the interleaving distance equals the bottleneck distance between
barcodes, so these serve as the ground truth for one-parameter checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from pmedit.order import rational
from pmedit.presentations import Presentation

INF = math.inf


@dataclass(frozen=True)
class Barcode:
    """A multiset of half-open bars ``[birth, death)``; ``death`` may be ``math.inf``."""

    bars: tuple = ()

    def __post_init__(self):
        bars = []
        for b, d in self.bars:
            b = rational(b)
            d = INF if d == INF or d == "inf" else rational(d)
            if not b < d:
                raise ValueError(f"bar [{b}, {d}) is empty")
            bars.append((b, d))
        object.__setattr__(self, "bars", tuple(sorted(bars, key=_bar_key)))

    def __len__(self) -> int:
        return len(self.bars)

    def __iter__(self):
        return iter(self.bars)

    @property
    def finite(self) -> list:
        return [b for b in self.bars if b[1] != INF]

    @property
    def infinite(self) -> list:
        return [b for b in self.bars if b[1] == INF]

    def render(self) -> str:
        return " ".join(f"[{b},{'inf' if d == INF else d})" for b, d in self.bars)


def _bar_key(bar):
    b, d = bar
    return (b, d == INF, d if d != INF else 0)


def barcode_1d(m: Presentation) -> Barcode:
    """Barcode of a one-parameter presentation by column reduction.

    Generators are ordered by (grade, id), relation columns by grade; each
    nonzero reduced column pairs its lowest (youngest) generator with the
    relation grade.
    """
    if m.dim != 1:
        raise ValueError(f"barcodes need d = 1, got d = {m.dim}")
    p = m.p
    gens = sorted(m.generators, key=lambda g: (g.grade, g.id))
    index = {g.id: i for i, g in enumerate(gens)}
    rels = sorted(m.relations, key=lambda r: (r.grade, r.terms))
    low_owner: dict[int, np.ndarray] = {}
    bars = []
    for r in rels:
        col = np.zeros(len(gens), dtype=np.int64)
        for gid, c in r.terms:
            col[index[gid]] = c
        while True:
            nz = np.flatnonzero(col)
            if nz.size == 0:
                break
            low = int(nz[-1])
            other = low_owner.get(low)
            if other is None:
                # normalise so later eliminations only need the owner's pivot = 1
                col = (col * pow(int(col[low]), -1, p)) % p
                low_owner[low] = col
                bars.append((gens[low].grade[0], r.grade[0]))
                break
            col = (col - col[low] * other) % p
    for i, g in enumerate(gens):
        if i not in low_owner:
            bars.append((g.grade[0], INF))
    return Barcode(tuple((b, d) for b, d in bars if b != d))


def _dist(a, b):
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def _half(a):
    return (a[1] - a[0]) / 2


def _feasible(x: list, y: list, c) -> bool:
    """Perfect matching on bars plus diagonal copies with every edge of cost <= c."""
    n, m = len(x), len(y)
    size = n + m
    rows, cols = [], []
    for i, a in enumerate(x):
        for j, b in enumerate(y):
            if _dist(a, b) <= c:
                rows.append(i)
                cols.append(j)
        if _half(a) <= c:
            rows.append(i)
            cols.append(m + i)
    for j, b in enumerate(y):
        if _half(b) <= c:
            rows.append(n + j)
            cols.append(j)
        for i in range(n):
            rows.append(n + j)
            cols.append(m + i)
    if size == 0:
        return True
    graph = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(size, size))
    match = maximum_bipartite_matching(graph, perm_type="column")
    return bool(np.all(match >= 0))


def bottleneck(b1: Barcode, b2: Barcode):
    """Bottleneck distance (a Fraction, or ``math.inf`` if infinite bar counts differ)."""
    inf1 = sorted(b for b, _ in b1.infinite)
    inf2 = sorted(b for b, _ in b2.infinite)
    if len(inf1) != len(inf2):
        return INF
    cost_inf = max((abs(a - b) for a, b in zip(inf1, inf2)), default=Fraction(0))
    x, y = b1.finite, b2.finite
    candidates = {Fraction(0)}
    candidates.update(_half(a) for a in x)
    candidates.update(_half(b) for b in y)
    candidates.update(_dist(a, b) for a in x for b in y)
    # the answer is max(cost_inf, finite optimum), so cost_inf itself is a candidate
    cand = sorted({c for c in candidates if c > cost_inf} | {cost_inf})
    lo, hi = 0, len(cand) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _feasible(x, y, cand[mid]):
            hi = mid
        else:
            lo = mid + 1
    return max(cost_inf, cand[lo])
