"""Finite posets embedded in Q^d, grids, monotone maps and Galois connections.

Points are tuples of :class:`fractions.Fraction`; comparisons are exact.  The
adjoined bottom element of ``P_bot`` is the sentinel :data:`BOTTOM`, never a
coordinate tuple.

Whole-poset questions (adjoints, the Galois law, join closure) are answered by
first replacing every coordinate with its rank among the coordinate values
that occur on that axis.  Ranks preserve the componentwise order exactly, so
the comparisons can be vectorised with numpy without leaving exact arithmetic.
"""
from __future__ import annotations

import itertools
import math
import re
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence, Union

import numpy as np

Point = tuple[Fraction, ...]

_RATIONAL_RE = re.compile(r"[+-]?(\d+/\d+|\d+\.\d*|\.\d+|\d+)\Z")


class _Bottom:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "BOTTOM"

    def __reduce__(self):
        return (_Bottom, ())


BOTTOM = _Bottom()


def rational(x) -> Fraction:
    """Exact rational from an int, Fraction or decimal/fraction literal."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return Fraction(int(x))
    if isinstance(x, str):
        s = x.strip()
        if not _RATIONAL_RE.match(s):
            raise ValueError(f"not a rational literal: {x!r}")
        return Fraction(s)
    raise TypeError(f"cannot read {x!r} as an exact rational")


def as_point(coords: Iterable) -> Point:
    pt = tuple(rational(c) for c in coords)
    if not pt:
        raise ValueError("points need at least one coordinate")
    return pt


def leq(a, b) -> bool:
    if a is BOTTOM:
        return True
    if b is BOTTOM:
        return False
    return all(x <= y for x, y in zip(a, b))


def join(a: Point, b: Point) -> Point:
    return tuple(max(x, y) for x, y in zip(a, b))


def linf(a: Point, b: Point) -> Fraction:
    return max((abs(x - y) for x, y in zip(a, b)), default=Fraction(0))


def shift(p: Point, t) -> Point:
    """``p + t*(1,...,1)``."""
    t = rational(t)
    return tuple(c + t for c in p)


def _axis_ranks(point_lists: Sequence[Sequence[Point]], dim: int) -> list[np.ndarray]:
    values = [sorted({pt[i] for pts in point_lists for pt in pts}) for i in range(dim)]
    index = [{v: k for k, v in enumerate(vals)} for vals in values]
    out = []
    for pts in point_lists:
        arr = np.empty((len(pts), dim), dtype=np.int64)
        for r, pt in enumerate(pts):
            for i in range(dim):
                arr[r, i] = index[i][pt[i]]
        out.append(arr)
    return out


def scaled_coordinates(point_lists: Sequence[Sequence[Point]], dim: int):
    """Integer arrays ``D * coords`` for a common denominator D, plus D.

    Exact whenever the scaled values fit in int64; otherwise object arrays of
    Python ints are returned, which are slower but still exact.
    """
    den = 1
    for pts in point_lists:
        for p in pts:
            for c in p:
                den = math.lcm(den, c.denominator)
    out = []
    for pts in point_lists:
        vals = [[int(c * den) for c in p] for p in pts]
        big = any(abs(v) >= 1 << 62 for row in vals for v in row)
        arr = np.array(vals, dtype=object if big else np.int64).reshape(len(pts), dim)
        out.append(arr)
    return out, den


def _leq_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``out[i, j]`` is ``a[i] <= b[j]`` componentwise."""
    if a.shape[0] == 0 or b.shape[0] == 0:
        return np.zeros((a.shape[0], b.shape[0]), dtype=bool)
    return np.all(a[:, None, :] <= b[None, :, :], axis=2)


@dataclass(frozen=True)
class Grid:
    """Cartesian product of ``d`` finite sets of rationals."""

    axes: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        axes = tuple(tuple(sorted({rational(v) for v in ax})) for ax in self.axes)
        if not axes or any(not ax for ax in axes):
            raise ValueError("a grid needs d >= 1 nonempty axes")
        object.__setattr__(self, "axes", axes)

    @property
    def dim(self) -> int:
        return len(self.axes)

    @cached_property
    def points(self) -> tuple[Point, ...]:
        return tuple(itertools.product(*self.axes))

    @cached_property
    def pointset(self) -> frozenset:
        return frozenset(self.points)

    def __len__(self) -> int:
        return math.prod(len(ax) for ax in self.axes)

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, p) -> bool:
        return p is not BOTTOM and len(p) == self.dim and all(
            c in ax for c, ax in zip(p, self._axis_sets)
        )

    @cached_property
    def _axis_sets(self) -> tuple[frozenset, ...]:
        return tuple(frozenset(ax) for ax in self.axes)

    @property
    def top(self) -> Point:
        return tuple(ax[-1] for ax in self.axes)

    @property
    def bottom(self) -> Point:
        return tuple(ax[0] for ax in self.axes)

    def floor(self, p):
        """Largest grid point below ``p``, or BOTTOM when there is none."""
        if p is BOTTOM:
            return BOTTOM
        if len(p) != self.dim:
            raise ValueError(f"dimension mismatch: point {p} vs grid of dim {self.dim}")
        out = []
        for c, ax in zip(p, self.axes):
            k = bisect_right(ax, c)
            if k == 0:
                return BOTTOM
            out.append(ax[k - 1])
        return tuple(out)

    @cached_property
    def covering_pairs(self) -> tuple[tuple[Point, Point], ...]:
        pairs = []
        sizes = [len(ax) for ax in self.axes]
        for idx in itertools.product(*(range(n) for n in sizes)):
            p = tuple(ax[k] for ax, k in zip(self.axes, idx))
            for i, n in enumerate(sizes):
                if idx[i] + 1 < n:
                    q = p[:i] + (self.axes[i][idx[i] + 1],) + p[i + 1:]
                    pairs.append((p, q))
        return tuple(pairs)

    def refine(self, other: "Grid") -> "Grid":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return Grid(tuple(a + b for a, b in zip(self.axes, other.axes)))


@dataclass(frozen=True)
class FinitePoset:
    """A finite set of points of Q^d with the componentwise order."""

    points: tuple[Point, ...]

    def __post_init__(self):
        pts = tuple(sorted({as_point(p) for p in self.points}))
        if not pts:
            raise ValueError("empty poset")
        if len({len(p) for p in pts}) != 1:
            raise ValueError("points of mixed dimension")
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return len(self.points[0])

    @cached_property
    def pointset(self) -> frozenset:
        return frozenset(self.points)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, p) -> bool:
        return p in self.pointset

    @cached_property
    def _ranks(self) -> np.ndarray:
        return _axis_ranks([self.points], self.dim)[0]

    @property
    def top(self):
        cand = join_all(self.points)
        return cand if cand in self.pointset else None

    @property
    def bottom(self):
        cand = tuple(min(c) for c in zip(*self.points))
        return cand if cand in self.pointset else None

    def floor(self, p):
        """Maximum of the points below ``p``; BOTTOM when none lie below.

        Raises ValueError when the points below have no maximum, which cannot
        happen for join-closed posets.
        """
        if p is BOTTOM:
            return BOTTOM
        below = [x for x in self.points if leq(x, p)]
        if not below:
            return BOTTOM
        top = join_all(below)
        if top not in self.pointset:
            raise ValueError(f"no floor for {p}: poset is not join-closed")
        return top

    @cached_property
    def covering_pairs(self) -> tuple[tuple[Point, Point], ...]:
        le = _leq_matrix(self._ranks, self._ranks)
        lt = le & ~np.eye(len(self.points), dtype=bool)
        through = (lt.astype(np.int64) @ lt.astype(np.int64)) > 0
        cover = lt & ~through
        return tuple(
            (self.points[i], self.points[j]) for i, j in zip(*np.nonzero(cover))
        )


Poset = Union[Grid, FinitePoset]


def join_all(points: Iterable[Point]) -> Point:
    return tuple(max(c) for c in zip(*points))


def smallest_grid(points: Iterable) -> Grid:
    pts = [as_point(p) for p in points]
    if not pts:
        raise ValueError("smallest_grid of an empty point set")
    if len({len(p) for p in pts}) != 1:
        raise ValueError("points of mixed dimension")
    return Grid(tuple(tuple(c) for c in zip(*pts)))


def floor(poset: Poset, p):
    return poset.floor(p)


def same_points(a: Poset, b: Poset) -> bool:
    return a.pointset == b.pointset


class MonotoneMap:
    """A function between finite posets, stored as an explicit table.

    ``axis_maps`` holds the per-axis value maps when the map is known to be a
    grid morphism (a product of maps between the axes).
    """

    def __init__(
        self,
        source: Poset,
        target: Poset,
        mapping: Mapping[Point, Point],
        axis_maps: Sequence[Mapping[Fraction, Fraction]] | None = None,
    ):
        self.source = source
        self.target = target
        self.mapping = dict(mapping)
        self.axis_maps = None if axis_maps is None else tuple(dict(m) for m in axis_maps)
        missing = [p for p in source.points if p not in self.mapping]
        if missing:
            raise ValueError(f"map undefined at {missing[0]}")
        for p in source.points:
            if self.mapping[p] not in target:
                raise ValueError(f"image {self.mapping[p]} of {p} is not in the target")

    @classmethod
    def from_axis_maps(cls, source: Grid, target: Grid, axis_maps) -> "MonotoneMap":
        axis_maps = [
            {rational(k): rational(v) for k, v in dict(m).items()} for m in axis_maps
        ]
        if len(axis_maps) != source.dim or source.dim != target.dim:
            raise ValueError("axis maps need one map per axis and grids of equal dimension")
        for i, m in enumerate(axis_maps):
            if set(m) != set(source.axes[i]):
                raise ValueError(f"axis map {i} must be defined on exactly the source axis")
        mapping = {p: tuple(axis_maps[i][c] for i, c in enumerate(p)) for p in source.points}
        return cls(source, target, mapping, axis_maps)

    @classmethod
    def from_function(cls, source: Poset, target: Poset, fn: Callable) -> "MonotoneMap":
        return cls(source, target, {p: tuple(fn(p)) for p in source.points})

    @classmethod
    def identity(cls, poset: Poset) -> "MonotoneMap":
        axis = None
        if isinstance(poset, Grid):
            axis = [{v: v for v in ax} for ax in poset.axes]
        return cls(poset, poset, {p: p for p in poset.points}, axis)

    def __call__(self, p):
        if p is BOTTOM:
            return BOTTOM
        return self.mapping[p]

    def __eq__(self, other) -> bool:
        if not isinstance(other, MonotoneMap):
            return NotImplemented
        return (
            same_points(self.source, other.source)
            and same_points(self.target, other.target)
            and self.mapping == other.mapping
        )

    def __repr__(self) -> str:
        return f"MonotoneMap({len(self.mapping)} points)"

    def compose(self, inner: "MonotoneMap") -> "MonotoneMap":
        """``self ∘ inner``."""
        if not same_points(inner.target, self.source):
            raise ValueError("composition mismatch: inner target is not outer source")
        axis = None
        if self.axis_maps is not None and inner.axis_maps is not None:
            axis = [{k: o[v] for k, v in i.items()} for i, o in zip(inner.axis_maps, self.axis_maps)]
        return MonotoneMap(
            inner.source, self.target, {p: self.mapping[q] for p, q in inner.mapping.items()}, axis
        )

    def is_monotone(self) -> bool:
        src = list(self.source.points)
        img = [self.mapping[p] for p in src]
        (rs,) = _axis_ranks([src], self.source.dim)
        (ri,) = _axis_ranks([img], self.target.dim)
        le_src = _leq_matrix(rs, rs)
        le_img = _leq_matrix(ri, ri)
        return bool(np.all(~le_src | le_img))

    def with_axis_form(self) -> "MonotoneMap":
        """Attach per-axis maps when the table factors as a product."""
        if self.axis_maps is not None:
            return self
        axis = _axis_form(self)
        if axis is None:
            return self
        return MonotoneMap(self.source, self.target, self.mapping, axis)


def _axis_form(f: MonotoneMap):
    if not (isinstance(f.source, Grid) and isinstance(f.target, Grid)):
        return None
    if f.source.dim != f.target.dim:
        return None
    maps: list[dict] = [{} for _ in range(f.source.dim)]
    for p, q in f.mapping.items():
        for i in range(len(p)):
            seen = maps[i].setdefault(p[i], q[i])
            if seen != q[i]:
                return None
    return maps


def is_grid_morphism(f: MonotoneMap) -> bool:
    """True iff each output coordinate depends only on the same input coordinate."""
    if not (isinstance(f.source, Grid) and isinstance(f.target, Grid)):
        raise TypeError("is_grid_morphism needs grids at both ends")
    return _axis_form(f) is not None


def _adjoint(f: MonotoneMap, right: bool):
    src = list(f.source.points)
    tgt = list(f.target.points)
    img = [f.mapping[p] for p in src]
    (rs,) = _axis_ranks([src], f.source.dim)
    rt, ri = _axis_ranks([tgt, img], f.target.dim)
    if right:
        # admissible[a, q]  <=>  f(a) <= q
        admissible = _leq_matrix(ri, rt)
    else:
        admissible = _leq_matrix(rt, ri).T
    index = {tuple(r): k for k, r in enumerate(rs.tolist())}
    mapping = {}
    for j, q in enumerate(tgt):
        idx = np.flatnonzero(admissible[:, j])
        if idx.size == 0:
            return None
        extreme = rs[idx].max(axis=0) if right else rs[idx].min(axis=0)
        k = index.get(tuple(extreme.tolist()))
        if k is None or not admissible[k, j]:
            return None
        mapping[q] = src[k]
    return MonotoneMap(f.target, f.source, mapping).with_axis_form()


def right_adjoint(f: MonotoneMap) -> MonotoneMap | None:
    """``g(q) = max f^{-1}(q↓)``; ``None`` when some maximum does not exist.

    A maximum of a subset of Q^d, when it exists, is its componentwise
    maximum, so it suffices to test whether that join lies in the subset.
    """
    return _adjoint(f, right=True)


def left_adjoint(g: MonotoneMap) -> MonotoneMap | None:
    """``f(p) = min g^{-1}(p↑)``; ``None`` when some minimum does not exist."""
    return _adjoint(g, right=False)


def check_galois(f: MonotoneMap, g: MonotoneMap) -> bool:
    """``f(a) <= b  <=>  a <= g(b)`` for every ``a`` in P and ``b`` in Q."""
    if not (same_points(f.source, g.target) and same_points(f.target, g.source)):
        raise ValueError("check_galois needs f: P -> Q and g: Q -> P")
    P = list(f.source.points)
    Q = list(f.target.points)
    fP = [f.mapping[a] for a in P]
    gQ = [g.mapping[b] for b in Q]
    rP, rgQ = _axis_ranks([P, gQ], f.source.dim)
    rQ, rfP = _axis_ranks([Q, fP], f.target.dim)
    return bool(np.array_equal(_leq_matrix(rfP, rQ), _leq_matrix(rP, rgQ)))


def compose_connection(c1, c2):
    """``(f1 ⊣ g1)`` on P,Q and ``(f2 ⊣ g2)`` on Q,R give ``(f2∘f1 ⊣ g1∘g2)``."""
    f1, g1 = c1
    f2, g2 = c2
    if not same_points(f1.target, f2.source):
        raise ValueError("connections do not compose: middle posets differ")
    return f2.compose(f1), g1.compose(g2)


def distortion(f: MonotoneMap) -> Fraction:
    """``max_p ||p - f(p)||_inf``."""
    if f.source.dim != f.target.dim:
        raise ValueError("distortion needs posets embedded in the same R^d")
    return max((linf(p, q) for p, q in f.mapping.items()), default=Fraction(0))


def injectivity_radius(points: Iterable[Point]):
    """Half the smallest nonzero coordinate gap; ``math.inf`` when there is none."""
    pts = list(points)
    best = math.inf
    if not pts:
        return best
    for i in range(len(pts[0])):
        vals = sorted({p[i] for p in pts})
        for a, b in zip(vals, vals[1:]):
            if b - a < best:
                best = b - a
    return best if best is math.inf else best / 2


def is_js_object(poset: Poset) -> bool:
    """Closed under componentwise maximum, i.e. joins exist and agree with R^d."""
    if isinstance(poset, Grid):
        return True
    pts = list(poset.points)
    if not pts:
        return False
    r = poset._ranks
    radix = r.max(axis=0) + 1
    weights = np.cumprod(np.concatenate([[1], radix[:-1]]))
    codes = r @ weights
    joins = np.maximum(r[:, None, :], r[None, :, :]) @ weights
    return bool(np.all(np.isin(joins, codes)))


def preserves_joins_and_bottom(f: MonotoneMap) -> bool:
    """Whether ``f`` sends existing binary joins to joins and the bottom to the bottom."""
    src = f.source
    pts = set(src.points)
    for a, b in itertools.combinations(src.points, 2):
        j = join(a, b)
        if j in pts and f(j) != join(f(a), f(b)):
            return False
    bot = src.bottom
    if bot is not None and f(bot) != f.target.bottom:
        return False
    return True


def meet(a: Point, b: Point) -> Point:
    return tuple(min(x, y) for x, y in zip(a, b))


def preserves_meets_and_top(g: MonotoneMap) -> bool:
    """Dual of :func:`preserves_joins_and_bottom` (meets taken in R^d)."""
    src = g.source
    pts = set(src.points)
    for a, b in itertools.combinations(src.points, 2):
        m = meet(a, b)
        if m in pts and g(m) != meet(g(a), g(b)):
            return False
    top = src.top
    if top is not None and g(top) != g.target.top:
        return False
    return True
