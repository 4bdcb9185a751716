"""Finite presentations ⟨G | R⟩ of d-graded modules over F_p.

A module is stored as its generators (id, grade) and homogeneous relations
(grade, coefficient per generator).  The vector space at a point x is
``⟨G^x | R^x⟩`` with ``G^x`` the generators graded below x, and the structure
map x -> y sends the class of a generator to the class of the same generator.

Bases are deterministic: generators are ordered by (grade, id), relations by
(grade, terms), the relation matrix of ``R^x`` is row-reduced (relations as
rows) and the generators that are *not* pivots give the basis of the
quotient.  Every matrix in the package is written in these bases.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from pmedit import exactlin as el
from pmedit.order import BOTTOM, Grid, Point, as_point, leq, linf, rational, smallest_grid


class PresentationError(ValueError):
    pass


class InvalidBijection(ValueError):
    pass


class Generator(NamedTuple):
    id: str
    grade: Point


class Relation(NamedTuple):
    """Homogeneous element ``sum c_g x^(grade - gr g) g``; terms sorted by id."""

    grade: Point
    terms: tuple[tuple[str, int], ...]

    @property
    def coefficients(self) -> dict[str, int]:
        return dict(self.terms)


def make_relation(grade, terms, p: int) -> Relation:
    """Normalise a relation: exact grade, coefficients mod p, zero terms dropped."""
    if isinstance(terms, Mapping):
        terms = terms.items()
    acc: dict[str, int] = {}
    for gid, c in terms:
        acc[str(gid)] = (acc.get(str(gid), 0) + int(c)) % p
    return Relation(as_point(grade), tuple(sorted((k, v) for k, v in acc.items() if v)))


def _gen_key(g: Generator):
    return (g.grade, g.id)


def _rel_key(r: Relation):
    return (r.grade, r.terms)


@dataclass(frozen=True)
class Fiber:
    """The vector space M_x in its deterministic basis."""

    dim: int
    basis: tuple[str, ...]
    rel_matrix: np.ndarray
    generators: tuple[str, ...]
    key: tuple[int, ...]
    _rows: np.ndarray
    _pivots: tuple[int, ...]
    _free: tuple[int, ...]

    def coordinates(self, vectors: np.ndarray, p: int) -> np.ndarray:
        """Coordinates of classes of vectors over ``generators`` (one per column)."""
        v = vectors % p
        if not self._pivots:
            return np.ascontiguousarray(v[list(self._free)])
        rows = self._rows[: len(self._pivots)]
        piv = v[list(self._pivots)]
        return (v[list(self._free)] - rows[:, list(self._free)].T @ piv) % p


class Presentation:
    """An immutable finite presentation; equality ignores listing order."""

    def __init__(self, p: int, generators: Iterable = (), relations: Iterable = (), dim: int | None = None):
        self.p = el.check_prime(p)
        gens = tuple(Generator(str(g[0]), as_point(g[1])) for g in generators)
        rels = tuple(
            r if isinstance(r, Relation) and _is_normal(r, self.p) else make_relation(r[0], r[1], self.p)
            for r in relations
        )
        dims = {len(g.grade) for g in gens} | {len(r.grade) for r in rels}
        if dim is not None:
            dims.add(dim)
        if len(dims) > 1:
            raise PresentationError(f"grades of mixed dimension {sorted(dims)}")
        if not dims:
            raise PresentationError("dimension unknown for an empty presentation; pass dim=")
        self.dim = dims.pop()
        if self.dim < 1:
            raise PresentationError("dimension must be >= 1")
        ids = [g.id for g in gens]
        if len(set(ids)) != len(ids):
            dup = next(i for i in ids if ids.count(i) > 1)
            raise PresentationError(f"duplicate generator id {dup!r}")
        grade_of = {g.id: g.grade for g in gens}
        for k, r in enumerate(rels):
            for gid, _ in r.terms:
                if gid not in grade_of:
                    raise PresentationError(f"relation {k} references unknown generator {gid!r}")
                if not leq(grade_of[gid], r.grade):
                    raise PresentationError(
                        f"relation {k} at grade {_fmt(r.grade)} references generator {gid!r} "
                        f"of larger grade {_fmt(grade_of[gid])}"
                    )
        self.generators = gens
        self.relations = rels
        self._grade_of = grade_of
        self._cache: dict = {}
        self._keys: dict = {}
        self._setup_index()

    # -- identity ---------------------------------------------------------
    @property
    def canonical_key(self):
        key = self._cache.get("canon")
        if key is None:
            key = (
                self.p,
                self.dim,
                tuple(sorted(self.generators, key=_gen_key)),
                tuple(sorted(self.relations, key=_rel_key)),
            )
            self._cache["canon"] = key
        return key

    def __eq__(self, other) -> bool:
        if not isinstance(other, Presentation):
            return NotImplemented
        return self.canonical_key == other.canonical_key

    def __hash__(self) -> int:
        return hash(self.canonical_key)

    def __repr__(self) -> str:
        return f"Presentation(p={self.p}, dim={self.dim}, {len(self.generators)} gens, {len(self.relations)} rels)"

    def canonical(self) -> "Presentation":
        _, _, gens, rels = self.canonical_key
        return Presentation(self.p, gens, rels, dim=self.dim)

    def grade(self, gid: str) -> Point:
        return self._grade_of[gid]

    @property
    def is_empty(self) -> bool:
        return not self.generators

    def grades(self) -> list[Point]:
        return [g.grade for g in self.generators] + [r.grade for r in self.relations]

    # -- evaluation -------------------------------------------------------
    def _setup_index(self):
        self._gens = sorted(self.generators, key=_gen_key)
        self._rels = sorted(self.relations, key=_rel_key)
        self._axes = [sorted({pt[i] for pt in self.grades()}) for i in range(self.dim)]
        index = [{v: k for k, v in enumerate(ax)} for ax in self._axes]
        self._gen_rank = np.array(
            [[index[i][g.grade[i]] for i in range(self.dim)] for g in self._gens], dtype=np.int64
        ).reshape(len(self._gens), self.dim)
        self._rel_rank = np.array(
            [[index[i][r.grade[i]] for i in range(self.dim)] for r in self._rels], dtype=np.int64
        ).reshape(len(self._rels), self.dim)

    @property
    def support_axes(self) -> tuple[tuple[Fraction, ...], ...]:
        return tuple(tuple(ax) for ax in self._axes)

    def axis_key(self, i: int, v) -> int:
        """Index of the cell of support axis ``i`` containing ``v``."""
        return bisect_right(self._axes[i], v)

    def _key(self, x) -> tuple[int, ...]:
        if x is BOTTOM:
            return (0,) * self.dim
        key = self._keys.get(x)
        if key is None:
            if len(x) != self.dim:
                raise ValueError(f"point {x} has dimension {len(x)}, module has {self.dim}")
            key = tuple(bisect_right(ax, c) for ax, c in zip(self._axes, x))
            if len(self._keys) < 1 << 16:
                self._keys[x] = key
        return key

    def fiber(self, x) -> Fiber:
        """``M_x`` for a point x (BOTTOM gives the zero space)."""
        return self._fiber_at_key(self._key(x))

    def _fiber_at_key(self, key) -> Fiber:
        cache_key = ("fiber", key)
        fib = self._cache.get(cache_key)
        if fib is not None:
            return fib
        k = np.array(key, dtype=np.int64)
        gmask = np.all(self._gen_rank < k, axis=1) if self._gens else np.zeros(0, bool)
        rmask = np.all(self._rel_rank < k, axis=1) if self._rels else np.zeros(0, bool)
        gens = [self._gens[i] for i in np.flatnonzero(gmask)]
        rels = [self._rels[i] for i in np.flatnonzero(rmask)]
        pos = {g.id: i for i, g in enumerate(gens)}
        rel_matrix = el.zeros(len(gens), len(rels))
        for j, r in enumerate(rels):
            for gid, c in r.terms:
                rel_matrix[pos[gid], j] = c
        rows, pivots = el.rref(np.ascontiguousarray(rel_matrix.T), self.p)
        piv = set(pivots)
        free = tuple(i for i in range(len(gens)) if i not in piv)
        fib = Fiber(
            dim=len(free),
            basis=tuple(gens[i].id for i in free),
            rel_matrix=rel_matrix,
            generators=tuple(g.id for g in gens),
            key=tuple(key),
            _rows=rows,
            _pivots=tuple(pivots),
            _free=free,
        )
        self._cache[cache_key] = fib
        return fib

    def dimension(self, x) -> int:
        return self.fiber(x).dim

    def map(self, x, y) -> np.ndarray:
        """Matrix of the structure map ``M_x -> M_y`` (requires x <= y)."""
        if not leq(x, y):
            raise ValueError(f"structure map needs x <= y, got {x} and {y}")
        kx, ky = self._key(x), self._key(y)
        return self._map_keys(kx, ky)

    def _map_keys(self, kx, ky) -> np.ndarray:
        cache_key = ("map", kx, ky)
        mat = self._cache.get(cache_key)
        if mat is not None:
            return mat
        fx, fy = self._fiber_at_key(kx), self._fiber_at_key(ky)
        pos = {gid: i for i, gid in enumerate(fy.generators)}
        vecs = el.zeros(len(fy.generators), fx.dim)
        for j, gid in enumerate(fx.basis):
            vecs[pos[gid], j] = 1
        mat = fy.coordinates(vecs, self.p) if fy.generators else el.zeros(0, fx.dim)
        mat = np.ascontiguousarray(mat, dtype=el.DTYPE)
        mat.setflags(write=False)
        self._cache[cache_key] = mat
        return mat

    def class_of(self, gid: str, x) -> np.ndarray:
        """Coordinates of the class of generator ``gid`` in ``M_x`` (column vector)."""
        fib = self.fiber(x)
        pos = {g: i for i, g in enumerate(fib.generators)}
        if gid not in pos:
            raise ValueError(f"generator {gid!r} is not graded below {_fmt(x)}")
        vec = el.zeros(len(fib.generators), 1)
        vec[pos[gid], 0] = 1
        return fib.coordinates(vec, self.p)


def _is_normal(r: Relation, p: int) -> bool:
    ids = [t[0] for t in r.terms]
    return (
        isinstance(r.grade, tuple)
        and all(isinstance(c, Fraction) for c in r.grade)
        and ids == sorted(set(ids))
        and all(isinstance(c, int) and 0 < c < p for _, c in r.terms)
    )


def _fmt(pt) -> str:
    if pt is BOTTOM:
        return "BOTTOM"
    return "(" + ", ".join(str(c) for c in pt) + ")"


def evaluate(m: Presentation, x) -> Fiber:
    return m.fiber(x)


def structure_map(m: Presentation, x, y) -> np.ndarray:
    return m.map(x, y)


def translate(m: Presentation, eps) -> Presentation:
    """``M(eps)``: every grade shifted by ``-eps`` (coefficients unchanged)."""
    eps = rational(eps)
    gens = [(g.id, tuple(c - eps for c in g.grade)) for g in m.generators]
    rels = [Relation(tuple(c - eps for c in r.grade), r.terms) for r in m.relations]
    return Presentation(m.p, gens, rels, dim=m.dim)


def support_grid(m: Presentation) -> Grid | None:
    """Smallest grid containing all generator and relation grades (None if no generators)."""
    if m.is_empty:
        return None
    grid = m._cache.get("grid")
    if grid is None:
        grid = m._cache["grid"] = smallest_grid(m.grades())
    return grid


def free_module(n: int, p: int = 2, dim: int = 1) -> Presentation:
    """``F_d^n``: n generators at the origin, no relations."""
    origin = (Fraction(0),) * dim
    return Presentation(p, [(f"e{i}", origin) for i in range(n)], [], dim=dim)


@dataclass(frozen=True)
class PresentationBijection:
    """Generator bijection plus relation correspondence (indices into ``relations``)."""

    gen_map: Mapping[str, str]
    rel_corr: tuple[tuple[int, int], ...]

    def inverse(self) -> "PresentationBijection":
        return PresentationBijection(
            {v: k for k, v in self.gen_map.items()},
            tuple(sorted((b, a) for a, b in self.rel_corr)),
        )


def check_essentially_same(r1: Relation, r2: Relation, gen_map: Mapping[str, str]) -> bool:
    """Coefficients agree after renaming generators; grades are ignored."""
    renamed: dict[str, int] = {}
    for gid, c in r1.terms:
        if gid not in gen_map:
            return False
        renamed[gen_map[gid]] = c
    return renamed == dict(r2.terms)


def validate_bijection(
    b: PresentationBijection, m1: Presentation, m2: Presentation, require_surjective: bool = False
) -> None:
    """Raise :class:`InvalidBijection` naming the first violated condition."""
    ids1 = {g.id for g in m1.generators}
    ids2 = {g.id for g in m2.generators}
    if set(b.gen_map) != ids1:
        raise InvalidBijection("gen_map is not defined on exactly the generators of the first presentation")
    if set(b.gen_map.values()) != ids2 or len(set(b.gen_map.values())) != len(b.gen_map):
        raise InvalidBijection("gen_map is not a bijection onto the generators of the second presentation")
    n1, n2 = len(m1.relations), len(m2.relations)
    for i, j in b.rel_corr:
        if not (0 <= i < n1 and 0 <= j < n2):
            raise InvalidBijection(f"relation pair ({i}, {j}) is out of range")
        if not check_essentially_same(m1.relations[i], m2.relations[j], b.gen_map):
            raise InvalidBijection(f"relations ({i}, {j}) are not essentially the same")
    if require_surjective:
        if {i for i, _ in b.rel_corr} != set(range(n1)):
            raise InvalidBijection("relation correspondence does not cover every relation of the first presentation")
        if {j for _, j in b.rel_corr} != set(range(n2)):
            raise InvalidBijection("relation correspondence does not cover every relation of the second presentation")


def bijection_cost(
    b: PresentationBijection, m1: Presentation, m2: Presentation, require_surjective: bool = False
) -> Fraction:
    """Largest grade displacement over generators and paired relations."""
    validate_bijection(b, m1, m2, require_surjective)
    cost = Fraction(0)
    for gid, hid in b.gen_map.items():
        cost = max(cost, linf(m1.grade(gid), m2.grade(hid)))
    for i, j in b.rel_corr:
        cost = max(cost, linf(m1.relations[i].grade, m2.relations[j].grade))
    return cost


def identity_bijection(m: Presentation) -> PresentationBijection:
    return PresentationBijection({g.id: g.id for g in m.generators}, tuple((i, i) for i in range(len(m.relations))))
