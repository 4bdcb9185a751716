"""Edits between constructible modules and paths of edits.

An edit from M (constructible over P) to N (constructible over Q) is a
Galois connection f ⊣ g between P and Q together with an isomorphism
``M ∘ g ≅ N`` of Q-indexed modules.  The isomorphism is carried as explicit
matrices ``witness[q]: M_{g(q)} -> N_q`` so that checking an edit never
depends on a search.
"""
from __future__ import annotations

import itertools
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from pmedit import exactlin as el
from pmedit.order import (
    BOTTOM,
    FinitePoset,
    Grid,
    MonotoneMap,
    Point,
    Poset,
    check_galois,
    distortion,
    is_grid_morphism,
    is_js_object,
    right_adjoint,
    same_points,
    smallest_grid,
)
from pmedit.presentations import Presentation, free_module, support_grid
from pmedit.report import ValidationReport

CATEGORIES = ("1D", "JS")
DIRECTIONS = ("fwd", "rev")


class InvalidPath(ValueError):
    pass


@dataclass(eq=False)
class EditRecord:
    src: Presentation
    dst: Presentation
    P: Poset
    Q: Poset
    f: MonotoneMap
    g: MonotoneMap
    witness: dict = field(default_factory=dict)
    category: str = "1D"

    @property
    def cost(self) -> Fraction:
        return distortion(self.f)


@dataclass(eq=False)
class EditPath:
    nodes: tuple
    steps: tuple = ()

    def __post_init__(self):
        self.nodes = tuple(self.nodes)
        self.steps = tuple((e, d) for e, d in self.steps)


@dataclass(frozen=True)
class NotFound:
    """Failed search; ``reason`` is ``"provably-none"`` or ``"budget-exhausted"``."""

    reason: str
    detail: str = ""

    @property
    def provably_none(self) -> bool:
        return self.reason == "provably-none"

    def __bool__(self) -> bool:
        return False


# -- constructibility -------------------------------------------------------

def _probe_values(grid_axis, module_axis) -> list[Fraction]:
    vals = sorted(set(grid_axis) | set(module_axis))
    mids = [(a + b) / 2 for a, b in zip(grid_axis, grid_axis[1:])]
    outer = [vals[0] - 1, vals[-1] + 1] if vals else [Fraction(0)]
    return sorted(set(vals) | set(mids) | set(outer))


def check_constructible(m: Presentation, poset: Poset) -> tuple[bool, str]:
    """Whether ``M_x ≅ M_{floor(x)}`` via the structure map, and ``M_x = 0`` below P.

    Both sides are constant on the cells cut out by the axis values of P and
    of the presentation's support, so one probe per cell decides the question
    exactly.  Probes are the union-grid values, cell midpoints of P and one
    value outside on each side per axis, deduplicated by cell.
    """
    pts = list(poset.points)
    if not pts:
        return (m.is_empty, "" if m.is_empty else "empty poset but nonzero module")
    if poset.dim != m.dim:
        return False, f"poset dimension {poset.dim} differs from module dimension {m.dim}"
    grid = poset if isinstance(poset, Grid) else smallest_grid(pts)
    reps = []
    for i in range(m.dim):
        seen = {}
        for v in _probe_values(grid.axes[i], m.support_axes[i]):
            seen.setdefault((bisect_right(grid.axes[i], v), m.axis_key(i, v)), v)
        reps.append(list(seen.values()))
    for x in itertools.product(*reps):
        try:
            fl = poset.floor(x)
        except ValueError as exc:
            return False, str(exc)
        if fl is BOTTOM:
            if m.dimension(x) != 0:
                return False, f"nonzero at {_fmt(x)} below every poset point"
            continue
        mat = m.map(fl, x)
        if not el.is_invertible(mat, m.p):
            return False, f"structure map {_fmt(fl)} -> {_fmt(x)} is not an isomorphism"
    return True, ""


def _fmt(pt) -> str:
    if pt is BOTTOM:
        return "BOTTOM"
    return "(" + ", ".join(str(c) for c in pt) + ")"


# -- single edits -----------------------------------------------------------

def validate_edit(e: EditRecord) -> ValidationReport:
    """Run the five edit checks in order; every check is reported."""
    rep = ValidationReport("edit")
    p = e.src.p

    ok_s, why_s = check_constructible(e.src, e.P)
    ok_d, why_d = check_constructible(e.dst, e.Q)
    detail = "; ".join(x for x in (why_s and "src: " + why_s, why_d and "dst: " + why_d) if x)
    rep.add("1 constructibility", ok_s and ok_d and e.src.p == e.dst.p, detail or ("" if e.src.p == e.dst.p else "field mismatch"))

    ends_ok = (
        same_points(e.f.source, e.P)
        and same_points(e.f.target, e.Q)
        and same_points(e.g.source, e.Q)
        and same_points(e.g.target, e.P)
    )
    if not ends_ok:
        rep.add("2 galois", False, "f must map P -> Q and g must map Q -> P")
    elif not e.f.is_monotone():
        rep.add("2 galois", False, "f is not monotone")
    else:
        g2 = right_adjoint(e.f)
        if g2 is None:
            rep.add("2 galois", False, "f has no right adjoint")
        elif g2 != e.g:
            rep.add("2 galois", False, "g is not the right adjoint of f")
        else:
            rep.add("2 galois", check_galois(e.f, e.g), "")

    if e.category == "1D":
        grids = isinstance(e.P, Grid) and isinstance(e.Q, Grid)
        if not grids:
            rep.add("3 category", False, "1D edits need grids P and Q")
        else:
            ok = is_grid_morphism(e.f) and is_grid_morphism(e.g)
            rep.add("3 category", ok, "" if ok else "f or g is not a grid morphism")
    elif e.category == "JS":
        ok = is_js_object(e.P) and is_js_object(e.Q)
        rep.add("3 category", ok, "" if ok else "P or Q is not closed under joins")
    else:
        rep.add("3 category", False, f"unknown category {e.category!r}")

    shapes_ok, shape_detail = _witness_shapes(e)
    if not ends_ok or not shapes_ok:
        rep.add("4 naturality", False, shape_detail or "posets do not match the connection")
    else:
        bad = None
        for q, q2 in e.Q.covering_pairs:
            lhs = el.matmul(e.witness[q2], e.src.map(e.g(q), e.g(q2)), p)
            rhs = el.matmul(e.dst.map(q, q2), e.witness[q], p)
            if not el.equal(lhs, rhs, p):
                bad = (q, q2)
                break
        rep.add("4 naturality", bad is None, "" if bad is None else f"square {_fmt(bad[0])} <= {_fmt(bad[1])} fails")

    if not shapes_ok:
        rep.add("5 invertibility", False, shape_detail)
    else:
        bad_q = next((q for q in e.Q.points if not el.is_invertible(e.witness[q], p)), None)
        rep.add("5 invertibility", bad_q is None, "" if bad_q is None else f"witness at {_fmt(bad_q)} is singular")
    return rep


def _witness_shapes(e: EditRecord) -> tuple[bool, str]:
    for q in e.Q.points:
        if q not in e.witness:
            return False, f"witness missing at {_fmt(q)}"
        try:
            gq = e.g(q)
        except KeyError:
            return False, f"g undefined at {_fmt(q)}"
        want = (e.dst.dimension(q), e.src.dimension(gq))
        if tuple(e.witness[q].shape) != want:
            return False, f"witness at {_fmt(q)} has shape {tuple(e.witness[q].shape)}, expected {want}"
    return True, ""


def identity_edit(m: Presentation, poset: Poset | None = None) -> EditRecord:
    poset = poset if poset is not None else (support_grid(m) or _origin_grid(m.dim))
    ident = MonotoneMap.identity(poset)
    witness = {q: el.identity(m.dimension(q)) for q in poset.points}
    return EditRecord(m, m, poset, poset, ident, ident, witness, "1D" if isinstance(poset, Grid) else "JS")


def _origin_grid(dim: int) -> Grid:
    return Grid(tuple((Fraction(0),) for _ in range(dim)))


def edit_to_free(m: Presentation) -> EditRecord:
    """The edit collapsing the support grid onto the origin: M -> F^n, n = dim M(top)."""
    P = support_grid(m) or _origin_grid(m.dim)
    Q = _origin_grid(m.dim)
    origin = Q.points[0]
    f = MonotoneMap.from_axis_maps(P, Q, [{v: Fraction(0) for v in ax} for ax in P.axes])
    g = MonotoneMap.from_axis_maps(Q, P, [{Fraction(0): ax[-1]} for ax in P.axes])
    n = m.dimension(P.top)
    free = free_module(n, m.p, m.dim)
    return EditRecord(m, free, P, Q, f, g, {origin: el.identity(n)}, "1D")


def component(m: Presentation) -> int:
    """Rank of the free module in the path component of ``m``."""
    grid = support_grid(m)
    if grid is None:
        return 0
    return m.dimension(grid.top)


# -- paths ------------------------------------------------------------------

def _structure_errors(path: EditPath) -> list[str]:
    errs = []
    if not path.nodes:
        return ["a path needs at least one node"]
    if len(path.steps) != len(path.nodes) - 1:
        return [f"{len(path.nodes)} nodes need {len(path.nodes) - 1} steps, got {len(path.steps)}"]
    for k, (e, d) in enumerate(path.steps):
        a, b = path.nodes[k], path.nodes[k + 1]
        if d not in DIRECTIONS:
            errs.append(f"step {k}: unknown direction {d!r}")
            continue
        src, dst = (a, b) if d == "fwd" else (b, a)
        if e.src != src or e.dst != dst:
            errs.append(f"step {k}: edit does not connect nodes {k} and {k + 1} in direction {d}")
    return errs


def validate_path(path: EditPath) -> ValidationReport:
    rep = ValidationReport("path")
    errs = _structure_errors(path)
    rep.add("structure", not errs, "; ".join(errs))
    if errs:
        return rep
    for k, (e, _) in enumerate(path.steps):
        rep.extend(validate_edit(e), prefix=f"step {k}: ")
    rep.add("cost", True, str(sum((e.cost for e, _ in path.steps), Fraction(0))))
    return rep


def path_cost(path: EditPath, validate: bool = False) -> Fraction:
    """Sum of the distortions of the steps."""
    errs = _structure_errors(path)
    if errs:
        raise InvalidPath(errs[0])
    if validate:
        rep = validate_path(path)
        if not rep.passed:
            raise InvalidPath(rep.failures[0].line())
    return sum((e.cost for e, _ in path.steps), Fraction(0))


# -- modules over a finite poset and natural isomorphisms ---------------------

@dataclass(frozen=True, eq=False)
class IndexedModule:
    """A module over a finite poset: dimensions and maps along covering pairs."""

    poset: Poset
    p: int
    dims: Mapping[Point, int]
    maps: Mapping[tuple[Point, Point], np.ndarray]

    @classmethod
    def restrict(cls, m: Presentation, poset: Poset) -> "IndexedModule":
        dims = {q: m.dimension(q) for q in poset.points}
        maps = {(a, b): m.map(a, b) for a, b in poset.covering_pairs}
        return cls(poset, m.p, dims, maps)

    @classmethod
    def pullback(cls, m: Presentation, g: MonotoneMap) -> "IndexedModule":
        """``M ∘ g`` over the source poset of g."""
        poset = g.source
        dims = {q: m.dimension(g(q)) for q in poset.points}
        maps = {(a, b): m.map(g(a), g(b)) for a, b in poset.covering_pairs}
        return cls(poset, m.p, dims, maps)

    def dimension_vector(self) -> dict:
        return dict(self.dims)


def natural_maps_basis(
    points: Sequence[Point],
    covers: Sequence[tuple[Point, Point]],
    sdim: Mapping,
    tdim: Mapping,
    smap,
    tmap,
    p: int,
) -> tuple[dict, np.ndarray]:
    """Basis of the space of natural families ``X_q: S_q -> T_q``.

    Unknowns are the row-major entries of every ``X_q``; each covering pair
    ``q < q'`` contributes ``X_{q'} S_{qq'} - T_{qq'} X_q = 0``, written with
    ``vec(A X B) = (A ⊗ B^T) vec(X)``.  Returns per-point (offset, rows, cols)
    and a matrix whose columns span the solutions.
    """
    layout, off = {}, 0
    for q in points:
        r, c = tdim[q], sdim[q]
        layout[q] = (off, r, c)
        off += r * c
    blocks = []
    for a, b in covers:
        oa, ra, ca = layout[a]
        ob, rb, cb = layout[b]
        if rb * ca == 0:
            continue
        eq = el.zeros(rb * ca, off)
        S = smap(a, b)  # cb x ca
        T = tmap(a, b)  # rb x ra
        if rb * cb:
            eq[:, ob : ob + rb * cb] = np.kron(el.identity(rb), S.T)
        if ra * ca:
            eq[:, oa : oa + ra * ca] = (eq[:, oa : oa + ra * ca] - np.kron(T, el.identity(ca))) % p
        blocks.append(eq % p)
    if not blocks:
        return layout, el.identity(off)
    return layout, el.nullspace_basis(np.concatenate(blocks, axis=0), p)


def unpack(layout: Mapping, vec: np.ndarray) -> dict:
    return {q: vec[o : o + r * c].reshape(r, c) for q, (o, r, c) in layout.items()}


def _coefficient_stream(k: int, p: int, seed, samples: int, budget: int):
    """Random coefficient vectors, then (if affordable) every vector in a fixed order."""
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        yield rng.integers(0, p, size=k, dtype=np.int64), False
    if p**k <= budget:
        for c in itertools.product(range(p), repeat=k):
            yield np.array(c, dtype=np.int64), True


def find_natural_iso(
    a: IndexedModule,
    b: IndexedModule,
    seed=None,
    samples: int = 512,
    budget: int = 1 << 20,
):
    """An everywhere-invertible natural map ``a -> b`` or :class:`NotFound`."""
    if not same_points(a.poset, b.poset):
        raise ValueError("modules must be indexed by the same poset")
    if a.p != b.p:
        raise ValueError("modules over different fields")
    p = a.p
    points = list(a.poset.points)
    for q in points:
        if a.dims[q] != b.dims[q]:
            return NotFound("provably-none", f"dimensions differ at {_fmt(q)}: {a.dims[q]} vs {b.dims[q]}")
    covers = list(a.poset.covering_pairs)
    layout, basis = natural_maps_basis(points, covers, a.dims, b.dims, lambda x, y: a.maps[(x, y)], lambda x, y: b.maps[(x, y)], p)
    k = basis.shape[1]
    nonzero = [q for q in points if a.dims[q]]
    if not nonzero:
        return {q: el.zeros(0, 0) for q in points}
    if k == 0:
        return NotFound("provably-none", "no nonzero natural maps")
    # most constrained points first so failures are detected early
    nonzero.sort(key=lambda q: -a.dims[q])
    for c, exhaustive in _coefficient_stream(k, p, seed, samples, budget):
        vec = (basis @ c) % p
        comps = unpack(layout, vec)
        if all(el.is_invertible(comps[q], p) for q in nonzero):
            return comps
    if p**k <= budget:
        return NotFound("provably-none", f"all {p}^{k} natural maps are singular somewhere")
    return NotFound("budget-exhausted", f"{samples} samples from a space of size {p}^{k}")
