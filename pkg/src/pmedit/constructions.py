"""From small perturbations of presentations to edits, and from interleaved
presentation pairs to certified edit paths.

``easy_edit`` turns a presentation bijection whose cost is below the
injectivity radius of the first presentation into a single grid edit.
``interleaving_to_path`` slides an interleaved pair ⟨W1, W2 | Y1, Y2⟩ through
the family F_t and cuts [0, ε] into steps short enough for ``easy_edit``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from pmedit import exactlin as el
from pmedit.edits import (
    EditPath,
    EditRecord,
    IndexedModule,
    NotFound,
    find_natural_iso,
    validate_edit,
)
from pmedit.order import (
    Grid,
    MonotoneMap,
    Point,
    as_point,
    check_galois,
    injectivity_radius,
    leq,
    linf,
    rational,
    scaled_coordinates,
    shift,
    smallest_grid,
)
from pmedit.presentations import (
    Generator,
    Presentation,
    PresentationBijection,
    Relation,
    bijection_cost,
    make_relation,
)
from pmedit.report import ValidationReport

TAGS = ("w1", "w2")


class HypothesisViolation(ValueError):
    """The bijection is too expensive for the easy-edit construction."""


# -- easy edit ----------------------------------------------------------------

def _unique_within(axis: tuple, v: Fraction, c: Fraction):
    hits = [u for u in axis if abs(u - v) <= c]
    return hits[0] if len(hits) == 1 else None


def easy_edit(m1: Presentation, m2: Presentation, b: PresentationBijection) -> EditRecord:
    """Single (1D)^d edit between m1 and m2 of distortion at most ``cost(b)``.

    P is the smallest grid on the grades of m1 and Q the smallest grid on the
    grades of m1 shifted up by the cost c together with the grades of m2.
    β(p) = p + c and α(q) is the unique point of P within c of q (per axis);
    α ⊣ β.  Sending the class of g to the class of b(g) is an isomorphism
    m1_p -> m2_{p+c}; its inverse is the witness.  The edit goes from m2 to
    m1: src = m2 over Q, dst = m1 over P, f = α, g = β.
    """
    if m1.p != m2.p or m1.dim != m2.dim:
        raise ValueError("presentations differ in field or dimension")
    c = bijection_cost(b, m1, m2, require_surjective=True)
    grades1 = m1.grades()
    inj = injectivity_radius(grades1)
    if not c < inj:
        raise HypothesisViolation(f"cost {c} is not below the injectivity radius {inj}")
    p, d = m1.p, m1.dim
    if not grades1:
        origin = Grid(tuple((Fraction(0),) for _ in range(d)))
        ident = MonotoneMap.identity(origin)
        return EditRecord(m2, m1, origin, origin, ident, ident, {origin.points[0]: el.zeros(0, 0)}, "1D")
    P = smallest_grid(grades1)
    Q = smallest_grid([shift(x, c) for x in grades1] + m2.grades())
    beta_axes = [{u: u + c for u in ax} for ax in P.axes]
    alpha_axes = []
    for i, ax in enumerate(Q.axes):
        amap = {}
        for v in ax:
            u = _unique_within(P.axes[i], v, c)
            if u is None:
                raise HypothesisViolation(f"no unique grid value within {c} of {v} on axis {i}")
            amap[v] = u
        alpha_axes.append(amap)
    alpha = MonotoneMap.from_axis_maps(Q, P, alpha_axes)
    beta = MonotoneMap.from_axis_maps(P, Q, beta_axes)

    witness = {}
    for x in P.points:
        xc = shift(x, c)
        fib = m1.fiber(x)
        cols = [m2.class_of(b.gen_map[gid], xc) for gid in fib.basis]
        T = np.concatenate(cols, axis=1) if cols else el.zeros(m2.dimension(xc), 0)
        W = el.inverse(T, p)
        if W is None:
            raise HypothesisViolation(f"generator bijection does not induce an isomorphism at {x}")
        witness[x] = W
    return EditRecord(m2, m1, Q, P, alpha, beta, witness, "1D")


def easy_edit_claims(e: EditRecord, cost) -> ValidationReport:
    """Independent checks of the three claims behind an easy edit.

    C1: every q has exactly one point of P within ``cost`` (exhaustive scan),
    and α picks it.  C2: α ⊣ β.  C3: dimensions agree along β and the
    witness squares commute.
    """
    cost = rational(cost)
    rep = ValidationReport("easy-edit claims")
    small, big = e.Q, e.P  # m1's grid, the shifted/union grid
    Ppts, Qpts = list(small.points), list(big.points)
    (rp, rq), den = scaled_coordinates([Ppts, Qpts], small.dim)
    # near[q, p]: ||p - q||_inf <= cost, over every pair
    near = np.all(np.abs(rq[:, None, :] - rp[None, :, :]) <= math.floor(cost * den), axis=2)
    counts = near.sum(axis=1)
    bad = None
    for j, q in enumerate(Qpts):
        if counts[j] != 1 or e.f(q) != Ppts[int(np.argmax(near[j]))]:
            bad = (q, int(counts[j]))
            break
    rep.add("C1 alpha total and single-valued", bad is None, "" if bad is None else f"at {bad[0]}: {bad[1]} candidates")
    rep.add("C2 alpha left adjoint to beta", check_galois(e.f, e.g))
    p = e.src.p
    bad = None
    for x in small.points:
        if e.dst.dimension(x) != e.src.dimension(e.g(x)):
            bad = f"dimension mismatch at {x}"
            break
    if bad is None:
        for a, b in small.covering_pairs:
            lhs = el.matmul(e.witness[b], e.src.map(e.g(a), e.g(b)), p)
            rhs = el.matmul(e.dst.map(a, b), e.witness[a], p)
            if not el.equal(lhs, rhs, p):
                bad = f"square {a} <= {b} fails"
                break
    rep.add("C3 N after beta equals M", bad is None, bad or "")
    return rep


def translation_bijection(m1: Presentation, m2: Presentation) -> PresentationBijection:
    """Identity on generator ids and on relation positions."""
    if len(m1.relations) != len(m2.relations):
        raise ValueError("relation counts differ")
    return PresentationBijection({g.id: g.id for g in m1.generators}, tuple((i, i) for i in range(len(m1.relations))))


# -- interleaved presentation pairs --------------------------------------------

@dataclass(frozen=True, eq=False)
class InterleavingPresentationPair:
    """⟨W1, W2 | Y1, Y2⟩ at distance ε.

    Relation terms name generators with a set tag, ``"w1.<id>"`` or
    ``"w2.<id>"``.  Y1 may use a W1 generator below its grade and a W2
    generator whose grade plus ε is below it; Y2 symmetrically.
    """

    p: int
    dim: int
    eps: Fraction
    W1: tuple
    W2: tuple
    Y1: tuple
    Y2: tuple

    @classmethod
    def build(cls, p: int, eps, W1: Iterable = (), W2: Iterable = (), Y1: Iterable = (), Y2: Iterable = (), dim: int | None = None):
        el.check_prime(p)
        eps = rational(eps)
        if eps < 0:
            raise ValueError("eps must be nonnegative")
        w1 = tuple(Generator(str(i), as_point(g)) for i, g in W1)
        w2 = tuple(Generator(str(i), as_point(g)) for i, g in W2)
        y1 = tuple(make_relation(r[0], r[1], p) for r in Y1)
        y2 = tuple(make_relation(r[0], r[1], p) for r in Y2)
        dims = {len(x.grade) for x in w1 + w2 + y1 + y2}
        if dim is not None:
            dims.add(dim)
        if len(dims) != 1:
            raise ValueError("pair needs a single ambient dimension")
        pair = cls(p, dims.pop(), eps, w1, w2, y1, y2)
        pair._check()
        return pair

    @property
    def canonical_key(self):
        def gens(ws):
            return tuple(sorted(ws, key=lambda g: (g.grade, g.id)))

        def rels(ys):
            return tuple(sorted(ys, key=lambda r: (r.grade, r.terms)))

        return (self.p, self.dim, self.eps, gens(self.W1), gens(self.W2), rels(self.Y1), rels(self.Y2))

    def __eq__(self, other):
        if not isinstance(other, InterleavingPresentationPair):
            return NotImplemented
        return self.canonical_key == other.canonical_key

    def __hash__(self):
        return hash(self.canonical_key)

    def _check(self):
        for tag, gens in (("w1", self.W1), ("w2", self.W2)):
            ids = [g.id for g in gens]
            if len(set(ids)) != len(ids):
                raise ValueError(f"duplicate generator id in {tag}")
        grade = {f"w1.{g.id}": g.grade for g in self.W1}
        grade.update({f"w2.{g.id}": g.grade for g in self.W2})
        for block, own in (("y1", "w1"), ("y2", "w2")):
            for k, r in enumerate(getattr(self, block.upper())):
                for gid, _ in r.terms:
                    if gid not in grade:
                        raise ValueError(f"{block} relation {k} references unknown generator {gid!r}")
                    lift = Fraction(0) if gid.startswith(own + ".") else self.eps
                    if not leq(shift(grade[gid], lift), r.grade):
                        raise ValueError(f"{block} relation {k}: generator {gid!r} is graded too high")


def family_at(pair: InterleavingPresentationPair, t) -> Presentation:
    """F_t: W1 and Y1 raised by t, W2 and Y2 raised by ε - t."""
    t = rational(t)
    if not 0 <= t <= pair.eps:
        raise ValueError(f"t = {t} outside [0, {pair.eps}]")
    s = pair.eps - t
    gens = [(f"w1.{g.id}", shift(g.grade, t)) for g in pair.W1]
    gens += [(f"w2.{g.id}", shift(g.grade, s)) for g in pair.W2]
    rels = [Relation(shift(r.grade, t), r.terms) for r in pair.Y1]
    rels += [Relation(shift(r.grade, s), r.terms) for r in pair.Y2]
    return Presentation(pair.p, gens, rels, dim=pair.dim)


def _grades(pair):
    a = [g.grade for g in pair.W1] + [r.grade for r in pair.Y1]
    b = [g.grade for g in pair.W2] + [r.grade for r in pair.Y2]
    return a, b


def radius_at(pair: InterleavingPresentationPair, t) -> Fraction:
    t = rational(t)
    if not 0 <= t <= pair.eps:
        raise ValueError(f"t = {t} outside [0, {pair.eps}]")
    a, b = _grades(pair)
    s = pair.eps - t
    return injectivity_radius([shift(x, t) for x in a] + [shift(x, s) for x in b])


def breakpoints(pair: InterleavingPresentationPair) -> list[Fraction]:
    """Times in (0, ε) where a coordinate of the t-side meets one of the (ε-t)-side."""
    a, b = _grades(pair)
    eps = pair.eps
    out = set()
    for i in range(pair.dim):
        for u in {x[i] for x in a}:
            for v in {y[i] for y in b}:
                t = (v + eps - u) / 2
                if 0 < t < eps:
                    out.add(t)
    return sorted(out)


@dataclass(frozen=True)
class Schedule:
    """Times 0 = t_0 < ... < t_k = ε; ``steps[i]`` is the source side of [t_i, t_{i+1}]."""

    times: tuple
    steps: tuple

    @property
    def total(self) -> Fraction:
        return sum((b - a for a, b in zip(self.times, self.times[1:])), Fraction(0))


def schedule(pair: InterleavingPresentationPair) -> Schedule:
    """Cover [0, ε] by steps each shorter than the radius at its source end.

    Mandatory times are 0, ε and the breakpoints; each gap takes one step if
    it is shorter than the radius at either end and is bisected otherwise.
    Radii are positive at every time (coinciding coordinates do not count) and
    continuous away from the mandatory times, so bisection terminates.
    """
    if pair.eps <= 0:
        raise ValueError("a schedule needs eps > 0")
    radius = {}

    def r(t):
        if t not in radius:
            radius[t] = radius_at(pair, t)
        return radius[t]

    times, steps = [Fraction(0)], []
    mandatory = [Fraction(0)] + breakpoints(pair) + [pair.eps]
    for lo, hi in zip(mandatory, mandatory[1:]):
        stack = [(lo, hi)]
        while stack:
            a, b = stack.pop()
            if b - a < r(a):
                steps.append("forward")
            elif b - a < r(b):
                steps.append("backward")
            else:
                mid = (a + b) / 2
                stack.append((mid, b))
                stack.append((a, mid))
                continue
            times.append(b)
    return Schedule(tuple(times), tuple(steps))


def interleaving_to_path(pair: InterleavingPresentationPair) -> EditPath:
    """Edit path F_0 -> ... -> F_ε along :func:`schedule`; its cost is ε."""
    if pair.eps == 0:
        return EditPath((family_at(pair, 0),), ())
    sched = schedule(pair)
    nodes = [family_at(pair, t) for t in sched.times]
    steps = []
    for k, kind in enumerate(sched.steps):
        a, b = nodes[k], nodes[k + 1]
        if kind == "forward":
            # source F_a: the edit runs F_b -> F_a, against the path order
            steps.append((easy_edit(a, b, translation_bijection(a, b)), "rev"))
        else:
            steps.append((easy_edit(b, a, translation_bijection(b, a)), "fwd"))
    return EditPath(tuple(nodes), tuple(steps))


def pair_endpoint_check(pair: InterleavingPresentationPair, m: Presentation, n: Presentation, seed=0) -> ValidationReport:
    """Whether the endpoints F_0 and F_ε present m and n."""
    rep = ValidationReport("pair endpoints")
    for name, t, target in (("M side", Fraction(0), m), ("N side", pair.eps, n)):
        end = family_at(pair, t)
        if end.p != target.p or end.dim != target.dim:
            rep.add(name, False, "field or dimension differs")
            continue
        grades = end.grades() + target.grades()
        if not grades:
            rep.add(name, True, "both empty")
            continue
        grid = smallest_grid(grades)
        res = find_natural_iso(IndexedModule.restrict(end, grid), IndexedModule.restrict(target, grid), seed=seed)
        if isinstance(res, NotFound):
            rep.add(name, False, f"{res.reason}: {res.detail}")
        else:
            rep.add(name, True, f"isomorphic over a grid of {len(grid)} points")
    return rep
