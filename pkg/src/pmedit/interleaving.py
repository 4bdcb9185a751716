"""ε-interleavings: witnesses, their verifier, search, and edits -> interleavings.

A witness stores ``F_p: M_p -> N_{p+ε}`` only at points p of the support
grid of M, and ``G_q: N_q -> M_{q+ε}`` only at points of the support grid of
N.  A natural map out of a grid-constructible module is determined by those
components: at any x it is ``N_{f+ε -> x+ε} · F_f · (M_{f -> x})^{-1}`` with
``f`` the floor of x.  The verifier uses exactly this extension.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from pmedit import exactlin as el
from pmedit.edits import (
    EditRecord,
    NotFound,
    _coefficient_stream,
    _fmt,
    natural_maps_basis,
    unpack,
    validate_edit,
)
from pmedit.order import BOTTOM, Grid, distortion, leq, rational, shift
from pmedit.presentations import Presentation, support_grid
from pmedit.report import ValidationReport

DEFAULT_BUDGET = 12


class BudgetExceeded(ValueError):
    pass


class InvalidEdit(ValueError):
    pass


@dataclass(eq=False)
class InterleavingWitness:
    eps: Fraction
    F: dict = field(default_factory=dict)
    G: dict = field(default_factory=dict)

    def __post_init__(self):
        self.eps = rational(self.eps)
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")


def _grid_points(m: Presentation) -> list:
    grid = support_grid(m)
    return [] if grid is None else list(grid.points)


def extend(comp: dict, src: Presentation, tgt: Presentation, eps: Fraction, x) -> np.ndarray:
    """Value at x of the natural family determined by its support-grid components."""
    p = src.p
    grid = support_grid(src)
    fl = BOTTOM if grid is None else grid.floor(x)
    if fl is BOTTOM:
        return el.zeros(tgt.dimension(shift(x, eps)), 0)
    back = el.inverse(src.map(fl, x), p)
    if back is None:
        raise ValueError(f"structure map {_fmt(fl)} -> {_fmt(x)} is not invertible")
    out = el.matmul(comp[fl], back, p)
    return el.matmul(tgt.map(shift(fl, eps), shift(x, eps)), out, p)


def verify_interleaving(m: Presentation, n: Presentation, w: InterleavingWitness) -> ValidationReport:
    rep = ValidationReport(f"interleaving at eps = {w.eps}")
    if m.p != n.p or m.dim != n.dim:
        rep.add("compatible", False, "modules differ in field or dimension")
        return rep
    p, eps = m.p, w.eps
    P, Q = support_grid(m), support_grid(n)

    def shapes(comp, grid, src, tgt, name):
        pts = [] if grid is None else list(grid.points)
        extra = set(comp) - set(pts)
        if extra:
            return f"{name} has components off the support grid, e.g. {_fmt(next(iter(extra)))}"
        for x in pts:
            if x not in comp:
                return f"{name} missing at {_fmt(x)}"
            want = (tgt.dimension(shift(x, eps)), src.dimension(x))
            if tuple(comp[x].shape) != want:
                return f"{name} at {_fmt(x)} has shape {tuple(comp[x].shape)}, expected {want}"
        return ""

    bad_f = shapes(w.F, P, m, n, "F")
    bad_g = shapes(w.G, Q, n, m, "G")
    rep.add("shapes", not bad_f and not bad_g, "; ".join(x for x in (bad_f, bad_g) if x))
    if bad_f or bad_g:
        return rep

    def natural(comp, grid, src, tgt):
        if grid is None:
            return ""
        for a, b in grid.covering_pairs:
            lhs = el.matmul(comp[b], src.map(a, b), p)
            rhs = el.matmul(tgt.map(shift(a, eps), shift(b, eps)), comp[a], p)
            if not el.equal(lhs, rhs, p):
                return f"square {_fmt(a)} <= {_fmt(b)} fails"
        return ""

    bad = natural(w.F, P, m, n)
    rep.add("F naturality", not bad, bad)
    bad = natural(w.G, Q, n, m)
    rep.add("G naturality", not bad, bad)

    def triangles(first, second, grid, src, tgt):
        if grid is None:
            return ""
        for x in grid.points:
            back = extend(second, tgt, src, eps, shift(x, eps))
            lhs = el.matmul(back, first[x], p)
            rhs = src.map(x, shift(x, 2 * eps))
            if not el.equal(lhs, rhs, p):
                return f"triangle at {_fmt(x)} fails"
        return ""

    bad = triangles(w.F, w.G, P, m, n)
    rep.add("M triangles", not bad, bad)
    bad = triangles(w.G, w.F, Q, n, m)
    rep.add("N triangles", not bad, bad)
    return rep


def relax_witness(m: Presentation, n: Presentation, w: InterleavingWitness, eps2) -> InterleavingWitness:
    """Compose with structure maps to get a witness at a larger ``eps2``."""
    eps2 = rational(eps2)
    if eps2 < w.eps:
        raise ValueError("can only relax to a larger eps")
    p = m.p
    F = {x: el.matmul(n.map(shift(x, w.eps), shift(x, eps2)), c, p) for x, c in w.F.items()}
    G = {x: el.matmul(m.map(shift(x, w.eps), shift(x, eps2)), c, p) for x, c in w.G.items()}
    return InterleavingWitness(eps2, F, G)


def identity_witness(m: Presentation) -> InterleavingWitness:
    comps = {x: el.identity(m.dimension(x)) for x in _grid_points(m)}
    return InterleavingWitness(Fraction(0), comps, dict(comps))


# -- edit -> interleaving -----------------------------------------------------

def interleave_from_edit(e: EditRecord, check: bool = True) -> InterleavingWitness:
    """An interleaving between ``e.src`` and ``e.dst`` at ``eps = distortion(e.f)``.

    With fp/fq the floors in P and Q:
      F_a = N_{fq -> a+ε} · W_fq · M_{fp -> g(fq)} · (M_{fp -> a})^{-1},  fp = ⌊a⌋_P, fq = ⌊a+ε⌋_Q
      G_b = M_{fp -> b+ε} · M_{g(fq) -> fp} · W_fq^{-1} · (N_{fq -> b})^{-1},  fq = ⌊b⌋_Q, fp = ⌊b+ε⌋_P
    f(fp) <= fq and g(fq) <= fp follow from the adjunction and the distortion bound.
    """
    if check:
        rep = validate_edit(e)
        if not rep.passed:
            raise InvalidEdit(rep.failures[0].line())
    M, N, p = e.src, e.dst, e.src.p
    eps = distortion(e.f)

    def inv(a):
        out = el.inverse(a, p)
        if out is None:
            raise InvalidEdit("non-invertible structure map or witness")
        return out

    F = {}
    for a in _grid_points(M):
        fp = e.P.floor(a)
        ae = shift(a, eps)
        if fp is BOTTOM:
            F[a] = el.zeros(N.dimension(ae), M.dimension(a))
            continue
        fq = e.Q.floor(ae)
        mat = inv(M.map(fp, a))
        mat = el.matmul(M.map(fp, e.g(fq)), mat, p)
        mat = el.matmul(e.witness[fq], mat, p)
        F[a] = el.matmul(N.map(fq, ae), mat, p)

    G = {}
    for b in _grid_points(N):
        fq = e.Q.floor(b)
        be = shift(b, eps)
        if fq is BOTTOM:
            G[b] = el.zeros(M.dimension(be), N.dimension(b))
            continue
        fp = e.P.floor(be)
        gq = e.g(fq)
        if fp is BOTTOM or not leq(gq, fp):
            raise InvalidEdit(f"g({_fmt(fq)}) is not below the floor of {_fmt(be)}")
        mat = inv(N.map(fq, b))
        mat = el.matmul(inv(e.witness[fq]), mat, p)
        mat = el.matmul(M.map(gq, fp), mat, p)
        G[b] = el.matmul(M.map(fp, be), mat, p)
    return InterleavingWitness(eps, F, G)


# -- brute-force search -------------------------------------------------------

def total_dimension(m: Presentation, n: Presentation) -> int:
    return sum(m.dimension(x) for x in _grid_points(m)) + sum(n.dimension(x) for x in _grid_points(n))


def _nat_space(src: Presentation, tgt: Presentation, eps):
    pts = _grid_points(src)
    grid = support_grid(src)
    covers = [] if grid is None else list(grid.covering_pairs)
    sdim = {x: src.dimension(x) for x in pts}
    tdim = {x: tgt.dimension(shift(x, eps)) for x in pts}
    return natural_maps_basis(
        pts, covers, sdim, tdim,
        src.map,
        lambda a, b: tgt.map(shift(a, eps), shift(b, eps)),
        src.p,
    )


def _solve_second(m, n, eps, F, layout_g, basis_g):
    """Given F, find G in the span of ``basis_g`` satisfying both triangle families."""
    p = m.p
    nvars = basis_g.shape[0]
    rows, rhs = [], []
    Q = support_grid(n)
    for a in _grid_points(m):
        y = shift(a, eps)
        target = m.map(a, shift(a, 2 * eps))
        fq = BOTTOM if Q is None else Q.floor(y)
        if fq is BOTTOM:
            # G-hat at y is zero, so the triangle forces the 2ε map to vanish
            if np.any(target % p):
                return None
            continue
        A = m.map(shift(fq, eps), shift(y, eps))
        back = el.inverse(n.map(fq, y), p)
        C = el.matmul(back, F[a], p)
        o, r, c = layout_g[fq]
        block = el.zeros(A.shape[0] * C.shape[1], nvars)
        if r * c:
            block[:, o : o + r * c] = np.kron(A, C.T) % p
        rows.append(block)
        rhs.append(target.reshape(-1, 1))
    for b in _grid_points(n):
        Fh = extend(F, m, n, eps, shift(b, eps))
        target = n.map(b, shift(b, 2 * eps))
        o, r, c = layout_g[b]
        block = el.zeros(Fh.shape[0] * c, nvars)
        if r * c:
            block[:, o : o + r * c] = np.kron(Fh, el.identity(c)) % p
        rows.append(block)
        rhs.append(target.reshape(-1, 1))
    if not rows:
        return unpack(layout_g, el.zeros(nvars, 1)[:, 0])
    A = el.matmul(np.concatenate(rows, axis=0), basis_g, p)
    b = np.concatenate(rhs, axis=0) % p
    y = el.solve(A, b, p)
    if y is None:
        return None
    vec = el.matmul(basis_g, y, p)[:, 0]
    return unpack(layout_g, vec)


def search_interleaving(
    m: Presentation,
    n: Presentation,
    eps,
    budget: int = DEFAULT_BUDGET,
    seed=None,
    samples: int = 256,
    enumeration_budget: int = 1 << 16,
):
    """First verifying ε-interleaving found, or :class:`NotFound`.

    Naturality is linear, so both component families range over null spaces.
    The smaller of the two spaces is enumerated (seeded samples first, then
    every element in a fixed order when affordable); for each candidate the
    triangle identities are linear in the other family and are solved exactly.
    """
    eps = rational(eps)
    if m.p != n.p or m.dim != n.dim:
        raise ValueError("modules differ in field or dimension")
    total = total_dimension(m, n)
    if total > budget:
        raise BudgetExceeded(f"total pointwise dimension {total} exceeds budget {budget}")
    p = m.p
    lf, bf = _nat_space(m, n, eps)
    lg, bg = _nat_space(n, m, eps)
    swap = p ** bg.shape[1] < p ** bf.shape[1]
    if swap:
        m, n = n, m
        lf, bf, lg, bg = lg, bg, lf, bf
    k = bf.shape[1]
    tried = set()
    for c, _ in _coefficient_stream(k, p, seed, samples if p**k > enumeration_budget else 0, enumeration_budget):
        key = c.tobytes()
        if key in tried:
            continue
        tried.add(key)
        F = unpack(lf, el.matmul(bf, c.reshape(-1, 1), p)[:, 0])
        G = _solve_second(m, n, eps, F, lg, bg)
        if G is None:
            continue
        w = InterleavingWitness(eps, G, F) if swap else InterleavingWitness(eps, F, G)
        a, b = (n, m) if swap else (m, n)
        if verify_interleaving(a, b, w).passed:
            return w
    if p**k <= enumeration_budget:
        return NotFound("provably-none", f"no interleaving extends any of the {p}^{k} natural maps")
    return NotFound("budget-exhausted", f"{len(tried)} of {p}^{k} natural maps tried")
