"""Shared generators and independent oracles for the test-suite."""
from __future__ import annotations

import itertools
import random
from fractions import Fraction

from pmedit.barcodes import INF, Barcode
from pmedit.constructions import InterleavingPresentationPair
from pmedit.order import Grid, MonotoneMap, join_all, leq
from pmedit.presentations import Presentation, PresentationBijection

F = Fraction


# -- random presentations ---------------------------------------------------------

def random_presentation(rng: random.Random, d=None, p=None, max_gens=6, max_rels=6, top=3, max_offset=2):
    d = d or rng.randint(1, 3)
    p = p or rng.choice([2, 5])
    ngen = rng.randint(1, max_gens)
    gens = [(f"g{i}", tuple(F(rng.randint(0, top)) for _ in range(d))) for i in range(ngen)]
    rels = []
    for _ in range(rng.randint(0, max_rels)):
        k = rng.randint(1, min(3, ngen))
        chosen = rng.sample(gens, k)
        base = join_all([g for _, g in chosen])
        grade = tuple(c + rng.randint(0, max_offset) for c in base)
        terms = {gid: rng.randint(1, p - 1) for gid, _ in chosen}
        rels.append((grade, terms))
    return Presentation(p, gens, rels, dim=d)


def perturb(rng: random.Random, m: Presentation, c: Fraction):
    """Move every grade by at most c per coordinate; relations are lifted to stay valid."""
    steps = [-c, -c / 2, F(0), c / 2, c]
    new_gens = {g.id: tuple(x + rng.choice(steps) for x in g.grade) for g in m.generators}
    rels = []
    for r in m.relations:
        moved = [x + rng.choice(steps) for x in r.grade]
        for gid, _ in r.terms:
            moved = [max(a, b) for a, b in zip(moved, new_gens[gid])]
        rels.append((tuple(moved), dict(r.terms)))
    m2 = Presentation(m.p, list(new_gens.items()), rels, dim=m.dim)
    bij = PresentationBijection({g.id: g.id for g in m.generators}, tuple((i, i) for i in range(len(rels))))
    return m2, bij


# -- independent oracles -------------------------------------------------------------

def naive_rank(rows: list[list[int]], p: int) -> int:
    """Plain Gaussian elimination on Python lists."""
    rows = [[x % p for x in r] for r in rows]
    rank, ncols = 0, len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][c], p - 2, p)
        rows[rank] = [(x * inv) % p for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][c]:
                f = rows[i][c]
                rows[i] = [(a - f * b) % p for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def naive_dim(m: Presentation, x) -> int:
    gens = [g.id for g in m.generators if leq(g.grade, x)]
    rels = [r for r in m.relations if leq(r.grade, x)]
    if not gens:
        return 0
    rows = [[dict(r.terms).get(g, 0) for g in gens] for r in rels]
    return len(gens) - (naive_rank(rows, m.p) if rows else 0)


def brute_bottleneck(b1: Barcode, b2: Barcode):
    """Minimum over every partial matching, by exhaustive enumeration."""
    x, y = list(b1.bars), list(b2.bars)

    def cost(a, b):
        if (a[1] == INF) != (b[1] == INF):
            return INF
        dd = F(0) if a[1] == INF else abs(a[1] - b[1])
        return max(abs(a[0] - b[0]), dd)

    def half(a):
        return INF if a[1] == INF else (a[1] - a[0]) / 2

    best = INF
    n, m = len(x), len(y)
    for k in range(min(n, m) + 1):
        for xs in itertools.combinations(range(n), k):
            for ys in itertools.permutations(range(m), k):
                c = F(0)
                for i, j in zip(xs, ys):
                    c = max(c, cost(x[i], y[j]))
                for i in set(range(n)) - set(xs):
                    c = max(c, half(x[i]))
                for j in set(range(m)) - set(ys):
                    c = max(c, half(y[j]))
                best = min(best, c)
    return best


# -- barcodes and their presentations --------------------------------------------------

def interval(b, d=None, p=2, name="g") -> Presentation:
    rels = [((d,), {name: 1})] if d is not None else []
    return Presentation(p, [(name, (b,))], rels, dim=1)


def from_barcode(bars, p=2) -> Presentation:
    gens, rels = [], []
    for k, (b, d) in enumerate(bars):
        gens.append((f"b{k}", (b,)))
        if d != INF:
            rels.append(((d,), {f"b{k}": 1}))
    return Presentation(p, gens, rels, dim=1)


def random_barcode(rng: random.Random, n_max=3, denom=4, span=12, allow_inf=True):
    bars = []
    for _ in range(rng.randint(0, n_max)):
        b = F(rng.randint(0, span), denom)
        if allow_inf and rng.random() < 0.15:
            bars.append((b, INF))
        else:
            bars.append((b, b + F(rng.randint(1, span), denom)))
    return bars


def _dist(a, b):
    dd = F(0) if a[1] == INF else abs(a[1] - b[1])
    return max(abs(a[0] - b[0]), dd)


def matching_cost(B1, B2, matching):
    c = F(0)
    m1 = {i for i, _ in matching}
    m2 = {j for _, j in matching}
    for i, j in matching:
        c = max(c, _dist(B1[i], B2[j]))
    for i, bar in enumerate(B1):
        if i not in m1:
            c = max(c, (bar[1] - bar[0]) / 2)
    for j, bar in enumerate(B2):
        if j not in m2:
            c = max(c, (bar[1] - bar[0]) / 2)
    return c


def encode_pair(B1, B2, matching, delta, p=2) -> InterleavingPresentationPair:
    """Presentation pair at distance ``delta`` realising a δ-matching bar by bar.

    A matched pair shares a generator when births differ by exactly δ and
    otherwise gets one generator on each side glued by a relation in each of
    Y1, Y2; deaths are a Y1 relation at d1 and a Y2 relation at d2, unless
    one of them already produces both.  Unmatched bars (length <= 2δ) live
    entirely on their own side and are cut to nothing on the other.
    """
    delta = F(delta)
    W1, W2, Y1, Y2 = [], [], [], []
    matched1 = {i for i, _ in matching}
    matched2 = {j for _, j in matching}
    for k, (i, j) in enumerate(matching):
        (b1, d1), (b2, d2) = B1[i], B2[j]
        if b2 == b1 + delta:
            W1.append((f"m{k}", (b1,)))
            rep1 = rep2 = f"w1.m{k}"
        elif b1 == b2 + delta:
            W2.append((f"m{k}", (b2,)))
            rep1 = rep2 = f"w2.m{k}"
        else:
            W1.append((f"m{k}", (b1,)))
            W2.append((f"n{k}", (b2,)))
            rep1, rep2 = f"w1.m{k}", f"w2.n{k}"
            glue = {rep1: 1, rep2: p - 1}
            Y1.append(((b2 + delta,), glue))
            Y2.append(((b1 + delta,), glue))
        if d1 == INF:
            continue
        if d2 == d1 + delta:
            Y1.append(((d1,), {rep1: 1}))
        elif d1 == d2 + delta:
            Y2.append(((d2,), {rep2: 1}))
        else:
            Y1.append(((d1,), {rep1: 1}))
            Y2.append(((d2,), {rep2: 1}))
    for i, (b, d) in enumerate(B1):
        if i not in matched1:
            W1.append((f"u{i}", (b,)))
            Y1.append(((d,), {f"w1.u{i}": 1}))
            Y2.append(((b + delta,), {f"w1.u{i}": 1}))
    for j, (b, d) in enumerate(B2):
        if j not in matched2:
            W2.append((f"v{j}", (b,)))
            Y2.append(((d,), {f"w2.v{j}": 1}))
            Y1.append(((b + delta,), {f"w2.v{j}": 1}))
    return InterleavingPresentationPair.build(p, delta, W1, W2, Y1, Y2, dim=1)


def random_matching(rng: random.Random, B1, B2):
    """A random partial matching that pairs infinite bars with infinite bars."""
    inf1 = [i for i, b in enumerate(B1) if b[1] == INF]
    inf2 = [j for j, b in enumerate(B2) if b[1] == INF]
    rng.shuffle(inf2)
    matching = list(zip(inf1, inf2))
    fin1 = [i for i, b in enumerate(B1) if b[1] != INF]
    fin2 = [j for j, b in enumerate(B2) if b[1] != INF]
    rng.shuffle(fin2)
    for i, j in zip(fin1, fin2):
        if rng.random() < 0.7:
            matching.append((i, j))
    return matching


# -- random grid morphisms with adjoints -------------------------------------------------

def random_axis(rng: random.Random, size: int) -> tuple:
    return tuple(sorted(F(v, 2) for v in rng.sample(range(0, 20), size)))


def random_join_preserving(rng: random.Random, src: tuple, tgt: tuple) -> dict:
    """Monotone map between chains sending the bottom to the bottom.

    Between chains every monotone map preserves binary joins (max), so
    products of these preserve joins and the bottom on grids.
    """
    vals = sorted(rng.choice(tgt) for _ in src[1:])
    return dict(zip(src, (tgt[0], *vals)))


def random_grid_morphism(rng: random.Random, d=None, max_side=5):
    d = d or rng.randint(1, 3)
    P = Grid(tuple(random_axis(rng, rng.randint(1, max_side)) for _ in range(d)))
    Q = Grid(tuple(random_axis(rng, rng.randint(1, max_side)) for _ in range(d)))
    maps = [random_join_preserving(rng, P.axes[i], Q.axes[i]) for i in range(d)]
    return MonotoneMap.from_axis_maps(P, Q, maps)
