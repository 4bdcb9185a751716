import random
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import naive_dim, random_presentation
from pmedit.constructions import InterleavingPresentationPair, family_at, translation_bijection
from pmedit.order import BOTTOM, as_point, leq
from pmedit.presentations import (
    InvalidBijection,
    Presentation,
    PresentationBijection,
    PresentationError,
    bijection_cost,
    check_essentially_same,
    evaluate,
    free_module,
    identity_bijection,
    make_relation,
    structure_map,
    support_grid,
    translate,
)


def two_gen():
    return Presentation(2, [("a", (0,)), ("b", (1,))], [((2,), {"a": 1, "b": 1}), ((3,), {"a": 1})])


def test_evaluate_examples():
    m = Presentation(2, [("g", (0, 0))], [((1, 1), {"g": 1})])
    assert evaluate(m, as_point((0, 0))).dim == 1
    assert evaluate(m, as_point((1, 1))).dim == 0
    m = Presentation(2, [("a", (0,)), ("b", (1,))], [((2,), {"a": 1, "b": 1})])
    assert m.dimension(as_point((2,))) == 1


def test_dims_of_two_generator_module():
    m = two_gen()
    assert [m.dimension(as_point((x,))) for x in ("0", "1", "2", "2.999", "3")] == [1, 2, 1, 1, 0]
    assert m.dimension(as_point((-1,))) == 0


def test_basis_is_non_pivot_generators():
    m = two_gen()
    fib = m.fiber(as_point((2,)))
    # rref of the single relation row [1 1] pivots on a, leaving b
    assert fib.basis == ("b",)


def test_structure_map_examples():
    m = Presentation(2, [("g", (0,))], [((2,), {"g": 1})])
    a, b, c = (as_point((v,)) for v in (0, 1, 2))
    assert structure_map(m, a, b).tolist() == [[1]]
    assert structure_map(m, a, c).shape == (0, 1)
    assert np.array_equal(structure_map(m, b, b), np.eye(1, dtype=np.int64))
    with pytest.raises(ValueError):
        structure_map(m, c, a)


def test_structure_map_sends_class_to_class():
    m = two_gen()
    x, y = as_point((1,)), as_point((2,))
    mp = structure_map(m, x, y)
    for g in ("a", "b"):
        assert np.array_equal(mp @ m.class_of(g, x) % 2, m.class_of(g, y))


def test_grade_condition_and_unknown_ids():
    with pytest.raises(PresentationError, match="larger grade"):
        Presentation(2, [("g", (3,))], [((2,), {"g": 1})])
    with pytest.raises(PresentationError):
        Presentation(2, [("g", (0,))], [((2,), {"h": 1})])
    with pytest.raises(PresentationError):
        Presentation(2, [("g", (0,)), ("g", (1,))], [])
    with pytest.raises(ValueError):
        Presentation(4, [("g", (0,))], [])


def test_make_relation_drops_zero_coefficients():
    r = make_relation((1,), {"a": 3, "b": 2}, 3)
    assert dict(r.terms) == {"b": 2}


def test_translate_examples():
    m = Presentation(2, [("g", (0,))], [((2,), {"g": 1})])
    assert translate(m, 0) == m
    t = translate(m, F(1, 2))
    assert t == Presentation(2, [("g", (F(-1, 2),))], [((F(3, 2),), {"g": 1})])
    assert translate(translate(m, F(1, 3)), F(1, 4)) == translate(m, F(7, 12))


def test_support_grid_examples():
    m = Presentation(2, [("g", (0, 0))], [((1, 2), {"g": 1})])
    assert support_grid(m).axes == ((0, 1), (0, 2))
    assert len(support_grid(Presentation(2, [("g", (3,))]))) == 1
    empty = Presentation(2, [], [], dim=2)
    assert support_grid(empty) is None
    assert empty.dimension(as_point((5, 5))) == 0


def test_bijection_cost_identity_and_translation():
    m = two_gen()
    assert bijection_cost(identity_bijection(m), m, m) == 0
    for eps in (F(1, 2), F(3), F(7, 5)):
        t = translate(m, eps)
        assert bijection_cost(translation_bijection(m, t), m, t) == eps


def test_split_translation_bijection_cost():
    eps = F(1)
    pair = InterleavingPresentationPair.build(
        2, eps,
        W1=[("a", (0, 0))], W2=[("b", (0, 1))],
        Y1=[((1, 2), {"w1.a": 1, "w2.b": 1})],
        Y2=[((2, 1), {"w1.a": 1})],
    )
    m, n = family_at(pair, 0), family_at(pair, eps)
    assert bijection_cost(translation_bijection(m, n), m, n) == eps


def test_invalid_bijections():
    m = two_gen()
    with pytest.raises(InvalidBijection, match="exactly the generators"):
        bijection_cost(PresentationBijection({"a": "a"}, ()), m, m)
    with pytest.raises(InvalidBijection, match="not a bijection"):
        bijection_cost(PresentationBijection({"a": "a", "b": "a"}, ()), m, m)
    with pytest.raises(InvalidBijection, match="essentially the same"):
        bijection_cost(PresentationBijection({"a": "a", "b": "b"}, ((0, 1),)), m, m)
    with pytest.raises(InvalidBijection, match="out of range"):
        bijection_cost(PresentationBijection({"a": "a", "b": "b"}, ((0, 5),)), m, m)
    with pytest.raises(InvalidBijection, match="cover"):
        bijection_cost(PresentationBijection({"a": "a", "b": "b"}, ((0, 0),)), m, m, require_surjective=True)


def test_check_essentially_same_examples():
    r = make_relation((2,), {"a": 1, "b": 1}, 2)
    assert check_essentially_same(r, make_relation((5,), {"a": 1, "b": 1}, 2), {"a": "a", "b": "b"})
    assert not check_essentially_same(r, make_relation((2,), {"a": 1}, 2), {"a": "a", "b": "b"})
    assert check_essentially_same(make_relation((0,), {"a": 2}, 3), make_relation((9,), {"x": 2}, 3), {"a": "x"})


def test_free_module():
    for n in range(4):
        m = free_module(n, 2, 2)
        assert m.dimension(as_point((0, 0))) == n
        assert m.dimension(as_point((-1, 0))) == 0


def test_canonical_equality_ignores_input_order():
    a = Presentation(2, [("x", (1,)), ("y", (0,))], [((2,), {"x": 1}), ((1,), {"y": 1})])
    b = Presentation(2, [("y", (0,)), ("x", (1,))], [((1,), {"y": 1}), ((2,), {"x": 1})])
    assert a == b and hash(a) == hash(b)


# -- property tests against the naive oracle ------------------------------------------------

seeds = st.integers(0, 10**6)


@settings(max_examples=80, deadline=None)
@given(seeds)
def test_dimension_matches_naive_oracle(seed):
    rng = random.Random(seed)
    m = random_presentation(rng)
    grid = support_grid(m)
    for x in grid.points:
        assert m.dimension(x) == naive_dim(m, x)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_functoriality_on_grid(seed):
    rng = random.Random(seed)
    m = random_presentation(rng, max_gens=4, max_rels=4, top=2, max_offset=1)
    pts = list(support_grid(m).points)
    for p in pts:
        for q in pts:
            if not leq(p, q):
                continue
            pq = structure_map(m, p, q)
            for r in pts:
                if leq(q, r):
                    rhs = structure_map(m, q, r) @ pq % m.p
                    assert np.array_equal(structure_map(m, p, r), rhs)


@settings(max_examples=60, deadline=None)
@given(seeds, st.fractions(-3, 3, max_denominator=4))
def test_translation_equivariance(seed, eps):
    rng = random.Random(seed)
    m = random_presentation(rng, max_gens=4, max_rels=4)
    t = translate(m, eps)
    for x in support_grid(t).points:
        shifted = tuple(c + eps for c in x)
        assert t.dimension(x) == m.dimension(shifted)
        assert t.fiber(x).basis == m.fiber(shifted).basis


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_constructibility_at_midpoints(seed):
    rng = random.Random(seed)
    m = random_presentation(rng, max_gens=4, max_rels=4)
    grid = support_grid(m)
    for _ in range(20):
        x = tuple(F(rng.randint(-4, 16), 4) for _ in range(m.dim))
        fl = grid.floor(x)
        if fl is BOTTOM:
            assert m.dimension(x) == 0
        else:
            assert m.dimension(x) == m.dimension(fl)
            assert m.fiber(x).basis == m.fiber(fl).basis


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_adding_a_relation_never_increases_dimension(seed):
    rng = random.Random(seed)
    m = random_presentation(rng, max_gens=4, max_rels=3)
    g = rng.choice(m.generators)
    extra = Presentation(m.p, [(x.id, x.grade) for x in m.generators],
                         [(r.grade, dict(r.terms)) for r in m.relations] + [(g.grade, {g.id: 1})], dim=m.dim)
    for x in support_grid(m).points:
        assert extra.dimension(x) <= m.dimension(x)
