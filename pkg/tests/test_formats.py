import random
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import encode_pair, matching_cost, random_barcode, random_matching, random_presentation
from pmedit import formats
from pmedit.constructions import interleaving_to_path, easy_edit, translation_bijection
from pmedit.edits import EditPath, identity_edit, validate_path
from pmedit.formats import FormatError
from pmedit.interleaving import interleave_from_edit
from pmedit.order import FinitePoset, MonotoneMap, as_point
from pmedit.presentations import Presentation, translate

MINIMAL = "pmod 1\nfield 2\ndim 1\ngen g 0\nrel 2 : 1*g\n"


def test_minimal_pmod():
    m = formats.parse_pmod(MINIMAL)
    assert m == Presentation(2, [("g", (0,))], [((2,), {"g": 1})])
    assert formats.emit_pmod(m) == MINIMAL


def test_decimal_and_fraction_literals_emit_as_fractions():
    text = "pmod 1\nfield 3\ndim 2\n# comment\ngen a 0.25 1/2   # trailing\nrel 3/6 1 : 2*a\n"
    out = formats.emit_pmod(formats.parse_pmod(text))
    assert out == "pmod 1\nfield 3\ndim 2\ngen a 1/4 1/2\nrel 1/2 1 : 2*a\n"


def test_emission_is_sorted():
    text = "pmod 1\nfield 2\ndim 1\ngen z 0\ngen a 1\ngen b 0\nrel 3 : 1*a\nrel 2 : 1*b 1*z\n"
    out = formats.emit_pmod(formats.parse_pmod(text))
    assert out.splitlines()[3:] == ["gen b 0", "gen z 0", "gen a 1", "rel 2 : 1*b 1*z", "rel 3 : 1*a"]


@pytest.mark.parametrize(
    "text, line, column, fragment",
    [
        ("pmod 1\nfield 2\ndim 1\ngen g 3\nrel 2 : 1*g\n", 5, 9, "larger grade"),
        ("pmod 1\nfield 2\ndim 1\ngen g 0\nrel 2 : 1*h\n", 5, 9, "unknown generator"),
        ("pmod 1\nfield 4\ndim 1\n", 2, 7, "prime"),
        ("pmod 2\nfield 2\ndim 1\n", 1, 1, "pmod 1"),
        ("pmod 1\nfield 2\ndim 1\ngen g x\n", 4, 7, "bad rational"),
        ("pmod 1\nfield 2\ndim 2\ngen g 0\n", 4, 1, "2 coordinates"),
        ("pmod 1\nfield 2\ndim 1\ngen g 0\nrel 2 1*g\n", 5, None, ":"),
        ("pmod 1\nfield 2\n", 2, 1, "truncated"),
    ],
)
def test_pmod_errors_report_line_and_column(text, line, column, fragment):
    with pytest.raises(FormatError) as info:
        formats.parse_pmod(text)
    err = info.value
    assert err.line == line and fragment in str(err)
    if column is not None:
        assert err.column == column
    assert str(err).startswith(f"line {line}, column ")


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_pmod_roundtrip_random(seed):
    m = random_presentation(random.Random(seed))
    text = formats.emit_pmod(m)
    assert formats.parse_pmod(text) == m
    assert formats.emit_pmod(formats.parse_pmod(text)) == text


def test_large_random_pmod_roundtrip():
    rng = random.Random(50)
    gens = [(f"g{i}", (F(rng.randint(0, 40), rng.randint(1, 7)), F(rng.randint(0, 9)))) for i in range(50)]
    rels = []
    for _ in range(30):
        chosen = rng.sample(gens, 3)
        grade = tuple(max(c) + 1 for c in zip(*[g for _, g in chosen]))
        rels.append((grade, {gid: rng.randint(1, 4) for gid, _ in chosen}))
    m = Presentation(5, gens, rels)
    once = formats.emit_pmod(m)
    assert formats.emit_pmod(formats.parse_pmod(once)) == once


def test_ipres_roundtrip_and_tags():
    pair = encode_pair([(F(0), F(4))], [(F(1), F(5))], [(0, 0)], 1)
    text = formats.emit_ipres(pair)
    assert formats.parse_ipres(text) == pair
    assert formats.emit_ipres(formats.parse_ipres(text)) == text
    bad = text.replace("w1.m0", "m0", 1)
    with pytest.raises(FormatError, match="tag"):
        formats.parse_ipres(bad)


def test_ipres_grade_error_points_at_line():
    text = "ipres 1\nfield 2\ndim 1\neps 1\nw1:\ngen a 0\nw2:\ngen b 0\ny1:\nrel 1/2 : 1*w2.b\ny2:\n"
    with pytest.raises(FormatError) as info:
        formats.parse_ipres(text)
    assert info.value.line == 10


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_ipres_roundtrip_random(seed):
    rng = random.Random(seed)
    B1, B2 = random_barcode(rng, allow_inf=False), random_barcode(rng, allow_inf=False)
    matching = random_matching(rng, B1, B2)
    delta = matching_cost(B1, B2, matching) + F(rng.randint(1, 4), 4)
    pair = encode_pair(B1, B2, matching, delta)
    text = formats.emit_ipres(pair)
    assert formats.parse_ipres(text) == pair
    assert formats.emit_ipres(formats.parse_ipres(text)) == text


def test_iwit_roundtrip():
    m1 = Presentation(2, [("g", (0,))], [((4,), {"g": 1})])
    m2 = translate(m1, F(-1, 2))
    e = easy_edit(m1, m2, translation_bijection(m1, m2))
    w = interleave_from_edit(e)
    text = formats.emit_iwit(w, 2, 1)
    w2, p, d = formats.parse_iwit(text)
    assert (p, d) == (2, 1) and w2.eps == w.eps
    assert set(w2.F) == set(w.F) and all(np.array_equal(w2.F[x], w.F[x]) for x in w.F)
    assert formats.emit_iwit(w2, p, d) == text


def test_iwit_errors():
    base = "iwit 1\nfield 2\ndim 1\neps 1\n"
    with pytest.raises(FormatError, match="entries"):
        formats.parse_iwit(base + "F 0 : 1 1\n")
    with pytest.raises(FormatError, match="duplicate"):
        formats.parse_iwit(base + "F 0 : 1 1 1\nF 0 : 1 1 0\n")
    with pytest.raises(FormatError, match="'F' or 'G'"):
        formats.parse_iwit(base + "H 0 : 1 1 1\n")


def test_epath_roundtrip_from_pair():
    pair = encode_pair([(F(0), F(4)), (F(1), F(2))], [(F(1, 2), F(9, 2))], [(0, 0)], F(1, 2))
    path = interleaving_to_path(pair)
    text = formats.emit_epath(path)
    back = formats.parse_epath(text)
    assert formats.emit_epath(back) == text
    assert validate_path(back).passed
    assert [n == m for n, m in zip(back.nodes, path.nodes)] == [True] * len(path.nodes)


def test_epath_js_edit_roundtrip():
    m = Presentation(2, [("a", (0, 0))])
    P = FinitePoset(tuple(as_point(x) for x in [(0, 0), (1, 0), (0, 1), (1, 1)]))
    e = identity_edit(m, P)
    assert e.category == "JS"
    path = EditPath([m, m], [(e, "fwd")])
    text = formats.emit_epath(path)
    assert "pointP 1 1" in text and "fmap 0 1 -> 0 1" in text
    back = formats.parse_epath(text)
    assert formats.emit_epath(back) == text
    assert validate_path(back).passed


def test_epath_errors():
    node = "node 0 {\ngen g 0\n}\n"
    head = "epath 1\nfield 2\ndim 1\n"
    with pytest.raises(FormatError, match="need 1 edits"):
        formats.parse_epath(head + node + "node 1 {\ngen g 0\n}\n")
    with pytest.raises(FormatError, match="unterminated"):
        formats.parse_epath(head + "node 0 {\ngen g 0\n")
    with pytest.raises(FormatError, match="category"):
        formats.parse_epath(head + node + "node 1 {\ngen g 0\n}\nedit 0 fwd {\n}\n")
    with pytest.raises(FormatError, match="fwd"):
        formats.parse_epath(head + node + "node 1 {\ngen g 0\n}\nedit 0 up {\n}\n")
