"""Line-oriented text formats: ``pmod``, ``ipres``, ``iwit`` and ``epath``.

Every document starts with ``<magic> 1``, ``field <p>`` and ``dim <d>``.
``#`` starts a comment, tokens are separated by whitespace, and rationals may
be written as integers, decimals or fractions.  Emission is canonical:
sorted content, reduced fractions, one space between tokens, trailing
newline.

    gen <id> <c1> ... <cd>
    rel <c1> ... <cd> : <coeff>*<id> ...
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from pmedit import exactlin as el
from pmedit.constructions import InterleavingPresentationPair
from pmedit.edits import CATEGORIES, DIRECTIONS, EditPath, EditRecord
from pmedit.interleaving import InterleavingWitness
from pmedit.order import FinitePoset, Grid, MonotoneMap, rational
from pmedit.presentations import Presentation, PresentationError, Relation

VERSION = 1
_ID_RE = re.compile(r"[A-Za-z0-9_.'\-]+\Z")
_TERM_RE = re.compile(r"(\d+)\*([A-Za-z0-9_.'\-]+)\Z")


class FormatError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message, self.line, self.column = message, line, column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


@dataclass
class _Line:
    no: int
    toks: list  # (column, text)

    @property
    def words(self) -> list[str]:
        return [t for _, t in self.toks]

    def col(self, k: int) -> int:
        return self.toks[k][0] if k < len(self.toks) else (self.toks[-1][0] + len(self.toks[-1][1]) if self.toks else 1)

    def fail(self, msg: str, k: int = 0):
        raise FormatError(msg, self.no, self.col(k))


def _lines(text: str) -> list[_Line]:
    out = []
    for no, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        toks = [(m.start() + 1, m.group()) for m in re.finditer(r"\S+", body)]
        if toks:
            out.append(_Line(no, toks))
    return out


def _rat(line: _Line, k: int) -> Fraction:
    try:
        return rational(line.words[k])
    except IndexError:
        line.fail("missing rational", k)
    except (ValueError, TypeError, ZeroDivisionError):
        line.fail(f"bad rational {line.words[k]!r}", k)


def _int(line: _Line, k: int) -> int:
    try:
        w = line.words[k]
    except IndexError:
        line.fail("missing integer", k)
    if not re.fullmatch(r"-?\d+", w):
        line.fail(f"bad integer {w!r}", k)
    return int(w)


def _header(lines: list[_Line], magic: str) -> tuple[int, int, int]:
    if len(lines) < 3:
        raise FormatError(f"truncated {magic} header", lines[-1].no if lines else 1, 1)
    first, fld, dim = lines[:3]
    if first.words != [magic, str(VERSION)]:
        first.fail(f"expected '{magic} {VERSION}'")
    if len(fld.words) != 2 or fld.words[0] != "field":
        fld.fail("expected 'field <p>'")
    p = _int(fld, 1)
    try:
        el.check_prime(p)
    except ValueError as exc:
        fld.fail(str(exc), 1)
    if len(dim.words) != 2 or dim.words[0] != "dim":
        dim.fail("expected 'dim <d>'")
    d = _int(dim, 1)
    if d < 1:
        dim.fail("dimension must be >= 1", 1)
    return p, d, 3


def _fmt(v) -> str:
    return str(v)


def _coords(pt) -> str:
    return " ".join(_fmt(c) for c in pt)


def _point(line: _Line, start: int, d: int) -> tuple:
    if len(line.words) < start + d:
        line.fail(f"expected {d} coordinates", len(line.words))
    return tuple(_rat(line, start + i) for i in range(d))


# -- presentation bodies -------------------------------------------------------

def _parse_gen(line: _Line, d: int):
    if len(line.words) != 2 + d:
        line.fail(f"'gen' takes an id and {d} coordinates")
    gid = line.words[1]
    if not _ID_RE.match(gid):
        line.fail(f"bad generator id {gid!r}", 1)
    return gid, _point(line, 2, d)


def _parse_rel(line: _Line, d: int, p: int):
    words = line.words
    if ":" not in words:
        line.fail("'rel' needs ':' between grade and terms")
    colon = words.index(":")
    if colon != 1 + d:
        line.fail(f"'rel' takes {d} coordinates before ':'", min(colon, len(words) - 1))
    grade = _point(line, 1, d)
    terms = []
    for k in range(colon + 1, len(words)):
        m = _TERM_RE.match(words[k])
        if not m:
            line.fail(f"bad term {words[k]!r}, expected <coeff>*<id>", k)
        terms.append((m.group(2), int(m.group(1))))
    return grade, terms, [(colon + 1 + j) for j in range(len(terms))]


def _build_presentation(p: int, d: int, gens, rels, where: _Line | None) -> Presentation:
    try:
        return Presentation(p, gens, rels, dim=d)
    except PresentationError as exc:
        msg = str(exc)
        m = re.match(r"relation (\d+) ", msg)
        if m and rels:
            line = rels[int(m.group(1))][2]
            ref = re.search(r"generator '(.+?)'", msg)
            k = next((k for k, w in enumerate(line.words) if ref and w.endswith("*" + ref.group(1))), 0)
            raise FormatError(msg, line.no, line.col(k)) from None
        m = re.match(r"duplicate generator id '(.+)'", msg)
        if m:
            for g in gens:
                if g[0] == m.group(1) and len(g) > 2:
                    raise FormatError(msg, g[2].no, g[2].col(1)) from None
        raise FormatError(msg, where.no if where else 0, 1) from None


def _parse_body(lines: list[_Line], p: int, d: int, where: _Line | None) -> Presentation:
    gens, rels = [], []
    for line in lines:
        head = line.words[0]
        if head == "gen":
            gid, grade = _parse_gen(line, d)
            gens.append((gid, grade, line))
        elif head == "rel":
            grade, terms, _ = _parse_rel(line, d, p)
            rels.append((grade, terms, line))
        else:
            line.fail(f"unexpected {head!r}")
    return _build_presentation(p, d, gens, rels, where)


def _emit_body(m: Presentation) -> list[str]:
    _, _, gens, rels = m.canonical_key
    out = [f"gen {g.id} {_coords(g.grade)}" for g in gens]
    for r in rels:
        terms = " ".join(f"{c}*{gid}" for gid, c in r.terms)
        out.append(f"rel {_coords(r.grade)} :" + (" " + terms if terms else ""))
    return out


def parse_pmod(text: str) -> Presentation:
    lines = _lines(text)
    p, d, k = _header(lines, "pmod")
    return _parse_body(lines[k:], p, d, lines[0])


def emit_pmod(m: Presentation) -> str:
    return "\n".join([f"pmod {VERSION}", f"field {m.p}", f"dim {m.dim}", *_emit_body(m)]) + "\n"


# -- ipres ------------------------------------------------------------------------

def parse_ipres(text: str) -> InterleavingPresentationPair:
    lines = _lines(text)
    p, d, k = _header(lines, "ipres")
    if k >= len(lines) or lines[k].words[0] != "eps":
        raise FormatError("expected 'eps <rational>'", lines[k].no if k < len(lines) else lines[-1].no, 1)
    if len(lines[k].words) != 2:
        lines[k].fail("expected 'eps <rational>'")
    eps = _rat(lines[k], 1)
    blocks = {"w1": [], "w2": [], "y1": [], "y2": []}
    current = None
    for line in lines[k + 1 :]:
        head = line.words[0]
        if head.endswith(":") and head[:-1] in blocks and len(line.words) == 1:
            current = head[:-1]
            continue
        if current is None:
            line.fail("content before the first block tag")
        if current in ("w1", "w2"):
            if head != "gen":
                line.fail(f"only 'gen' lines belong in block {current}")
            gid, grade = _parse_gen(line, d)
            blocks[current].append((gid, grade))
        else:
            if head != "rel":
                line.fail(f"only 'rel' lines belong in block {current}")
            grade, terms, cols = _parse_rel(line, d, p)
            for (gid, _), c in zip(terms, cols):
                if not (gid.startswith("w1.") or gid.startswith("w2.")):
                    line.fail(f"reference {gid!r} needs a 'w1.' or 'w2.' tag", c)
            blocks[current].append((grade, terms, line))
    try:
        return InterleavingPresentationPair.build(
            p, eps, blocks["w1"], blocks["w2"],
            [(g, t) for g, t, _ in blocks["y1"]],
            [(g, t) for g, t, _ in blocks["y2"]],
            dim=d,
        )
    except ValueError as exc:
        msg = str(exc)
        m = re.match(r"(y[12]) relation (\d+)", msg)
        if m:
            line = blocks[m.group(1)][int(m.group(2))][2]
            raise FormatError(msg, line.no, 1) from None
        raise FormatError(msg, lines[0].no, 1) from None


def emit_ipres(pair: InterleavingPresentationPair) -> str:
    out = [f"ipres {VERSION}", f"field {pair.p}", f"dim {pair.dim}", f"eps {_fmt(pair.eps)}"]
    for tag in ("w1", "w2"):
        out.append(tag + ":")
        for g in sorted(getattr(pair, tag.upper()), key=lambda g: (g.grade, g.id)):
            out.append(f"gen {g.id} {_coords(g.grade)}")
    for tag in ("y1", "y2"):
        out.append(tag + ":")
        for r in sorted(getattr(pair, tag.upper()), key=lambda r: (r.grade, r.terms)):
            terms = " ".join(f"{c}*{gid}" for gid, c in r.terms)
            out.append(f"rel {_coords(r.grade)} :" + (" " + terms if terms else ""))
    return "\n".join(out) + "\n"


# -- matrices -----------------------------------------------------------------------

def _parse_matrix_line(line: _Line, d: int, p: int, start: int = 1):
    words = line.words
    if len(words) < start + d + 3 or words[start + d] != ":":
        line.fail(f"expected {d} coordinates, ':' and '<rows> <cols> entries'")
    pt = _point(line, start, d)
    rows = _int(line, start + d + 1)
    cols = _int(line, start + d + 2)
    if rows < 0 or cols < 0:
        line.fail("negative matrix shape", start + d + 1)
    first = start + d + 3
    entries = [_int(line, k) for k in range(first, len(words))]
    if len(entries) != rows * cols:
        line.fail(f"expected {rows * cols} entries, got {len(entries)}", min(len(words) - 1, first + rows * cols))
    mat = np.array(entries, dtype=el.DTYPE).reshape(rows, cols) % p
    return pt, np.ascontiguousarray(mat)


def _emit_matrix(tag: str, pt, mat) -> str:
    r, c = mat.shape
    entries = " ".join(str(int(v)) for v in np.asarray(mat).reshape(-1))
    return f"{tag} {_coords(pt)} : {r} {c}" + (" " + entries if entries else "")


# -- iwit -----------------------------------------------------------------------------

def parse_iwit(text: str) -> tuple[InterleavingWitness, int, int]:
    """Returns the witness together with its field and dimension."""
    lines = _lines(text)
    p, d, k = _header(lines, "iwit")
    if k >= len(lines) or lines[k].words[0] != "eps" or len(lines[k].words) != 2:
        raise FormatError("expected 'eps <rational>'", lines[k].no if k < len(lines) else lines[-1].no, 1)
    eps = _rat(lines[k], 1)
    if eps < 0:
        lines[k].fail("eps must be nonnegative", 1)
    F, G = {}, {}
    for line in lines[k + 1 :]:
        head = line.words[0]
        if head not in ("F", "G"):
            line.fail(f"expected 'F' or 'G', got {head!r}")
        pt, mat = _parse_matrix_line(line, d, p)
        comp = F if head == "F" else G
        if pt in comp:
            line.fail(f"duplicate {head} component", 1)
        comp[pt] = mat
    return InterleavingWitness(eps, F, G), p, d


def emit_iwit(w: InterleavingWitness, p: int, d: int) -> str:
    out = [f"iwit {VERSION}", f"field {p}", f"dim {d}", f"eps {_fmt(w.eps)}"]
    out += [_emit_matrix("F", pt, w.F[pt]) for pt in sorted(w.F)]
    out += [_emit_matrix("G", pt, w.G[pt]) for pt in sorted(w.G)]
    return "\n".join(out) + "\n"


# -- epath ------------------------------------------------------------------------------

def _blocks(lines: list[_Line], start: int):
    """Split ``<kind> <k> [...] {`` ... ``}`` blocks."""
    k = start
    while k < len(lines):
        head = lines[k]
        if head.words[-1] != "{":
            head.fail("expected a block opening with '{'", len(head.words) - 1)
        body = []
        k += 1
        while k < len(lines) and lines[k].words != ["}"]:
            if lines[k].words[-1] == "{":
                lines[k].fail("nested block")
            body.append(lines[k])
            k += 1
        if k >= len(lines):
            head.fail("unterminated block")
        yield head, body
        k += 1


def _parse_axis_map(line: _Line, d: int) -> tuple[int, dict]:
    words = line.words
    if len(words) < 3 or words[2] != ":":
        line.fail(f"expected '{words[0]} <axis> : v->w ...'")
    i = _int(line, 1)
    if not 0 <= i < d:
        line.fail(f"axis {i} out of range", 1)
    amap = {}
    for k in range(3, len(words)):
        parts = re.split(r"->|→", words[k])
        if len(parts) != 2:
            line.fail(f"bad map entry {words[k]!r}, expected v->w", k)
        try:
            v, w = rational(parts[0]), rational(parts[1])
        except (ValueError, TypeError, ZeroDivisionError):
            line.fail(f"bad map entry {words[k]!r}", k)
        if v in amap:
            line.fail(f"value {v} mapped twice", k)
        amap[v] = w
    return i, amap


def _parse_edit(head: _Line, body: list[_Line], d: int, p: int, src: Presentation, dst: Presentation) -> EditRecord:
    category = None
    gridP, gridQ = {}, {}
    fax, gax = {}, {}
    pointsP, pointsQ, fmap, gmap = [], [], {}, {}
    witness = {}
    for line in body:
        w0 = line.words[0]
        if w0 == "category":
            if len(line.words) != 2 or line.words[1] not in CATEGORIES:
                line.fail("expected 'category 1D' or 'category JS'", 1)
            category = line.words[1]
        elif w0 in ("gridP", "gridQ"):
            if len(line.words) < 4 or line.words[2] != ":":
                line.fail(f"expected '{w0} <axis> : values'")
            i = _int(line, 1)
            if not 0 <= i < d:
                line.fail(f"axis {i} out of range", 1)
            target = gridP if w0 == "gridP" else gridQ
            if i in target:
                line.fail(f"axis {i} given twice", 1)
            target[i] = tuple(_rat(line, k) for k in range(3, len(line.words)))
        elif w0 in ("fax", "gax"):
            i, amap = _parse_axis_map(line, d)
            (fax if w0 == "fax" else gax)[i] = amap
        elif w0 in ("pointP", "pointQ"):
            if len(line.words) != 1 + d:
                line.fail(f"'{w0}' takes {d} coordinates")
            (pointsP if w0 == "pointP" else pointsQ).append(_point(line, 1, d))
        elif w0 in ("fmap", "gmap"):
            if len(line.words) != 2 + 2 * d or line.words[1 + d] != "->":
                line.fail(f"expected '{w0} <{d} coords> -> <{d} coords>'")
            (fmap if w0 == "fmap" else gmap)[_point(line, 1, d)] = _point(line, 2 + d, d)
        elif w0 == "W":
            pt, mat = _parse_matrix_line(line, d, p)
            if pt in witness:
                line.fail("duplicate witness component", 1)
            witness[pt] = mat
        else:
            line.fail(f"unexpected {w0!r} in edit block")
    if category is None:
        head.fail("edit block lacks a 'category' line")
    try:
        if category == "1D":
            for name, grid in (("gridP", gridP), ("gridQ", gridQ)):
                if set(grid) != set(range(d)):
                    head.fail(f"{name} must list every axis")
            P = Grid(tuple(gridP[i] for i in range(d)))
            Q = Grid(tuple(gridQ[i] for i in range(d)))
            for name, ax in (("fax", fax), ("gax", gax)):
                if set(ax) != set(range(d)):
                    head.fail(f"{name} must list every axis")
            f = MonotoneMap.from_axis_maps(P, Q, [fax[i] for i in range(d)])
            g = MonotoneMap.from_axis_maps(Q, P, [gax[i] for i in range(d)])
        else:
            P = FinitePoset(tuple(pointsP))
            Q = FinitePoset(tuple(pointsQ))
            f = MonotoneMap(P, Q, fmap)
            g = MonotoneMap(Q, P, gmap)
    except FormatError:
        raise
    except (ValueError, TypeError) as exc:
        head.fail(str(exc))
    return EditRecord(src, dst, P, Q, f, g, witness, category)


def parse_epath(text: str) -> EditPath:
    lines = _lines(text)
    p, d, k = _header(lines, "epath")
    nodes: dict[int, Presentation] = {}
    edits = []
    for head, body in _blocks(lines, k):
        w = head.words
        if w[0] == "node":
            if len(w) != 3:
                head.fail("expected 'node <k> {'")
            idx = _int(head, 1)
            if idx != len(nodes) or edits:
                head.fail(f"nodes must be numbered 0, 1, ... and precede edits; got {idx}", 1)
            nodes[idx] = _parse_body(body, p, d, head)
        elif w[0] == "edit":
            if len(w) != 4 or w[2] not in DIRECTIONS:
                head.fail("expected 'edit <k> fwd|rev {'")
            idx = _int(head, 1)
            if idx != len(edits):
                head.fail(f"edits must be numbered 0, 1, ...; got {idx}", 1)
            if idx + 1 >= len(nodes):
                head.fail(f"edit {idx} needs nodes {idx} and {idx + 1}", 1)
            a, b = nodes[idx], nodes[idx + 1]
            src, dst = (a, b) if w[2] == "fwd" else (b, a)
            edits.append((_parse_edit(head, body, d, p, src, dst), w[2]))
        else:
            head.fail(f"unknown block {w[0]!r}")
    if not nodes:
        raise FormatError("an edit path needs at least one node", lines[-1].no, 1)
    if len(edits) != len(nodes) - 1:
        raise FormatError(f"{len(nodes)} nodes need {len(nodes) - 1} edits, got {len(edits)}", lines[-1].no, 1)
    return EditPath(tuple(nodes[i] for i in range(len(nodes))), tuple(edits))


def emit_epath(path: EditPath) -> str:
    first = path.nodes[0]
    out = [f"epath {VERSION}", f"field {first.p}", f"dim {first.dim}"]
    for k, node in enumerate(path.nodes):
        out.append(f"node {k} {{")
        out += _emit_body(node)
        out.append("}")
    for k, (e, direction) in enumerate(path.steps):
        out.append(f"edit {k} {direction} {{")
        out.append(f"category {e.category}")
        if e.category == "1D":
            for i, ax in enumerate(e.P.axes):
                out.append(f"gridP {i} : " + " ".join(_fmt(v) for v in ax))
            for i, ax in enumerate(e.Q.axes):
                out.append(f"gridQ {i} : " + " ".join(_fmt(v) for v in ax))
            for tag, fn in (("fax", e.f), ("gax", e.g)):
                axes = fn.axis_maps if fn.axis_maps is not None else fn.with_axis_form().axis_maps
                if axes is None:
                    raise ValueError("1D edit with a map that is not a grid morphism cannot be emitted")
                for i, amap in enumerate(axes):
                    out.append(f"{tag} {i} : " + " ".join(f"{_fmt(v)}->{_fmt(amap[v])}" for v in sorted(amap)))
        else:
            out += [f"pointP {_coords(x)}" for x in sorted(e.P.points)]
            out += [f"pointQ {_coords(x)}" for x in sorted(e.Q.points)]
            out += [f"fmap {_coords(x)} -> {_coords(e.f(x))}" for x in sorted(e.P.points)]
            out += [f"gmap {_coords(x)} -> {_coords(e.g(x))}" for x in sorted(e.Q.points)]
        out += [_emit_matrix("W", q, e.witness[q]) for q in sorted(e.witness)]
        out.append("}")
    return "\n".join(out) + "\n"
