"""Command-line interface.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on input
errors.  ``PMEDIT_SEED`` supplies the default seed for randomized search.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from pmedit import formats
from pmedit.barcodes import barcode_1d, bottleneck
from pmedit.constructions import interleaving_to_path, pair_endpoint_check
from pmedit.edits import NotFound, component, path_cost, validate_path
from pmedit.interleaving import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    InvalidEdit,
    interleave_from_edit,
    search_interleaving,
    verify_interleaving,
)
from pmedit.order import as_point
from pmedit.presentations import support_grid

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None


def _load(path: str, parser):
    try:
        return parser(_read(path))
    except formats.FormatError as exc:
        raise InputError(f"{path}: {exc}") from None


def _write(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _coords(pt) -> str:
    return "(" + ", ".join(str(c) for c in pt) + ")"


def _point_arg(s: str, d: int):
    parts = [t for t in s.replace(",", " ").split() if t]
    if len(parts) != d:
        raise InputError(f"--at needs {d} coordinates, got {len(parts)}")
    try:
        return as_point(parts)
    except (ValueError, TypeError) as exc:
        raise InputError(f"--at: {exc}") from None


def _default_seed() -> int:
    raw = os.environ.get("PMEDIT_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"PMEDIT_SEED must be an integer, got {raw!r}") from None


def _fmt_dist(v) -> str:
    return "inf" if v == float("inf") else str(v)


# -- subcommands --------------------------------------------------------------------

def cmd_validate(a) -> int:
    m = _load(a.pmod, formats.parse_pmod)
    print(f"valid: field {m.p}, dim {m.dim}, {len(m.generators)} generators, {len(m.relations)} relations")
    return EXIT_OK


def cmd_eval(a) -> int:
    m = _load(a.pmod, formats.parse_pmod)
    x = _point_arg(a.at, m.dim)
    fib = m.fiber(x)
    print(f"point {_coords(x)}")
    print(f"dim {fib.dim}")
    print("basis " + " ".join(fib.basis))
    return EXIT_OK


def cmd_dims(a) -> int:
    m = _load(a.pmod, formats.parse_pmod)
    grid = support_grid(m)
    if grid is None:
        print("empty module")
        return EXIT_OK
    for x in grid.points:
        print(f"{_coords(x)} {m.dimension(x)}")
    return EXIT_OK


def _barcode(path):
    m = _load(path, formats.parse_pmod)
    if m.dim != 1:
        raise InputError(f"{path}: barcodes need dim 1")
    return barcode_1d(m)


def cmd_barcode(a) -> int:
    for b, d in _barcode(a.pmod):
        print(f"[{b}, {_fmt_dist(d)})")
    return EXIT_OK


def cmd_bottleneck(a) -> int:
    print(_fmt_dist(bottleneck(_barcode(a.a), _barcode(a.b))))
    return EXIT_OK


def cmd_edit_verify(a) -> int:
    path = _load(a.epath, formats.parse_epath)
    rep = validate_path(path)
    print(rep.render())
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_edit_cost(a) -> int:
    path = _load(a.epath, formats.parse_epath)
    rep = validate_path(path)
    if not rep.passed:
        print(rep.render())
        return EXIT_FAIL
    print(path_cost(path))
    return EXIT_OK


def cmd_edit_to_interleaving(a) -> int:
    path = _load(a.epath, formats.parse_epath)
    if not 0 <= a.step < len(path.steps):
        raise InputError(f"--step must be in [0, {len(path.steps)})")
    e, _ = path.steps[a.step]
    try:
        w = interleave_from_edit(e)
    except InvalidEdit as exc:
        print(f"FAIL edit {a.step}: {exc}")
        return EXIT_FAIL
    _write(formats.emit_iwit(w, e.src.p, e.src.dim), a.output)
    return EXIT_OK


def cmd_interleaving_verify(a) -> int:
    m = _load(a.m, formats.parse_pmod)
    n = _load(a.n, formats.parse_pmod)
    w, p, d = _load(a.iwit, formats.parse_iwit)
    if (p, d) != (m.p, m.dim):
        raise InputError("witness header does not match the modules")
    rep = verify_interleaving(m, n, w)
    print(rep.render())
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_path_from_pair(a) -> int:
    pair = _load(a.ipres, formats.parse_ipres)
    path = interleaving_to_path(pair)
    _write(formats.emit_epath(path), a.output)
    return EXIT_OK


def cmd_pair_check(a) -> int:
    pair = _load(a.ipres, formats.parse_ipres)
    m = _load(a.m, formats.parse_pmod)
    n = _load(a.n, formats.parse_pmod)
    rep = pair_endpoint_check(pair, m, n, seed=_default_seed())
    print(rep.render())
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_component(a) -> int:
    print(component(_load(a.pmod, formats.parse_pmod)))
    return EXIT_OK


def cmd_search(a) -> int:
    m = _load(a.m, formats.parse_pmod)
    n = _load(a.n, formats.parse_pmod)
    if (m.p, m.dim) != (n.p, n.dim):
        raise InputError("modules differ in field or dimension")
    try:
        eps = as_point([a.eps])[0]
    except (ValueError, TypeError) as exc:
        raise InputError(f"--eps: {exc}") from None
    seed = a.seed if a.seed is not None else _default_seed()
    try:
        res = search_interleaving(m, n, eps, budget=a.budget, seed=seed)
    except BudgetExceeded as exc:
        raise InputError(str(exc)) from None
    if isinstance(res, NotFound):
        print(f"not found ({res.reason}): {res.detail}")
        return EXIT_FAIL
    print(f"found at eps = {eps}", file=sys.stderr)
    _write(formats.emit_iwit(res, m.p, m.dim), a.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pmedit", description="Presentations, edits and interleavings of persistence modules.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, *args, help=None):
        sp = sub.add_parser(name, help=help)
        for arg in args:
            sp.add_argument(arg)
        sp.set_defaults(func=fn)
        return sp

    add("validate", cmd_validate, "pmod", help="parse and check a presentation")
    add("eval", cmd_eval, "pmod", help="dimension and basis at a point").add_argument("--at", required=True)
    add("dims", cmd_dims, "pmod", help="dimensions over the support grid")
    add("barcode", cmd_barcode, "pmod", help="barcode of a one-parameter module")
    add("bottleneck", cmd_bottleneck, "a", "b", help="bottleneck distance of two one-parameter modules")
    add("edit-verify", cmd_edit_verify, "epath", help="validate every edit of a path")
    add("edit-cost", cmd_edit_cost, "epath", help="total distortion of a validated path")
    sp = add("edit-to-interleaving", cmd_edit_to_interleaving, "epath", help="interleaving witness from one edit")
    sp.add_argument("--step", type=int, required=True)
    sp.add_argument("-o", "--output")
    add("interleaving-verify", cmd_interleaving_verify, "m", "n", "iwit", help="check an interleaving witness")
    add("path-from-pair", cmd_path_from_pair, "ipres", help="edit path from an interleaved presentation pair").add_argument("-o", "--output")
    add("pair-check", cmd_pair_check, "ipres", "m", "n", help="check that a pair presents two modules")
    add("component", cmd_component, "pmod", help="rank of the free module in the path component")
    sp = add("search-interleaving", cmd_search, "m", "n", help="brute-force interleaving search on tiny inputs")
    sp.add_argument("--eps", required=True)
    sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("-o", "--output")
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
