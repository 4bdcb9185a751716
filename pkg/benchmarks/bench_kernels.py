"""Compare the compiled and the numpy row-reduction kernels.

    python3 benchmarks/bench_kernels.py [--repeat N]

Part one times ``rref`` alone on random matrices of several shapes; part two
times an end-to-end workload (easy edits, their validation and the derived
interleavings) with each kernel swapped in.  Results from both kernels are
checked to agree.
"""
from __future__ import annotations

import argparse
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from pmedit import _kernels_py, exactlin  # noqa: E402

try:
    from pmedit import _kernels as _kernels_c  # noqa: E402
except ImportError:
    _kernels_c = None

KERNELS = {"python": _kernels_py.rref_inplace}
if _kernels_c is not None:
    KERNELS["cython"] = _kernels_c.rref_inplace


def bench_rref(repeat: int):
    rng = np.random.default_rng(0)
    shapes = [(4, 4), (12, 12), (40, 60), (120, 120)]
    print(f"{'shape':>10} {'p':>4} " + " ".join(f"{k + ' (us)':>14}" for k in KERNELS) + "   speedup")
    for rows, cols in shapes:
        for p in (2, 5):
            mats = [rng.integers(0, p, size=(rows, cols), dtype=np.int64) for _ in range(repeat)]
            times, outs = {}, {}
            for name, fn in KERNELS.items():
                work = [m.copy() for m in mats]
                t0 = time.perf_counter()
                piv = [fn(w, p) for w in work]
                times[name] = (time.perf_counter() - t0) / repeat * 1e6
                outs[name] = (work, piv)
            if len(outs) == 2:
                (a, pa), (b, pb) = outs["python"], outs["cython"]
                assert all(np.array_equal(x, y) for x, y in zip(a, b)) and [list(x) for x in pa] == [list(x) for x in pb]
            speed = f"{times['python'] / times['cython']:8.1f}x" if "cython" in times else "       -"
            print(f"{rows:>4}x{cols:<5} {p:>4} " + " ".join(f"{times[k]:14.1f}" for k in KERNELS) + "  " + speed)


def workload(n: int):
    from helpers import perturb, random_presentation
    from pmedit.constructions import easy_edit
    from pmedit.edits import validate_edit
    from pmedit.interleaving import interleave_from_edit, verify_interleaving
    from pmedit.order import injectivity_radius

    rng = random.Random(9)
    ok = 0
    for _ in range(n):
        m1 = random_presentation(rng)
        inj = injectivity_radius(m1.grades())
        c = Fraction(1) if inj == float("inf") else inj / 2
        m2, b = perturb(rng, m1, c)
        e = easy_edit(m1, m2, b)
        ok += validate_edit(e).passed and verify_interleaving(e.src, e.dst, interleave_from_edit(e, check=False)).passed
    return ok


def bench_end_to_end(n: int):
    print(f"\nend-to-end: {n} easy edits, validation and interleavings")
    original = exactlin._rref_inplace
    results = {}
    try:
        for name, fn in KERNELS.items():
            exactlin._rref_inplace = fn
            t0 = time.perf_counter()
            ok = workload(n)
            results[name] = time.perf_counter() - t0
            print(f"  {name:>7}: {results[name]:7.2f} s ({ok}/{n} pass)")
    finally:
        exactlin._rref_inplace = original
    if len(results) == 2:
        print(f"  speedup: {results['python'] / results['cython']:.2f}x")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--edits", type=int, default=100)
    args = ap.parse_args()
    print(f"selected backend at import: {exactlin.BACKEND}")
    bench_rref(args.repeat)
    bench_end_to_end(args.edits)


if __name__ == "__main__":
    main()
