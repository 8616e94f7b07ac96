"""Time the exact-value search with the compiled kernel and the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Both backends must return the same value and witness; the script exits
non-zero if they disagree.
"""
from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction

from xorrep import kernels
from xorrep.game import TripartiteDistribution, XorGame, and_game, ghz, value_exact


def mod3_game() -> XorGame:
    syms = ("0", "1", "2")
    triples = [(x, y, z) for x in syms for y in syms for z in syms if (int(x) + int(y) + int(z)) % 3 != 1]
    dist = TripartiteDistribution.uniform(syms, syms, syms, triples)
    target = {t: (t[0] * t[1] + t[2]) % 3 for t in dist.support}
    return XorGame(dist, 3, target)


CASES = [
    ("ghz n=1", ghz(), 1),
    ("ghz n=2", ghz(), 2),
    ("mod-3 game n=1", mod3_game(), 1),
    ("and n=2", and_game(), 2),
]


def best_time(fn, repeat: int) -> tuple[float, object]:
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if "cython" not in kernels.available():
        print("compiled kernel not built; only the python backend is available")
    print(f"{'case':<18}{'python [s]':>12}{'cython [s]':>12}{'speedup':>10}  value")
    status = 0
    for name, game, n in CASES:
        tp, rp = best_time(lambda: value_exact(game, n, backend="python"), args.repeat)
        if "cython" in kernels.available():
            tc, rc = best_time(lambda: value_exact(game, n, backend="cython"), args.repeat)
            same = rc.value == rp.value and rc.witness.tables()[0].tolist() == rp.witness.tables()[0].tolist()
            if not same:
                status = 1
            print(f"{name:<18}{tp:>12.4f}{tc:>12.4f}{tp / tc:>10.1f}  {rp.value}{'' if same else '  MISMATCH'}")
        else:
            print(f"{name:<18}{tp:>12.4f}{'-':>12}{'-':>10}  {rp.value}")
        assert isinstance(rp.value, Fraction)
    return status


if __name__ == "__main__":
    sys.exit(main())
