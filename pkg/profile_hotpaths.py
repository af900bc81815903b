"""Focused profiler for relent hot paths.

Runs three workloads and prints a cProfile pstats summary for each so we
can see where time actually goes before optimising:

1. ``generate``: 2k random commuting squares (surjections, sections and
   fiber-split refinements).
2. ``entropy``: CE, its closed form and RE₂ on those squares.
3. ``suites``: 500 trials each of the vertical and LSC suites, the two
   slowest in ``relent check all``.

Run with:

    uv run python profile_hotpaths.py
"""

from __future__ import annotations

import cProfile
import io
import pstats
import time

from relent.finstat2 import ce, ce_closed_form, re2
from relent.harness import run_suite
from relent.randgen import GenConfig, InstanceGenerator

CFG = GenConfig(seed=0xC0FFEE, max_size=6)


def _profile(label: str, fn, *, top: int = 25) -> float:
    pr = cProfile.Profile()
    t0 = time.perf_counter()
    pr.enable()
    try:
        fn()
    finally:
        pr.disable()
    elapsed = time.perf_counter() - t0

    buf = io.StringIO()
    stats = pstats.Stats(pr, stream=buf).strip_dirs().sort_stats("cumulative")
    stats.print_stats(top)
    print(f"\n=== {label}  (wall {elapsed * 1000:.1f} ms) ===")
    print(buf.getvalue())

    buf = io.StringIO()
    pstats.Stats(pr, stream=buf).strip_dirs().sort_stats("tottime").print_stats(top)
    print(f"--- {label}  [tottime] ---")
    print(buf.getvalue())
    return elapsed


def workload_generate(n: int = 2_000) -> list:
    gen = InstanceGenerator(CFG)
    return [gen.random_two_morphism() for _ in range(n)]


def workload_entropy(squares: list) -> None:
    for sq in squares:
        ce(sq)
        ce_closed_form(sq)
        re2(sq)


def workload_suites(trials: int = 500) -> None:
    for name in ("ce_vertical", "re2_vertical", "re_lsc", "re2_lsc"):
        run_suite(name, trials, CFG)


def _best_of(label: str, fn, trials: int = 5) -> float:
    """Warm once, then return the best wall time of ``trials`` runs."""
    fn()  # warm
    best = float("inf")
    for _ in range(trials):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    print(f"{label}: best-of-{trials} {best * 1000:.2f} ms")
    return best


def main() -> None:
    squares = workload_generate()
    _profile("generate (2k squares)", workload_generate)
    _profile("entropy (2k squares x 3)", lambda: workload_entropy(squares))
    _profile("suites (4 x 500 trials)", workload_suites)

    print("\n=== best-of-5 wall time ===")
    _best_of("generate ", workload_generate)
    _best_of("entropy  ", lambda: workload_entropy(squares))


if __name__ == "__main__":
    main()
