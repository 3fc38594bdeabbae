#!/usr/bin/env python3
"""Benchmark the compiled interpreter core against the pure-Python twin.

Workloads: the corpus hello-world (call-heavy, string loop) and a batch of
generated programs, on both the clean and the aliasing machine.  Run:

    python3 benchmarks/bench_interp.py [--seeds N]
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from aliascert import _simpure  # noqa: E402
from aliascert.frontend import parse_program  # noqa: E402
from aliascert.machine import build_image  # noqa: E402
from aliascert.quickgen import generate_program  # noqa: E402

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def load_cores():
    cores = [("pure", _simpure)]
    try:
        from aliascert import _simcore

        cores.append(("compiled", _simcore))
    except ImportError:
        print("note: compiled core not built; benchmarking the pure core only")
    return cores


def bench(core, images, seeds: int) -> tuple[float, int]:
    steps = 0
    t0 = time.perf_counter()
    for image in images:
        out = core.run_clean_image(image, 10**6)
        steps += out.steps
        for seed in range(1, seeds + 1):
            out = core.run_alias_image(image, 10**6, seed)
            steps += out.steps
    return time.perf_counter() - t0, steps


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=200)
    ap.add_argument("--programs", type=int, default=50)
    args = ap.parse_args()

    images = [build_image(parse_program((CORPUS / "hello.s").read_text()))]
    images += [build_image(generate_program(seed)) for seed in range(args.programs)]

    results = {}
    for name, core in load_cores():
        dt, steps = bench(core, images, args.seeds)
        results[name] = (dt, steps)
        print(f"{name:>9}: {steps:>9} steps in {dt:7.3f}s "
              f"({steps / dt / 1e6:6.2f} M steps/s)")
    if "compiled" in results and "pure" in results:
        speedup = results["pure"][0] / results["compiled"][0]
        assert results["pure"][1] == results["compiled"][1], "cores disagree on steps"
        print(f"  speedup: {speedup:.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
