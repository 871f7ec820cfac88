"""Time the compiled visibility-scan kernel against the NumPy fallback.

The scan enumerates every coherent-input amplitude combination on a
radius/angle grid and keeps the most visible ones; it dominates the cost
of classical_visibility_bound. Run from the repository root:

    python3 benchmarks/bench_kernels.py [--repeats 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from triquart import kernels, quarter_mz, tritter_mz
from triquart.fringes import RADIUS_GRID, THETA_GRID


def _time_scan(spec, occupations, backend, repeats):
    S = spec.splitter().matrix
    pm = spec.modes_with_role("unknown")[0] - 1
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        scores, _ = kernels.coarse_scan(
            S, pm, occupations, RADIUS_GRID, THETA_GRID, top_k=20, backend=backend
        )
        best = min(best, time.perf_counter() - t0)
    return best, float(scores.max())


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument(
        "--quarter",
        action="store_true",
        help="also run the four-mode scan (slow on the python backend)",
    )
    args = parser.parse_args()

    cases = [(tritter_mz(), (2, 1, 0))]
    if args.quarter:
        cases.append((quarter_mz(), (2, 1, 1, 0)))

    print(f"available backends: {', '.join(kernels.available_backends())}")
    for spec, occ in cases:
        print(f"\n{spec.splitter_kind} outcome {occ}:")
        base = None
        for backend in kernels.available_backends():
            seconds, top = _time_scan(spec, occ, backend, args.repeats)
            note = ""
            if base is None:
                base = seconds
            else:
                note = f"  ({base / seconds:.1f}x vs {kernels.available_backends()[0]})" \
                    if seconds < base else f"  ({seconds / base:.1f}x slower)"
            print(f"  {backend:>7}: {seconds * 1e3:9.1f} ms  best score {top:.6f}{note}")


if __name__ == "__main__":
    main()
