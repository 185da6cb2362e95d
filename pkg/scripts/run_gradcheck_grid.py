"""Sweep the gradient checker over the full architecture grid and print a table.

Usage: python scripts/run_gradcheck_grid.py [--input-dim N] [--hidden-dim N]
       [--frames N] [--tolerance X]

Covers lstm_layers 1-3, conv on/off, all three heads (18 configs), reporting
the max relative error per config and the worst parameter tensor overall.
"""

from __future__ import annotations

import argparse
import itertools
import sys
import time

from repseg.neural import ModelConfig, grad_check


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--input-dim", type=int, default=6)
    parser.add_argument("--hidden-dim", type=int, default=12)
    parser.add_argument("--frames", type=int, default=20)
    parser.add_argument("--tolerance", type=float, default=1e-4)
    args = parser.parse_args()

    print(f"{'layers':>6} {'conv':>5} {'head':>8} {'max rel err':>12} {'worst tensor':>14}")
    worst = 0.0
    worst_desc = ""
    failed = 0
    t0 = time.perf_counter()
    for layers, conv, head in itertools.product(
        (1, 2, 3), (True, False), ("binary", "density", "count")
    ):
        cfg = ModelConfig(
            input_dim=args.input_dim,
            hidden_dim=args.hidden_dim,
            lstm_layers=layers,
            conv_enabled=conv,
            head=head,
            seed=layers * 100 + int(conv) * 10,
        )
        report = grad_check(
            cfg, n_frames=args.frames, tolerance=args.tolerance, seed=layers
        )
        worst_tensor = max(report.per_tensor, key=report.per_tensor.get)
        print(
            f"{layers:>6} {str(conv):>5} {head:>8} {report.max_rel_error:>12.3e} "
            f"{worst_tensor:>14}"
        )
        if report.max_rel_error > worst:
            worst = report.max_rel_error
            worst_desc = f"layers={layers} conv={conv} head={head} tensor={worst_tensor}"
        if not report.passed:
            failed += 1
    elapsed = time.perf_counter() - t0

    print(f"\nworst overall: {worst:.3e} ({worst_desc})")
    print(f"tolerance {args.tolerance:g}, {elapsed:.1f}s, {failed} config(s) failed")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
