"""Success probability versus eps1 (eps2 = 10 eps1) and the classical-crossing thresholds.

Writes the sweep as CSV (one row per circuit, eps1, graph) and prints the
threshold eps1 of each circuit on each graph together with the
R3G2M2 / G5M5 threshold ratio.
Usage: python scripts/noise_sweep.py [--out sweep.csv] [--points 41] [--upper 0.02]
"""

import argparse

from nisqsearch.cli import main as cli_main
from nisqsearch.optimizer import baseline_for, find_threshold_eps
from nisqsearch.search import BenchmarkCircuitId
from nisqsearch.transpiler import get_graph


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="sweep.csv")
    parser.add_argument("--points", type=int, default=41)
    parser.add_argument("--upper", type=float, default=0.02)
    args = parser.parse_args()
    cli_main(["sweep", "--grid", f"0:{args.upper}:{args.points}", "--out", args.out])
    print(f"sweep written to {args.out}")
    for name in ("full6", "lagos_t"):
        graph = get_graph(name)
        thresholds = {}
        for cid in BenchmarkCircuitId:
            res = find_threshold_eps(cid, graph, baseline_for(cid))
            thresholds[cid] = res.eps1
            eps = "none" if res.eps1 is None else f"{res.eps1:.5f}"
            print(f"{name:<8} {cid.value:<10} baseline {baseline_for(cid):.5f}  threshold {eps}  [{res.flag}]")
        ratio = thresholds[BenchmarkCircuitId.R3G2M2] / thresholds[BenchmarkCircuitId.G5M5]
        print(f"{name:<8} threshold ratio R3G2M2 / G5M5 = {ratio:.3f}")


if __name__ == "__main__":
    main()
