"""Depth of the six benchmark circuits on all-to-all and T-shaped hardware.

Prints one row per circuit with the published depths and whether each value
lies in its accepted band. Usage: python scripts/depth_table.py [--swap-mode native]
"""

import argparse

from nisqsearch.cli import transpile_report
from nisqsearch.search import BenchmarkCircuitId, SearchProblem
from nisqsearch.transpiler import get_graph


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--swap-mode", default="cnot", choices=("cnot", "native"))
    args = parser.parse_args()
    problem = SearchProblem.default()
    graphs = [get_graph("lagos_t"), get_graph("full6")]
    print(f"{'circuit':<12}" + "".join(f"{g.name:>26}" for g in graphs))
    for cid in BenchmarkCircuitId:
        cells = []
        for g in graphs:
            r = transpile_report(cid, g, problem, args.swap_mode)
            mark = {True: "ok", False: "OUT", None: "-"}[r["pass"]]
            cells.append(f"{r['depth']:>5} (ref {r['reference']}, swaps {r['swaps']:>2}) {mark:>3}")
        print(f"{cid.value:<12}" + "".join(f"{c:>26}" for c in cells))


if __name__ == "__main__":
    main()
