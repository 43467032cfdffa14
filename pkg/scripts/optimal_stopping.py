"""Optimal Grover stopping point for growing database sizes.

Prints j*/sqrt(N), the success probability at j* and the expected number of
oracle calls divided by sqrt(N).
"""

import math

from nisqsearch.optimizer import optimal_grover_stop


def main() -> None:
    print(f"{'n':>3} {'j*':>6} {'j*/sqrtN':>10} {'P(j*)':>8} {'E[calls]/sqrtN':>15}")
    for n in range(4, 23, 2):
        N = 2**n
        r = optimal_grover_stop(N)
        j = r.best.blocks[0][1]
        print(f"{n:>3} {j:>6} {j / math.sqrt(N):>10.5f} {r.probability:>8.5f} {r.expected_depth / math.sqrt(N):>15.5f}")


if __name__ == "__main__":
    main()
