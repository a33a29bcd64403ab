"""Compare swapping policies on homogeneous repeater chains.

For each chain length, prints the expected end-to-end throughput under
unheralded (parallel) swapping, sequential and doubling orders, and the
exhaustive-search optimum when the path is short enough.

Usage: python scripts/policy_comparison.py [--cap 2] [--p 0.8] [--q 0.5]
"""

import argparse

from qroute import (
    PathSpec,
    expected_throughput,
    heralded_path_distribution,
    optimal_order_search,
    unheralded_path_distribution,
)
from qroute.analytics import doubling_tree, sequential_tree


def chain_path(n, cap, p, q):
    return PathSpec(
        nodes=tuple(f"n{i}" for i in range(n + 1)),
        per_hop_capacity=(cap,) * n,
        per_hop_prob=(p,) * n,
        interior_swap_probs=(q,) * (n - 1),
    )


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cap", type=int, default=2, help="channels per edge")
    ap.add_argument("--p", type=float, default=0.8, help="link success probability")
    ap.add_argument("--q", type=float, default=0.5, help="swap success probability")
    ap.add_argument("--max-hops", type=int, default=10)
    ap.add_argument("--search-up-to", type=int, default=8,
                    help="run exhaustive order search for n <= this")
    args = ap.parse_args()

    print(f"cap={args.cap}  p={args.p}  q={args.q}")
    print(f"{'hops':>4}  {'parallel':>10}  {'sequential':>10}  "
          f"{'doubling':>10}  {'best order':>10}")
    for n in range(1, args.max_hops + 1):
        path = chain_path(n, args.cap, args.p, args.q)
        unheralded = expected_throughput(unheralded_path_distribution(path))
        seq = expected_throughput(
            heralded_path_distribution(path, sequential_tree(n))
        )
        dbl = expected_throughput(
            heralded_path_distribution(path, doubling_tree(n))
        )
        if n <= args.search_up_to:
            _, best = optimal_order_search(path)
            best_s = f"{best:10.6f}"
        else:
            best_s = f"{'-':>10}"
        print(f"{n:>4}  {unheralded:10.6f}  {seq:10.6f}  {dbl:10.6f}  {best_s}")


if __name__ == "__main__":
    main()
