#!/usr/bin/env python3
"""Compare the two quota policies the package implements.

The embedded selection state weights every feasible split of a winner
subset equally (uniform policy, see qverify.node_win_probs); the runtime
lottery instead rounds proportional shares by largest remainder
(exact_node_probs). This prints per-node win-probability summaries for
both so the gap between them is visible instead of folklore.

Usage:
  python scripts/quota_rounding_diagnostic.py
  python scripts/quota_rounding_diagnostic.py --ms 4,8 --demands 0.2,0.4
"""

import argparse
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from dheac import (  # noqa: E402
    CapacityError,
    Request,
    build_embedded,
    demand_to_kreq,
    exact_node_probs,
    generate_network,
    jain_index,
    node_win_probs,
    safe_select_k,
)


def int_list(text):
    return [int(t) for t in text.split(",") if t.strip()]


def float_list(text):
    return [float(t) for t in text.split(",") if t.strip()]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ms", type=int_list, default=[4, 8])
    ap.add_argument("--skews", type=float_list, default=[0.0, 0.5, 1.0, 2.0])
    ap.add_argument("--demands", type=float_list, default=[0.1, 0.2])
    ap.add_argument("--beta", type=float, default=0.10)
    args = ap.parse_args()

    header = (f"{'m':>3} {'skew':>5} {'demand':>7} {'K':>3} "
              f"{'jain_uniform':>13} {'jain_rounded':>13} {'max|dp|':>10}")
    print(header)
    print("-" * len(header))
    for m in args.ms:
        for skew in args.skews:
            net = generate_network(m, skew, 10 * m)
            for demand in args.demands:
                k_req = demand_to_kreq(demand, net.total)
                K = safe_select_k(k_req, net.caps, args.beta)
                rounded = exact_node_probs(net, Request(k_req), beta=args.beta)
                try:
                    state = build_embedded(net, k_req, K)
                except CapacityError:
                    print(f"{m:>3} {skew:>5g} {demand:>7g} {K:>3} "
                          f"{'(state too large)':>13}")
                    continue
                uniform = node_win_probs(state, net.caps)
                gap = float(np.abs(uniform - rounded).max())
                print(f"{m:>3} {skew:>5g} {demand:>7g} {K:>3} "
                      f"{jain_index(uniform):>13.6f} "
                      f"{jain_index(rounded):>13.6f} {gap:>10.2e}")
    print()
    print("uniform: every feasible split of a winner subset equally likely")
    print("rounded: largest-remainder quotas over a random winner order")


if __name__ == "__main__":
    main()
