#!/usr/bin/env python3
"""Deterministic pseudo-benchmark used by the demo and the test suite.

Prints one measurement line per metric, e.g. ``throughput: 123.45 Mbit/s``.
The value is a pure function of the supplied factor levels (a stable hash
plus fixed bumps), so re-running a plan reproduces identical outputs.

Options:
    --factor NAME=VALUE   repeatable; one per design factor
    --metric NAME         metric name to print (default: throughput)
    --unit UNIT           unit label (default: Mbit/s)
    --fail-when NAME=VALUE  exit nonzero when that factor level is active
    --sleep SECONDS       artificial run duration
"""

import argparse
import hashlib
import sys
import time


def stable_value(pairs: list[tuple[str, str]]) -> float:
    base = 100.0
    for name, value in sorted(pairs):
        digest = hashlib.sha256(f"{name}={value}".encode("utf-8")).digest()
        base += (int.from_bytes(digest[:4], "big") % 5000) / 100.0
    return round(base, 2)


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--factor", action="append", default=[])
    parser.add_argument("--metric", action="append", default=[])
    parser.add_argument("--unit", default="Mbit/s")
    parser.add_argument("--fail-when", default=None)
    parser.add_argument("--sleep", type=float, default=0.0)
    args = parser.parse_args()

    pairs = []
    for item in args.factor:
        name, _, value = item.partition("=")
        pairs.append((name, value))

    if args.fail_when:
        name, _, value = args.fail_when.partition("=")
        if (name, value) in pairs:
            print(f"induced failure for {name}={value}", file=sys.stderr)
            return 3

    if args.sleep > 0:
        time.sleep(args.sleep)

    metrics = args.metric or ["throughput"]
    for i, metric in enumerate(metrics):
        value = stable_value(pairs) + 1000.0 * i
        print(f"{metric}: {value} {args.unit}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
