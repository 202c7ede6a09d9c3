#!/usr/bin/env python3
"""Retrieval-only baseline: caption each query with its nearest corpus text.

No training involved, so this finishes in seconds and gives the floor any
trained decoder has to clear.
"""

import argparse
import sys

from knight.benchmark import standard_benchmark
from knight.experiments import clipre_report


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--gamma", type=float, default=1.0)
    parser.add_argument("--sigma", type=float, default=0.05)
    args = parser.parse_args(argv)

    report = clipre_report(standard_benchmark(gamma=args.gamma, sigma=args.sigma))
    sys.stdout.write(report.to_json() + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
