#!/usr/bin/env python3
"""Shrink the retrieval corpus and measure caption quality at fixed k.

Subsamples are nested per seed (the 10% corpus is a subset of the 25%
one), so the curve isolates corpus size from membership churn.
"""

import argparse
import sys
from pathlib import Path

from knight.experiments import DEFAULT_PROPORTIONS, DEFAULT_SEEDS, sweep_corpus


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--proportions", type=float, nargs="+", default=list(DEFAULT_PROPORTIONS)
    )
    parser.add_argument("--seeds", type=int, nargs="+", default=list(DEFAULT_SEEDS))
    parser.add_argument("--k", type=int, default=5)
    parser.add_argument("--gamma", type=float, default=1.0)
    parser.add_argument("--beam", type=int, default=5)
    parser.add_argument("--out", default=None, help="write JSON here instead of stdout")
    args = parser.parse_args(argv)

    result = sweep_corpus(
        proportions=args.proportions,
        seeds=args.seeds,
        k=args.k,
        gamma=args.gamma,
        beam_width=args.beam,
    )
    doc = result.to_json() + "\n"
    if args.out:
        Path(args.out).write_text(doc, encoding="utf-8")
    else:
        sys.stdout.write(doc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
