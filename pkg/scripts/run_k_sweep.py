#!/usr/bin/env python3
"""Sweep neighbor count k on the frozen benchmark and dump one JSON doc.

Every (k, seed) pair trains its own decoder (~11 s on one CPU core), so
the default 7x3 grid takes a few minutes. Progress goes to stderr, the
result document to stdout or --out.
"""

import argparse
import sys
from pathlib import Path

from knight.experiments import DEFAULT_K_GRID, DEFAULT_SEEDS, sweep_k


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--k", type=int, nargs="+", default=list(DEFAULT_K_GRID))
    parser.add_argument("--seeds", type=int, nargs="+", default=list(DEFAULT_SEEDS))
    parser.add_argument("--gamma", type=float, default=1.0)
    parser.add_argument("--beam", type=int, default=5)
    parser.add_argument("--out", default=None, help="write JSON here instead of stdout")
    args = parser.parse_args(argv)

    result = sweep_k(k_values=args.k, seeds=args.seeds, gamma=args.gamma, beam_width=args.beam)
    doc = result.to_json() + "\n"
    if args.out:
        Path(args.out).write_text(doc, encoding="utf-8")
    else:
        sys.stdout.write(doc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
