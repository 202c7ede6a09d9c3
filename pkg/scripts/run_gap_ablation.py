#!/usr/bin/env python3
"""Neighbor prefixes vs direct decoding across modality-gap strengths.

Trains one k-NN model and one k=0 model per seed, then re-evaluates both
against queries displaced by each gamma. Emits a JSON object with
"knight" and "direct" sweep documents side by side.
"""

import argparse
import json
import sys
from pathlib import Path

from knight.experiments import DEFAULT_GAMMAS, DEFAULT_SEEDS, gap_ablation


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--gammas", type=float, nargs="+", default=list(DEFAULT_GAMMAS))
    parser.add_argument("--k", type=int, default=5)
    parser.add_argument("--seeds", type=int, nargs="+", default=list(DEFAULT_SEEDS))
    parser.add_argument("--beam", type=int, default=5)
    parser.add_argument("--out", default=None, help="write JSON here instead of stdout")
    args = parser.parse_args(argv)

    results = gap_ablation(gammas=args.gammas, k=args.k, seeds=args.seeds, beam_width=args.beam)
    doc = (
        json.dumps(
            {name: result.to_jsonable() for name, result in sorted(results.items())},
            sort_keys=True,
        )
        + "\n"
    )
    if args.out:
        Path(args.out).write_text(doc, encoding="utf-8")
    else:
        sys.stdout.write(doc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
