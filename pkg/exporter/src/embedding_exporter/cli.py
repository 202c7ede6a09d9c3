"""`embedding-exporter`: encode a manifest and write a KNEM file."""

import argparse
import json
import sys

from .encoders import available_encoders
from .errors import ExporterError
from .export import ExportJob, export_embeddings


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="embedding-exporter",
        description="Encode captions or images with a pretrained dual encoder "
        "and write the embeddings as a KNEM matrix plus an id sidecar.",
    )
    parser.add_argument("--manifest", required=True, help='JSONL of {"id", "text"|"path"}')
    parser.add_argument(
        "--encoder", default="clip-vit-b32", help=f"one of: {', '.join(available_encoders())}"
    )
    parser.add_argument("--out", required=True, help="output KNEM path")
    parser.add_argument("--batch-size", type=int, default=32)
    args = parser.parse_args(argv)

    try:
        job = ExportJob(
            manifest=args.manifest,
            encoder=args.encoder,
            out=args.out,
            batch_size=args.batch_size,
        )
        result = export_embeddings(job)
    except (ExporterError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(
        json.dumps(
            {"count": result.count, "dim": result.dim, "out": result.out, "ids": result.ids_path}
        )
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
