"""Command-line interface.

Conventions: machine-readable results go to stdout, progress to stderr;
exit 0 on success, 1 on usage errors, 2 on data errors. A key=value config
file (with '#' comments) can pre-set any flag of the chosen subcommand;
explicit flags win. Unknown config keys are rejected.

Heavy modules are imported inside the handlers: the --threads cap (or
KNIGHT_THREADS) must land in the BLAS environment variables before numpy
first loads.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import CountMismatch, KnightError


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); usage errors are exit 1
        raise UsageError(message)


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def _apply_thread_cap(argv: list[str]) -> None:
    value = None
    for i, tok in enumerate(argv):
        if tok == "--threads" and i + 1 < len(argv):
            value = argv[i + 1]
        elif tok.startswith("--threads="):
            value = tok.split("=", 1)[1]
    if value is None:
        value = os.environ.get("KNIGHT_THREADS")
    try:
        count = max(1, int(value)) if value is not None else 1
    except ValueError:
        return  # argparse reports the bad flag value later
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(var, str(count))


def _require_files(*paths) -> None:
    for path in paths:
        if path is not None and not os.path.exists(path):
            raise FileNotFoundError(f"input file not found: {path}")


def _int_list(raw: str) -> list[int]:
    try:
        return [int(s) for s in raw.split(",") if s.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"expected a comma-separated integer list, got {raw!r}") from exc


def _float_list(raw: str) -> list[float]:
    try:
        return [float(s) for s in raw.split(",") if s.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"expected a comma-separated number list, got {raw!r}") from exc


def _emit(payload: str, out_path) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
        _progress(f"wrote {out_path}")
    print(payload)


# ---------------------------------------------------------------------------
# subcommand handlers


def _load_index(args):
    from .index import build_index
    from .io import load_corpus

    _require_files(args.captions, args.embeddings)
    return build_index(load_corpus(args.captions, args.embeddings))


def _load_query_row(path):
    from .io import read_embeddings
    from .vectors import normalize

    _require_files(path)
    rows = read_embeddings(path)
    if rows.shape[0] != 1:
        raise CountMismatch(f"query file must hold exactly one row, found {rows.shape[0]}")
    return normalize(rows[0])


def _cmd_embed_synthetic(args) -> None:
    from .io import load_caption_lines, write_embeddings
    from .synth import SynthEmbedConfig, embed_image_surrogate, embed_text_synthetic

    _require_files(args.captions)
    try:
        cfg = SynthEmbedConfig(
            dim=args.dim,
            token_seed=args.token_seed,
            gap_seed=args.gap_seed,
            gap_magnitude=args.gamma,
            noise_sigma=args.sigma,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    lines = load_caption_lines(args.captions)
    vectors = []
    for row, (_, text) in enumerate(lines):
        if args.mode == "text":
            vectors.append(embed_text_synthetic(text, cfg))
        else:
            vectors.append(embed_image_surrogate(text, args.sample_seed_base + row, cfg))
    write_embeddings(vectors, args.out, dim=args.dim)
    print(json.dumps({"count": len(vectors), "dim": args.dim, "mode": args.mode, "out": args.out}))


def _cmd_train(args) -> None:
    from .pipeline import fit_caption_model, save_caption_model
    from .training import TrainingConfig

    index = _load_index(args)
    try:
        config = TrainingConfig(
            k=args.k,
            epochs=args.epochs,
            batch_size=args.batch_size,
            lr=args.lr,
            max_len=args.max_len,
            exclude_self=not args.include_self,
            seed=args.seed,
            d_model=args.d_model,
            n_layers=args.n_layers,
            n_heads=args.n_heads,
            prefix_positions=not args.no_prefix_positions,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _progress(f"training on {index.n} captions (k={config.k}, epochs={config.epochs})")
    model, curve = fit_caption_model(index, config)
    save_caption_model(model, args.out)
    print(
        json.dumps(
            {
                "model": args.out,
                "vocab_size": len(model.vocab),
                "epochs": config.epochs,
                "loss_curve": [round(x, 6) for x in curve],
            }
        )
    )


def _cmd_infer_image(args) -> None:
    from .decoder import make_prefix
    from .pipeline import build_prefix_from_query, infer_caption, load_caption_model

    _require_files(args.model)
    model = load_caption_model(args.model)
    index = _load_index(args)
    query = _load_query_row(args.query)
    if args.k == 0:
        prefix = make_prefix(query, model.projector)
    else:
        prefix = build_prefix_from_query(index, query, args.k, model.projector)
    print(infer_caption(model, prefix, beam_width=args.beam, alpha=args.alpha))


def _cmd_infer_video(args) -> None:
    from .decoder import make_prefix
    from .io import read_embeddings
    from .pipeline import (
        FrameSequence,
        build_video_prefix,
        infer_caption,
        load_caption_model,
        sample_keyframes,
    )
    from .vectors import normalize

    _require_files(args.model, args.frames)
    model = load_caption_model(args.model)
    index = _load_index(args)
    rows = read_embeddings(args.frames)
    if rows.shape[0] < 1:
        raise CountMismatch("frames file holds no rows")
    frames = FrameSequence([normalize(r) for r in rows])
    if args.k == 0:
        sampled = sample_keyframes(frames, args.m)
        prefix = make_prefix(sampled.embeddings, model.projector)
    else:
        prefix = build_video_prefix(index, frames, args.m, args.k, model.projector)
    print(infer_caption(model, prefix, beam_width=args.beam, alpha=args.alpha))


def _cmd_retrieve(args) -> None:
    from .index import top_k

    index = _load_index(args)
    query = _load_query_row(args.query)
    hits = top_k(index, query, args.k)
    print(
        json.dumps(
            [
                {"id": int(i), "score": float(s), "text": index.record(int(i)).text}
                for i, s in zip(hits.ids, hits.scores)
            ]
        )
    )


def _cmd_eval(args) -> None:
    from .metrics import METRIC_NAMES, evaluate_corpus

    _require_files(args.candidates, args.references)
    names = [s.strip() for s in args.metrics.split(",") if s.strip()]
    for name in names:
        if name not in METRIC_NAMES:
            raise UsageError(f"unknown metric {name!r}; expected from {','.join(METRIC_NAMES)}")
    if not names:
        raise UsageError("no metrics selected")
    report = evaluate_corpus(args.candidates, args.references, names)
    print(report.to_json())


def _cmd_sweep_k(args) -> None:
    from .experiments import sweep_k

    result = sweep_k(
        k_values=_int_list(args.k_values),
        seeds=_int_list(args.seeds),
        gamma=args.gamma,
        beam_width=args.beam,
    )
    _emit(result.to_json(), args.out)


def _cmd_sweep_corpus(args) -> None:
    from .experiments import sweep_corpus

    result = sweep_corpus(
        proportions=_float_list(args.proportions),
        seeds=_int_list(args.seeds),
        k=args.k,
        gamma=args.gamma,
        beam_width=args.beam,
    )
    _emit(result.to_json(), args.out)


def _cmd_gap_ablation(args) -> None:
    from .experiments import gap_ablation

    results = gap_ablation(
        gammas=_float_list(args.gammas),
        k=args.k,
        seeds=_int_list(args.seeds),
        beam_width=args.beam,
    )
    payload = json.dumps(
        {"knight": results["knight"].to_jsonable(), "direct": results["direct"].to_jsonable()},
        sort_keys=True,
    )
    _emit(payload, args.out)


def _cmd_clipre(args) -> None:
    from .experiments import clipre_baseline, clipre_report

    if args.query:
        index = _load_index(args)
        query = _load_query_row(args.query)
        print(clipre_baseline(index, query))
    else:
        from .benchmark import standard_benchmark

        _progress("scoring retrieval-only baseline on the standard benchmark")
        report = clipre_report(standard_benchmark(gamma=args.gamma))
        print(report.to_json())


_HANDLERS = {
    "embed-synthetic": _cmd_embed_synthetic,
    "train": _cmd_train,
    "infer-image": _cmd_infer_image,
    "infer-video": _cmd_infer_video,
    "retrieve": _cmd_retrieve,
    "eval": _cmd_eval,
    "sweep-k": _cmd_sweep_k,
    "sweep-corpus": _cmd_sweep_corpus,
    "gap-ablation": _cmd_gap_ablation,
    "clipre": _cmd_clipre,
}


# ---------------------------------------------------------------------------
# parser construction


def _build_parser() -> tuple[_Parser, dict[str, _Parser]]:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key=value file of flag defaults ('#' comments)")
    common.add_argument("--threads", type=int, default=None, help="worker cap; falls back to KNIGHT_THREADS")

    parser = _Parser(prog="knight", description="k-NN cross-modality captioning pipeline")
    sub = parser.add_subparsers(dest="command", required=True)
    parsers: dict[str, _Parser] = {}

    def add(name: str, help_text: str) -> _Parser:
        p = sub.add_parser(
            name,
            help=help_text,
            parents=[common],
            formatter_class=argparse.ArgumentDefaultsHelpFormatter,
        )
        parsers[name] = p
        return p

    p = add("embed-synthetic", "write deterministic synthetic embeddings for a caption file")
    p.add_argument("--captions", required=True, help="JSONL {id, text}")
    p.add_argument("--out", required=True, help="output KNEM path")
    p.add_argument("--mode", choices=("text", "image"), default="text")
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--gamma", type=float, default=1.0, help="modality-gap magnitude (image mode)")
    p.add_argument("--sigma", type=float, default=0.05, help="per-sample noise (image mode)")
    p.add_argument("--token-seed", type=int, default=0)
    p.add_argument("--gap-seed", type=int, default=0)
    p.add_argument("--sample-seed-base", type=int, default=0, help="row i uses seed base+i")

    p = add("train", "train decoder+projector on neighbor prefixes")
    p.add_argument("--captions", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--out", required=True, help="checkpoint path (vocabulary sidecar written next to it)")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--max-len", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--d-model", type=int, default=128)
    p.add_argument("--n-layers", type=int, default=2)
    p.add_argument("--n-heads", type=int, default=4)
    p.add_argument("--include-self", action="store_true", help="keep each caption in its own neighbor set")
    p.add_argument("--no-prefix-positions", action="store_true", help="drop positional embeddings on prefix slots")

    for name, help_text in (
        ("infer-image", "caption one image embedding"),
        ("infer-video", "caption one video's frame embeddings"),
    ):
        p = add(name, help_text)
        p.add_argument("--model", required=True)
        p.add_argument("--captions", required=True)
        p.add_argument("--embeddings", required=True)
        if name == "infer-image":
            p.add_argument("--query", required=True, help="KNEM with a single row")
        else:
            p.add_argument("--frames", required=True, help="KNEM with one row per frame")
            p.add_argument("--m", type=int, default=4, help="keyframes to sample")
        p.add_argument("--k", type=int, default=5)
        p.add_argument("--beam", type=int, default=5)
        p.add_argument("--alpha", type=float, default=0.0, help="beam length-normalization exponent")

    p = add("retrieve", "top-k nearest corpus captions for a query embedding")
    p.add_argument("--captions", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--k", type=int, default=5)

    p = add("eval", "score candidate captions against references")
    p.add_argument("--candidates", required=True, help="JSONL {id, caption}")
    p.add_argument("--references", required=True, help="JSONL {id, captions: [...]}")
    p.add_argument("--metrics", default=",".join(("bleu1", "bleu4", "rougeL", "cider")))

    p = add("sweep-k", "train/evaluate across k values on the standard benchmark")
    p.add_argument("--k-values", default="0,1,2,3,5,8,12")
    p.add_argument("--seeds", default="0,1,2")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--beam", type=int, default=5)
    p.add_argument("--out", default=None, help="also write the JSON here")

    p = add("sweep-corpus", "train/evaluate across corpus proportions")
    p.add_argument("--proportions", default="0.1,0.25,0.5,1.0")
    p.add_argument("--seeds", default="0,1,2")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--beam", type=int, default=5)
    p.add_argument("--out", default=None)

    p = add("gap-ablation", "Knight vs direct decoding across gap strengths")
    p.add_argument("--gammas", default="0,1,2")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--seeds", default="0,1,2")
    p.add_argument("--beam", type=int, default=5)
    p.add_argument("--out", default=None)

    p = add("clipre", "retrieval-only baseline (top-1 caption)")
    p.add_argument("--captions", default=None)
    p.add_argument("--embeddings", default=None)
    p.add_argument("--query", default=None, help="with a corpus: print the top-1 caption; omit to score the standard benchmark")
    p.add_argument("--gamma", type=float, default=1.0)

    return parser, parsers


def _coerce_config_value(parser: _Parser, key: str, raw: str):
    for action in parser._actions:
        if action.dest == key:
            if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
                lowered = raw.lower()
                if lowered in ("1", "true", "yes", "on"):
                    return True
                if lowered in ("0", "false", "no", "off"):
                    return False
                raise UsageError(f"config key {key!r} expects a boolean, got {raw!r}")
            if action.type is not None:
                try:
                    return action.type(raw)
                except (TypeError, ValueError) as exc:
                    raise UsageError(f"config key {key!r}: {exc}") from exc
            return raw
    raise UsageError(f"unknown config key {key!r}")


def _config_defaults(parser: _Parser, path: str) -> dict:
    if not os.path.isfile(path):
        raise UsageError(f"config file not found: {path}")
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if not key:
                raise UsageError(f"{path}:{lineno}: empty key")
            out[key] = _coerce_config_value(parser, key, value.strip())
    return out


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    _apply_thread_cap(argv)
    parser, parsers = _build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            parsers[args.command].set_defaults(**_config_defaults(parsers[args.command], args.config))
            args = parser.parse_args(argv)
        _HANDLERS[args.command](args)
        return 0
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except KnightError as exc:
        print(f"error: {exc.__class__.__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
