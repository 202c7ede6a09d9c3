"""Sweeps over k, corpus size, and modality-gap strength, plus the
retrieval-only baseline.

Design facts the harness leans on: training never sees gamma (surrogates
exist only on the evaluation side), so gap ablations train one model
family per (k, seed) and re-evaluate it across gamma values; and a
proportion-1.0 corpus run is literally the standard pipeline, so its
report reproduces the k-sweep's k=5 point bit-for-bit under the same seed.
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from .benchmark import Benchmark, benchmark_training_config, standard_benchmark
from .decoder import make_prefix
from .errors import EmptyCorpus
from .index import CorpusIndex, build_index, top_k
from .metrics import METRIC_NAMES, MetricReport, evaluate_pairs, make_pairs
from .pipeline import CaptionModel, build_prefix_from_query, fit_caption_model, infer_caption

DEFAULT_SEEDS = (0, 1, 2)
DEFAULT_K_GRID = (0, 1, 2, 3, 5, 8, 12)
DEFAULT_PROPORTIONS = (0.1, 0.25, 0.5, 1.0)
DEFAULT_GAMMAS = (0.0, 1.0, 2.0)


@dataclass(frozen=True)
class SweepPoint:
    setting: float
    seed: int
    report: MetricReport


@dataclass(frozen=True)
class SweepResult:
    name: str
    config: dict
    points: tuple[SweepPoint, ...]

    def __post_init__(self):
        settings = sorted({p.setting for p in self.points})
        if any(b <= a for a, b in zip(settings, settings[1:])):
            raise ValueError("sweep settings must be strictly increasing")
        if len({(p.setting, p.seed) for p in self.points}) != len(self.points):
            raise ValueError("one report per (setting, seed)")

    def report_for(self, setting: float, seed: int) -> MetricReport:
        for p in self.points:
            if p.setting == setting and p.seed == seed:
                return p.report
        raise KeyError((setting, seed))

    def to_jsonable(self) -> dict:
        return {
            "config": self.config,
            "results": [
                {
                    "setting": p.setting,
                    "seed": p.seed,
                    "pairs": p.report.pairs,
                    "metrics": {k: round(v, 10) for k, v in sorted(p.report.scores.items())},
                }
                for p in self.points
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_jsonable(), sort_keys=True)


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def evaluate_model(
    model: CaptionModel,
    index: CorpusIndex,
    bench: Benchmark,
    k: int,
    beam_width: int = 5,
) -> MetricReport:
    """Caption every benchmark query with the model (k=0 projects the query
    itself) and score against the held-out references."""
    candidates: dict[int, str] = {}
    references: dict[int, list[str]] = {}
    for item in bench.items:
        if k == 0:
            prefix = make_prefix(item.query, model.projector)
        else:
            prefix = build_prefix_from_query(index, item.query, k, model.projector)
        candidates[item.id] = infer_caption(model, prefix, beam_width=beam_width)
        references[item.id] = list(item.references)
    return _eval_pairs(candidates, references)


def _eval_pairs(candidates, references) -> MetricReport:
    return evaluate_pairs(make_pairs(candidates, references), METRIC_NAMES)


def train_benchmark_model(
    index: CorpusIndex, k: int, seed: int, epochs: int = 30
) -> tuple[CaptionModel, list[float]]:
    return fit_caption_model(index, benchmark_training_config(k=k, seed=seed, epochs=epochs))


def sweep_k(
    k_values=DEFAULT_K_GRID,
    seeds=DEFAULT_SEEDS,
    gamma: float = 1.0,
    beam_width: int = 5,
) -> SweepResult:
    """One model per (k, seed), evaluated on held-out image surrogates."""
    k_values = sorted(set(int(k) for k in k_values))
    bench = standard_benchmark(gamma=gamma)
    points = []
    for seed in seeds:
        for k in k_values:
            _progress(f"sweep-k: training k={k} seed={seed}")
            model, _ = train_benchmark_model(bench.index, k, seed)
            report = evaluate_model(model, bench.index, bench, k, beam_width)
            points.append(SweepPoint(setting=float(k), seed=seed, report=report))
    return SweepResult(
        name="sweep_k",
        config={"k_values": k_values, "seeds": list(seeds), "gamma": gamma, "beam": beam_width},
        points=tuple(points),
    )


def _subsample(index: CorpusIndex, proportion: float, seed: int) -> CorpusIndex:
    """Nested subsets: one permutation per seed, smaller proportions are
    prefixes of larger ones."""
    if not 0.0 < proportion <= 1.0:
        raise ValueError(f"proportion must be in (0, 1], got {proportion}")
    if proportion == 1.0:
        return index
    rng = np.random.Generator(np.random.Philox(key=(seed << 2) | 3))
    perm = rng.permutation(index.n)
    keep = max(1, math.ceil(proportion * index.n))
    records = [index.records[i] for i in sorted(perm[:keep])]
    if not records:
        raise EmptyCorpus("subsample produced no records")
    return build_index(records)


def sweep_corpus(
    proportions=DEFAULT_PROPORTIONS,
    seeds=DEFAULT_SEEDS,
    k: int = 5,
    gamma: float = 1.0,
    beam_width: int = 5,
) -> SweepResult:
    """Train and retrieve over the same nested subsample per proportion."""
    proportions = sorted(set(float(p) for p in proportions))
    bench = standard_benchmark(gamma=gamma)
    points = []
    for seed in seeds:
        for prop in proportions:
            _progress(f"sweep-corpus: training proportion={prop} seed={seed}")
            sub = _subsample(bench.index, prop, seed)
            model, _ = train_benchmark_model(sub, k, seed)
            report = evaluate_model(model, sub, bench, k, beam_width)
            points.append(SweepPoint(setting=prop, seed=seed, report=report))
    return SweepResult(
        name="sweep_corpus",
        config={
            "proportions": proportions,
            "seeds": list(seeds),
            "k": k,
            "gamma": gamma,
            "beam": beam_width,
        },
        points=tuple(points),
    )


def clipre_baseline(index: CorpusIndex, query) -> str:
    """Retrieval-only captioning: text of the single most similar record."""
    hits = top_k(index, query, 1)
    return index.record(hits.ids[0]).text


def clipre_report(bench: Benchmark) -> MetricReport:
    candidates = {item.id: clipre_baseline(bench.index, item.query) for item in bench.items}
    references = {item.id: list(item.references) for item in bench.items}
    return _eval_pairs(candidates, references)


def gap_ablation(
    gammas=DEFAULT_GAMMAS,
    k: int = 5,
    seeds=DEFAULT_SEEDS,
    beam_width: int = 5,
) -> dict[str, SweepResult]:
    """Knight (k-NN prefix) vs direct decoding (k=0) across gap strengths.

    Models are gamma-independent, so each (k, seed) family trains once and
    is re-evaluated against every gamma's queries.
    """
    gammas = sorted(set(float(g) for g in gammas))
    base = standard_benchmark(gamma=gammas[0])
    knight_models = {}
    direct_models = {}
    for seed in seeds:
        _progress(f"gap-ablation: training k={k} seed={seed}")
        knight_models[seed], _ = train_benchmark_model(base.index, k, seed)
        _progress(f"gap-ablation: training k=0 seed={seed}")
        direct_models[seed], _ = train_benchmark_model(base.index, 0, seed)

    knight_points = []
    direct_points = []
    for gamma in gammas:
        bench = standard_benchmark(gamma=gamma)
        for seed in seeds:
            knight_points.append(
                SweepPoint(
                    setting=gamma,
                    seed=seed,
                    report=evaluate_model(knight_models[seed], bench.index, bench, k, beam_width),
                )
            )
            direct_points.append(
                SweepPoint(
                    setting=gamma,
                    seed=seed,
                    report=evaluate_model(direct_models[seed], bench.index, bench, 0, beam_width),
                )
            )
    config = {"gammas": gammas, "k": k, "seeds": list(seeds), "beam": beam_width}
    return {
        "knight": SweepResult(name="gap_knight", config=config, points=tuple(knight_points)),
        "direct": SweepResult(name="gap_direct", config=config, points=tuple(direct_points)),
    }
