"""Knight: caption images and videos with a decoder trained on text alone.

The pipeline embeds corpus captions, retrieves the k nearest captions for
a query embedding, and conditions a small autoregressive decoder on the
retrieved (projected) embeddings. Training never sees an image; retrieval
bridges the modality gap at inference time.
"""

from .benchmark import Benchmark, EvalItem, standard_benchmark
from .decoder import (
    DecoderParams,
    PrefixBundle,
    beam_search,
    decoder_init,
    greedy_decode,
    load_model,
    save_model,
)
from .errors import KnightError
from .index import CaptionRecord, CorpusIndex, RetrievalResult, batch_top_k, build_index, top_k
from .io import load_corpus, read_embeddings, write_embeddings
from .metrics import EvalPair, MetricReport, evaluate_corpus, evaluate_pairs, make_pairs
from .pipeline import (
    CaptionModel,
    FrameSequence,
    build_prefix_from_query,
    build_video_prefix,
    fit_caption_model,
    infer_caption,
    load_caption_model,
    sample_keyframes,
    save_caption_model,
)
from .projector import MlpParams, mlp_forward, mlp_init
from .synth import SynthEmbedConfig, derive_gap_vector, embed_image_surrogate, embed_text_synthetic
from .tokenizer import Vocabulary, build_vocabulary, tokenize
from .training import TrainingConfig, train
from .vectors import cosine_similarity, mean_pool, normalize

__version__ = "0.1.0"

__all__ = [
    "Benchmark",
    "CaptionModel",
    "CaptionRecord",
    "CorpusIndex",
    "DecoderParams",
    "EvalItem",
    "EvalPair",
    "FrameSequence",
    "KnightError",
    "MetricReport",
    "MlpParams",
    "PrefixBundle",
    "RetrievalResult",
    "SynthEmbedConfig",
    "TrainingConfig",
    "Vocabulary",
    "batch_top_k",
    "beam_search",
    "build_index",
    "build_prefix_from_query",
    "build_video_prefix",
    "build_vocabulary",
    "cosine_similarity",
    "decoder_init",
    "derive_gap_vector",
    "embed_image_surrogate",
    "embed_text_synthetic",
    "evaluate_corpus",
    "evaluate_pairs",
    "fit_caption_model",
    "greedy_decode",
    "infer_caption",
    "load_caption_model",
    "load_corpus",
    "load_model",
    "make_pairs",
    "mean_pool",
    "mlp_forward",
    "mlp_init",
    "normalize",
    "read_embeddings",
    "sample_keyframes",
    "save_caption_model",
    "save_model",
    "standard_benchmark",
    "tokenize",
    "top_k",
    "train",
    "write_embeddings",
]
