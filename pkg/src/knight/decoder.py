"""Toy autoregressive transformer decoder with manual backprop.

Architecture: learned token + positional embeddings, L pre-LN blocks
(causal multi-head attention, then a 4x GELU feed-forward), final
layer-norm, output projection tied to the token-embedding transpose
(an untied "out_proj" is supported for gradient diagnostics).

Conditioning: retrieved corpus embeddings enter as a prefix of soft
tokens — each projected vector occupies one sequence position in front of
BOS. The decoder attends to them but is never asked to predict them; the
loss covers caption tokens plus EOS only.

Everything here is plain numpy with hand-derived gradients; tests pin the
backward pass to central finite differences, so keep forward and backward
in lockstep when editing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimMismatch,
    EmptyInput,
    LengthExceeded,
    MissingTensor,
    NonFiniteGradient,
    ShapeMismatch,
    UnknownTensor,
)
from .projector import MlpParams, gelu, gelu_grad, mlp_backward, mlp_forward
from .tokenizer import BOS_ID, EOS_ID, PAD_ID

LN_EPS = 1e-5
EMB_INIT_STD = 0.02
FF_MULT = 4

META_TENSOR = "meta.hparams"

# (tensor-name suffix, BlockParams attribute), in serialization order
_BLOCK_FIELDS = [
    ("attn_q.w", "q_w"),
    ("attn_q.b", "q_b"),
    ("attn_k.w", "k_w"),
    ("attn_k.b", "k_b"),
    ("attn_v.w", "v_w"),
    ("attn_v.b", "v_b"),
    ("attn_o.w", "o_w"),
    ("attn_o.b", "o_b"),
    ("ff1.w", "ff1_w"),
    ("ff1.b", "ff1_b"),
    ("ff2.w", "ff2_w"),
    ("ff2.b", "ff2_b"),
    ("ln1_g", "ln1_g"),
    ("ln1_b", "ln1_b"),
    ("ln2_g", "ln2_g"),
    ("ln2_b", "ln2_b"),
]


@dataclass
class BlockParams:
    q_w: np.ndarray
    q_b: np.ndarray
    k_w: np.ndarray
    k_b: np.ndarray
    v_w: np.ndarray
    v_b: np.ndarray
    o_w: np.ndarray
    o_b: np.ndarray
    ff1_w: np.ndarray
    ff1_b: np.ndarray
    ff2_w: np.ndarray
    ff2_b: np.ndarray
    ln1_g: np.ndarray
    ln1_b: np.ndarray
    ln2_g: np.ndarray
    ln2_b: np.ndarray


@dataclass
class DecoderParams:
    tok_emb: np.ndarray  # (V, d_model)
    pos_emb: np.ndarray  # (max_len, d_model)
    blocks: list[BlockParams]
    final_ln_g: np.ndarray
    final_ln_b: np.ndarray
    n_heads: int
    prefix_positions: bool = True
    out_proj: np.ndarray | None = None  # (d_model, V); None means tied

    @property
    def vocab_size(self) -> int:
        return self.tok_emb.shape[0]

    @property
    def d_model(self) -> int:
        return self.tok_emb.shape[1]

    @property
    def max_len(self) -> int:
        return self.pos_emb.shape[0]

    def tensors(self) -> dict[str, np.ndarray]:
        """Live views keyed by checkpoint tensor names."""
        out = {"tok_emb": self.tok_emb, "pos_emb": self.pos_emb}
        for i, blk in enumerate(self.blocks):
            for suffix, attr in _BLOCK_FIELDS:
                out[f"block{i}.{suffix}"] = getattr(blk, attr)
        out["final_ln.g"] = self.final_ln_g
        out["final_ln.b"] = self.final_ln_b
        if self.out_proj is not None:
            out["out_proj"] = self.out_proj
        return out


@dataclass(frozen=True)
class PrefixBundle:
    """Conditioning prefix: raw encoder-space vectors plus their
    projections, ordered (descending similarity for image/training,
    frame time for video)."""

    raw: np.ndarray        # (P, d_in)
    projected: np.ndarray  # (P, d_model)

    def __post_init__(self):
        if self.raw.ndim != 2 or self.projected.ndim != 2:
            raise DimMismatch("prefix arrays must be 2-D")
        if self.raw.shape[0] == 0:
            raise EmptyInput("prefix must contain at least one embedding")
        if self.raw.shape[0] != self.projected.shape[0]:
            raise DimMismatch(
                f"{self.raw.shape[0]} raw vs {self.projected.shape[0]} projected entries"
            )

    def __len__(self) -> int:
        return self.raw.shape[0]


def make_prefix(raw_vectors, mlp: MlpParams) -> PrefixBundle:
    raw = np.asarray(raw_vectors, dtype=np.float32)
    if raw.ndim == 1:
        raw = raw[None, :]
    return PrefixBundle(raw=raw, projected=np.asarray(mlp_forward(mlp, raw)))


def decoder_init(
    vocab_size: int,
    d_model: int,
    n_layers: int,
    n_heads: int,
    max_len: int,
    seed: int,
    dtype=np.float32,
    prefix_positions: bool = True,
    tied: bool = True,
) -> DecoderParams:
    """Glorot-normal projections, N(0, 0.02) embeddings, identity norms."""
    if d_model % n_heads != 0:
        raise ValueError(f"d_model {d_model} not divisible by n_heads {n_heads}")
    rng = np.random.Generator(np.random.Philox(key=seed))

    def glorot(fan_in: int, fan_out: int) -> np.ndarray:
        std = np.sqrt(2.0 / (fan_in + fan_out))
        return (rng.standard_normal((fan_in, fan_out)) * std).astype(dtype)

    tok_emb = (rng.standard_normal((vocab_size, d_model)) * EMB_INIT_STD).astype(dtype)
    pos_emb = (rng.standard_normal((max_len, d_model)) * EMB_INIT_STD).astype(dtype)
    blocks = []
    d_ff = FF_MULT * d_model
    for _ in range(n_layers):
        blocks.append(
            BlockParams(
                q_w=glorot(d_model, d_model),
                q_b=np.zeros(d_model, dtype=dtype),
                k_w=glorot(d_model, d_model),
                k_b=np.zeros(d_model, dtype=dtype),
                v_w=glorot(d_model, d_model),
                v_b=np.zeros(d_model, dtype=dtype),
                o_w=glorot(d_model, d_model),
                o_b=np.zeros(d_model, dtype=dtype),
                ff1_w=glorot(d_model, d_ff),
                ff1_b=np.zeros(d_ff, dtype=dtype),
                ff2_w=glorot(d_ff, d_model),
                ff2_b=np.zeros(d_model, dtype=dtype),
                ln1_g=np.ones(d_model, dtype=dtype),
                ln1_b=np.zeros(d_model, dtype=dtype),
                ln2_g=np.ones(d_model, dtype=dtype),
                ln2_b=np.zeros(d_model, dtype=dtype),
            )
        )
    out_proj = None if tied else glorot(d_model, vocab_size)
    return DecoderParams(
        tok_emb=tok_emb,
        pos_emb=pos_emb,
        blocks=blocks,
        final_ln_g=np.ones(d_model, dtype=dtype),
        final_ln_b=np.zeros(d_model, dtype=dtype),
        n_heads=n_heads,
        prefix_positions=prefix_positions,
        out_proj=out_proj,
    )


# ---------------------------------------------------------------------------
# forward / backward core (batched; public API wraps batch size 1)


def _softmax(x: np.ndarray) -> np.ndarray:
    shifted = x - x.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _log_softmax64(x: np.ndarray) -> np.ndarray:
    x64 = x.astype(np.float64)
    shifted = x64 - x64.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def _ln_forward(x, g, b):
    mu = x.mean(axis=-1, keepdims=True)
    xc = x - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + LN_EPS)
    xhat = xc * inv
    return g * xhat + b, (xhat, inv, g)


def _ln_backward(dy, cache):
    xhat, inv, g = cache
    dg = (dy * xhat).sum(axis=tuple(range(dy.ndim - 1)))
    db = dy.sum(axis=tuple(range(dy.ndim - 1)))
    dxhat = dy * g
    dx = inv * (
        dxhat
        - dxhat.mean(axis=-1, keepdims=True)
        - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
    )
    return dx, dg, db


def _attn_forward(blk: BlockParams, h: np.ndarray, n_heads: int, causal: np.ndarray):
    B, S, D = h.shape
    dh = D // n_heads

    def split(z):
        return z.reshape(B, S, n_heads, dh).transpose(0, 2, 1, 3)

    q = split(h @ blk.q_w + blk.q_b)
    k = split(h @ blk.k_w + blk.k_b)
    v = split(h @ blk.v_w + blk.v_b)
    scale = 1.0 / np.sqrt(dh)
    scores = (q @ k.transpose(0, 1, 3, 2)) * scale
    scores = np.where(causal, scores, -np.inf)
    w = _softmax(scores)
    merged = (w @ v).transpose(0, 2, 1, 3).reshape(B, S, D)
    out = merged @ blk.o_w + blk.o_b
    return out, (h, q, k, v, w, merged, scale)


def _attn_backward(blk: BlockParams, dout: np.ndarray, cache):
    h, q, k, v, w, merged, scale = cache
    B, S, D = h.shape
    n_heads, dh = q.shape[1], q.shape[3]

    do_flat = dout.reshape(-1, D)
    grads = {
        "attn_o.w": merged.reshape(-1, D).T @ do_flat,
        "attn_o.b": do_flat.sum(axis=0),
    }
    dmerged = (dout @ blk.o_w.T).reshape(B, S, n_heads, dh).transpose(0, 2, 1, 3)

    dw = dmerged @ v.transpose(0, 1, 3, 2)
    dv = w.transpose(0, 1, 3, 2) @ dmerged
    # masked entries have w == 0, so their ds vanishes without touching the
    # -inf scores
    ds = (w * (dw - (dw * w).sum(axis=-1, keepdims=True))) * scale
    dq = ds @ k
    dk = ds.transpose(0, 1, 3, 2) @ q

    def merge(z):
        return z.transpose(0, 2, 1, 3).reshape(B, S, D)

    dq_m, dk_m, dv_m = merge(dq), merge(dk), merge(dv)
    h_flat = h.reshape(-1, D)
    grads["attn_q.w"] = h_flat.T @ dq_m.reshape(-1, D)
    grads["attn_q.b"] = dq_m.reshape(-1, D).sum(axis=0)
    grads["attn_k.w"] = h_flat.T @ dk_m.reshape(-1, D)
    grads["attn_k.b"] = dk_m.reshape(-1, D).sum(axis=0)
    grads["attn_v.w"] = h_flat.T @ dv_m.reshape(-1, D)
    grads["attn_v.b"] = dv_m.reshape(-1, D).sum(axis=0)
    dh_in = dq_m @ blk.q_w.T + dk_m @ blk.k_w.T + dv_m @ blk.v_w.T
    return dh_in, grads


def _forward_batch(dec: DecoderParams, prefix_proj: np.ndarray, tokens: np.ndarray):
    """Teacher-forcing forward over [prefix, BOS, tokens].

    Returns logits (B, T+1, V) for the BOS-and-later positions plus the
    activation cache the backward pass replays.
    """
    dtype = dec.tok_emb.dtype
    prefix_proj = np.asarray(prefix_proj, dtype=dtype)
    tokens = np.asarray(tokens, dtype=np.int64)
    B, P, D = prefix_proj.shape
    if D != dec.d_model:
        raise DimMismatch(f"prefix projected dim {D}, decoder d_model {dec.d_model}")
    T = tokens.shape[1]
    S = P + 1 + T
    if S > dec.max_len:
        raise LengthExceeded(f"sequence length {S} exceeds max_len {dec.max_len}")

    seq = np.empty((B, S, D), dtype=dtype)
    seq[:, :P] = prefix_proj
    seq[:, P] = dec.tok_emb[BOS_ID]
    if T:
        seq[:, P + 1 :] = dec.tok_emb[tokens]
    pos = np.zeros((S, D), dtype=dtype)
    if dec.prefix_positions:
        pos[:] = dec.pos_emb[:S]
    else:
        pos[P:] = dec.pos_emb[P:S]
    x = seq + pos

    causal = np.tril(np.ones((S, S), dtype=bool))[None, None]
    block_caches = []
    for blk in dec.blocks:
        h1, ln1_cache = _ln_forward(x, blk.ln1_g, blk.ln1_b)
        att, att_cache = _attn_forward(blk, h1, dec.n_heads, causal)
        x2 = x + att
        h2, ln2_cache = _ln_forward(x2, blk.ln2_g, blk.ln2_b)
        z = h2 @ blk.ff1_w + blk.ff1_b
        a = gelu(z)
        x = x2 + a @ blk.ff2_w + blk.ff2_b
        block_caches.append((ln1_cache, att_cache, ln2_cache, h2, z, a))

    xf, fin_cache = _ln_forward(x, dec.final_ln_g, dec.final_ln_b)
    cap = xf[:, P:, :]
    unembed = dec.tok_emb.T if dec.out_proj is None else dec.out_proj
    logits = cap @ unembed
    cache = {
        "P": P,
        "tokens": tokens,
        "block_caches": block_caches,
        "fin_cache": fin_cache,
        "cap": cap,
        "shape": (B, S, D),
    }
    return logits, cache


def _backward_batch(dec: DecoderParams, cache, dlogits: np.ndarray):
    """Gradients of the scalar that produced dlogits; returns the decoder
    grad dict plus the gradient flowing into the projected prefix."""
    B, S, D = cache["shape"]
    P = cache["P"]
    tokens = cache["tokens"]
    cap = cache["cap"]
    dtype = dec.tok_emb.dtype
    dlogits = np.asarray(dlogits, dtype=dtype)

    grads: dict[str, np.ndarray] = {}
    cap_flat = cap.reshape(-1, D)
    dl_flat = dlogits.reshape(-1, dec.vocab_size)
    if dec.out_proj is None:
        # tied embedding picks up the unembedding contribution here and the
        # lookup contributions below
        d_tok = (dl_flat.T @ cap_flat).astype(dtype, copy=False)
        dcap = dlogits @ dec.tok_emb
    else:
        grads["out_proj"] = cap_flat.T @ dl_flat
        d_tok = np.zeros_like(dec.tok_emb)
        dcap = dlogits @ dec.out_proj.T

    dxf = np.zeros((B, S, D), dtype=dtype)
    dxf[:, P:, :] = dcap
    dx, dg, db = _ln_backward(dxf, cache["fin_cache"])
    grads["final_ln.g"] = dg
    grads["final_ln.b"] = db

    for i in reversed(range(len(dec.blocks))):
        blk = dec.blocks[i]
        ln1_cache, att_cache, ln2_cache, h2, z, a = cache["block_caches"][i]
        # feed-forward branch: x3 = x2 + gelu(h2@ff1)@ff2
        da = dx @ blk.ff2_w.T
        grads[f"block{i}.ff2.w"] = a.reshape(-1, a.shape[-1]).T @ dx.reshape(-1, D)
        grads[f"block{i}.ff2.b"] = dx.reshape(-1, D).sum(axis=0)
        dz = da * gelu_grad(z)
        grads[f"block{i}.ff1.w"] = h2.reshape(-1, D).T @ dz.reshape(-1, dz.shape[-1])
        grads[f"block{i}.ff1.b"] = dz.reshape(-1, dz.shape[-1]).sum(axis=0)
        dh2 = dz @ blk.ff1_w.T
        dx2_ln, dg2, db2 = _ln_backward(dh2, ln2_cache)
        grads[f"block{i}.ln2_g"] = dg2
        grads[f"block{i}.ln2_b"] = db2
        dx2 = dx + dx2_ln
        # attention branch: x2 = x + attn(ln1(x))
        dh1, attn_grads = _attn_backward(blk, dx2, att_cache)
        for suffix, g in attn_grads.items():
            grads[f"block{i}.{suffix}"] = g
        dx_ln, dg1, db1 = _ln_backward(dh1, ln1_cache)
        grads[f"block{i}.ln1_g"] = dg1
        grads[f"block{i}.ln1_b"] = db1
        dx = dx2 + dx_ln

    # dx is now the gradient at the embedded sequence (token/pos/prefix sum)
    if dec.prefix_positions:
        d_pos = dx.sum(axis=0)
        d_pos_emb = np.zeros_like(dec.pos_emb)
        d_pos_emb[:S] = d_pos
    else:
        d_pos_emb = np.zeros_like(dec.pos_emb)
        d_pos_emb[P:S] = dx[:, P:, :].sum(axis=0)

    d_tok[BOS_ID] += dx[:, P, :].sum(axis=0)
    T = tokens.shape[1]
    if T:
        np.add.at(d_tok, tokens, dx[:, P + 1 :, :])

    grads["tok_emb"] = d_tok
    grads["pos_emb"] = d_pos_emb
    d_prefix_proj = dx[:, :P, :]
    return grads, d_prefix_proj


def forward(dec: DecoderParams, prefix: PrefixBundle, tokens) -> np.ndarray:
    """Logits at BOS and every caption-token position: one row per target
    in (tokens ++ EOS), shape (len(tokens)+1, V)."""
    tok = np.asarray(list(tokens), dtype=np.int64).reshape(1, -1)
    logits, _ = _forward_batch(dec, prefix.projected[None, :, :], tok)
    return logits[0]


def mle_loss(logits: np.ndarray, targets) -> float:
    """Mean negative log-likelihood over non-PAD targets."""
    targets = np.asarray(list(targets), dtype=np.int64)
    logits = np.asarray(logits)
    if logits.ndim != 2 or logits.shape[0] != targets.shape[0]:
        raise ShapeMismatch(
            f"{logits.shape[0] if logits.ndim == 2 else logits.shape} logit rows "
            f"for {targets.shape[0]} targets"
        )
    mask = targets != PAD_ID
    if not mask.any():
        raise EmptyInput("all targets are PAD")
    ls = _log_softmax64(logits)
    nll = -np.take_along_axis(ls, targets[:, None], axis=1)[:, 0]
    return float(nll[mask].mean())


def _loss_and_grad(logits: np.ndarray, targets: np.ndarray, mask: np.ndarray):
    """Batched loss = mean over examples of per-example masked mean NLL.

    Returns (loss, dloss/dlogits). Per-example normalization keeps the
    epoch loss independent of how captions pack into batches.
    """
    B = logits.shape[0]
    ls = _log_softmax64(logits)
    nll = -np.take_along_axis(ls, targets[..., None], axis=-1)[..., 0]
    counts = mask.sum(axis=-1)
    if np.any(counts == 0):
        raise EmptyInput("an example has no unmasked targets")
    per_example = (nll * mask).sum(axis=-1) / counts
    loss = float(per_example.mean())

    weights = (mask / counts[:, None] / B)[..., None]
    p = np.exp(ls)
    onehot = np.zeros_like(p)
    np.put_along_axis(onehot, targets[..., None], 1.0, axis=-1)
    dlogits = ((p - onehot) * weights).astype(logits.dtype)
    return loss, dlogits


def backward(
    dec: DecoderParams, mlp: MlpParams, prefix: PrefixBundle, tokens, targets
) -> dict[str, np.ndarray]:
    """Gradients of mle_loss(forward(...), targets) for every decoder and
    projector tensor; the prefix pathway carries the loss into the MLP."""
    tok = np.asarray(list(tokens), dtype=np.int64).reshape(1, -1)
    tgt = np.asarray(list(targets), dtype=np.int64).reshape(1, -1)
    if tgt.shape[1] != tok.shape[1] + 1:
        raise ShapeMismatch(f"{tgt.shape[1]} targets for {tok.shape[1]} tokens")
    logits, cache = _forward_batch(dec, prefix.projected[None, :, :], tok)
    _, dlogits = _loss_and_grad(logits, tgt, tgt != PAD_ID)
    grads, d_prefix = _backward_batch(dec, cache, dlogits)
    mlp_grads, _ = mlp_backward(mlp, prefix.raw.astype(dec.tok_emb.dtype), d_prefix[0])
    grads.update(mlp_grads)
    return grads


# ---------------------------------------------------------------------------
# optimizer


@dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int = 0


def adam_init(tensors: dict[str, np.ndarray]) -> AdamState:
    return AdamState(
        m={k: np.zeros_like(a) for k, a in tensors.items()},
        v={k: np.zeros_like(a) for k, a in tensors.items()},
        t=0,
    )


def adam_step(
    tensors: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """Bias-corrected Adam, updating tensors in place.

    Validates every gradient before touching any parameter so a non-finite
    batch aborts cleanly instead of half-updating the model.
    """
    for name, arr in tensors.items():
        g = grads.get(name)
        if g is None:
            raise MissingTensor(f"no gradient for {name!r}")
        if g.shape != arr.shape:
            raise ShapeMismatch(f"{name}: grad {g.shape} vs param {arr.shape}")
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradient(f"non-finite gradient in {name!r}")
    state.t += 1
    c1 = 1.0 - beta1 ** state.t
    c2 = 1.0 - beta2 ** state.t
    for name, arr in tensors.items():
        g = grads[name].astype(arr.dtype, copy=False)
        m = state.m[name]
        v = state.v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * (g * g)
        arr -= lr * (m / c1) / (np.sqrt(v / c2) + eps)


# ---------------------------------------------------------------------------
# decoding


def greedy_decode(dec: DecoderParams, prefix: PrefixBundle, max_tokens: int | None = None) -> list[int]:
    """Argmax decoding (ties broken toward the lowest token id). Kept as an
    independent reference for beam width 1."""
    cap = dec.max_len - len(prefix) - 1
    if max_tokens is not None:
        cap = min(cap, max_tokens)
    tokens: list[int] = []
    proj = prefix.projected[None, :, :]
    while len(tokens) < cap:
        logits, _ = _forward_batch(dec, proj, np.asarray(tokens, dtype=np.int64).reshape(1, -1))
        nxt = int(np.argmax(logits[0, -1]))
        if nxt == EOS_ID:
            break
        tokens.append(nxt)
    return tokens


def beam_search(
    dec: DecoderParams,
    mlp: MlpParams,
    prefix: PrefixBundle,
    width: int = 5,
    max_len: int | None = None,
    alpha: float = 0.0,
) -> list[int]:
    """Beam search from BOS; returns caption token ids (no BOS/EOS).

    Score is the running sum of token log-probs, optionally normalized by
    length**alpha at the final pick (alpha=0 keeps raw sums). Hypotheses
    end at EOS or at the sequence cap; the best EOS-finished hypothesis
    wins, falling back to the best unfinished one. Ties at expansion break
    by (score, token id, parent index); log-probs never exceed 0, so with
    alpha=0 the search stops early once no live hypothesis can beat a
    finished one.
    """
    if width < 1:
        raise ValueError(f"beam width must be >= 1, got {width}")
    limit = dec.max_len if max_len is None else min(max_len, dec.max_len)
    cap = limit - len(prefix) - 1
    if cap < 0:
        raise LengthExceeded(f"prefix of {len(prefix)} leaves no room under max_len {limit}")

    projected = np.asarray(mlp_forward(mlp, prefix.raw.astype(dec.tok_emb.dtype)))
    live: list[tuple[float, tuple[int, ...]]] = [(0.0, ())]
    finished: list[tuple[float, tuple[int, ...]]] = []
    steps = 0
    while live and steps < cap:
        toks = np.asarray([h[1] for h in live], dtype=np.int64).reshape(len(live), -1)
        proj = np.broadcast_to(projected, (len(live),) + projected.shape)
        logits, _ = _forward_batch(dec, proj, toks)
        logp = _log_softmax64(logits[:, -1, :])  # (B, V)

        scores = np.asarray([h[0] for h in live])[:, None] + logp
        flat = scores.ravel()
        V = logp.shape[1]
        token_ids = np.tile(np.arange(V), len(live))
        parents = np.repeat(np.arange(len(live)), V)
        # primary key listed last in lexsort
        order = np.lexsort((parents, token_ids, -flat))[:width]

        next_live = []
        for idx in order:
            sc = float(flat[idx])
            parent_tokens = live[parents[idx]][1]
            tok = int(token_ids[idx])
            if tok == EOS_ID:
                finished.append((sc, parent_tokens))
            else:
                next_live.append((sc, parent_tokens + (tok,)))
        live = next_live
        steps += 1
        if alpha == 0.0 and finished and live:
            if max(h[0] for h in finished) >= max(h[0] for h in live):
                break

    ended_by_eos = bool(finished)
    pool = finished if finished else live
    if not pool:
        return []

    def ranked(hyp):
        score, tokens = hyp
        length = len(tokens) + (1 if ended_by_eos else 0)  # EOS counts when emitted
        return (-(score / max(length, 1) ** alpha), tokens)

    return list(min(pool, key=ranked)[1])


# ---------------------------------------------------------------------------
# checkpoint structure

_MLP_NAMES = ("mlp.w1", "mlp.b1", "mlp.w2", "mlp.b2", "mlp.w3", "mlp.b3")


def model_tensors(dec: DecoderParams, mlp: MlpParams) -> dict[str, np.ndarray]:
    tensors = {**dec.tensors(), **mlp.tensors()}
    tensors[META_TENSOR] = np.asarray(
        [dec.n_heads, 1.0 if dec.prefix_positions else 0.0], dtype=np.float32
    )
    return tensors


def save_model(path, dec: DecoderParams, mlp: MlpParams) -> None:
    from .io import save_checkpoint

    save_checkpoint(model_tensors(dec, mlp), path)


def load_model(path) -> tuple[DecoderParams, MlpParams]:
    """Rebuild (DecoderParams, MlpParams) from a checkpoint, rejecting
    incomplete or unrecognized tensor sets."""
    from .io import load_checkpoint

    tensors = dict(load_checkpoint(path))
    if META_TENSOR not in tensors:
        raise MissingTensor(META_TENSOR)
    meta = tensors.pop(META_TENSOR)
    if meta.shape != (2,):
        raise ShapeMismatch(f"{META_TENSOR} must hold 2 values, got {meta.shape}")
    n_heads = int(round(float(meta[0])))
    prefix_positions = bool(meta[1] != 0)

    for name in ("tok_emb", "pos_emb", "final_ln.g", "final_ln.b", *_MLP_NAMES):
        if name not in tensors:
            raise MissingTensor(name)
    mlp = MlpParams.from_tensors({n: tensors.pop(n) for n in _MLP_NAMES})

    tok_emb = tensors.pop("tok_emb")
    pos_emb = tensors.pop("pos_emb")
    final_g = tensors.pop("final_ln.g")
    final_b = tensors.pop("final_ln.b")
    out_proj = tensors.pop("out_proj", None)

    block_ids = set()
    for name in tensors:
        if not name.startswith("block"):
            raise UnknownTensor(name)
        head = name.split(".", 1)[0]
        try:
            block_ids.add(int(head[len("block"):]))
        except ValueError:
            raise UnknownTensor(name) from None
    n_layers = (max(block_ids) + 1) if block_ids else 0
    if block_ids != set(range(n_layers)):
        missing = sorted(set(range(n_layers)) - block_ids)
        raise MissingTensor(f"block indices {missing}")

    blocks = []
    for i in range(n_layers):
        fields = {}
        for suffix, attr in _BLOCK_FIELDS:
            name = f"block{i}.{suffix}"
            if name not in tensors:
                raise MissingTensor(name)
            fields[attr] = tensors.pop(name)
        blocks.append(BlockParams(**fields))
    if tensors:
        raise UnknownTensor(sorted(tensors)[0])

    V, D = tok_emb.shape
    if pos_emb.ndim != 2 or pos_emb.shape[1] != D:
        raise ShapeMismatch(f"pos_emb {pos_emb.shape} vs d_model {D}")
    if final_g.shape != (D,) or final_b.shape != (D,):
        raise ShapeMismatch("final layer-norm shape")
    if n_heads < 1 or D % n_heads != 0:
        raise ShapeMismatch(f"d_model {D} not divisible by n_heads {n_heads}")
    d_ff = FF_MULT * D
    for i, blk in enumerate(blocks):
        for attr in ("q_w", "k_w", "v_w", "o_w"):
            if getattr(blk, attr).shape != (D, D):
                raise ShapeMismatch(f"block{i}.{attr}")
        if blk.ff1_w.shape != (D, d_ff) or blk.ff2_w.shape != (d_ff, D):
            raise ShapeMismatch(f"block{i} feed-forward shapes")
    if mlp.w3.shape[1] != D:
        raise ShapeMismatch(f"projector output {mlp.w3.shape[1]} vs d_model {D}")
    if out_proj is not None and out_proj.shape != (D, V):
        raise ShapeMismatch(f"out_proj {out_proj.shape}, expected {(D, V)}")

    dec = DecoderParams(
        tok_emb=tok_emb,
        pos_emb=pos_emb,
        blocks=blocks,
        final_ln_g=final_g,
        final_ln_b=final_b,
        n_heads=n_heads,
        prefix_positions=prefix_positions,
        out_proj=out_proj,
    )
    return dec, mlp
