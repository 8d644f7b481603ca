"""A miniature encoder-decoder transformer in plain numpy.

Desk-scale stand-in for the large text-to-text models: pre-norm residual
blocks with scale-only normalization, fixed sinusoidal positions, an output
projection tied to the embedding matrix, and hand-written backward passes
validated against central finite differences.

Masking uses -inf substitution before the softmax max/exp, so the content
of padded positions can never influence unmasked logits or the loss, bit
for bit.  All reductions run in a fixed order; with a fixed seed the loss
trajectory is reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from ..errors import ContractError, NonFiniteError

EPS_NORM = 1e-6


@dataclass(frozen=True)
class ModelConfig:
    d_model: int = 32
    n_heads: int = 4
    n_enc_layers: int = 1
    n_dec_layers: int = 1
    d_ff: int = 64
    max_src_len: int = 24
    max_tgt_len: int = 24
    vocab_size: int = 0
    dropout: float = 0.0

    def __post_init__(self):
        if self.d_model % self.n_heads != 0:
            raise ContractError(
                f"d_model {self.d_model} not divisible by n_heads {self.n_heads}"
            )
        if self.max_src_len < 2 or self.max_tgt_len < 2:
            raise ContractError("max sequence lengths must be at least 2")
        if not 0.0 <= self.dropout < 1.0:
            raise ContractError(f"dropout {self.dropout} outside [0, 1)")

    def to_dict(self) -> dict:
        return {
            "d_model": self.d_model, "n_heads": self.n_heads,
            "n_enc_layers": self.n_enc_layers, "n_dec_layers": self.n_dec_layers,
            "d_ff": self.d_ff, "max_src_len": self.max_src_len,
            "max_tgt_len": self.max_tgt_len, "vocab_size": self.vocab_size,
            "dropout": self.dropout,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**d)


@dataclass
class Batch:
    """Teacher-forcing batch: decoder inputs are the targets shifted right
    (PAD as the start symbol), labels are the unshifted targets."""

    src: np.ndarray         # (B, S) int
    src_mask: np.ndarray    # (B, S) bool, True at real source tokens
    tgt_in: np.ndarray      # (B, T) int, shifted right
    tgt_mask: np.ndarray    # (B, T) bool, True at valid decoder positions
    labels: np.ndarray      # (B, T) int
    label_mask: np.ndarray  # (B, T) bool, True at scored positions

    @property
    def size(self) -> int:
        return self.src.shape[0]


@dataclass
class Parameters:
    """All weight tensors plus the architecture they instantiate."""

    config: ModelConfig
    tensors: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def dtype(self) -> np.dtype:
        return self.tensors["embedding"].dtype

    def copy(self) -> "Parameters":
        return Parameters(self.config, {k: v.copy() for k, v in self.tensors.items()})

    def astype(self, dtype) -> "Parameters":
        return Parameters(self.config, {k: v.astype(dtype) for k, v in self.tensors.items()})

    def n_parameters(self) -> int:
        return sum(v.size for v in self.tensors.values())

    def check_finite(self) -> None:
        for name, tensor in self.tensors.items():
            if not np.all(np.isfinite(tensor)):
                raise NonFiniteError(f"parameter {name!r} contains non-finite values")


def _tensor_shapes(config: ModelConfig) -> dict[str, tuple[int, ...]]:
    d, f, v = config.d_model, config.d_ff, config.vocab_size
    shapes: dict[str, tuple[int, ...]] = {"embedding": (v, d)}
    for i in range(config.n_enc_layers):
        p = f"enc{i}"
        shapes[f"{p}.attn_norm.g"] = (d,)
        for w in ("wq", "wk", "wv", "wo"):
            shapes[f"{p}.attn.{w}"] = (d, d)
        shapes[f"{p}.ff_norm.g"] = (d,)
        shapes[f"{p}.ff.w1"] = (d, f)
        shapes[f"{p}.ff.w2"] = (f, d)
    shapes["enc_norm.g"] = (d,)
    for i in range(config.n_dec_layers):
        p = f"dec{i}"
        shapes[f"{p}.self_norm.g"] = (d,)
        for w in ("wq", "wk", "wv", "wo"):
            shapes[f"{p}.self.{w}"] = (d, d)
        shapes[f"{p}.cross_norm.g"] = (d,)
        for w in ("wq", "wk", "wv", "wo"):
            shapes[f"{p}.cross.{w}"] = (d, d)
        shapes[f"{p}.ff_norm.g"] = (d,)
        shapes[f"{p}.ff.w1"] = (d, f)
        shapes[f"{p}.ff.w2"] = (f, d)
    shapes["dec_norm.g"] = (d,)
    return shapes


def init_params(config: ModelConfig, rng: np.random.Generator, dtype=np.float32) -> Parameters:
    """Gaussian init scaled by fan-in; normalization gains start at one."""
    if config.vocab_size < 1:
        raise ContractError("vocab_size must be set before initializing parameters")
    tensors: dict[str, np.ndarray] = {}
    for name, shape in _tensor_shapes(config).items():
        if name.endswith(".g"):
            tensors[name] = np.ones(shape, dtype=dtype)
        else:
            fan_in = shape[0]
            tensors[name] = rng.normal(0.0, fan_in ** -0.5, size=shape).astype(dtype)
    return Parameters(config=config, tensors=tensors)


def sinusoidal_positions(length: int, d_model: int, dtype) -> np.ndarray:
    pos = np.arange(length, dtype=np.float64)[:, None]
    dim = np.arange(0, d_model, 2, dtype=np.float64)[None, :]
    angle = pos / np.power(10000.0, dim / d_model)
    pe = np.zeros((length, d_model), dtype=np.float64)
    pe[:, 0::2] = np.sin(angle)
    pe[:, 1::2] = np.cos(angle[:, : d_model // 2])
    return pe.astype(dtype)


# ---------------------------------------------------------------------------
# Primitive ops (forward + backward pairs)
# ---------------------------------------------------------------------------

def _linear(x, w):
    return x @ w


def _linear_back(dy, x, w):
    d_in = x.shape[-1]
    dx = dy @ w.T
    dw = x.reshape(-1, d_in).T @ dy.reshape(-1, w.shape[1])
    return dx, dw


def _rms_norm(x, g):
    r = np.sqrt(np.mean(x * x, axis=-1, keepdims=True) + EPS_NORM)
    xhat = x / r
    return xhat * g, (x, r, xhat)


def _rms_norm_back(dy, g, cache):
    x, r, xhat = cache
    dg = np.sum(dy * xhat, axis=tuple(range(x.ndim - 1)))
    u = dy * g
    d = x.shape[-1]
    dx = u / r - x * (np.sum(u * x, axis=-1, keepdims=True) / (d * r ** 3))
    return dx, dg


def _split_heads(x, n_heads):
    b, t, d = x.shape
    return x.reshape(b, t, n_heads, d // n_heads).transpose(0, 2, 1, 3)


def _merge_heads(x):
    b, h, t, k = x.shape
    return x.transpose(0, 2, 1, 3).reshape(b, t, h * k)


def _masked_softmax(scores, valid):
    """Row softmax over the last axis with boolean validity.

    Invalid positions are -inf before the max/exp, so their content can
    never leak; fully invalid rows come out as all zeros instead of NaN.
    """
    dt = scores.dtype.type
    masked = np.where(valid, scores, dt(-np.inf))
    rowmax = masked.max(axis=-1, keepdims=True)
    rowmax = np.where(np.isfinite(rowmax), rowmax, dt(0.0))
    e = np.exp(masked - rowmax)
    denom = e.sum(axis=-1, keepdims=True)
    return e / np.where(denom > 0, denom, dt(1.0))


def _softmax_back(dA, A):
    return A * (dA - np.sum(dA * A, axis=-1, keepdims=True))


def _attention(params, prefix, x_q, x_kv, valid, config):
    """Multi-head attention; `valid` is a broadcastable (B?, 1, Tq, Tk) bool."""
    t = params.tensors
    h = config.n_heads
    scale = (config.d_model // h) ** -0.5
    q = _split_heads(_linear(x_q, t[f"{prefix}.wq"]), h)
    k = _split_heads(_linear(x_kv, t[f"{prefix}.wk"]), h)
    v = _split_heads(_linear(x_kv, t[f"{prefix}.wv"]), h)
    scores = (q @ k.transpose(0, 1, 3, 2)) * scale
    attn = _masked_softmax(scores, valid)
    ctx = _merge_heads(attn @ v)
    out = _linear(ctx, t[f"{prefix}.wo"])
    return out, (x_q, x_kv, q, k, v, attn, ctx)


def _attention_back(dout, params, prefix, cache, config, grads):
    t = params.tensors
    h = config.n_heads
    scale = (config.d_model // h) ** -0.5
    x_q, x_kv, q, k, v, attn, ctx = cache

    dctx, dwo = _linear_back(dout, ctx, t[f"{prefix}.wo"])
    grads[f"{prefix}.wo"] += dwo
    dctx = _split_heads(dctx, h)

    dattn = dctx @ v.transpose(0, 1, 3, 2)
    dv = attn.transpose(0, 1, 3, 2) @ dctx
    dscores = _softmax_back(dattn, attn) * scale
    dq = dscores @ k
    dk = dscores.transpose(0, 1, 3, 2) @ q

    dxq, dwq = _linear_back(_merge_heads(dq), x_q, t[f"{prefix}.wq"])
    dxkv_k, dwk = _linear_back(_merge_heads(dk), x_kv, t[f"{prefix}.wk"])
    dxkv_v, dwv = _linear_back(_merge_heads(dv), x_kv, t[f"{prefix}.wv"])
    grads[f"{prefix}.wq"] += dwq
    grads[f"{prefix}.wk"] += dwk
    grads[f"{prefix}.wv"] += dwv
    return dxq, dxkv_k + dxkv_v


def _ffn(params, prefix, x):
    t = params.tensors
    h1 = _linear(x, t[f"{prefix}.w1"])
    a = np.maximum(h1, 0.0)
    y = _linear(a, t[f"{prefix}.w2"])
    return y, (x, h1, a)


def _ffn_back(dy, params, prefix, cache, grads):
    t = params.tensors
    x, h1, a = cache
    da, dw2 = _linear_back(dy, a, t[f"{prefix}.w2"])
    dh1 = da * (h1 > 0)
    dx, dw1 = _linear_back(dh1, x, t[f"{prefix}.w1"])
    grads[f"{prefix}.w1"] += dw1
    grads[f"{prefix}.w2"] += dw2
    return dx


def _dropout_mask(shape, p, rng, dtype):
    if rng is None or p <= 0.0:
        return None
    return (rng.random(shape) >= p).astype(dtype) / dtype.type(1.0 - p)


# ---------------------------------------------------------------------------
# Encoder / decoder stacks
# ---------------------------------------------------------------------------

def _embed(params, ids):
    config = params.config
    e = params.tensors["embedding"]
    scale = math.sqrt(config.d_model)
    pe = sinusoidal_positions(ids.shape[1], config.d_model, e.dtype)
    return e[ids] * e.dtype.type(scale) + pe


def _encode(params, src, src_mask, rng=None, cache=None):
    config = params.config
    p = config.dropout
    x = _embed(params, src)
    valid = src_mask[:, None, None, :]
    layer_caches = []
    for i in range(config.n_enc_layers):
        pre = f"enc{i}"
        h, nc1 = _rms_norm(x, params.tensors[f"{pre}.attn_norm.g"])
        attn_out, ac = _attention(params, f"{pre}.attn", h, h, valid, config)
        m1 = _dropout_mask(attn_out.shape, p, rng, attn_out.dtype)
        if m1 is not None:
            attn_out = attn_out * m1
        x = x + attn_out
        h2, nc2 = _rms_norm(x, params.tensors[f"{pre}.ff_norm.g"])
        ff_out, fc = _ffn(params, f"{pre}.ff", h2)
        m2 = _dropout_mask(ff_out.shape, p, rng, ff_out.dtype)
        if m2 is not None:
            ff_out = ff_out * m2
        x = x + ff_out
        layer_caches.append((nc1, ac, m1, nc2, fc, m2))
    out, final_cache = _rms_norm(x, params.tensors["enc_norm.g"])
    if cache is not None:
        cache["enc_layers"] = layer_caches
        cache["enc_final"] = final_cache
        cache["enc_valid"] = valid
        cache["src"] = src
    return out


def _decode(params, enc_out, src_mask, tgt_in, tgt_mask, rng=None, cache=None):
    config = params.config
    p = config.dropout
    x = _embed(params, tgt_in)
    t_len = tgt_in.shape[1]
    causal = np.tril(np.ones((t_len, t_len), dtype=bool))
    self_valid = tgt_mask[:, None, None, :] & causal[None, None, :, :]
    cross_valid = src_mask[:, None, None, :]
    layer_caches = []
    for i in range(config.n_dec_layers):
        pre = f"dec{i}"
        h, nc1 = _rms_norm(x, params.tensors[f"{pre}.self_norm.g"])
        self_out, sc = _attention(params, f"{pre}.self", h, h, self_valid, config)
        m1 = _dropout_mask(self_out.shape, p, rng, self_out.dtype)
        if m1 is not None:
            self_out = self_out * m1
        x = x + self_out
        h2, nc2 = _rms_norm(x, params.tensors[f"{pre}.cross_norm.g"])
        cross_out, cc = _attention(params, f"{pre}.cross", h2, enc_out, cross_valid, config)
        m2 = _dropout_mask(cross_out.shape, p, rng, cross_out.dtype)
        if m2 is not None:
            cross_out = cross_out * m2
        x = x + cross_out
        h3, nc3 = _rms_norm(x, params.tensors[f"{pre}.ff_norm.g"])
        ff_out, fc = _ffn(params, f"{pre}.ff", h3)
        m3 = _dropout_mask(ff_out.shape, p, rng, ff_out.dtype)
        if m3 is not None:
            ff_out = ff_out * m3
        x = x + ff_out
        layer_caches.append((nc1, sc, m1, nc2, cc, m2, nc3, fc, m3))
    out, final_cache = _rms_norm(x, params.tensors["dec_norm.g"])
    if cache is not None:
        cache["dec_layers"] = layer_caches
        cache["dec_final"] = final_cache
        cache["tgt_in"] = tgt_in
    return out


def _logits(params, dec_out):
    return dec_out @ params.tensors["embedding"].T


def _check_batch(params: Parameters, batch: Batch) -> None:
    config = params.config
    v = config.vocab_size
    for name, ids in (("src", batch.src), ("tgt_in", batch.tgt_in), ("labels", batch.labels)):
        arr = np.asarray(ids)
        if arr.size and (arr.min() < 0 or arr.max() >= v):
            raise ContractError(f"{name} contains ids outside [0, {v})")
    if batch.src.shape[1] > config.max_src_len:
        raise ContractError(
            f"source length {batch.src.shape[1]} exceeds max_src_len {config.max_src_len}"
        )
    if batch.tgt_in.shape[1] > config.max_tgt_len:
        raise ContractError(
            f"target length {batch.tgt_in.shape[1]} exceeds max_tgt_len {config.max_tgt_len}"
        )
    if batch.src.shape != batch.src_mask.shape or batch.tgt_in.shape != batch.labels.shape:
        raise ContractError("batch id/mask shapes do not line up")


def forward_loss(params: Parameters, batch: Batch) -> tuple[float, np.ndarray]:
    """Mean token-level cross-entropy over scored positions, plus logits.

    A batch with no scored positions has loss 0 by convention.
    """
    _check_batch(params, batch)
    enc_out = _encode(params, batch.src, batch.src_mask)
    dec_out = _decode(params, enc_out, batch.src_mask, batch.tgt_in, batch.tgt_mask)
    logits = _logits(params, dec_out)
    loss, _ = _cross_entropy(logits, batch.labels, batch.label_mask)
    return loss, logits


def _cross_entropy(logits, labels, label_mask):
    rowmax = logits.max(axis=-1, keepdims=True)
    shifted = logits - rowmax
    lse = np.log(np.exp(shifted).sum(axis=-1, keepdims=True)) + rowmax
    logp = np.take_along_axis(logits - lse, labels[..., None], axis=-1)[..., 0]
    n = int(label_mask.sum())
    if n == 0:
        return 0.0, 0
    loss = float(-(logp * label_mask).sum() / n)
    return loss, n


def loss_and_grads(
    params: Parameters, batch: Batch, dropout_rng: np.random.Generator | None = None
) -> tuple[float, np.ndarray, dict[str, np.ndarray]]:
    """One forward pass with cache, then full backpropagation.

    Returns (loss, logits, gradients); gradient keys and shapes mirror
    ``params.tensors`` exactly.
    """
    _check_batch(params, batch)
    config = params.config
    cache: dict = {}
    enc_out = _encode(params, batch.src, batch.src_mask, rng=dropout_rng, cache=cache)
    dec_out = _decode(
        params, enc_out, batch.src_mask, batch.tgt_in, batch.tgt_mask,
        rng=dropout_rng, cache=cache,
    )
    logits = _logits(params, dec_out)
    loss, n = _cross_entropy(logits, batch.labels, batch.label_mask)

    grads = {k: np.zeros_like(v) for k, v in params.tensors.items()}
    if n == 0:
        return loss, logits, grads

    # d loss / d logits
    rowmax = logits.max(axis=-1, keepdims=True)
    e = np.exp(logits - rowmax)
    p = e / e.sum(axis=-1, keepdims=True)
    dlogits = p.copy()
    b_idx, t_idx = np.meshgrid(
        np.arange(logits.shape[0]), np.arange(logits.shape[1]), indexing="ij"
    )
    dlogits[b_idx, t_idx, batch.labels] -= 1.0
    dlogits *= (batch.label_mask[..., None] / n)

    emb = params.tensors["embedding"]
    grads["embedding"] += (
        dlogits.reshape(-1, dlogits.shape[-1]).T @ dec_out.reshape(-1, config.d_model)
    )
    ddec = dlogits @ emb

    denc = _decoder_backward(ddec, params, batch, cache, grads)
    _encoder_backward(denc, params, batch, cache, grads)
    return loss, logits, grads


def _embed_backward(dx, ids, params, grads):
    scale = math.sqrt(params.config.d_model)
    flat = (dx * dx.dtype.type(scale)).reshape(-1, params.config.d_model)
    np.add.at(grads["embedding"], ids.reshape(-1), flat)


def _decoder_backward(ddec, params, batch, cache, grads):
    config = params.config
    dx, dg = _rms_norm_back(ddec, params.tensors["dec_norm.g"], cache["dec_final"])
    grads["dec_norm.g"] += dg
    denc_total = None
    for i in range(config.n_dec_layers - 1, -1, -1):
        pre = f"dec{i}"
        nc1, sc, m1, nc2, cc, m2, nc3, fc, m3 = cache["dec_layers"][i]

        dff_out = dx if m3 is None else dx * m3
        dh3 = _ffn_back(dff_out, params, f"{pre}.ff", fc, grads)
        dxn, dg = _rms_norm_back(dh3, params.tensors[f"{pre}.ff_norm.g"], nc3)
        grads[f"{pre}.ff_norm.g"] += dg
        dx = dx + dxn

        dcross_out = dx if m2 is None else dx * m2
        dh2, denc = _attention_back(dcross_out, params, f"{pre}.cross", cc, config, grads)
        denc_total = denc if denc_total is None else denc_total + denc
        dxn, dg = _rms_norm_back(dh2, params.tensors[f"{pre}.cross_norm.g"], nc2)
        grads[f"{pre}.cross_norm.g"] += dg
        dx = dx + dxn

        dself_out = dx if m1 is None else dx * m1
        dhq, dhkv = _attention_back(dself_out, params, f"{pre}.self", sc, config, grads)
        dxn, dg = _rms_norm_back(dhq + dhkv, params.tensors[f"{pre}.self_norm.g"], nc1)
        grads[f"{pre}.self_norm.g"] += dg
        dx = dx + dxn

    _embed_backward(dx, cache["tgt_in"], params, grads)
    if denc_total is None:
        denc_total = np.zeros(
            (batch.src.shape[0], batch.src.shape[1], config.d_model),
            dtype=params.dtype,
        )
    return denc_total


def _encoder_backward(denc, params, batch, cache, grads):
    config = params.config
    dx, dg = _rms_norm_back(denc, params.tensors["enc_norm.g"], cache["enc_final"])
    grads["enc_norm.g"] += dg
    for i in range(config.n_enc_layers - 1, -1, -1):
        pre = f"enc{i}"
        nc1, ac, m1, nc2, fc, m2 = cache["enc_layers"][i]

        dff_out = dx if m2 is None else dx * m2
        dh2 = _ffn_back(dff_out, params, f"{pre}.ff", fc, grads)
        dxn, dg = _rms_norm_back(dh2, params.tensors[f"{pre}.ff_norm.g"], nc2)
        grads[f"{pre}.ff_norm.g"] += dg
        dx = dx + dxn

        dattn_out = dx if m1 is None else dx * m1
        dhq, dhkv = _attention_back(dattn_out, params, f"{pre}.attn", ac, config, grads)
        dxn, dg = _rms_norm_back(dhq + dhkv, params.tensors[f"{pre}.attn_norm.g"], nc1)
        grads[f"{pre}.attn_norm.g"] += dg
        dx = dx + dxn

    _embed_backward(dx, cache["src"], params, grads)


def backward(params: Parameters, batch: Batch) -> dict[str, np.ndarray]:
    """Gradient of the batch loss with respect to every parameter."""
    _, _, grads = loss_and_grads(params, batch)
    return grads


# ---------------------------------------------------------------------------
# Greedy decoding
# ---------------------------------------------------------------------------

def greedy_decode_batch(
    params: Parameters,
    src: np.ndarray,
    src_mask: np.ndarray,
    max_len: int,
    pad_id: int,
    eos_id: int,
) -> list[list[int]]:
    """Greedy decode every row of a source batch.

    Appends the argmax token step by step until EOS or ``max_len``; argmax
    ties resolve to the lowest token id.  EOS is not part of the output.
    """
    if src.shape[1] > params.config.max_src_len:
        raise ContractError(
            f"source length {src.shape[1]} exceeds max_src_len {params.config.max_src_len}"
        )
    n = src.shape[0]
    enc_out = _encode(params, src, src_mask)
    outputs: list[list[int]] = [[] for _ in range(n)]
    finished = np.zeros(n, dtype=bool)
    tgt = np.full((n, 1), pad_id, dtype=src.dtype)
    for _ in range(max_len):
        tgt_mask = np.ones_like(tgt, dtype=bool)
        dec_out = _decode(params, enc_out, src_mask, tgt, tgt_mask)
        logits = _logits(params, dec_out[:, -1:, :])[:, 0, :]
        nxt = logits.argmax(axis=-1)
        nxt = np.where(finished, pad_id, nxt)
        finished = finished | (nxt == eos_id)
        for row in range(n):
            if not finished[row] and nxt[row] != pad_id or (nxt[row] != pad_id and nxt[row] != eos_id and not finished[row]):
                pass
        for row in range(n):
            if not finished[row]:
                outputs[row].append(int(nxt[row]))
        if finished.all():
            break
        tgt = np.concatenate([tgt, np.where(finished, pad_id, nxt)[:, None]], axis=1)
        if tgt.shape[1] > params.config.max_tgt_len:
            break
    return outputs


def greedy_decode(params: Parameters, input_ids: Iterable[int], max_len: int,
                  pad_id: int = 0, eos_id: int = 1) -> list[int]:
    """Greedy decode a single source sequence of token ids."""
    ids = np.asarray(list(input_ids), dtype=np.int64)[None, :]
    mask = np.ones_like(ids, dtype=bool)
    return greedy_decode_batch(params, ids, mask, max_len, pad_id, eos_id)[0]
