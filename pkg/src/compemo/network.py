"""The trainable sequence classifier, with hand-written backprop.

Per-frame features are embedded to the model width, summed with a fixed
sinusoidal positional table and run through pre-norm transformer encoder
layers (parameter-free layer norm, multi-head self-attention, 2-layer
ReLU feed-forward, residuals). The time-pooled state feeds two heads: a
7-way compound-class head and a 2-logit valence/arousal sign head.

All forward passes take a batch of sequences (B, T, D). `backward`
returns analytic gradients for every learnable tensor; the positional
table is fixed and carries no gradient.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError

NUM_CLASSES = 7
VA_DIM = 2
LN_EPS = 1e-5

CHECKPOINT_MAGIC = b"TLHC"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class HyperParams:
    dim: int = 64        # per-frame feature width D
    width: int = 64      # model width H
    layers: int = 1
    heads: int = 4
    seq_len: int = 15

    def __post_init__(self):
        if self.width % self.heads != 0:
            raise ConfigError(
                f"width {self.width} not divisible by {self.heads} heads")
        if min(self.dim, self.width, self.layers, self.heads, self.seq_len) < 1:
            raise ConfigError(f"bad hyperparameters: {self}")


def tensor_names(hyper: HyperParams) -> list[str]:
    """Fixed tensor order, also the checkpoint serialization order."""
    names = ["embed_w", "embed_b", "posenc"]
    for i in range(hyper.layers):
        names += [f"l{i}.{n}" for n in
                  ("wq", "wk", "wv", "wo", "w1", "b1", "w2", "b2")]
    return names + ["class_w", "class_b", "va_w", "va_b"]


def tensor_shapes(hyper: HyperParams) -> dict[str, tuple[int, ...]]:
    d, h, f, t = hyper.dim, hyper.width, 4 * hyper.width, hyper.seq_len
    shapes: dict[str, tuple[int, ...]] = {
        "embed_w": (d, h), "embed_b": (h,), "posenc": (t, h),
        "class_w": (h, NUM_CLASSES), "class_b": (NUM_CLASSES,),
        "va_w": (h, VA_DIM), "va_b": (VA_DIM,),
    }
    for i in range(hyper.layers):
        shapes.update({
            f"l{i}.wq": (h, h), f"l{i}.wk": (h, h),
            f"l{i}.wv": (h, h), f"l{i}.wo": (h, h),
            f"l{i}.w1": (h, f), f"l{i}.b1": (f,),
            f"l{i}.w2": (f, h), f"l{i}.b2": (h,),
        })
    return shapes


@dataclass
class ModelParams:
    hyper: HyperParams
    tensors: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        shapes = tensor_shapes(self.hyper)
        for name in tensor_names(self.hyper):
            if name not in self.tensors:
                raise ConfigError(f"missing tensor {name}")
            if self.tensors[name].shape != shapes[name]:
                raise ConfigError(f"tensor {name}: shape {self.tensors[name].shape}, "
                                  f"want {shapes[name]}")
            if not np.isfinite(self.tensors[name]).all():
                raise ConfigError(f"tensor {name} has non-finite entries")

    @property
    def dtype(self) -> np.dtype:
        return self.tensors["embed_w"].dtype

    def grad_names(self) -> list[str]:
        return [n for n in tensor_names(self.hyper) if n != "posenc"]


def sinusoidal_posenc(seq_len: int, width: int, dtype=np.float32) -> np.ndarray:
    pos = np.arange(seq_len, dtype=np.float64)[:, None]
    idx = np.arange(width, dtype=np.float64)[None, :]
    angle = pos / np.power(10000.0, 2.0 * (idx // 2) / width)
    table = np.where(idx % 2 == 0, np.sin(angle), np.cos(angle))
    return table.astype(dtype)


def init_params(hyper: HyperParams, rng: np.random.Generator,
                dtype=np.float32, zero_posenc: bool = False) -> ModelParams:
    """Uniform(-1/sqrt(fan_in)) weights, zero biases, fixed positional table."""
    fan_in = {"embed_w": hyper.dim, "class_w": hyper.width, "va_w": hyper.width}
    for i in range(hyper.layers):
        fan_in.update({f"l{i}.wq": hyper.width, f"l{i}.wk": hyper.width,
                       f"l{i}.wv": hyper.width, f"l{i}.wo": hyper.width,
                       f"l{i}.w1": hyper.width, f"l{i}.w2": 4 * hyper.width})
    tensors = {}
    for name, shape in tensor_shapes(hyper).items():
        if name == "posenc":
            tensors[name] = (np.zeros(shape, dtype) if zero_posenc
                             else sinusoidal_posenc(*shape, dtype=dtype))
        elif name in fan_in:
            s = 1.0 / np.sqrt(fan_in[name])
            tensors[name] = rng.uniform(-s, s, size=shape).astype(dtype)
        else:
            tensors[name] = np.zeros(shape, dtype)
    return ModelParams(hyper, {n: tensors[n] for n in tensor_names(hyper)})


@dataclass
class ForwardOutput:
    class_logits: np.ndarray  # (B, 7)
    va_logits: np.ndarray     # (B, 2)
    cache: dict


def _layer_norm(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Normalize the last axis; returns (y, inv_std). No learned affine."""
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + LN_EPS)
    return (x - mu) * inv, inv


def _layer_norm_backward(dy: np.ndarray, y: np.ndarray, inv: np.ndarray) -> np.ndarray:
    mean_dy = dy.mean(axis=-1, keepdims=True)
    mean_dyy = (dy * y).mean(axis=-1, keepdims=True)
    return inv * (dy - mean_dy - y * mean_dyy)


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    z = x - x.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _split_heads(x: np.ndarray, heads: int) -> np.ndarray:
    b, t, h = x.shape
    return x.reshape(b, t, heads, h // heads).transpose(0, 2, 1, 3)


def _merge_heads(x: np.ndarray) -> np.ndarray:
    b, nh, t, dh = x.shape
    return x.transpose(0, 2, 1, 3).reshape(b, t, nh * dh)


def forward(params: ModelParams, seqs: np.ndarray) -> ForwardOutput:
    """Run the encoder on a batch of sequences, shape (B, T, D) or (T, D)."""
    hyper = params.hyper
    seqs = np.asarray(seqs, dtype=params.dtype)
    if seqs.ndim == 2:
        seqs = seqs[None]
    if seqs.ndim != 3 or seqs.shape[1:] != (hyper.seq_len, hyper.dim):
        raise ConfigError(f"expected (B, {hyper.seq_len}, {hyper.dim}) input, "
                          f"got {seqs.shape}")
    if not np.isfinite(seqs).all():
        raise DataError("non-finite values in input sequences")
    p = params.tensors
    scale = 1.0 / np.sqrt(hyper.width // hyper.heads)

    x = seqs @ p["embed_w"] + p["embed_b"] + p["posenc"]
    cache: dict = {"seqs": seqs, "layers": []}
    for i in range(hyper.layers):
        lc: dict = {"x_in": x}
        a, inv1 = _layer_norm(x)
        lc["a"], lc["inv1"] = a, inv1
        q = _split_heads(a @ p[f"l{i}.wq"], hyper.heads)
        k = _split_heads(a @ p[f"l{i}.wk"], hyper.heads)
        v = _split_heads(a @ p[f"l{i}.wv"], hyper.heads)
        w = softmax(scale * (q @ k.transpose(0, 1, 3, 2)), axis=-1)
        o = _merge_heads(w @ v)
        lc.update(q=q, k=k, v=v, w=w, o=o)
        x = x + o @ p[f"l{i}.wo"]
        lc["x_mid"] = x
        f, inv2 = _layer_norm(x)
        lc["f"], lc["inv2"] = f, inv2
        u = f @ p[f"l{i}.w1"] + p[f"l{i}.b1"]
        r = np.maximum(u, 0.0)
        lc["u"], lc["r"] = u, r
        x = x + r @ p[f"l{i}.w2"] + p[f"l{i}.b2"]
        cache["layers"].append(lc)
    h = x.mean(axis=1)
    cache["h"] = h
    return ForwardOutput(
        class_logits=h @ p["class_w"] + p["class_b"],
        va_logits=h @ p["va_w"] + p["va_b"],
        cache=cache,
    )


@dataclass(frozen=True)
class Targets:
    """Per-item supervision for a batch.

    class_idx: (B,) int, -1 where the item has no class label.
    va_signs:  (B, 2) in {-1, 0, +1}; 0 leaves that axis unsupervised.
    """

    class_idx: np.ndarray
    va_signs: np.ndarray

    @classmethod
    def build(cls, class_idx, va_signs) -> "Targets":
        ci = np.asarray(class_idx, dtype=np.int64).reshape(-1)
        va = np.asarray(va_signs, dtype=np.float64).reshape(len(ci), VA_DIM)
        if ci.max(initial=-1) >= NUM_CLASSES or ci.min(initial=-1) < -1:
            raise ValueError(f"class index out of range: {ci}")
        if not np.isin(va, (-1.0, 0.0, 1.0)).all():
            raise ValueError("va signs must be -1, 0 or +1")
        return cls(ci, va)

    @classmethod
    def for_class(cls, class_idx) -> "Targets":
        ci = np.asarray(class_idx).reshape(-1)
        return cls.build(ci, np.zeros((len(ci), VA_DIM)))

    @classmethod
    def for_va(cls, va_signs) -> "Targets":
        va = np.asarray(va_signs, dtype=np.float64).reshape(-1, VA_DIM)
        return cls.build(np.full(len(va), -1), va)


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def loss(out: ForwardOutput, targets: Targets,
         class_weight: float = 1.0, va_weight: float = 1.0) -> float:
    """Batch-mean loss: softmax cross-entropy on the class head plus two
    independent sigmoid binary cross-entropies on the VA head."""
    z = np.asarray(out.class_logits, dtype=np.float64)
    ell = np.asarray(out.va_logits, dtype=np.float64)
    b = z.shape[0]
    if targets.class_idx.shape[0] != b:
        raise ValueError(f"targets cover {targets.class_idx.shape[0]} items, batch is {b}")
    total = 0.0

    has_class = targets.class_idx >= 0
    if has_class.any():
        zi = z[has_class]
        lse = np.log(np.exp(zi - zi.max(axis=1, keepdims=True)).sum(axis=1)) \
            + zi.max(axis=1)
        picked = zi[np.arange(len(zi)), targets.class_idx[has_class]]
        total += class_weight * float((lse - picked).sum())

    va_mask = targets.va_signs != 0.0
    if va_mask.any():
        y = (targets.va_signs + 1.0) / 2.0
        bce = _softplus(ell) - y * ell
        total += va_weight * float(bce[va_mask].sum())
    return total / b


def _logit_grads(out: ForwardOutput, targets: Targets,
                 class_weight: float, va_weight: float
                 ) -> tuple[np.ndarray, np.ndarray]:
    z = out.class_logits
    ell = out.va_logits
    b = z.shape[0]
    dz = np.zeros_like(z)
    has_class = targets.class_idx >= 0
    if has_class.any():
        probs = softmax(z[has_class], axis=1)
        probs[np.arange(probs.shape[0]), targets.class_idx[has_class]] -= 1.0
        dz[has_class] = (class_weight / b) * probs
    va_mask = (targets.va_signs != 0.0).astype(ell.dtype)
    y = (targets.va_signs + 1.0) / 2.0
    dell = (va_weight / b) * va_mask * (sigmoid(ell) - y.astype(ell.dtype))
    return dz.astype(z.dtype), dell.astype(ell.dtype)


def backward(params: ModelParams, out: ForwardOutput, targets: Targets,
             class_weight: float = 1.0, va_weight: float = 1.0
             ) -> dict[str, np.ndarray]:
    """Analytic gradients of `loss` w.r.t. every learnable tensor."""
    hyper = params.hyper
    p = params.tensors
    cache = out.cache
    scale = 1.0 / np.sqrt(hyper.width // hyper.heads)
    t = hyper.seq_len

    dz, dell = _logit_grads(out, targets, class_weight, va_weight)
    h = cache["h"]
    grads: dict[str, np.ndarray] = {
        "class_w": h.T @ dz, "class_b": dz.sum(axis=0),
        "va_w": h.T @ dell, "va_b": dell.sum(axis=0),
    }
    dh = dz @ p["class_w"].T + dell @ p["va_w"].T
    dx = np.repeat(dh[:, None, :] / t, t, axis=1)

    for i in reversed(range(hyper.layers)):
        lc = cache["layers"][i]
        # feed-forward sublayer: x_out = x_mid + relu(LN(x_mid) @ w1 + b1) @ w2 + b2
        dr = dx @ p[f"l{i}.w2"].T
        grads[f"l{i}.w2"] = np.einsum("btf,bth->fh", lc["r"], dx)
        grads[f"l{i}.b2"] = dx.sum(axis=(0, 1))
        du = dr * (lc["u"] > 0)
        grads[f"l{i}.w1"] = np.einsum("bth,btf->hf", lc["f"], du)
        grads[f"l{i}.b1"] = du.sum(axis=(0, 1))
        df = du @ p[f"l{i}.w1"].T
        dx = dx + _layer_norm_backward(df, lc["f"], lc["inv2"])

        # attention sublayer: x_mid = x_in + attn(LN(x_in)) @ wo
        do = dx @ p[f"l{i}.wo"].T
        grads[f"l{i}.wo"] = np.einsum("bth,btg->hg", lc["o"], dx)
        doh = _split_heads(do, hyper.heads)
        dw = doh @ lc["v"].transpose(0, 1, 3, 2)
        dv = lc["w"].transpose(0, 1, 3, 2) @ doh
        ds = lc["w"] * (dw - (dw * lc["w"]).sum(axis=-1, keepdims=True))
        dq = scale * (ds @ lc["k"])
        dk = scale * (ds.transpose(0, 1, 3, 2) @ lc["q"])
        dq, dk, dv = (_merge_heads(a) for a in (dq, dk, dv))
        a = lc["a"]
        grads[f"l{i}.wq"] = np.einsum("bth,btg->hg", a, dq)
        grads[f"l{i}.wk"] = np.einsum("bth,btg->hg", a, dk)
        grads[f"l{i}.wv"] = np.einsum("bth,btg->hg", a, dv)
        da = dq @ p[f"l{i}.wq"].T + dk @ p[f"l{i}.wk"].T + dv @ p[f"l{i}.wv"].T
        dx = dx + _layer_norm_backward(da, a, lc["inv1"])

    grads["embed_w"] = np.einsum("btd,bth->dh", cache["seqs"], dx)
    grads["embed_b"] = dx.sum(axis=(0, 1))
    return {n: grads[n].astype(params.dtype, copy=False) for n in params.grad_names()}


# --- checkpoint format ----------------------------------------------------

def save_checkpoint(params: ModelParams, path: str | Path) -> None:
    """Binary checkpoint, little-endian:

    magic "TLHC" | u32 version=1 | u32 H, layers, heads, D |
    per tensor (fixed `tensor_names` order): u32 rank, u32 dims..., float32 data
    """
    hyper = params.hyper
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<IIIII", CHECKPOINT_VERSION,
                             hyper.width, hyper.layers, hyper.heads, hyper.dim))
        for name in tensor_names(hyper):
            arr = params.tensors[name]
            fh.write(struct.pack("<I", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def load_checkpoint(path: str | Path) -> ModelParams:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < 24 or raw[:4] != CHECKPOINT_MAGIC:
        raise DataError(f"{path}: not a checkpoint file (bad magic)")
    version, width, layers, heads, dim = struct.unpack_from("<IIIII", raw, 4)
    if version != CHECKPOINT_VERSION:
        raise DataError(f"{path}: unsupported checkpoint version {version}")
    offset = 24
    tensors: dict[str, np.ndarray] = {}
    try:
        hyper = HyperParams(dim=dim, width=width, layers=layers, heads=heads)
    except ConfigError as exc:
        raise DataError(f"{path}: bad hyperparameters: {exc}") from None
    for name in tensor_names(hyper):
        if offset + 4 > len(raw):
            raise DataError(f"{path}: truncated before tensor {name}")
        (rank,) = struct.unpack_from("<I", raw, offset)
        offset += 4
        if rank > 4 or offset + 4 * rank > len(raw):
            raise DataError(f"{path}: bad rank {rank} for tensor {name}")
        shape = struct.unpack_from(f"<{rank}I", raw, offset)
        offset += 4 * rank
        count = int(np.prod(shape, dtype=np.int64)) if rank else 1
        if offset + 4 * count > len(raw):
            raise DataError(f"{path}: truncated data for tensor {name}")
        tensors[name] = np.frombuffer(raw, dtype="<f4", count=count,
                                      offset=offset).reshape(shape).copy()
        offset += 4 * count
    if offset != len(raw):
        raise DataError(f"{path}: {len(raw) - offset} trailing bytes")
    # seq_len travels with the positional table, not the header
    hyper = HyperParams(dim=dim, width=width, layers=layers, heads=heads,
                        seq_len=tensors["posenc"].shape[0])
    try:
        return ModelParams(hyper, tensors)
    except ConfigError as exc:
        raise DataError(f"{path}: {exc}") from None
