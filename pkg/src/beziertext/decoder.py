"""Forward arithmetic of the attention-based recognizer: additive attention
over a sequence of feature vectors, a GRU state update, linear + softmax
classification, and greedy decoding with an end-of-sequence stop.

Symbol ids: 0..num_classes-1 are characters, then EOS, then BOS (BOS exists
only as an embedding row and is never predicted). Decoding starts from a zero
hidden state and the BOS embedding and stops when EOS wins the argmax or the
step limit is reached. With a teacher sequence, each step feeds the
ground-truth symbol instead of the prediction with the given probability,
drawn from a seeded generator so runs are reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError


def softmax(x: np.ndarray) -> np.ndarray:
    """Max-subtracted softmax; safe for logit magnitudes well beyond 1e4."""
    x = np.asarray(x, dtype=float)
    e = np.exp(x - x.max())
    return e / e.sum()


@dataclass(frozen=True, eq=False)
class GruWeights:
    """Standard GRU cell: update gate z, reset gate r, candidate state.

    h_t = (1 - z) * h_prev + z * tanh(w_h x + u_h (r * h_prev) + b_h)
    with z = sigmoid(w_z x + u_z h + b_z) and r likewise.
    """

    w_z: np.ndarray
    u_z: np.ndarray
    b_z: np.ndarray
    w_r: np.ndarray
    u_r: np.ndarray
    b_r: np.ndarray
    w_h: np.ndarray
    u_h: np.ndarray
    b_h: np.ndarray

    @property
    def hidden(self) -> int:
        return self.w_z.shape[0]

    @property
    def input_dim(self) -> int:
        return self.w_z.shape[1]


@dataclass(frozen=True)
class CharsetSpec:
    """Class-count contract: num_classes counts characters; when
    includes_eos is False an EOS class is appended after them."""

    num_classes: int
    includes_eos: bool = False

    def __post_init__(self):
        if self.num_classes < 1:
            raise ValidationError(f"num_classes must be positive, got {self.num_classes}")

    @property
    def num_symbols(self) -> int:
        """Total classifier outputs, EOS included."""
        return self.num_classes + (0 if self.includes_eos else 1)

    @property
    def eos(self) -> int:
        return self.num_symbols - 1

    @property
    def bos(self) -> int:
        """Embedding row index of the start symbol (not a classifier output)."""
        return self.num_symbols


ENGLISH = CharsetSpec(num_classes=96)
BILINGUAL = CharsetSpec(num_classes=5462)


@dataclass(frozen=True, eq=False)
class DecoderParams:
    attn_k: np.ndarray      # (attn,)
    attn_w: np.ndarray      # (attn, hidden)
    attn_u: np.ndarray      # (attn, feature)
    attn_b: np.ndarray      # (attn,)
    gru: GruWeights         # input = embed + feature, state = hidden
    cls_w: np.ndarray       # (symbols, hidden)
    cls_b: np.ndarray       # (symbols,)
    cls_v: np.ndarray       # (symbols, hidden)
    embeddings: np.ndarray  # (symbols + 1, embed); last row is BOS

    def __post_init__(self):
        attn, hidden = self.attn_w.shape
        feature = self.attn_u.shape[1]
        symbols = self.cls_v.shape[0]
        embed = self.embeddings.shape[1]
        checks = [
            (self.attn_k.shape, (attn,)),
            (self.attn_u.shape, (attn, feature)),
            (self.attn_b.shape, (attn,)),
            (self.cls_w.shape, (symbols, hidden)),
            (self.cls_b.shape, (symbols,)),
            (self.cls_v.shape, (symbols, hidden)),
            (self.embeddings.shape, (symbols + 1, embed)),
        ]
        for got, want in checks:
            if got != want:
                raise ValidationError(f"inconsistent parameter shapes: {got} vs expected {want}")
        if self.gru.input_dim != embed + feature or self.gru.hidden != hidden:
            raise ValidationError(
                f"GRU expects input {embed + feature} and state {hidden}, "
                f"got {self.gru.input_dim} and {self.gru.hidden}"
            )
        for arr in (self.attn_k, self.attn_w, self.attn_u, self.attn_b,
                    self.cls_w, self.cls_b, self.cls_v, self.embeddings):
            if not np.isfinite(arr).all():
                raise ValidationError("parameters contain NaN or Inf")

    @property
    def hidden(self) -> int:
        return self.attn_w.shape[1]

    @property
    def feature(self) -> int:
        return self.attn_u.shape[1]

    @property
    def num_symbols(self) -> int:
        return self.cls_v.shape[0]


def attention_step(h_prev: np.ndarray, feats: np.ndarray,
                   params: DecoderParams) -> tuple[np.ndarray, np.ndarray]:
    """Additive attention over the feature sequence.

    Scores e_s = k . tanh(W h_prev + U f_s + b) are softmax-normalized into
    weights that sum to 1; the context is the weighted sum of features.
    Returns (weights (n,), context (feature,)).
    """
    h_prev = np.asarray(h_prev, dtype=float)
    feats = np.asarray(feats, dtype=float)
    if feats.ndim != 2 or feats.shape[1] != params.feature:
        raise ValidationError(f"features must be (n, {params.feature}), got {feats.shape}")
    if h_prev.shape != (params.hidden,):
        raise ValidationError(f"hidden state must be ({params.hidden},), got {h_prev.shape}")
    pre = np.tanh(params.attn_w @ h_prev + feats @ params.attn_u.T + params.attn_b)
    weights = softmax(pre @ params.attn_k)
    return weights, weights @ feats


def gru_step(prev_symbol: int, context: np.ndarray, h_prev: np.ndarray,
             params: DecoderParams) -> np.ndarray:
    """One GRU update on the concatenated (embedding, context) input."""
    if not (0 <= prev_symbol < len(params.embeddings)):
        raise ValidationError(f"symbol {prev_symbol} has no embedding row")
    g = params.gru
    x = np.concatenate([params.embeddings[prev_symbol], np.asarray(context, dtype=float)])
    h_prev = np.asarray(h_prev, dtype=float)
    if x.shape != (g.input_dim,) or h_prev.shape != (g.hidden,):
        raise ValidationError("GRU input/state dimensions do not match the weights")
    z = _sigmoid(g.w_z @ x + g.u_z @ h_prev + g.b_z)
    r = _sigmoid(g.w_r @ x + g.u_r @ h_prev + g.b_r)
    cand = np.tanh(g.w_h @ x + g.u_h @ (r * h_prev) + g.b_h)
    return (1.0 - z) * h_prev + z * cand


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=float)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def classify_step(h_t: np.ndarray, params: DecoderParams) -> tuple[np.ndarray, np.ndarray]:
    """Linear logits plus the softmax class distribution over the hidden state."""
    h_t = np.asarray(h_t, dtype=float)
    if h_t.shape != (params.hidden,):
        raise ValidationError(f"hidden state must be ({params.hidden},), got {h_t.shape}")
    logits = params.cls_w @ h_t + params.cls_b
    probs = softmax(params.cls_v @ h_t)
    return logits, probs


def decode_sequence(feats: np.ndarray, params: DecoderParams, charset: CharsetSpec,
                    max_steps: int = 25, teacher: list[int] | None = None,
                    teacher_prob: float = 0.5, rng_seed: int = 0) -> list[int]:
    """Greedy decode: argmax of the class distribution each step, stopping at
    EOS or after max_steps. Returns predicted symbol ids, EOS excluded.

    When `teacher` is given, the input fed to the next step is the teacher
    symbol with probability teacher_prob (per-step draws from a generator
    seeded with rng_seed), otherwise the step's own prediction; predictions
    past the teacher's length fall back to the model output.
    """
    if max_steps < 1:
        raise ValidationError(f"max_steps must be >= 1, got {max_steps}")
    if not (0.0 <= teacher_prob <= 1.0):
        raise ValidationError(f"teacher_prob {teacher_prob} outside [0, 1]")
    if params.num_symbols != charset.num_symbols:
        raise ValidationError(
            f"params expose {params.num_symbols} classes, charset expects {charset.num_symbols}"
        )
    if teacher is not None:
        for s in teacher:
            if not (0 <= s < charset.num_symbols):
                raise ValidationError(f"teacher symbol {s} outside 0..{charset.num_symbols - 1}")

    rng = np.random.default_rng(rng_seed)
    h = np.zeros(params.hidden)
    prev = charset.bos
    decoded: list[int] = []
    for step in range(max_steps):
        _, context = attention_step(h, feats, params)
        h = gru_step(prev, context, h, params)
        _, probs = classify_step(h, params)
        pred = int(np.argmax(probs))
        if pred == charset.eos:
            break
        decoded.append(pred)
        prev = pred
        if teacher is not None and step < len(teacher) and rng.random() < teacher_prob:
            prev = teacher[step]
    return decoded


_WEIGHT_NAMES = (
    "attn_k", "attn_w", "attn_u", "attn_b",
    "gru_w_z", "gru_u_z", "gru_b_z",
    "gru_w_r", "gru_u_r", "gru_b_r",
    "gru_w_h", "gru_u_h", "gru_b_h",
    "cls_w", "cls_b", "cls_v", "embeddings",
)


def _flatten_params(params: DecoderParams) -> dict[str, np.ndarray]:
    arrays = {}
    for name in _WEIGHT_NAMES:
        if name.startswith("gru_"):
            arrays[name] = getattr(params.gru, name[4:])
        else:
            arrays[name] = getattr(params, name)
    return arrays


def save_params(manifest_path, params: DecoderParams) -> None:
    """Write one tensor file per named weight next to a manifest that lists
    names, shapes and file names."""
    from .formats import write_tensor

    manifest_path = Path(manifest_path)
    entries = {}
    for name, arr in _flatten_params(params).items():
        fname = f"{name}.tnsr"
        write_tensor(manifest_path.parent / fname, arr)
        entries[name] = {"file": fname, "shape": list(arr.shape)}
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump({"weights": entries}, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_params(manifest_path) -> DecoderParams:
    """Load a parameter set written by save_params, checking every declared
    shape against the stored tensor."""
    from .formats import read_tensor

    manifest_path = Path(manifest_path)
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    weights = manifest.get("weights")
    if not isinstance(weights, dict):
        raise ValidationError("manifest: missing required field 'weights'")
    arrays = {}
    for name in _WEIGHT_NAMES:
        if name not in weights:
            raise ValidationError(f"manifest.weights: missing required entry {name!r}")
        entry = weights[name]
        arr = read_tensor(manifest_path.parent / entry["file"]).astype(float)
        if list(arr.shape) != list(entry.get("shape", arr.shape)):
            raise ValidationError(
                f"manifest.weights.{name}: declared shape {entry['shape']} "
                f"but file holds {list(arr.shape)}"
            )
        arrays[name] = arr
    gru = GruWeights(**{name[4:]: arrays[name] for name in _WEIGHT_NAMES if name.startswith("gru_")})
    rest = {name: arrays[name] for name in _WEIGHT_NAMES if not name.startswith("gru_")}
    return DecoderParams(gru=gru, **rest)


def random_params(rng: np.random.Generator, charset: CharsetSpec, hidden: int = 8,
                  feature: int = 8, embed: int = 4, attn: int = 8,
                  scale: float = 0.5) -> DecoderParams:
    """Gaussian-initialized parameter set, mainly for demos and tests."""
    symbols = charset.num_symbols
    inp = embed + feature
    g = GruWeights(
        w_z=scale * rng.standard_normal((hidden, inp)),
        u_z=scale * rng.standard_normal((hidden, hidden)),
        b_z=scale * rng.standard_normal(hidden),
        w_r=scale * rng.standard_normal((hidden, inp)),
        u_r=scale * rng.standard_normal((hidden, hidden)),
        b_r=scale * rng.standard_normal(hidden),
        w_h=scale * rng.standard_normal((hidden, inp)),
        u_h=scale * rng.standard_normal((hidden, hidden)),
        b_h=scale * rng.standard_normal(hidden),
    )
    return DecoderParams(
        attn_k=scale * rng.standard_normal(attn),
        attn_w=scale * rng.standard_normal((attn, hidden)),
        attn_u=scale * rng.standard_normal((attn, feature)),
        attn_b=scale * rng.standard_normal(attn),
        gru=g,
        cls_w=scale * rng.standard_normal((symbols, hidden)),
        cls_b=scale * rng.standard_normal(symbols),
        cls_v=scale * rng.standard_normal((symbols, hidden)),
        embeddings=scale * rng.standard_normal((symbols + 1, embed)),
    )
