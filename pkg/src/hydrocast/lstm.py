"""From-scratch LSTM regressor.

Each layer keeps its gate weights packed along the first axis in the
order input, forget, output, candidate (``i, f, o, c``), so a single
matmul produces all four pre-activations. The individual matrices
(``W_i``, ``U_f``, ...) are exposed as views into the packed arrays.

Batched arrays are time-major internally: ``(T, B, D)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import (
    CheckpointParseError,
    CheckpointShapeError,
    CheckpointValueError,
    CheckpointVersionError,
    DivergenceError,
    DomainError,
    ShapeError,
)
from .series import WindowSample, stack_samples

GATES = ("i", "f", "o", "c")
CHECKPOINT_MAGIC = "hydrocast-lstm"
CHECKPOINT_VERSION = "v1"


@dataclass
class LayerParams:
    W: np.ndarray  # (4H, D)
    U: np.ndarray  # (4H, H)
    b: np.ndarray  # (4H,)

    @property
    def hidden_dim(self) -> int:
        return self.U.shape[1]

    @property
    def input_dim(self) -> int:
        return self.W.shape[1]

    def gate(self, kind: str, gate: str) -> np.ndarray:
        """View of one gate block, e.g. ``gate("U", "f")`` is U_f."""
        H = self.hidden_dim
        k = GATES.index(gate)
        return getattr(self, kind)[k * H:(k + 1) * H]

    def named(self):
        for kind in ("W", "U", "b"):
            for g in GATES:
                yield f"{kind}_{g}", self.gate(kind, g)


def _gate_property(kind, gate):
    return property(lambda self: self.layers[0].gate(kind, gate))


@dataclass
class LstmParams:
    """Weights of a (possibly stacked) LSTM with a linear scalar head.

    ``W_i``, ``U_f``, ``b_o``... refer to the first layer; deeper layers
    live in ``layers[1:]``.
    """

    layers: list[LayerParams]
    W_out: np.ndarray  # (1, H)
    b_out: np.ndarray  # (1,)

    W_i = _gate_property("W", "i")
    W_f = _gate_property("W", "f")
    W_o = _gate_property("W", "o")
    W_c = _gate_property("W", "c")
    U_i = _gate_property("U", "i")
    U_f = _gate_property("U", "f")
    U_o = _gate_property("U", "o")
    U_c = _gate_property("U", "c")
    b_i = _gate_property("b", "i")
    b_f = _gate_property("b", "f")
    b_o = _gate_property("b", "o")
    b_c = _gate_property("b", "c")

    @property
    def input_dim(self) -> int:
        return self.layers[0].input_dim

    @property
    def hidden_dim(self) -> int:
        return self.layers[0].hidden_dim

    @property
    def num_layers(self) -> int:
        return len(self.layers)

    def named_arrays(self):
        """Yield ``(name, array)`` for every parameter array in checkpoint order.

        Layers after the first get a ``.k`` suffix (``W_i.1``).
        """
        for k, layer in enumerate(self.layers):
            suffix = "" if k == 0 else f".{k}"
            for name, arr in layer.named():
                yield name + suffix, arr
        yield "W_out", self.W_out
        yield "b_out", self.b_out

    def packed(self) -> list[np.ndarray]:
        out = []
        for layer in self.layers:
            out += [layer.W, layer.U, layer.b]
        return out + [self.W_out, self.b_out]

    def copy(self) -> "LstmParams":
        return LstmParams(
            [LayerParams(l.W.copy(), l.U.copy(), l.b.copy()) for l in self.layers],
            self.W_out.copy(),
            self.b_out.copy(),
        )

    def zeros_like(self) -> "LstmParams":
        return LstmParams(
            [LayerParams(np.zeros_like(l.W), np.zeros_like(l.U), np.zeros_like(l.b))
             for l in self.layers],
            np.zeros_like(self.W_out),
            np.zeros_like(self.b_out),
        )

    def validate(self) -> None:
        H = self.hidden_dim
        D = self.input_dim
        for k, layer in enumerate(self.layers):
            d_in = D if k == 0 else H
            if (layer.W.shape != (4 * H, d_in) or layer.U.shape != (4 * H, H)
                    or layer.b.shape != (4 * H,)):
                raise ShapeError(f"layer {k} has inconsistent dimensions")
        if self.W_out.shape != (1, H) or self.b_out.shape != (1,):
            raise ShapeError("output head has inconsistent dimensions")
        for name, arr in self.named_arrays():
            if not np.all(np.isfinite(arr)):
                raise DomainError(f"parameter {name} has non-finite entries")


# Gradients share the parameter layout exactly.
GradientSet = LstmParams


@dataclass(frozen=True)
class LstmState:
    h: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, hidden_dim: int) -> "LstmState":
        return cls(np.zeros(hidden_dim), np.zeros(hidden_dim))


@dataclass(frozen=True)
class GateActivations:
    i: np.ndarray
    f: np.ndarray
    o: np.ndarray
    g: np.ndarray


@dataclass
class TrainingConfig:
    epochs: int = 300
    learning_rate: float = 1e-3
    window: int = 12
    seed: int = 0
    clip_norm: float = 1.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    hidden_dim: int = 100
    layers: int = 1

    def __post_init__(self):
        for name in ("learning_rate", "clip_norm", "eps"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        for name in ("window", "hidden_dim", "layers"):
            if getattr(self, name) < 1:
                raise DomainError(f"{name} must be >= 1")
        if self.epochs < 0:
            raise DomainError("epochs must be >= 0")
        if not 0 <= self.beta1 < 1 or not 0 <= self.beta2 < 1:
            raise DomainError("moment decay constants must lie in [0, 1)")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")


# --------------------------------------------------------------------------
# initialization


def _glorot(rng, shape, fan_in, fan_out):
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def init_params(input_dim: int, hidden_dim: int, layers: int = 1, seed=0) -> LstmParams:
    """Glorot-uniform weights per gate block, forget bias 1, other biases 0."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    H = hidden_dim
    out = []
    for k in range(layers):
        d_in = input_dim if k == 0 else H
        W = np.concatenate([_glorot(rng, (H, d_in), d_in, H) for _ in GATES])
        U = np.concatenate([_glorot(rng, (H, H), H, H) for _ in GATES])
        b = np.zeros(4 * H)
        b[H:2 * H] = 1.0
        out.append(LayerParams(W, U, b))
    W_out = _glorot(rng, (1, H), H, 1)
    return LstmParams(out, W_out, np.zeros(1))


def zero_params(input_dim: int, hidden_dim: int, layers: int = 1) -> LstmParams:
    p = init_params(input_dim, hidden_dim, layers, seed=0)
    return p.zeros_like()


# --------------------------------------------------------------------------
# forward


def cell_forward(params: LstmParams, x, state: LstmState, layer: int = 0):
    """One step of a single layer. Returns ``(LstmState, GateActivations)``."""
    lp = params.layers[layer]
    H = lp.hidden_dim
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != lp.input_dim:
        raise ShapeError(f"input has {x.shape[0]} features, layer expects {lp.input_dim}")
    if state.h.shape != (H,) or state.c.shape != (H,):
        raise ShapeError(f"state must have hidden size {H}")
    z = (lp.W @ x + lp.U @ state.h + lp.b).reshape(1, -1)
    gates = np.empty((1, 4 * H))
    c = np.empty((1, H))
    tc = np.empty((1, H))
    h = np.empty((1, H))
    _kernels.forward_step(z, np.ascontiguousarray(state.c.reshape(1, H)), gates, c, tc, h)
    acts = GateActivations(gates[0, :H], gates[0, H:2 * H], gates[0, 2 * H:3 * H], gates[0, 3 * H:])
    return LstmState(h[0], c[0]), acts


def _as_batch(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :, None]
    elif X.ndim == 2:
        X = X[None]
    return X


@dataclass
class _LayerCache:
    X: np.ndarray        # (T, B, D) layer input
    gates: np.ndarray    # (T, B, 4H)
    cs: np.ndarray       # (T+1, B, H), cs[0] = 0
    tanh_c: np.ndarray   # (T, B, H)
    hs: np.ndarray       # (T+1, B, H), hs[0] = 0


def _layer_forward(lp: LayerParams, X: np.ndarray, kern) -> _LayerCache:
    T, B, _ = X.shape
    H = lp.hidden_dim
    Zx = X @ lp.W.T + lp.b
    gates = np.empty((T, B, 4 * H))
    cs = np.zeros((T + 1, B, H))
    tanh_c = np.empty((T, B, H))
    hs = np.zeros((T + 1, B, H))
    UT = lp.U.T
    for t in range(T):
        z = Zx[t] + hs[t] @ UT
        kern.forward_step(z, cs[t], gates[t], cs[t + 1], tanh_c[t], hs[t + 1])
    return _LayerCache(X, gates, cs, tanh_c, hs)


def _forward(params: LstmParams, X: np.ndarray, kern=None):
    """Batched forward. ``X`` is (B, T, D). Returns predictions (B,) and caches."""
    kern = kern or _kernels
    if X.ndim != 3 or X.shape[1] == 0:
        raise ShapeError("input sequence must be non-empty with shape (B, T, D)")
    if X.shape[2] != params.input_dim:
        raise ShapeError(f"inputs have {X.shape[2]} features, model expects {params.input_dim}")
    inp = np.ascontiguousarray(X.transpose(1, 0, 2))
    caches = []
    for lp in params.layers:
        cache = _layer_forward(lp, inp, kern)
        caches.append(cache)
        inp = cache.hs[1:]
    h_last = caches[-1].hs[-1]
    pred = h_last @ params.W_out[0] + params.b_out[0]
    return pred, caches


def sequence_forward(params: LstmParams, inputs):
    """Run one sequence from a zero state.

    ``inputs`` is (T,) for a single feature or (T, D). Returns the scalar
    prediction of the linear head on the last hidden state, plus the list
    of top-layer states after each step.
    """
    X = np.asarray(inputs, dtype=np.float64)
    if X.size == 0:
        raise ShapeError("input sequence must be non-empty")
    pred, caches = _forward(params, _as_batch(X))
    top = caches[-1]
    states = [LstmState(top.hs[t + 1, 0].copy(), top.cs[t + 1, 0].copy())
              for t in range(top.hs.shape[0] - 1)]
    return float(pred[0]), states


def predict_batch(params: LstmParams, X) -> np.ndarray:
    pred, _ = _forward(params, _as_batch(X))
    return pred


# --------------------------------------------------------------------------
# loss and gradients


def loss_mse(pred, target) -> float:
    """Squared error for scalars, mean squared error for arrays."""
    d = np.asarray(pred, dtype=np.float64) - np.asarray(target, dtype=np.float64)
    return float(np.mean(d * d))


def _batch_arrays(batch):
    if isinstance(batch, tuple):
        X, y = batch
        X = _as_batch(X) if np.ndim(X) < 3 else np.asarray(X, dtype=np.float64)
        return X, np.asarray(y, dtype=np.float64).reshape(-1)
    lengths = {np.shape(s.inputs)[0] for s in batch}
    if len(lengths) > 1:
        raise ShapeError(f"all windows in a batch must share one length, got {sorted(lengths)}")
    return stack_samples(batch)


def _backward(params: LstmParams, caches, dpred: np.ndarray, kern) -> LstmParams:
    grads = params.zeros_like()
    top = caches[-1]
    T, B, H = top.tanh_c.shape
    grads.W_out[0] = dpred @ top.hs[-1]
    grads.b_out[0] = dpred.sum()
    dH = np.zeros((T, B, H))
    dH[-1] = np.outer(dpred, params.W_out[0])
    for k in range(len(params.layers) - 1, -1, -1):
        lp, cache, g = params.layers[k], caches[k], grads.layers[k]
        DZ = np.empty((T, B, 4 * H))
        dh_rec = np.zeros((B, H))
        dc = np.zeros((B, H))
        dc_prev = np.empty((B, H))
        U = lp.U
        for t in range(T - 1, -1, -1):
            dh = dH[t] + dh_rec
            kern.backward_step(cache.gates[t], cache.cs[t], cache.tanh_c[t], dh, dc, DZ[t], dc_prev)
            dh_rec = DZ[t] @ U
            dc, dc_prev = dc_prev, dc
        flat = DZ.reshape(T * B, 4 * H)
        g.W[...] = flat.T @ cache.X.reshape(T * B, -1)
        g.U[...] = flat.T @ cache.hs[:-1].reshape(T * B, H)
        g.b[...] = flat.sum(axis=0)
        if k > 0:
            dH = DZ @ lp.W
    return grads


def bptt(params: LstmParams, batch, kern=None):
    """Batch-mean squared error and its exact gradient for every parameter.

    ``batch`` is a list of :class:`WindowSample` or an ``(X, y)`` tuple with
    ``X`` shaped (B, T, D).
    """
    kern = kern or _kernels
    X, y = _batch_arrays(batch)
    if X.shape[0] == 0:
        raise ShapeError("batch must be non-empty")
    if y.shape[0] != X.shape[0]:
        raise ShapeError("targets and inputs disagree in batch size")
    pred, caches = _forward(params, X, kern)
    diff = pred - y
    loss = float(np.mean(diff * diff))
    dpred = 2.0 * diff / X.shape[0]
    return loss, _backward(params, caches, dpred, kern)


def batch_loss(params: LstmParams, batch) -> float:
    X, y = _batch_arrays(batch)
    pred, _ = _forward(params, X)
    return loss_mse(pred, y)


def reference_loss(params: LstmParams, X, y, dtype=np.longdouble):
    """Batch MSE from a plain per-gate forward pass in ``dtype`` arithmetic.

    Shares nothing with the kernel path beyond the parameter values, so it
    can serve as an independent oracle. The default extended precision
    keeps finite differences accurate on very small gradient entries.
    """
    X = np.asarray(X).astype(dtype)
    y = np.asarray(y).astype(dtype)
    B, T, _ = X.shape
    inp = [X[:, t, :] for t in range(T)]
    one = dtype(1)
    for layer in params.layers:
        w = {name: arr.astype(dtype) for name, arr in layer.named()}
        h = np.zeros((B, layer.hidden_dim), dtype=dtype)
        c = np.zeros_like(h)
        outs = []
        for x in inp:
            i = one / (one + np.exp(-(x @ w["W_i"].T + h @ w["U_i"].T + w["b_i"])))
            f = one / (one + np.exp(-(x @ w["W_f"].T + h @ w["U_f"].T + w["b_f"])))
            o = one / (one + np.exp(-(x @ w["W_o"].T + h @ w["U_o"].T + w["b_o"])))
            g = np.tanh(x @ w["W_c"].T + h @ w["U_c"].T + w["b_c"])
            c = f * c + i * g
            h = o * np.tanh(c)
            outs.append(h)
        inp = outs
    pred = inp[-1] @ params.W_out[0].astype(dtype) + dtype(params.b_out[0])
    d = pred - y
    return np.mean(d * d)


def grad_check(params: LstmParams, batch, step: float = 1e-6, dtype=np.longdouble) -> float:
    """Largest relative gap between analytic and central-difference gradients.

    The gap for one entry is ``|a - n| / max(1e-12, |a| + |n|)``. Numeric
    derivatives come from :func:`reference_loss` evaluated in ``dtype``;
    the divisor is the realized float64 perturbation, not ``2 * step``.
    """
    X, y = _batch_arrays(batch)
    _, grads = bptt(params, (X, y))
    probe = params.copy()
    worst = 0.0
    for arr, garr in zip(probe.packed(), grads.packed()):
        flat = arr.reshape(-1)
        gflat = garr.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = up = orig + step
            lp = reference_loss(probe, X, y, dtype)
            flat[j] = down = orig - step
            lm = reference_loss(probe, X, y, dtype)
            flat[j] = orig
            num = float((lp - lm) / (dtype(up) - dtype(down)))
            ana = float(gflat[j])
            worst = max(worst, abs(ana - num) / max(1e-12, abs(ana) + abs(num)))
    return worst


def global_norm(grads: LstmParams) -> float:
    return math.sqrt(sum(float(np.sum(a * a)) for a in grads.packed()))


def clip_gradients(grads: LstmParams, clip_norm: float) -> float:
    """Rescale ``grads`` in place to global norm <= clip_norm. Returns the pre-clip norm."""
    norm = global_norm(grads)
    if norm > clip_norm:
        scale = clip_norm / norm
        for a in grads.packed():
            a *= scale
    return norm


# --------------------------------------------------------------------------
# training


class Adam:
    """Per-parameter adaptive moment update with bias correction."""

    def __init__(self, params: LstmParams, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(a) for a in params.packed()]
        self.v = [np.zeros_like(a) for a in params.packed()]
        self.t = 0

    def step(self, params: LstmParams, grads: LstmParams) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params.packed(), grads.packed(), self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


@dataclass
class TrainResult:
    params: LstmParams
    losses: list[float] = field(default_factory=list)


def train(config: TrainingConfig, samples, input_dim: int | None = None) -> TrainResult:
    """Full-batch training from a seeded initialization.

    The loss curve holds the pre-update loss of every epoch. A non-finite
    loss raises :class:`DivergenceError` naming the (1-based) epoch.
    """
    X, y = _batch_arrays(samples)
    if X.shape[0] == 0:
        raise DomainError("training needs at least one sample")
    D = X.shape[2] if input_dim is None else input_dim
    params = init_params(D, config.hidden_dim, config.layers, config.seed)
    opt = Adam(params, config.learning_rate, config.beta1, config.beta2, config.eps)
    losses = []
    for epoch in range(1, config.epochs + 1):
        loss, grads = bptt(params, (X, y))
        if not math.isfinite(loss):
            raise DivergenceError(epoch, loss)
        losses.append(loss)
        clip_gradients(grads, config.clip_norm)
        opt.step(params, grads)
        if not all(np.all(np.isfinite(a)) for a in params.packed()):
            raise DivergenceError(epoch, float("nan"))
    return TrainResult(params, losses)


# --------------------------------------------------------------------------
# recursive forecasting


def predict_horizon(params: LstmParams, history, horizon: int = 12, future_aux=None) -> np.ndarray:
    """Recursive multi-step forecast in scaled space.

    ``history`` holds the last ``L`` scaled steps, shape (L,) or (L, D).
    Each prediction is clamped to [0, 1], appended, and the oldest step is
    dropped. With ``D == 2`` the second channel of each new step comes from
    ``future_aux`` (length ``horizon``).
    """
    hist = np.asarray(history, dtype=np.float64)
    if hist.ndim == 1:
        hist = hist[:, None]
    D = params.input_dim
    if hist.ndim != 2 or hist.shape[1] != D:
        raise ShapeError(f"history must have {D} feature column(s)")
    if hist.shape[0] < 1:
        raise ShapeError("history must be non-empty")
    if D > 1:
        if future_aux is None:
            raise ShapeError("future_aux is required when the model has extra input channels")
        aux = np.asarray(future_aux, dtype=np.float64).reshape(horizon, D - 1)
    window = hist.copy()
    out = np.empty(horizon)
    for k in range(horizon):
        pred = float(predict_batch(params, window[None])[0])
        pred = min(1.0, max(0.0, pred))
        out[k] = pred
        step = np.empty(D)
        step[0] = pred
        if D > 1:
            step[1:] = aux[k]
        window = np.vstack([window[1:], step])
    return out


# --------------------------------------------------------------------------
# checkpoints


def save_checkpoint(params: LstmParams, path) -> None:
    lines = [
        f"{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}",
        f"{params.input_dim} {params.hidden_dim} {params.num_layers}",
    ]
    for name, arr in params.named_arrays():
        lines.append(name)
        rows = arr.reshape(1, -1) if arr.ndim == 1 else arr
        for row in rows:
            lines.append(" ".join(f"{v:.17g}" for v in row))
    lines.append("end")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_checkpoint(path) -> LstmParams:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise CheckpointParseError("checkpoint is empty")
    head = lines[0].split()
    if len(head) != 2 or head[0] != CHECKPOINT_MAGIC:
        raise CheckpointParseError(f"not a hydrocast checkpoint: {lines[0]!r}")
    if head[1] != CHECKPOINT_VERSION:
        raise CheckpointVersionError(f"unsupported checkpoint version {head[1]!r}")
    if len(lines) < 2 or lines[-1] != "end":
        raise CheckpointParseError("checkpoint is truncated (missing end marker)")
    try:
        D, H, nl = (int(v) for v in lines[1].split())
    except ValueError:
        raise CheckpointParseError(f"bad dimension line {lines[1]!r}") from None
    if D < 1 or H < 1 or nl < 1:
        raise CheckpointShapeError(f"invalid dimensions {D} {H} {nl}")

    sections: dict[str, list[list[float]]] = {}
    current = None
    for lineno, line in enumerate(lines[2:-1], start=3):
        tok = line.split()
        if not tok:
            raise CheckpointParseError(f"line {lineno}: empty line")
        try:
            row = [float(v) for v in tok]
        except ValueError:
            if len(tok) != 1:
                raise CheckpointParseError(f"line {lineno}: cannot parse {line!r}") from None
            current = tok[0]
            if current in sections:
                raise CheckpointParseError(f"line {lineno}: duplicate section {current}")
            sections[current] = []
            continue
        if current is None:
            raise CheckpointParseError(f"line {lineno}: values before first section")
        sections[current].append(row)

    template = init_params(D, H, nl, seed=0).zeros_like()
    expected = [name for name, _ in template.named_arrays()]
    missing = [n for n in expected if n not in sections]
    extra = [n for n in sections if n not in expected]
    if extra:
        raise CheckpointShapeError(f"unexpected sections {extra} for dimensions {D} {H} {nl}")
    if missing:
        raise CheckpointParseError(f"missing sections {missing}")
    for name, arr in template.named_arrays():
        rows = sections[name]
        want = (1, arr.size) if arr.ndim == 1 else arr.shape
        if len(rows) != want[0] or any(len(r) != want[1] for r in rows):
            got = (len(rows), len(rows[0]) if rows else 0)
            raise CheckpointShapeError(f"section {name}: expected shape {want}, got {got}")
        vals = np.array(rows, dtype=np.float64).reshape(arr.shape)
        if not np.all(np.isfinite(vals)):
            raise CheckpointValueError(f"section {name} contains a non-finite entry")
        arr[...] = vals
    return template
