"""Sequence model with hand-derived gradients.

Stacked LSTM over time, an optional same-padded 1D convolution across
frames, then a pointwise linear head with a per-head activation
(sigmoid for the binary head, softplus for density and count). All
arithmetic is float64; gradients are analytic and checked against
central finite differences in gradcheck.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from ..errors import DimensionMismatch, HeadMismatch
from ..features import FeatureSequence

HEADS = ("binary", "density", "count")


@dataclass(frozen=True)
class ModelConfig:
    """Architecture hyperparameters; None fields resolve at construction."""

    input_dim: int
    hidden_dim: int | None = None  # default: 2 x input_dim
    lstm_layers: int = 1
    conv_enabled: bool = True
    conv_kernel: int = 5
    conv_channels: int | None = None  # default: hidden_dim
    head: str = "density"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.input_dim < 1:
            raise ValueError(f"input_dim must be >= 1, got {self.input_dim}")
        if self.hidden_dim is None:
            object.__setattr__(self, "hidden_dim", 2 * self.input_dim)
        if self.hidden_dim < 1:
            raise ValueError(f"hidden_dim must be >= 1, got {self.hidden_dim}")
        if not 1 <= self.lstm_layers <= 3:
            raise ValueError(f"lstm_layers must be in [1, 3], got {self.lstm_layers}")
        if self.conv_kernel < 1 or self.conv_kernel % 2 == 0:
            raise ValueError(f"conv_kernel must be odd, got {self.conv_kernel}")
        if self.conv_channels is None:
            object.__setattr__(self, "conv_channels", self.hidden_dim)
        if self.conv_channels < 1:
            raise ValueError(f"conv_channels must be >= 1, got {self.conv_channels}")
        if self.head not in HEADS:
            raise ValueError(f"head must be one of {HEADS}, got {self.head!r}")


@dataclass
class SequenceModel:
    """Config plus a flat name-to-tensor parameter dict; training mutates params."""

    config: ModelConfig
    params: dict[str, np.ndarray]


def param_shapes(config: ModelConfig) -> dict[str, tuple[int, ...]]:
    """Expected parameter tensors, in a fixed iteration order.

    LSTM gate rows are stacked (input, forget, output, candidate), each
    block hidden_dim rows, so one sigmoid covers the first three blocks.
    """
    h = config.hidden_dim
    shapes: dict[str, tuple[int, ...]] = {}
    d_in = config.input_dim
    for i in range(config.lstm_layers):
        shapes[f"lstm{i}.W"] = (4 * h, d_in)
        shapes[f"lstm{i}.U"] = (4 * h, h)
        shapes[f"lstm{i}.b"] = (4 * h,)
        d_in = h
    head_in = h
    if config.conv_enabled:
        shapes["conv.kernel"] = (config.conv_channels, h, config.conv_kernel)
        shapes["conv.bias"] = (config.conv_channels,)
        head_in = config.conv_channels
    shapes["head.w"] = (head_in,)
    shapes["head.b"] = (1,)
    return shapes


def init_model(config: ModelConfig) -> SequenceModel:
    """Uniform +-1/sqrt(hidden_dim) weights, zero biases, forget-gate bias 1."""
    rng = np.random.default_rng(config.seed)
    bound = 1.0 / np.sqrt(config.hidden_dim)
    h = config.hidden_dim
    params: dict[str, np.ndarray] = {}
    for name, shape in param_shapes(config).items():
        if name.endswith((".b", ".bias")):
            params[name] = np.zeros(shape, dtype=np.float64)
        else:
            params[name] = rng.uniform(-bound, bound, size=shape)
    for i in range(config.lstm_layers):
        params[f"lstm{i}.b"][h : 2 * h] = 1.0
    return SequenceModel(config=config, params=params)


def _as_matrix(feats: FeatureSequence | np.ndarray, input_dim: int) -> np.ndarray:
    x = feats.values if isinstance(feats, FeatureSequence) else np.asarray(feats, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionMismatch(f"expected a (frames, features) matrix, got shape {x.shape}")
    if x.shape[0] < 1:
        raise DimensionMismatch("sequence must have at least one frame")
    if x.shape[1] != input_dim:
        raise DimensionMismatch(
            f"model expects {input_dim} features per frame, got {x.shape[1]}"
        )
    return x


def _lstm_layer_forward(
    x: np.ndarray,
    w: np.ndarray,
    u: np.ndarray,
    b: np.ndarray,
    keep_gates: bool,
) -> tuple[np.ndarray, dict | None]:
    n_frames = x.shape[0]
    h_dim = u.shape[1]
    g_in = x @ w.T + b  # input projection for all steps at once
    h_out = np.empty((n_frames, h_dim))
    h = np.zeros(h_dim)
    c = np.zeros(h_dim)
    if keep_gates:
        gi = np.empty((n_frames, h_dim))
        gf = np.empty((n_frames, h_dim))
        go = np.empty((n_frames, h_dim))
        gg = np.empty((n_frames, h_dim))
        cs = np.empty((n_frames, h_dim))
        tc = np.empty((n_frames, h_dim))
    for t in range(n_frames):
        z = g_in[t] + u @ h
        s = expit(z[: 3 * h_dim])
        g = np.tanh(z[3 * h_dim :])
        i = s[:h_dim]
        f = s[h_dim : 2 * h_dim]
        o = s[2 * h_dim : 3 * h_dim]
        c = f * c + i * g
        c_tanh = np.tanh(c)
        h = o * c_tanh
        h_out[t] = h
        if keep_gates:
            gi[t] = i
            gf[t] = f
            go[t] = o
            gg[t] = g
            cs[t] = c
            tc[t] = c_tanh
    if not keep_gates:
        return h_out, None
    cache = {"x": x, "i": gi, "f": gf, "o": go, "g": gg, "c": cs, "tc": tc, "h": h_out}
    return h_out, cache


def _lstm_layer_backward(
    layer: dict,
    w: np.ndarray,
    u: np.ndarray,
    d_hidden: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    gi, gf, go, gg = layer["i"], layer["f"], layer["o"], layer["g"]
    cs, tc, h_out = layer["c"], layer["tc"], layer["h"]
    n_frames, h_dim = h_out.shape
    dz_all = np.empty((n_frames, 4 * h_dim))
    dh_rec = np.zeros(h_dim)
    dc_next = np.zeros(h_dim)
    for t in range(n_frames - 1, -1, -1):
        i, f, o, g, c_tanh = gi[t], gf[t], go[t], gg[t], tc[t]
        dh = d_hidden[t] + dh_rec
        do = dh * c_tanh
        dc = dh * o * (1.0 - c_tanh * c_tanh) + dc_next
        c_prev = cs[t - 1] if t > 0 else 0.0
        dz = dz_all[t]
        dz[:h_dim] = (dc * g) * i * (1.0 - i)
        dz[h_dim : 2 * h_dim] = (dc * c_prev) * f * (1.0 - f)
        dz[2 * h_dim : 3 * h_dim] = do * o * (1.0 - o)
        dz[3 * h_dim :] = (dc * i) * (1.0 - g * g)
        dc_next = dc * f
        dh_rec = u.T @ dz
    dw = dz_all.T @ layer["x"]
    du = dz_all[1:].T @ h_out[:-1]
    db = dz_all.sum(axis=0)
    dx = dz_all @ w
    return dx, dw, du, db


def _conv_matrix(kernel: np.ndarray) -> np.ndarray:
    # (channels, hidden, taps) -> (taps*hidden, channels) so out = m @ f
    taps, hidden, channels = kernel.shape[2], kernel.shape[1], kernel.shape[0]
    return kernel.transpose(2, 1, 0).reshape(taps * hidden, channels)


def _conv_im2col(x: np.ndarray, taps: int) -> np.ndarray:
    n_frames, h_dim = x.shape
    pad = taps // 2
    xp = np.zeros((n_frames + taps - 1, h_dim))
    xp[pad : pad + n_frames] = x
    m = np.empty((n_frames, taps * h_dim))
    for k in range(taps):
        m[:, k * h_dim : (k + 1) * h_dim] = xp[k : k + n_frames]
    return m


def _forward_internal(
    model: SequenceModel, x: np.ndarray, keep_cache: bool
) -> tuple[np.ndarray, dict | None]:
    cfg = model.config
    p = model.params
    layers: list[dict] = []
    h_in = x
    for idx in range(cfg.lstm_layers):
        h_in, layer_cache = _lstm_layer_forward(
            h_in, p[f"lstm{idx}.W"], p[f"lstm{idx}.U"], p[f"lstm{idx}.b"], keep_cache
        )
        if keep_cache:
            layers.append(layer_cache)
    if cfg.conv_enabled:
        m = _conv_im2col(h_in, cfg.conv_kernel)
        z = m @ _conv_matrix(p["conv.kernel"]) + p["conv.bias"]
    else:
        m = None
        z = h_in
    lin = z @ p["head.w"] + p["head.b"][0]
    if cfg.head == "binary":
        y = expit(lin)
    else:
        y = np.logaddexp(0.0, lin)  # softplus
    if not keep_cache:
        return y, None
    return y, {"layers": layers, "m": m, "z": z, "lin": lin, "y": y}


def forward(model: SequenceModel, feats: FeatureSequence | np.ndarray) -> np.ndarray:
    """Per-frame head output; length always equals the input length."""
    x = _as_matrix(feats, model.config.input_dim)
    y, _ = _forward_internal(model, x, keep_cache=False)
    return y


def forward_with_cache(
    model: SequenceModel, feats: FeatureSequence | np.ndarray
) -> tuple[np.ndarray, dict]:
    x = _as_matrix(feats, model.config.input_dim)
    y, cache = _forward_internal(model, x, keep_cache=True)
    return y, cache


def backward(model: SequenceModel, cache: dict, dy: np.ndarray) -> dict[str, np.ndarray]:
    """Gradients of the loss w.r.t. every parameter, given dloss/doutput."""
    cfg = model.config
    p = model.params
    grads: dict[str, np.ndarray] = {}
    if cfg.head == "binary":
        y = cache["y"]
        dlin = dy * y * (1.0 - y)
    else:
        dlin = dy * expit(cache["lin"])  # softplus derivative
    z = cache["z"]
    grads["head.w"] = z.T @ dlin
    grads["head.b"] = np.array([dlin.sum()])
    dz = np.outer(dlin, p["head.w"])
    if cfg.conv_enabled:
        taps = cfg.conv_kernel
        h_dim = cfg.hidden_dim
        m = cache["m"]
        df_mat = m.T @ dz
        grads["conv.kernel"] = np.ascontiguousarray(
            df_mat.reshape(taps, h_dim, cfg.conv_channels).transpose(2, 1, 0)
        )
        grads["conv.bias"] = dz.sum(axis=0)
        dm = dz @ _conv_matrix(p["conv.kernel"]).T
        n_frames = dz.shape[0]
        pad = taps // 2
        dxp = np.zeros((n_frames + taps - 1, h_dim))
        for k in range(taps):
            dxp[k : k + n_frames] += dm[:, k * h_dim : (k + 1) * h_dim]
        dh = dxp[pad : pad + n_frames]
    else:
        dh = dz
    for idx in range(cfg.lstm_layers - 1, -1, -1):
        dh, dw, du, db = _lstm_layer_backward(
            cache["layers"][idx], p[f"lstm{idx}.W"], p[f"lstm{idx}.U"], dh
        )
        grads[f"lstm{idx}.W"] = dw
        grads[f"lstm{idx}.U"] = du
        grads[f"lstm{idx}.b"] = db
    return grads


def predict_count(model: SequenceModel, feats: FeatureSequence | np.ndarray) -> float:
    """Scalar repetition estimate: the count head's output summed over frames."""
    if model.config.head != "count":
        raise HeadMismatch(
            f"predict_count requires a count-head model, got head={model.config.head!r}"
        )
    return float(forward(model, feats).sum())
