"""Classifier representations with forward inference and input gradients.

Three variants share one prediction contract:

* ``BinaryLinear``   -- sign of an affine function, the analytically solvable case
* ``MultiClassNet``  -- small dense/conv/ReLU feed-forward nets
* ``Threshold1D``    -- one-dimensional step classifiers used by the synthetic
  curve constructions

Gradients are hand-rolled reverse mode (no framework dependency): the nets
in scope are a few layers deep and the attacks only ever need d(loss)/d(input).

Models serialize to a self-contained JSON text container, see
:func:`save_model` for the layout.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .core import InvalidInputError, ParseError, ValidationError, _as_finite_vector

FORMAT_VERSION = 1

CROSS_ENTROPY = "cross_entropy"
CW_MARGIN = "cw_margin"


@dataclass(frozen=True)
class BinaryLinear:
    """f(x) = class 1 iff w.x + b >= 0 (the boundary itself maps to class 1)."""

    w: np.ndarray
    b: float

    def __post_init__(self):
        w = _as_finite_vector(self.w)
        if not np.any(w != 0.0):
            raise InvalidInputError("BinaryLinear weight vector must be nonzero")
        if not math.isfinite(self.b):
            raise InvalidInputError("BinaryLinear bias must be finite")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "b", float(self.b))

    @property
    def input_dim(self) -> int:
        return self.w.shape[0]

    @property
    def num_classes(self) -> int:
        return 2

    def decision_value(self, x: np.ndarray) -> float:
        return float(np.dot(self.w, x) + self.b)


@dataclass(frozen=True)
class Threshold1D:
    """1-d step classifier: predicts 1 iff x >= threshold."""

    threshold: float

    def __post_init__(self):
        if not math.isfinite(self.threshold):
            raise InvalidInputError("threshold must be finite")
        object.__setattr__(self, "threshold", float(self.threshold))

    @property
    def input_dim(self) -> int:
        return 1

    @property
    def num_classes(self) -> int:
        return 2

    def decision_value(self, x: np.ndarray) -> float:
        return float(x[0] - self.threshold)


@dataclass(frozen=True)
class Dense:
    """Affine layer; ``weights`` is (out, in) row-major."""

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        b = np.asarray(self.bias, dtype=np.float64)
        if w.ndim != 2 or b.ndim != 1 or b.shape[0] != w.shape[0]:
            raise ValidationError(
                f"dense layer expects (out, in) weights with matching bias, "
                f"got {w.shape} / {b.shape}"
            )
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ValidationError("dense layer parameters must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)


@dataclass(frozen=True)
class Conv2D:
    """2-d convolution; ``filters`` is (filter, row, col, in_channel)."""

    filters: np.ndarray
    bias: np.ndarray
    stride: int = 1
    padding: str = "valid"

    def __post_init__(self):
        f = np.asarray(self.filters, dtype=np.float64)
        b = np.asarray(self.bias, dtype=np.float64)
        if f.ndim != 4 or b.ndim != 1 or b.shape[0] != f.shape[0]:
            raise ValidationError(
                f"conv layer expects (filter, kh, kw, in_ch) filters with matching "
                f"bias, got {f.shape} / {b.shape}"
            )
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(b))):
            raise ValidationError("conv layer parameters must be finite")
        if self.stride < 1:
            raise ValidationError(f"conv stride must be >= 1, got {self.stride}")
        if self.padding not in ("valid", "same"):
            raise ValidationError(f"conv padding must be 'valid' or 'same', got {self.padding!r}")
        object.__setattr__(self, "filters", f)
        object.__setattr__(self, "bias", b)


@dataclass(frozen=True)
class ReLU:
    pass


Layer = Union[Dense, Conv2D, ReLU]


def _conv_geometry(shape, layer: Conv2D, index: int):
    """Output shape plus (top, left) padding for a conv layer at ``shape``."""
    if len(shape) != 3:
        raise ValidationError(f"layer {index}: conv input must be (h, w, c), got {shape}")
    h, w, c = shape
    f, kh, kw, cin = layer.filters.shape
    if cin != c:
        raise ValidationError(
            f"layer {index}: conv expects {cin} input channels, input has {c}"
        )
    s = layer.stride
    if layer.padding == "same":
        oh = -(-h // s)
        ow = -(-w // s)
        pad_h = max((oh - 1) * s + kh - h, 0)
        pad_w = max((ow - 1) * s + kw - w, 0)
        pads = (pad_h // 2, pad_h - pad_h // 2, pad_w // 2, pad_w - pad_w // 2)
    else:
        oh = (h - kh) // s + 1
        ow = (w - kw) // s + 1
        pads = (0, 0, 0, 0)
    if oh < 1 or ow < 1:
        raise ValidationError(
            f"layer {index}: conv kernel {kh}x{kw} does not fit input {h}x{w}"
        )
    return (oh, ow, f), pads


@dataclass(frozen=True)
class MultiClassNet:
    """Feed-forward net over a flat or (h, w, c) input, ending in class logits.

    Layer shapes are validated at construction so a malformed model file is
    rejected with the index of the offending layer.
    """

    input_shape: tuple
    layers: tuple
    num_classes: int

    def __post_init__(self):
        shape = tuple(int(d) for d in self.input_shape)
        if len(shape) not in (1, 3) or any(d < 1 for d in shape):
            raise ValidationError(f"input_shape must be (m,) or (h, w, c), got {shape}")
        layers = tuple(self.layers)
        cur = shape
        for i, layer in enumerate(layers):
            if isinstance(layer, Dense):
                flat = int(np.prod(cur))
                if layer.weights.shape[1] != flat:
                    raise ValidationError(
                        f"layer {i}: dense expects input size {layer.weights.shape[1]}, "
                        f"previous output flattens to {flat}"
                    )
                cur = (layer.weights.shape[0],)
            elif isinstance(layer, Conv2D):
                cur, _ = _conv_geometry(cur, layer, i)
            elif isinstance(layer, ReLU):
                pass
            else:
                raise ValidationError(f"layer {i}: unknown layer type {type(layer).__name__}")
        out = int(np.prod(cur))
        if out != self.num_classes:
            raise ValidationError(
                f"final layer produces {out} outputs, expected num_classes={self.num_classes}"
            )
        if self.num_classes < 2:
            raise ValidationError("num_classes must be >= 2")
        object.__setattr__(self, "input_shape", shape)
        object.__setattr__(self, "layers", layers)

    @property
    def input_dim(self) -> int:
        return int(np.prod(self.input_shape))


Classifier = Union[BinaryLinear, MultiClassNet, Threshold1D]


def input_dim(model: Classifier) -> int:
    return model.input_dim


def num_classes(model: Classifier) -> int:
    return model.num_classes


def _check_input(model: Classifier, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.shape[0] != model.input_dim:
        raise InvalidInputError(
            f"input has dimension {x.shape[0]}, model expects {model.input_dim}"
        )
    return x


def _conv_forward(x: np.ndarray, layer: Conv2D, pads):
    top, bottom, left, right = pads
    xp = np.pad(x, ((top, bottom), (left, right), (0, 0)))
    f, kh, kw, _ = layer.filters.shape
    s = layer.stride
    oh = (xp.shape[0] - kh) // s + 1
    ow = (xp.shape[1] - kw) // s + 1
    out = np.broadcast_to(layer.bias, (oh, ow, f)).copy()
    for a in range(kh):
        for b in range(kw):
            patch = xp[a : a + s * oh : s, b : b + s * ow : s, :]
            out += patch @ layer.filters[:, a, b, :].T
    return out, xp


def _conv_backward(dy: np.ndarray, layer: Conv2D, xp_shape, pads, in_shape):
    top, _, left, _ = pads
    f, kh, kw, _ = layer.filters.shape
    s = layer.stride
    oh, ow = dy.shape[0], dy.shape[1]
    dxp = np.zeros(xp_shape)
    for a in range(kh):
        for b in range(kw):
            dxp[a : a + s * oh : s, b : b + s * ow : s, :] += dy @ layer.filters[:, a, b, :]
    h, w, _ = in_shape
    return dxp[top : top + h, left : left + w, :]


def _net_forward(model: MultiClassNet, x: np.ndarray, keep_cache=False):
    """Run the net, optionally recording what backward needs per layer."""
    cur = x.reshape(model.input_shape)
    cache = []
    shape = model.input_shape
    for i, layer in enumerate(model.layers):
        if isinstance(layer, Dense):
            flat = cur.reshape(-1)
            out = layer.weights @ flat + layer.bias
            if keep_cache:
                cache.append(("dense", cur.shape))
            cur = out
            shape = (layer.weights.shape[0],)
        elif isinstance(layer, Conv2D):
            out_shape, pads = _conv_geometry(shape, layer, i)
            out, xp = _conv_forward(cur, layer, pads)
            if keep_cache:
                cache.append(("conv", (xp.shape, pads, cur.shape)))
            cur = out
            shape = out_shape
        else:  # ReLU
            if keep_cache:
                cache.append(("relu", cur > 0))
            cur = np.maximum(cur, 0.0)
    return cur.reshape(-1), cache


def _net_backward(model: MultiClassNet, dlogits: np.ndarray, cache) -> np.ndarray:
    grad = dlogits
    for layer, (tag, info) in zip(reversed(model.layers), reversed(cache)):
        if tag == "dense":
            grad = (layer.weights.T @ grad.reshape(-1)).reshape(info)
        elif tag == "conv":
            xp_shape, pads, in_shape = info
            grad = _conv_backward(grad, layer, xp_shape, pads, in_shape)
        else:  # relu mask; subgradient at 0 taken as 0
            grad = grad * info
    return grad.reshape(-1)


def forward(model: Classifier, x) -> np.ndarray:
    """Logits for ``x``; length 1 for the binary variants."""
    x = _check_input(model, x)
    if isinstance(model, (BinaryLinear, Threshold1D)):
        return np.array([model.decision_value(x)])
    logits, _ = _net_forward(model, x)
    return logits


def predict(model: Classifier, x) -> int:
    """Predicted label: argmax of logits (first index wins ties) for nets,
    sign test (value >= 0 -> class 1) for the binary variants."""
    x = _check_input(model, x)
    if isinstance(model, (BinaryLinear, Threshold1D)):
        return 1 if model.decision_value(x) >= 0.0 else 0
    logits, _ = _net_forward(model, x)
    return int(np.argmax(logits))


def class_scores(model: Classifier, x) -> np.ndarray:
    """Per-class scores usable by margin losses; (-v, v) for binary variants.

    Note the binary tie convention still lives in :func:`predict`; these
    scores only feed losses and gradients.
    """
    x = _check_input(model, x)
    if isinstance(model, (BinaryLinear, Threshold1D)):
        v = model.decision_value(x)
        return np.array([-v, v])
    logits, _ = _net_forward(model, x)
    return logits


def _loss_dlogits(logits: np.ndarray, y: int, loss: str) -> np.ndarray:
    if loss == CROSS_ENTROPY:
        z = logits - logits.max()
        p = np.exp(z)
        p /= p.sum()
        d = p
        d[y] -= 1.0
        return d
    if loss == CW_MARGIN:
        others = np.delete(logits, y)
        j = int(np.argmax(others))
        if j >= y:
            j += 1
        margin = logits[y] - logits[j]
        d = np.zeros_like(logits)
        if margin > 0.0:  # max(margin, 0) is flat once the point is adversarial
            d[y] = 1.0
            d[j] = -1.0
        return d
    raise InvalidInputError(f"unknown loss {loss!r}")


def loss_value(model: Classifier, x, y: int, loss: str = CROSS_ENTROPY) -> float:
    """Scalar loss matching :func:`loss_gradient` (handy for gradient checks)."""
    scores = class_scores(model, x)
    if y < 0 or y >= scores.shape[0]:
        raise InvalidInputError(f"label {y} out of range for {scores.shape[0]} classes")
    if loss == CROSS_ENTROPY:
        z = scores - scores.max()
        return float(np.log(np.exp(z).sum()) - z[y])
    if loss == CW_MARGIN:
        others = np.delete(scores, y)
        return float(max(scores[y] - others.max(), 0.0))
    raise InvalidInputError(f"unknown loss {loss!r}")


def loss_gradient(model: Classifier, x, y: int, loss: str = CROSS_ENTROPY) -> np.ndarray:
    """Exact reverse-mode gradient of the chosen loss w.r.t. the input."""
    x = _check_input(model, x)
    if isinstance(model, (BinaryLinear, Threshold1D)):
        v = model.decision_value(x)
        d = _loss_dlogits(np.array([-v, v]), _check_label(y, 2), loss)
        dv = d[1] - d[0]
        if isinstance(model, BinaryLinear):
            return dv * model.w
        return np.array([dv])
    logits, cache = _net_forward(model, x, keep_cache=True)
    d = _loss_dlogits(logits, _check_label(y, logits.shape[0]), loss)
    return _net_backward(model, d, cache)


def _check_label(y: int, k: int) -> int:
    y = int(y)
    if y < 0 or y >= k:
        raise InvalidInputError(f"label {y} out of range for {k} classes")
    return y


def batch_forward(model: Classifier, X: np.ndarray) -> np.ndarray:
    """Logits for a batch of flat inputs, (n, num_logits).

    Dense/ReLU stacks and the binary variants run as matrix ops; conv nets
    fall back to a per-row loop (they only show up here for tiny inputs).
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.input_dim:
        raise InvalidInputError(
            f"batch must be (n, {model.input_dim}), got {X.shape}"
        )
    if isinstance(model, BinaryLinear):
        return (X @ model.w + model.b)[:, None]
    if isinstance(model, Threshold1D):
        return (X[:, 0] - model.threshold)[:, None]
    if all(isinstance(l, (Dense, ReLU)) for l in model.layers):
        cur = X
        for layer in model.layers:
            if isinstance(layer, Dense):
                cur = cur @ layer.weights.T + layer.bias
            else:
                cur = np.maximum(cur, 0.0)
        return cur
    return np.stack([_net_forward(model, row)[0] for row in X])


def batch_predict(model: Classifier, X: np.ndarray) -> np.ndarray:
    logits = batch_forward(model, X)
    if isinstance(model, (BinaryLinear, Threshold1D)):
        return (logits[:, 0] >= 0.0).astype(np.int64)
    return np.argmax(logits, axis=1)


# ---------------------------------------------------------------------------
# Serialization: JSON text container, format_version 1.
#
#   {"format_version": 1, "kind": "binary_linear" | "multiclass_net" |
#    "threshold_1d", "input_shape": [...], "layers": [...]}
#
# Tensors are flat row-major lists of decimal floats (shortest round-trip
# form, within 17 significant digits, so load is bit-exact). Conv filters
# flatten in (filter, row, col, in_channel) order; dense weights in
# (out, in) order; dense inputs flatten any (h, w, c) activation row-major.
# ---------------------------------------------------------------------------


def _layer_to_json(layer: Layer) -> dict:
    if isinstance(layer, Dense):
        return {
            "type": "dense",
            "out": layer.weights.shape[0],
            "in": layer.weights.shape[1],
            "weights": layer.weights.ravel().tolist(),
            "bias": layer.bias.tolist(),
        }
    if isinstance(layer, Conv2D):
        f, kh, kw, cin = layer.filters.shape
        return {
            "type": "conv2d",
            "filters": f,
            "kernel": [kh, kw],
            "in_channels": cin,
            "stride": layer.stride,
            "padding": layer.padding,
            "weights": layer.filters.ravel().tolist(),
            "bias": layer.bias.tolist(),
        }
    return {"type": "relu"}


def save_model(model: Classifier) -> bytes:
    """Serialize to the JSON text container (see module comment above)."""
    if isinstance(model, BinaryLinear):
        doc = {
            "format_version": FORMAT_VERSION,
            "kind": "binary_linear",
            "input_shape": [model.input_dim],
            "layers": [
                _layer_to_json(Dense(model.w[None, :], np.array([model.b])))
            ],
        }
    elif isinstance(model, Threshold1D):
        doc = {
            "format_version": FORMAT_VERSION,
            "kind": "threshold_1d",
            "input_shape": [1],
            "layers": [{"type": "threshold", "threshold": model.threshold}],
        }
    elif isinstance(model, MultiClassNet):
        doc = {
            "format_version": FORMAT_VERSION,
            "kind": "multiclass_net",
            "input_shape": list(model.input_shape),
            "num_classes": model.num_classes,
            "layers": [_layer_to_json(l) for l in model.layers],
        }
    else:
        raise InvalidInputError(f"cannot serialize {type(model).__name__}")
    return (json.dumps(doc, indent=1) + "\n").encode("utf-8")


def _tensor(entry: dict, key: str, shape, index: int) -> np.ndarray:
    try:
        flat = np.asarray(entry[key], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"layer {index}: missing or non-numeric {key!r}") from exc
    expected = int(np.prod(shape))
    if flat.ndim != 1 or flat.shape[0] != expected:
        raise ValidationError(
            f"layer {index}: {key!r} holds {flat.size} values, expected {expected} "
            f"for shape {tuple(shape)}"
        )
    return flat.reshape(shape)


def _layer_from_json(entry, index: int) -> Layer:
    if not isinstance(entry, dict) or "type" not in entry:
        raise ParseError(f"layer {index}: expected an object with a 'type' field")
    kind = entry["type"]
    try:
        if kind == "dense":
            out, inp = int(entry["out"]), int(entry["in"])
            return Dense(_tensor(entry, "weights", (out, inp), index),
                         _tensor(entry, "bias", (out,), index))
        if kind == "conv2d":
            f = int(entry["filters"])
            kh, kw = (int(v) for v in entry["kernel"])
            cin = int(entry["in_channels"])
            return Conv2D(
                _tensor(entry, "weights", (f, kh, kw, cin), index),
                _tensor(entry, "bias", (f,), index),
                stride=int(entry.get("stride", 1)),
                padding=str(entry.get("padding", "valid")),
            )
        if kind == "relu":
            return ReLU()
    except (KeyError, TypeError) as exc:
        raise ParseError(f"layer {index}: malformed {kind!r} layer entry") from exc
    raise ParseError(f"layer {index}: unknown layer type {kind!r}")


def load_model(data) -> Classifier:
    """Parse and validate a model file; see :func:`save_model` for the format."""
    if isinstance(data, bytes):
        data = data.decode("utf-8", errors="strict")
    try:
        doc = json.loads(data)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"not a valid model container: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("model container must be a JSON object")
    if doc.get("format_version") != FORMAT_VERSION:
        raise ParseError(
            f"unsupported format_version {doc.get('format_version')!r}, expected {FORMAT_VERSION}"
        )
    kind = doc.get("kind")
    try:
        shape = tuple(int(d) for d in doc["input_shape"])
        raw_layers = doc["layers"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError("model container needs 'input_shape' and 'layers'") from exc
    if kind == "binary_linear":
        if len(raw_layers) != 1:
            raise ValidationError("binary_linear expects exactly one dense layer")
        layer = _layer_from_json(raw_layers[0], 0)
        if not isinstance(layer, Dense) or layer.weights.shape != (1, shape[0]):
            raise ValidationError(
                f"layer 0: binary_linear expects dense (1, {shape[0]}) weights"
            )
        return BinaryLinear(layer.weights[0], float(layer.bias[0]))
    if kind == "threshold_1d":
        entry = raw_layers[0] if raw_layers else {}
        if not isinstance(entry, dict) or entry.get("type") != "threshold":
            raise ValidationError("threshold_1d expects a single 'threshold' layer")
        try:
            return Threshold1D(float(entry["threshold"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError("layer 0: malformed threshold entry") from exc
    if kind == "multiclass_net":
        layers = tuple(_layer_from_json(e, i) for i, e in enumerate(raw_layers))
        try:
            k = int(doc["num_classes"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError("multiclass_net needs 'num_classes'") from exc
        return MultiClassNet(input_shape=shape, layers=layers, num_classes=k)
    raise ParseError(f"unknown model kind {kind!r}")
