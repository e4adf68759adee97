"""
Network
-------
Layer stacks built from a ModelSpec, evaluated batch-first on (B, W, F) inputs:

    Dense          affine map (+ optional tanh); applied per step on sequences
    SimpleRNN/GRU/LSTM   optional bidirectional wrapper and return_sequences
    RepeatVector   (B, D) -> (B, n, D); n = units, or the input window when units = 0
    Flatten        (B, T, D) -> (B, T*D)

Dropout sits on each layer's output (inverted scaling, Train mode only).
The prediction is the single output unit, taken at the last step if the
final Dense saw a sequence.
"""

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from core.errors import ContractError, ValidationError
from models.cells import GATES, activate, activation_grad, sequence_backward, sequence_forward

logger = logging.getLogger(__name__)

RECURRENT_KINDS = tuple(GATES)
LAYER_KINDS = ("Dense",) + RECURRENT_KINDS + ("RepeatVector", "Flatten")
ACTIVATIONS = ("tanh", "linear")


class Mode(str, Enum):
    TRAIN = "train"
    INFERENCE = "inference"


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    units: int = 0
    bidirectional: bool = False
    dropout_rate: float = 0.0
    activation: str = "tanh"
    return_sequences: bool = False

    def describe(self):
        name = ("Bi-" if self.bidirectional else "") + self.kind
        extras = [str(self.units)] if self.units else []
        if self.dropout_rate:
            extras.append(f"dropout={self.dropout_rate}")
        if self.kind in RECURRENT_KINDS and self.return_sequences:
            extras.append("seq")
        return f"{name}({', '.join(extras)})"


@dataclass(frozen=True)
class ModelSpec:
    layers: tuple = field(default_factory=tuple)
    name: str = ""

    def fingerprint(self):
        payload = json.dumps([asdict(layer) for layer in self.layers], sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]

    def describe(self):
        return " -> ".join(layer.describe() for layer in self.layers)


def validate_spec(spec):
    if not spec.layers:
        raise ValidationError("model spec has no layers")
    is_sequence = True
    for index, layer in enumerate(spec.layers):
        where = f"layer {index} ({layer.kind})"
        if layer.kind not in LAYER_KINDS:
            raise ValidationError(f"{where}: unknown kind, expected one of {', '.join(LAYER_KINDS)}")
        if layer.activation not in ACTIVATIONS:
            raise ValidationError(f"{where}: activation must be tanh or linear, got {layer.activation!r}")
        if not 0.0 <= layer.dropout_rate < 1.0:
            raise ValidationError(f"{where}: dropout_rate must be in [0, 1), got {layer.dropout_rate}")
        if layer.units < 0 or (layer.kind in ("Dense",) + RECURRENT_KINDS and layer.units < 1):
            raise ValidationError(f"{where}: units must be >= 1, got {layer.units}")
        if layer.kind not in RECURRENT_KINDS and (layer.bidirectional or layer.return_sequences):
            raise ValidationError(f"{where}: bidirectional/return_sequences apply to recurrent layers only")

        if layer.kind in RECURRENT_KINDS:
            if not is_sequence:
                raise ValidationError(f"{where}: recurrent layer needs a sequence input")
            is_sequence = layer.return_sequences
        elif layer.kind == "RepeatVector":
            if is_sequence:
                raise ValidationError(f"{where}: RepeatVector must follow a layer emitting a single vector")
            is_sequence = True
        elif layer.kind == "Flatten":
            is_sequence = False

    last = spec.layers[-1]
    if last.kind != "Dense" or last.units != 1 or last.activation != "linear":
        raise ValidationError("final layer must be Dense with 1 unit and linear activation")
    return spec


@dataclass
class Parameters:
    """Per-layer arrays keyed by name; bidirectional layers carry a '_b' copy."""

    layers: list
    input_width: int
    window: int | None = None

    def items(self):
        for index, arrays in enumerate(self.layers):
            for key in sorted(arrays):
                yield (index, key), arrays[key]

    def copy(self):
        return Parameters([{k: v.copy() for k, v in arrays.items()} for arrays in self.layers],
                          self.input_width, self.window)

    def zeros_like(self):
        return Parameters([{k: np.zeros_like(v) for k, v in arrays.items()} for arrays in self.layers],
                          self.input_width, self.window)

    def shapes(self):
        return [{k: v.shape for k, v in arrays.items()} for arrays in self.layers]

    def count(self):
        return sum(v.size for _, v in self.items())


def _glorot(rng, fan_in, fan_out):
    return rng.normal(0.0, np.sqrt(2.0 / (fan_in + fan_out)), size=(fan_in, fan_out))


def _repeat_count(layer, window):
    if layer.units:
        return layer.units
    if window is None:
        raise ValidationError("RepeatVector with units = 0 needs the input window length")
    return window


def init_parameters(spec, input_width, seed, window=None):
    """Glorot Normal kernels from a generator seeded by (seed, layer index); zero biases."""
    validate_spec(spec)
    if input_width < 1:
        raise ValidationError(f"input width must be >= 1, got {input_width}")
    layers = []
    width, steps, is_sequence = input_width, window, True
    for index, layer in enumerate(spec.layers):
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), index]))
        arrays = {}
        if layer.kind == "Dense":
            arrays["kernel"] = _glorot(rng, width, layer.units)
            arrays["bias"] = np.zeros(layer.units)
            width = layer.units
        elif layer.kind in RECURRENT_KINDS:
            g = GATES[layer.kind]
            for suffix in ("", "_b") if layer.bidirectional else ("",):
                arrays["kernel" + suffix] = _glorot(rng, width, g * layer.units)
                arrays["recurrent" + suffix] = _glorot(rng, layer.units, g * layer.units)
                arrays["bias" + suffix] = np.zeros(g * layer.units)
            width = layer.units * (2 if layer.bidirectional else 1)
            is_sequence = layer.return_sequences
        elif layer.kind == "RepeatVector":
            steps = _repeat_count(layer, window)
            is_sequence = True
        elif layer.kind == "Flatten" and is_sequence:
            if steps is None:
                raise ValidationError("Flatten needs the input window length to size the next layer")
            width, is_sequence = width * steps, False
        layers.append(arrays)
    params = Parameters(layers, int(input_width), window)
    logger.debug("Initialised %s: %d parameters (seed %d)", spec.describe(), params.count(), seed)
    return params


@dataclass
class ForwardCache:
    fingerprint: str
    batch_shape: tuple
    layers: list
    masks: list
    output_is_sequence: bool


def _dropout_mask(rng, rate, shape):
    keep = rng.random(shape) >= rate
    return keep / (1.0 - rate)


def _check_layer_shapes(spec, params):
    if len(params.layers) != len(spec.layers):
        raise ContractError(f"parameters have {len(params.layers)} layers, spec has {len(spec.layers)}")


def forward(spec, params, batch, mode=Mode.INFERENCE, rng=None, masks=None):
    """Return (predictions (B,), cache).

    `masks` reuses dropout masks from an earlier cache (for gradient checks);
    otherwise Train mode draws them from `rng`.
    """
    x = np.asarray(batch, dtype=float)
    _check_layer_shapes(spec, params)
    if x.ndim != 3 or x.shape[2] != params.input_width:
        raise ContractError(f"batch shape {x.shape} does not match input width {params.input_width}", layer=0)
    mode = Mode(mode)
    train = mode is Mode.TRAIN
    if train and masks is None and rng is None:
        rng = np.random.default_rng(0)

    caches, used_masks = [], []
    window = x.shape[1]
    for index, (layer, arrays) in enumerate(zip(spec.layers, params.layers)):
        if layer.kind == "Dense":
            kernel = arrays["kernel"]
            if x.shape[-1] != kernel.shape[0]:
                raise ContractError(f"input width {x.shape[-1]} does not match kernel {kernel.shape}", layer=index)
            out = activate(layer.activation, x @ kernel + arrays["bias"])
            caches.append({"x": x, "out": out})
        elif layer.kind in RECURRENT_KINDS:
            if x.ndim != 3 or x.shape[-1] != arrays["kernel"].shape[0]:
                raise ContractError(f"input shape {x.shape} does not match kernel {arrays['kernel'].shape}", layer=index)
            hf, cf = sequence_forward(layer.kind, x, arrays["kernel"], arrays["recurrent"], arrays["bias"], layer.activation)
            cache = {"fwd": cf, "steps": x.shape[1]}
            if layer.bidirectional:
                hb, cb = sequence_forward(layer.kind, x[:, ::-1], arrays["kernel_b"], arrays["recurrent_b"],
                                          arrays["bias_b"], layer.activation)
                cache["bwd"] = cb
                if layer.return_sequences:
                    out = np.concatenate([hf, hb[:, ::-1]], axis=2)
                else:
                    out = np.concatenate([hf[:, -1], hb[:, -1]], axis=1)
            else:
                out = hf if layer.return_sequences else hf[:, -1]
            caches.append(cache)
        elif layer.kind == "RepeatVector":
            n = layer.units or window
            out = np.repeat(x[:, None, :], n, axis=1)
            caches.append({"steps": n})
        else:
            caches.append({"shape": x.shape})
            out = x.reshape(x.shape[0], -1)

        mask = None
        if train and layer.dropout_rate > 0.0:
            mask = masks[index] if masks is not None else _dropout_mask(rng, layer.dropout_rate, out.shape)
            if mask is None or mask.shape != out.shape:
                raise ContractError(f"dropout mask does not match output shape {out.shape}", layer=index)
            out = out * mask
        used_masks.append(mask)
        x = out

    is_sequence = x.ndim == 3
    predictions = (x[:, -1, 0] if is_sequence else x[:, 0]).copy()
    cache = ForwardCache(spec.fingerprint(), tuple(np.shape(batch)), caches, used_masks, is_sequence)
    return predictions, cache


def backward(spec, params, cache, loss_gradient):
    """Gradients for every parameter given dL/d(prediction), shape (B,)."""
    _check_layer_shapes(spec, params)
    if cache.fingerprint != spec.fingerprint() or len(cache.layers) != len(spec.layers):
        raise ContractError("forward cache was produced by a different model")
    g = np.asarray(loss_gradient, dtype=float)
    if g.shape != (cache.batch_shape[0],):
        raise ContractError(f"loss gradient shape {g.shape} does not match batch of {cache.batch_shape[0]}")

    grads = params.zeros_like()
    last = cache.layers[-1]["out"]
    d_out = np.zeros_like(last)
    if cache.output_is_sequence:
        d_out[:, -1, 0] = g
    else:
        d_out[:, 0] = g

    for index in reversed(range(len(spec.layers))):
        layer, arrays, lc = spec.layers[index], params.layers[index], cache.layers[index]
        mask = cache.masks[index]
        if mask is not None:
            d_out = d_out * mask

        if layer.kind == "Dense":
            d_act = d_out * activation_grad(layer.activation, lc["out"])
            x = lc["x"]
            flat_x = x.reshape(-1, x.shape[-1])
            flat_d = d_act.reshape(-1, d_act.shape[-1])
            grads.layers[index]["kernel"] = flat_x.T @ flat_d
            grads.layers[index]["bias"] = flat_d.sum(axis=0)
            d_out = d_act @ arrays["kernel"].T
        elif layer.kind in RECURRENT_KINDS:
            d_out = _recurrent_backward(layer, arrays, lc, d_out, grads.layers[index])
        elif layer.kind == "RepeatVector":
            d_out = d_out.sum(axis=1)
        else:
            d_out = d_out.reshape(lc["shape"])
    return grads


def _recurrent_backward(layer, arrays, lc, d_out, grads):
    steps = lc["fwd"]["x"].shape[1]
    units = arrays["recurrent"].shape[0]
    B = d_out.shape[0]

    def spread(d_last):
        full = np.zeros((B, steps, units))
        full[:, -1] = d_last
        return full

    if layer.bidirectional:
        if layer.return_sequences:
            d_f, d_b = d_out[:, :, :units], d_out[:, ::-1, units:]
        else:
            d_f, d_b = spread(d_out[:, :units]), spread(d_out[:, units:])
    else:
        d_f = d_out if layer.return_sequences else spread(d_out)

    dx, dW, dR, db = sequence_backward(layer.kind, d_f, lc["fwd"], arrays["kernel"], arrays["recurrent"], layer.activation)
    grads["kernel"], grads["recurrent"], grads["bias"] = dW, dR, db
    if layer.bidirectional:
        dxb, dWb, dRb, dbb = sequence_backward(layer.kind, d_b, lc["bwd"], arrays["kernel_b"], arrays["recurrent_b"],
                                               layer.activation)
        grads["kernel_b"], grads["recurrent_b"], grads["bias_b"] = dWb, dRb, dbb
        dx = dx + dxb[:, ::-1]
    return dx


def mse_loss(predictions, targets):
    """Mean squared error and its gradient 2(y_hat - y)/B."""
    predictions = np.asarray(predictions, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if predictions.shape != targets.shape:
        raise ContractError(f"predictions {predictions.shape} and targets {targets.shape} differ in shape")
    error = predictions - targets
    return float(np.mean(error * error)), 2.0 * error / error.size


def predict(spec, params, samples, batch_size=256):
    """Inference-mode forward in batches; returns one value per window (scaled units)."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 3:
        raise ContractError(f"expected (windows, W, F) samples, got shape {samples.shape}")
    out = np.empty(samples.shape[0])
    for start in range(0, samples.shape[0], batch_size):
        chunk = samples[start:start + batch_size]
        out[start:start + len(chunk)], _ = forward(spec, params, chunk, Mode.INFERENCE)
    return out
