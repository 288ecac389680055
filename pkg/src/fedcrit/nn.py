"""Dense feed-forward networks over flat parameter vectors.

Parameters live in one float64 vector laid out layer by layer, weights
(shape ``(n_in, n_out)``, row-major) then biases. Aggregators work on that
vector directly; the network only keeps views into it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from .errors import ConfigError, ContractError, ShapeError
from .losses import LossSpec, loss_terms

HIDDEN_ACTIVATIONS = ("sigmoid", "relu", "tanh")
OUTPUT_ACTIVATIONS = ("softmax", "sigmoid")
INITIALIZERS = (
    "random_normal",
    "random_uniform",
    "glorot_normal",
    "glorot_uniform",
    "he_normal",
    "he_uniform",
    "ae_pretrained",
)
RANDOM_SCALE = 0.05


@dataclass(frozen=True)
class NetworkSpec:
    layer_sizes: tuple
    hidden_activation: str = "sigmoid"
    output_activation: str = "softmax"
    initializer: str = "glorot_uniform"
    seed: int = 0

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        object.__setattr__(self, "layer_sizes", sizes)
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ConfigError(f"invalid layer sizes {sizes}")
        if self.hidden_activation not in HIDDEN_ACTIVATIONS:
            raise ConfigError(f"unknown hidden activation {self.hidden_activation!r}")
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise ConfigError(f"unknown output activation {self.output_activation!r}")
        if self.initializer not in INITIALIZERS:
            raise ConfigError(f"unknown initializer {self.initializer!r}")
        if self.seed < 0:
            raise ConfigError("seed must be unsigned")

    @property
    def n_params(self) -> int:
        s = self.layer_sizes
        return sum(s[i] * s[i + 1] + s[i + 1] for i in range(len(s) - 1))

    @property
    def n_classes(self) -> int:
        """Number of classes when used as a classifier (a single sigmoid unit is binary)."""
        out = self.layer_sizes[-1]
        return 2 if (self.output_activation == "sigmoid" and out == 1) else out


def default_layer_sizes(input_dim: int, n_classes: int = 2) -> tuple:
    return (input_dim, math.ceil(2 * input_dim / 3), math.ceil(input_dim / 3), n_classes)


def classifier_spec(input_dim: int, n_classes: int = 2, hidden_sizes=None, **kw) -> NetworkSpec:
    if hidden_sizes is None:
        sizes = default_layer_sizes(input_dim, n_classes)
    else:
        sizes = (input_dim, *hidden_sizes, n_classes)
    return NetworkSpec(layer_sizes=sizes, **kw)


def autoencoder_spec(spec: NetworkSpec) -> NetworkSpec:
    """Encoder = the classifier's hidden stack, decoder = its mirror."""
    hidden = spec.layer_sizes[1:-1]
    if not hidden:
        raise ShapeError("a classifier without hidden layers has no encoder")
    d = spec.layer_sizes[0]
    sizes = (d, *hidden, *reversed(spec.layer_sizes[1:-2]), d)
    init = "glorot_uniform" if spec.initializer == "ae_pretrained" else spec.initializer
    return replace(spec, layer_sizes=sizes, output_activation="sigmoid", initializer=init)


def layer_slices(sizes) -> List[tuple]:
    """(weight slice, bias slice) pairs into the flat parameter vector."""
    out, pos = [], 0
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        w = slice(pos, pos + n_in * n_out)
        pos += n_in * n_out
        b = slice(pos, pos + n_out)
        pos += n_out
        out.append((w, b))
    return out


def _draw(rng, initializer, fan_in, fan_out):
    shape = (fan_in, fan_out)
    if initializer == "random_normal":
        return rng.normal(0.0, RANDOM_SCALE, shape)
    if initializer == "random_uniform":
        return rng.uniform(-RANDOM_SCALE, RANDOM_SCALE, shape)
    if initializer == "glorot_normal":
        return rng.normal(0.0, math.sqrt(2.0 / (fan_in + fan_out)), shape)
    if initializer == "glorot_uniform":
        lim = math.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-lim, lim, shape)
    if initializer == "he_normal":
        return rng.normal(0.0, math.sqrt(2.0 / fan_in), shape)
    if initializer == "he_uniform":
        lim = math.sqrt(6.0 / fan_in)
        return rng.uniform(-lim, lim, shape)
    raise ConfigError(f"initializer {initializer!r} cannot draw weights")


def init_params(spec: NetworkSpec) -> np.ndarray:
    if spec.initializer == "ae_pretrained":
        raise ContractError("ae_pretrained networks are built by init_from_autoencoder")
    rng = np.random.default_rng(spec.seed)
    params = np.zeros(spec.n_params)
    sizes = spec.layer_sizes
    for (w, _), n_in, n_out in zip(layer_slices(sizes), sizes[:-1], sizes[1:]):
        params[w] = _draw(rng, spec.initializer, n_in, n_out).ravel()
    return params


def _act(name, z):
    if name == "sigmoid":
        return 1.0 / (1.0 + np.exp(-z))
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "tanh":
        return np.tanh(z)
    if name == "softmax":
        e = np.exp(z - z.max(axis=1, keepdims=True))
        return e / e.sum(axis=1, keepdims=True)
    raise ConfigError(name)


def _act_grad(name, z, a):
    if name == "sigmoid":
        return a * (1.0 - a)
    if name == "relu":
        return (z > 0).astype(float)
    return 1.0 - a**2


@dataclass
class Network:
    spec: NetworkSpec
    params: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.params is None:
            self.params = init_params(self.spec)
        self.params = np.asarray(self.params, dtype=float)
        if self.params.shape != (self.spec.n_params,):
            raise ShapeError(
                f"parameter vector of length {self.params.size}, expected {self.spec.n_params}"
            )

    def copy(self) -> "Network":
        return Network(self.spec, self.params.copy())

    def layers(self):
        sizes = self.spec.layer_sizes
        for (w, b), n_in, n_out in zip(layer_slices(sizes), sizes[:-1], sizes[1:]):
            yield self.params[w].reshape(n_in, n_out), self.params[b]

    def _forward(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.spec.layer_sizes[0]:
            raise ShapeError(f"input has {X.shape[1]} features, network expects {self.spec.layer_sizes[0]}")
        acts, zs = [X], []
        n_layers = len(self.spec.layer_sizes) - 1
        for i, (W, b) in enumerate(self.layers()):
            z = acts[-1] @ W + b
            name = self.spec.output_activation if i == n_layers - 1 else self.spec.hidden_activation
            zs.append(z)
            acts.append(_act(name, z))
        return acts, zs

    def output(self, X) -> np.ndarray:
        return self._forward(X)[0][-1]

    def forward(self, X) -> np.ndarray:
        """Class-probability distribution per row; a single sigmoid unit becomes (1-p, p)."""
        out = self.output(X)
        if self.spec.output_activation == "sigmoid" and out.shape[1] == 1:
            return np.hstack([1.0 - out, out])
        return out

    def hidden(self, X, depth: int) -> np.ndarray:
        """Activations after the first ``depth`` layers."""
        return self._forward(X)[0][depth]


def one_hot(y, n_classes: int) -> np.ndarray:
    y = np.asarray(y, dtype=int)
    if y.size and (y.min() < 0 or y.max() >= n_classes):
        raise ContractError(f"labels must lie in [0, {n_classes})")
    out = np.zeros((y.size, n_classes))
    out[np.arange(y.size), y] = 1.0
    return out


def loss_gradient(net: Network, X, target, loss: LossSpec):
    """Batch-mean loss and its gradient with respect to ``net.params``.

    ``target`` holds integer labels for the classification losses and the
    reconstruction target rows for ``mse``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[0]
    if n == 0:
        raise ContractError("loss_gradient needs a non-empty batch")
    acts, zs = net._forward(X)
    out = acts[-1]
    spec = net.spec
    binary_sigmoid = spec.output_activation == "sigmoid" and out.shape[1] == 1

    if loss.kind == "mse":
        values, d_out = loss_terms(loss, np.asarray(target, dtype=float).reshape(out.shape), out)
    else:
        y = one_hot(target, spec.n_classes)
        if binary_sigmoid:
            values, d_probs = loss_terms(loss, y, np.hstack([1.0 - out, out]))
            d_out = d_probs[:, 1:2] - d_probs[:, 0:1]
        else:
            values, d_out = loss_terms(loss, y, out)

    if spec.output_activation == "softmax":
        delta = out * (d_out - np.sum(d_out * out, axis=1, keepdims=True))
    else:
        delta = d_out * out * (1.0 - out)
    delta /= n

    grad = np.zeros_like(net.params)
    slices = layer_slices(spec.layer_sizes)
    weights = [W for W, _ in net.layers()]
    for i in range(len(slices) - 1, -1, -1):
        w_sl, b_sl = slices[i]
        grad[w_sl] = (acts[i].T @ delta).ravel()
        grad[b_sl] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ weights[i].T) * _act_grad(spec.hidden_activation, zs[i - 1], acts[i])
    return float(np.mean(values)), grad


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.5
    local_epochs: int = 1
    batch_size: int = 32
    loss: LossSpec = LossSpec()
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ConfigError("learning rate must be non-negative")
        if self.local_epochs < 0 or self.batch_size < 1:
            raise ConfigError("local_epochs must be >= 0 and batch_size >= 1")


def train_local(net: Network, X, target, cfg: TrainConfig, round: int = 0) -> Network:
    """Mini-batch SGD for ``cfg.local_epochs`` epochs; returns a new network.

    Batch order is drawn from a generator seeded by ``(cfg.seed, round)``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    target = np.asarray(target)
    n = X.shape[0]
    if n == 0:
        raise ContractError("cannot train on an empty partition")
    batch = min(cfg.batch_size, n)
    rng = np.random.default_rng([cfg.seed, round])
    out = net.copy()
    for _ in range(cfg.local_epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch):
            idx = order[start:start + batch]
            _, g = loss_gradient(out, X[idx], target[idx], cfg.loss)
            out.params -= cfg.learning_rate * g
    return out


def reconstruction_mse(spec: NetworkSpec, params, X) -> float:
    net = Network(spec, params)
    return float(np.mean((net.output(X) - np.asarray(X, dtype=float)) ** 2))


def pretrain_autoencoder(spec: NetworkSpec, X, cfg: TrainConfig, round: int = 0,
                         init: Optional[np.ndarray] = None) -> np.ndarray:
    """Train the mirrored autoencoder of ``spec`` on ``X`` with MSE; labels are never seen."""
    ae = autoencoder_spec(spec)
    net = Network(ae, None if init is None else np.array(init, dtype=float))
    cfg = replace(cfg, loss=LossSpec(kind="mse"))
    return train_local(net, X, X, cfg, round=round).params


def init_from_autoencoder(spec: NetworkSpec, ae_params, output_seed: Optional[int] = None) -> np.ndarray:
    """Classifier parameters whose hidden layers are copied from a trained encoder.

    The output layer is drawn fresh with glorot_uniform from ``output_seed``
    (``spec.seed`` when omitted); the decoder half is dropped.
    """
    ae = autoencoder_spec(spec)
    ae_params = np.asarray(ae_params, dtype=float)
    if ae_params.shape != (ae.n_params,):
        raise ShapeError(f"autoencoder vector of length {ae_params.size}, expected {ae.n_params}")
    sizes = spec.layer_sizes
    n_hidden = len(sizes) - 2
    params = np.zeros(spec.n_params)
    for (dst_w, dst_b), (src_w, src_b) in zip(layer_slices(sizes)[:n_hidden],
                                              layer_slices(ae.layer_sizes)[:n_hidden]):
        params[dst_w] = ae_params[src_w]
        params[dst_b] = ae_params[src_b]
    rng = np.random.default_rng(spec.seed if output_seed is None else output_seed)
    w_out, _ = layer_slices(sizes)[-1]
    params[w_out] = _draw(rng, "glorot_uniform", sizes[-2], sizes[-1]).ravel()
    return params


def build_params(spec: NetworkSpec, ae_params=None) -> np.ndarray:
    """Initial classifier parameters for any initializer choice."""
    if spec.initializer == "ae_pretrained":
        if ae_params is None:
            raise ContractError("ae_pretrained initializer needs autoencoder parameters")
        return init_from_autoencoder(spec, ae_params)
    return init_params(spec)
