"""Finite-width MLPs under NTK parameterisation and their per-layer gram matrices.

Layer ``l`` maps ``h_l`` to ``z_{l+1} = W_l h_l / sqrt(fan_in_l)``; hidden
layers apply the activation, the last layer is linear with a single output.
There are no biases and all weights are i.i.d. standard normal.

The gradient of the output w.r.t. ``W_l`` at ``x`` is the outer product
``delta_l(x) h_l(x)^T / sqrt(fan_in_l)``, so the layer-l gram entry is
``<delta_l(x), delta_l(x')> <h_l(x), h_l(x')> / fan_in_l``. Gram matrices are
assembled from those two n x n factors without forming the n x P Jacobian.
"""
import csv
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateError
from .kernel_series import ActivationSpec, get_activation

MAX_GRAM_POINTS = 8192
DEGENERATE_CONTRIBUTION = 1e-14
_GRAM_MAGIC = b"LNTKGRAM"
_GRAM_HEADER = struct.Struct("<8sIIIq")  # magic, version, n, L, seed


@dataclass(frozen=True)
class MLPModel:
    widths: tuple
    weights: tuple = field(repr=False)
    activation: ActivationSpec = field(repr=False)
    seed: int | None = None

    @property
    def depth(self):
        return len(self.weights)

    @property
    def n_params(self):
        return sum(w.size for w in self.weights)

    def with_weights(self, weights):
        return MLPModel(self.widths, tuple(weights), self.activation, self.seed)

    def __call__(self, X):
        return forward(self, X)[0]


def init_model(widths, activation="relu", seed=0):
    widths = tuple(int(w) for w in widths)
    if len(widths) < 2:
        raise ValueError("need at least input and output widths")
    if any(w <= 0 for w in widths):
        raise ValueError(f"widths must be positive, got {widths}")
    if widths[-1] != 1:
        raise ValueError("output width must be 1")
    if isinstance(activation, str):
        activation = get_activation(activation)
    rng = np.random.default_rng(seed)
    weights = []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        w = rng.standard_normal((fan_out, fan_in))
        w.setflags(write=False)
        weights.append(w)
    return MLPModel(widths, tuple(weights), activation, seed)


def forward(model, X):
    """Return ``(outputs, hs, zs)`` for a batch ``X`` of shape ``(n, d)``.

    ``hs[l]`` is the input to layer ``l`` (``hs[0] = X``) and ``zs[l]`` its
    scaled preactivation.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.widths[0]:
        raise ValueError(f"input dimension {X.shape[1]} != {model.widths[0]}")
    hs, zs = [X], []
    h = X
    last = model.depth - 1
    for l, W in enumerate(model.weights):
        z = h @ W.T / np.sqrt(W.shape[1])
        zs.append(z)
        h = z if l == last else model.activation.value_fn(z)
        if l != last:
            hs.append(h)
    return z[:, 0], hs, zs


def backward(model, zs, seed_grad):
    """Backpropagated ``delta_l = d(sum_i seed_i f_i)/d z_{l+1}``, per layer, shape ``(n, width)``."""
    n = zs[0].shape[0]
    deltas = [None] * model.depth
    delta = np.asarray(seed_grad, dtype=np.float64).reshape(n, 1)
    for l in range(model.depth - 1, -1, -1):
        deltas[l] = delta
        if l > 0:
            W = model.weights[l]
            delta = (delta @ W / np.sqrt(W.shape[1])) * model.activation.derivative_fn(
                zs[l - 1]
            )
    return deltas


def per_layer_gradients(model, x):
    """Gradient of the scalar output w.r.t. each weight matrix at one input."""
    _, hs, zs = forward(model, np.atleast_2d(x))
    deltas = backward(model, zs, np.ones(1))
    return [
        np.outer(deltas[l][0], hs[l][0]) / np.sqrt(model.weights[l].shape[1])
        for l in range(model.depth)
    ]


def layer_loss_gradient(model, X, residual, layer):
    """``sum_i residual_i * grad_{W_layer} f(x_i)``."""
    _, hs, zs = forward(model, X)
    deltas = backward(model, zs, residual)
    return deltas[layer].T @ hs[layer] / np.sqrt(model.weights[layer].shape[1])


@dataclass(frozen=True)
class GramSet:
    grams: tuple
    points: np.ndarray = field(repr=False)
    seed: int | None = None

    @property
    def n_layers(self):
        return len(self.grams)

    @property
    def n(self):
        return self.grams[0].shape[0]

    def full(self):
        return np.sum(self.grams, axis=0)

    def save(self, path):
        """Binary dump: little-endian header then ``L`` row-major n x n float64 blocks."""
        with open(path, "wb") as fh:
            seed = -1 if self.seed is None else int(self.seed)
            fh.write(_GRAM_HEADER.pack(_GRAM_MAGIC, 1, self.n, self.n_layers, seed))
            for g in self.grams:
                fh.write(np.ascontiguousarray(g, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path, points=None):
        with open(path, "rb") as fh:
            head = fh.read(_GRAM_HEADER.size)
            if len(head) != _GRAM_HEADER.size:
                raise ValueError("truncated gram file header")
            magic, version, n, L, seed = _GRAM_HEADER.unpack(head)
            if magic != _GRAM_MAGIC or version != 1:
                raise ValueError("not a gram file")
            payload = fh.read()
        if len(payload) != 8 * L * n * n:
            raise ValueError("truncated gram file payload")
        blocks = np.frombuffer(payload, dtype="<f8").reshape(L, n, n)
        return cls(tuple(np.array(b) for b in blocks), points, None if seed < 0 else seed)


def gram_set(model, points, max_points=MAX_GRAM_POINTS):
    X = np.atleast_2d(np.asarray(points, dtype=np.float64))
    n = X.shape[0]
    if n > max_points:
        raise MemoryError(f"{n} points exceeds gram cap {max_points}")
    _, hs, zs = forward(model, X)
    deltas = backward(model, zs, np.ones(n))
    grams = []
    for l in range(model.depth):
        g = (deltas[l] @ deltas[l].T) * (hs[l] @ hs[l].T) / model.weights[l].shape[1]
        grams.append(0.5 * (g + g.T))
    return GramSet(tuple(grams), X, model.seed)


def jacobian(model, points):
    """Full ``(n, P)`` parameter Jacobian, layers concatenated in order. Small nets only."""
    X = np.atleast_2d(points)
    rows = [np.concatenate([g.ravel() for g in per_layer_gradients(model, x)]) for x in X]
    return np.array(rows)


@dataclass(frozen=True)
class Contribution:
    layer: int
    value: float
    relative: float


def contribution_values(grams, y):
    """Quadratic forms ``y^T G_l y`` for every layer."""
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (grams.n,):
        raise ValueError(f"target length {y.shape} does not match {grams.n} points")
    return np.array([y @ g @ y for g in grams.grams])


def contributions(grams, y):
    """Per-layer contributions, normalised by the output layer's."""
    c = contribution_values(grams, y)
    last = c[-1]
    if not last > DEGENERATE_CONTRIBUTION:
        raise DegenerateError(f"last-layer contribution {last:.3e} too small to normalise")
    return [Contribution(l, float(v), float(v / last)) for l, v in enumerate(c)]


def write_contributions_csv(path, rows):
    """``rows``: iterables of ``(layer, target, relative, seed)``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["layer", "target", "relative", "seed"])
        for layer, target, rel, seed in rows:
            writer.writerow([layer, target, repr(float(rel)), seed])
