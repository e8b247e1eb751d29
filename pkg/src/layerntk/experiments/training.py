"""Full-batch gradient descent on one layer at a time, with residual bookkeeping.

Loss is the mean squared error ``(1/n) ||f - y||^2``; a step on layer ``l``
is ``W_l -= lr * (1/n) * sum_i r_i grad_{W_l} f(x_i)`` (gradient of half the
MSE). To first order the MSE then drops by ``lr * 2/n^2 * r^T G_l r``.
"""
import csv
from dataclasses import dataclass, field

import numpy as np

from ..errors import DivergenceError
from ..ntk import backward, forward, gram_set
from ..targets import harmonic_highd, sample_anchors
from .config import parse_int_list
from .sweep import anchor_seed, build_model, build_points

MAX_STEPS = 5000
DIVERGENCE_FACTOR = 1e3


@dataclass
class TrainingTrace:
    layer: object  # int or "all"
    lr: float
    steps: int
    loss: np.ndarray
    residuals: np.ndarray = field(repr=False)  # (steps + 1, n_components)
    model: object = field(repr=False, default=None)

    def reduction(self):
        """``1 - r_i(T) / r_i(0)`` per component."""
        r0, rT = self.residuals[0], self.residuals[-1]
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(r0 > 0, 1.0 - rT / r0, 0.0)


def residual_components(residual, components):
    """``r_i = (residual . y_i)^2 / ||y_i||^2`` for each component ``y_i``."""
    C = np.asarray(components, dtype=np.float64).reshape(-1, residual.size)
    return (C @ residual) ** 2 / np.einsum("ij,ij->i", C, C)


def default_lr(model, points, layer, scale=0.1):
    """``scale * n / lambda_max`` of the trained block's gram (or the full gram)."""
    grams = gram_set(model, points)
    G = grams.full() if layer == "all" else grams.grams[layer]
    top = np.linalg.eigvalsh(G)[-1]
    return scale * points.shape[0] / top


def train_layerwise(model, points, target, layer, lr=None, steps=2000, components=None, lr_scale=0.1):
    """Train only ``layer`` (or every layer with ``layer="all"``) for ``steps`` steps."""
    if not 0 <= steps <= MAX_STEPS:
        raise ValueError(f"steps must be in 0..{MAX_STEPS}")
    X = np.atleast_2d(np.asarray(points, dtype=np.float64))
    y = np.asarray(target, dtype=np.float64)
    n = X.shape[0]
    layers = range(model.depth) if layer == "all" else [layer]
    if layer != "all" and not 0 <= layer < model.depth:
        raise ValueError(f"layer {layer} out of range for depth {model.depth}")
    if lr is None:
        lr = default_lr(model, X, layer, lr_scale)
    if components is None:
        components = y[None, :]
    weights = [np.array(w) for w in model.weights]
    current = model.with_weights(weights)
    loss = np.empty(steps + 1)
    resid = np.empty((steps + 1, np.atleast_2d(components).shape[0]))
    for t in range(steps + 1):
        f, hs, zs = forward(current, X)
        r = f - y
        loss[t] = r @ r / n
        resid[t] = residual_components(r, components)
        if not np.isfinite(loss[t]) or loss[t] > DIVERGENCE_FACTOR * max(loss[0], 1e-300):
            raise DivergenceError(f"loss {loss[t]:.3e} at step {t} exceeds guard (lr={lr:.3e})")
        if t == steps:
            break
        deltas = backward(current, zs, r)
        for l in layers:
            grad = deltas[l].T @ hs[l] / np.sqrt(weights[l].shape[1])
            weights[l] -= (lr / n) * grad
    for w in weights:
        w.setflags(write=False)
    return TrainingTrace(layer, float(lr), steps, loss, resid, model.with_weights(weights))


def mixed_harmonic_target(points, degrees, n_anchors, base_seed, seed):
    """Unit-RMS degree components and their sum."""
    comps = []
    for k in degrees:
        anchors = sample_anchors(points.shape[1], n_anchors, anchor_seed(base_seed, seed, k))
        c = harmonic_highd(points, k, anchors=anchors).values
        comps.append(c / np.sqrt(np.mean(c * c)))
    comps = np.array(comps)
    return comps, comps.sum(axis=0)


@dataclass(frozen=True)
class TrainingRow:
    seed: int
    layer: object
    degree: int
    r_initial: float
    r_final: float
    reduction: float


def run_training(config):
    """Per seed: train each configured layer from the same init on a mixed harmonic target."""
    degrees = parse_int_list(config.get("targets", "degrees"))
    layers = parse_int_list(config.get("training", "layers"))
    steps = config.get("training", "steps", int)
    lr_text = config.get("training", "lr")
    scale = config.get("training", "lr_scale", float)
    n_anchors = config.get("targets", "anchors", int)
    base = config.get("targets", "anchor_seed", int)
    rows, traces = [], []
    for seed in config.seeds:
        X = build_points(config, seed)
        model = build_model(config, X.shape[1], seed)
        comps, y = mixed_harmonic_target(X, degrees, n_anchors, base, seed)
        for layer in layers:
            lr = None if lr_text == "auto" else float(lr_text)
            trace = train_layerwise(model, X, y, layer, lr, steps, comps, scale)
            traces.append((seed, trace))
            for k, r0, rT, red in zip(degrees, trace.residuals[0], trace.residuals[-1], trace.reduction()):
                rows.append(TrainingRow(seed, layer, k, float(r0), float(rT), float(red)))
    return rows, traces


def reduction_ratio(rows, layer, high, low):
    """Mean over seeds of ``reduction(high) / reduction(low)`` for one trained layer."""
    by_seed = {}
    for r in rows:
        if r.layer == layer:
            by_seed.setdefault(r.seed, {})[r.degree] = r.reduction
    vals = [d[high] / d[low] for d in by_seed.values()]
    return float(np.mean(vals)), np.array(vals)


def write_training_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["seed", "layer", "degree", "r_initial", "r_final", "reduction"])
        for r in rows:
            w.writerow([r.seed, r.layer, r.degree, repr(r.r_initial), repr(r.r_final), repr(r.reduction)])


def write_trace_csv(path, trace, degrees, every=1):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "layer", "loss", *(f"r_{k}" for k in degrees)])
        for t in range(0, trace.steps + 1, every):
            w.writerow([t, trace.layer, repr(float(trace.loss[t])), *(repr(float(v)) for v in trace.residuals[t])])
