"""Relative per-layer contributions across targets and seeds."""
import csv
import functools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..errors import ConfigError
from ..ntk import DEGENERATE_CONTRIBUTION, MAX_GRAM_POINTS, contribution_values, gram_set, init_model
from ..targets import (
    gram_eigenvector,
    harmonic_2d,
    harmonic_highd,
    pca_sinusoid,
    radial_noise,
    sample_anchors,
    sample_circle_lattice,
    sample_sphere,
)
from .config import parse_float_list, parse_int_list
from .mnist import load_mnist, read_idx

MNIST_ENV = "LAYERNTK_MNIST"


def data_seed(seed):
    return [int(seed), 1]


def anchor_seed(base, seed, degree):
    return [int(base), int(seed), int(degree)]


def _mnist_path(config):
    path = os.environ.get(MNIST_ENV) or (config.get("data", "path") if config.has("data", "path") else None)
    if not path:
        raise ConfigError(f"mnist data needs [data] path or ${MNIST_ENV}")
    return path


@functools.lru_cache(maxsize=4)
def _file_radii(path, pixel_scale):
    images = read_idx(path)
    return np.linalg.norm(images.reshape(images.shape[0], -1) / pixel_scale, axis=1)


def build_points(config, seed):
    kind = config.get("data", "kind")
    rng_seed = data_seed(seed)
    if kind == "sphere":
        return sample_sphere(config.get("data", "n", int), config.get("data", "dim", int), rng_seed)
    if kind == "circle_lattice":
        return sample_circle_lattice(config.get("data", "n", int), rng_seed)
    if kind == "mnist":
        return load_mnist(
            _mnist_path(config),
            config.get("data", "n_subsample", int),
            rng_seed,
            config.get("data", "pixel_scale", float),
        )
    raise ConfigError(f"unknown data kind {kind!r}")


def reference_radii(config, points):
    """Radii that fix the radial frequency grid: the whole image file for mnist, else the points.

    Sharing one grid across seeds keeps the per-frequency seed average well defined.
    """
    if config.get("data", "kind") == "mnist":
        return _file_radii(_mnist_path(config), config.get("data", "pixel_scale", float))
    return np.linalg.norm(points, axis=1)


def build_model(config, input_dim, seed):
    hidden = parse_int_list(config.get("model", "hidden"))
    return init_model([input_dim, *hidden, 1], config.get("model", "activation"), seed)


def frequency_grid(spec, radii):
    """Degrees and frequencies from ``"1,2,3"`` or ``"half_period:J"``.

    ``half_period:J`` gives ``k_j = j * pi / (r_max - r_min)`` for ``j = 1..J``,
    i.e. ``j`` half-periods of ``sin(k r)`` across the range of ``radii``.
    """
    spec = spec.strip()
    if spec.startswith("half_period:"):
        J = int(spec.split(":", 1)[1])
        r = np.asarray(radii, dtype=np.float64)
        span = r.max() - r.min()
        if span <= 1e-12 * max(1.0, r.max()):
            raise ConfigError("half_period grid needs points with distinct radii")
        return [(j, j * np.pi / span) for j in range(1, J + 1)]
    return [(k, k) for k in parse_float_list(spec)]


def build_targets(config, points, seed, full_gram=None):
    """List of ``(degree, frequency, values)`` for the configured target family."""
    kind = config.get("targets", "kind")
    spec = config.get("targets", "degrees")
    if kind == "radial":
        grid = frequency_grid(spec, reference_radii(config, points))
        return [(j, k, radial_noise(points, k).values) for j, k in grid]
    degrees = parse_int_list(spec)
    if kind == "harmonic_2d":
        return [(k, k, harmonic_2d(points, k).values) for k in degrees]
    if kind == "harmonic_highd":
        L = config.get("targets", "anchors", int)
        base = config.get("targets", "anchor_seed", int)
        out = []
        for k in degrees:
            anchors = sample_anchors(points.shape[1], L, anchor_seed(base, seed, k))
            out.append((k, k, harmonic_highd(points, k, anchors=anchors).values))
        return out
    if kind == "pca_sinusoid":
        parity = config.get("targets", "parity")
        return [(k, k, pca_sinusoid(points, k, parity).values) for k in degrees]
    if kind == "gram_eigenvector":
        return [(k, k, gram_eigenvector(full_gram, k).values) for k in degrees]
    raise ConfigError(f"unknown target kind {kind!r}")


@dataclass(frozen=True)
class SweepRow:
    seed: int
    target: str
    degree: float
    frequency: float
    layer: int
    contribution: float
    relative: float


def _one_seed(config, seed, max_points):
    points = build_points(config, seed)
    model = build_model(config, points.shape[1], seed)
    grams = gram_set(model, points, max_points)
    kind = config.get("targets", "kind")
    full = grams.full() if kind == "gram_eigenvector" else None
    rows = []
    for degree, freq, y in build_targets(config, points, seed, full):
        c = contribution_values(grams, y)
        last = c[-1]
        rel = c / last if last > DEGENERATE_CONTRIBUTION else np.full_like(c, np.nan)
        rows.extend(
            SweepRow(seed, kind, degree, float(freq), l, float(c[l]), float(rel[l]))
            for l in range(c.size)
        )
    return rows


def contribution_sweep(config, workers=None, max_points=None):
    """Rows for every (seed, target degree, layer), in seed order.

    Degenerate normalisations (last-layer contribution below threshold) are
    kept as ``nan`` relative values rather than aborting the sweep.
    """
    max_points = MAX_GRAM_POINTS if max_points is None else max_points
    seeds = config.seeds
    workers = config.get("run", "workers", int) if workers is None else workers
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            chunks = list(pool.map(lambda s: _one_seed(config, s, max_points), seeds))
    else:
        chunks = [_one_seed(config, s, max_points) for s in seeds]
    return [row for chunk in chunks for row in chunk]


def summarize(rows, level=0.95):
    """Mean, standard error and a t-interval of relative contributions over seeds."""
    groups = {}
    for r in rows:
        groups.setdefault((r.target, r.degree, r.layer), []).append(r.relative)
    out = []
    for (target, degree, layer), vals in sorted(groups.items()):
        v = np.asarray(vals, dtype=np.float64)
        v = v[np.isfinite(v)]
        m = v.size
        mean = float(v.mean()) if m else np.nan
        sem = float(v.std(ddof=1) / np.sqrt(m)) if m > 1 else np.nan
        half = float(stats.t.ppf(0.5 + level / 2, m - 1) * sem) if m > 1 else np.nan
        out.append((target, degree, layer, mean, sem, mean - half, mean + half, m))
    return out


def mean_relative(rows, layer):
    """``{degree: mean relative contribution of layer}``."""
    return {deg: mean for _, deg, l, mean, *_ in summarize(rows) if l == layer}


def write_rows_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["seed", "target", "degree", "frequency", "layer", "contribution", "relative"])
        for r in rows:
            w.writerow(
                [r.seed, r.target, r.degree, repr(r.frequency), r.layer, repr(r.contribution), repr(r.relative)]
            )


def write_summary_csv(path, summary):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["target", "degree", "layer", "mean", "sem", "ci_low", "ci_high", "n_seeds"])
        for target, degree, layer, *vals, m in summary:
            w.writerow([target, degree, layer, *(repr(float(v)) for v in vals), m])
