"""Frequency-indexed target vectors on finite point sets."""
import csv
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, DomainError
from .specfun import GegenbauerBasis

KINDS = ("harmonic_2d", "harmonic_highd", "radial", "pca_sinusoid", "gram_eigenvector", "custom")


@dataclass(frozen=True)
class TargetFunction:
    values: np.ndarray
    kind: str
    degree: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown target kind {self.kind!r}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("target values must be finite")

    def __len__(self):
        return self.values.size

    def scaled(self, alpha):
        return TargetFunction(alpha * self.values, self.kind, self.degree)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "value"])
            for i, v in enumerate(self.values):
                w.writerow([i, repr(float(v))])

    @classmethod
    def from_csv(cls, path, kind="custom", degree=0):
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        idx = np.array([int(r["index"]) for r in rows])
        if not np.array_equal(idx, np.arange(idx.size)):
            raise ValueError("target CSV indices must be 0..n-1 in order")
        return cls(np.array([float(r["value"]) for r in rows]), kind, degree)


def sample_sphere(n, d, seed=None):
    """``n`` i.i.d. uniform points on S^{d-1}; circle points come from a uniform angle."""
    if n < 1 or d < 2:
        raise ValueError("need n >= 1 and d >= 2")
    rng = np.random.default_rng(seed)
    if d == 2:
        theta = rng.uniform(0.0, 2 * np.pi, n)
        return np.column_stack([np.cos(theta), np.sin(theta)])
    X = rng.standard_normal((n, d))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def sample_circle_lattice(n, seed=None):
    """Equispaced angles with one uniform random rotation.

    Each point is still marginally uniform on the circle, but the empirical
    measure has no clumping, which removes the sampling bias of quadratic
    forms ``y^T G y / n^2`` at moderate ``n``.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    rng = np.random.default_rng(seed)
    theta = (rng.uniform(0.0, 2 * np.pi) + 2 * np.pi * np.arange(n) / n) % (2 * np.pi)
    return np.column_stack([np.cos(theta), np.sin(theta)])


def angles(points):
    points = np.asarray(points)
    if points.ndim != 2 or points.shape[1] != 2:
        raise DomainError("expected points in R^2")
    return np.mod(np.arctan2(points[:, 1], points[:, 0]), 2 * np.pi)


def harmonic_2d(points, k):
    return TargetFunction(np.cos(k * angles(points)), "harmonic_2d", k)


def sample_anchors(d, n_anchors=4, anchor_seed=None):
    return sample_sphere(n_anchors, d, anchor_seed)


def harmonic_highd(points, k, n_anchors=4, anchor_seed=None, anchors=None):
    """``sum_l P_k(<x, x_l>)`` over ``n_anchors`` uniform anchors (all weights one)."""
    points = np.asarray(points, dtype=np.float64)
    d = points.shape[1]
    if d < 3:
        raise DomainError("harmonic_highd needs d >= 3; use harmonic_2d on the circle")
    if k < 0:
        raise ValueError("degree must be >= 0")
    if anchors is None:
        anchors = sample_anchors(d, n_anchors, anchor_seed)
    u = np.clip(points @ np.asarray(anchors).T, -1.0, 1.0)
    P = GegenbauerBasis(d, k)(u.ravel())[k].reshape(u.shape)
    return TargetFunction(P.sum(axis=1), "harmonic_highd", k)


def radial_noise(points, k):
    r = np.linalg.norm(np.asarray(points, dtype=np.float64), axis=1)
    return TargetFunction(np.sin(k * r), "radial", k)


def principal_direction(points):
    X = np.asarray(points, dtype=np.float64)
    Xc = X - X.mean(axis=0)
    _, s, vt = np.linalg.svd(Xc, full_matrices=False)
    if s.size == 0 or s[0] <= 1e-12 * max(1.0, np.abs(X).max()):
        raise DegenerateError("point set has zero variance")
    v = vt[0]
    # deterministic sign: largest-magnitude component positive
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return v


def pca_sinusoid(points, k, parity="sin"):
    """sin or cos of ``k * pi * s`` with ``s`` the top-PC projection rescaled to [-1, 1]."""
    if parity not in ("sin", "cos"):
        raise ValueError("parity must be 'sin' or 'cos'")
    X = np.asarray(points, dtype=np.float64)
    if X.shape[0] < 2:
        raise ValueError("need at least two points")
    proj = (X - X.mean(axis=0)) @ principal_direction(X)
    lo, hi = proj.min(), proj.max()
    s = 2 * (proj - lo) / (hi - lo) - 1
    fn = np.sin if parity == "sin" else np.cos
    return TargetFunction(fn(k * np.pi * s), "pca_sinusoid", k)


def gram_eigenvector(full_gram, rank):
    G = np.asarray(full_gram, dtype=np.float64)
    n = G.shape[0]
    if not 1 <= rank <= n:
        raise ValueError(f"rank must be in 1..{n}")
    w, V = np.linalg.eigh(0.5 * (G + G.T))
    v = V[:, n - rank]
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return TargetFunction(v, "gram_eigenvector", rank)


def make_target(kind, points, degree, **kw):
    if kind == "harmonic_2d":
        return harmonic_2d(points, degree)
    if kind == "harmonic_highd":
        return harmonic_highd(points, int(degree), **kw)
    if kind == "radial":
        return radial_noise(points, degree)
    if kind == "pca_sinusoid":
        return pca_sinusoid(points, degree, kw.get("parity", "sin"))
    raise ValueError(f"cannot build target kind {kind!r} from points")
