"""Monte Carlo concentration of the ratio of two layers' risk decrements.

For a target direction ``g`` and kernels ``k1``, ``k2`` the per-point
decrements are ``phi_j(x_i) = g(x_i) * int g(x) k_j(<x, x_i>) dx`` (uniform
probability measure on the sphere). Their sample means concentrate around
``lam_j = E[g (K_j g)]``, and so does the ratio of the means around
``lam_1 / lam_2``.

Targets are zonal, ``g(x) = sum_k a_k P_k(<x, z>)``, so the inner integral is
exact by Funk-Hecke: ``K_j g(x) = sum_k a_k mu_{j,k} P_k(<x, z>)`` with Mercer
eigenvalues ``mu_{j,k}``. A pure single-degree target makes ``phi_1`` and
``phi_2`` proportional, so the ratio is exact at every ``n``; mixtures of at
least two degrees are needed to see fluctuations.
"""
import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateError, TruncationWarning
from ..gegenbauer import DEGENERATE_TOL, to_gegenbauer
from ..kernel_series import eval_series, series_sup
from ..specfun import GegenbauerBasis, harmonic_space_dim
from ..targets import sample_sphere


@dataclass(frozen=True)
class ZonalTarget:
    dimension: int
    degrees: tuple
    amplitudes: tuple

    def __post_init__(self):
        if len(self.degrees) != len(self.amplitudes) or not self.degrees:
            raise ValueError("need matching, non-empty degrees and amplitudes")
        if self.dimension < 2 or min(self.degrees) < 0:
            raise ValueError("need dimension >= 2 and degrees >= 0")

    @property
    def pole(self):
        z = np.zeros(self.dimension)
        z[0] = 1.0
        return z

    def profile(self, t, weights=None):
        """``sum_k w_k P_k(t)``; ``weights`` defaults to the amplitudes."""
        w = np.asarray(self.amplitudes if weights is None else weights, dtype=np.float64)
        t = np.asarray(t, dtype=np.float64)
        P = GegenbauerBasis(self.dimension, max(self.degrees))(t.ravel())
        return (w @ P[list(self.degrees)]).reshape(t.shape)

    def __call__(self, points):
        return self.profile(np.asarray(points) @ self.pole)

    def sup(self, grid=4001):
        return float(np.max(np.abs(self.profile(np.linspace(-1, 1, grid)))))


@dataclass
class ConcentrationReport:
    target: ZonalTarget
    layers: tuple
    n_grid: np.ndarray
    ratios: np.ndarray = field(repr=False)  # (trials, len(n_grid))
    reference: float
    lambdas: tuple
    constants: dict
    delta: float
    bound: np.ndarray

    @property
    def deviations(self):
        return np.abs(self.ratios - self.reference)

    @property
    def median_deviation(self):
        return np.median(self.deviations, axis=0)

    @property
    def violation_fraction(self):
        return np.mean(self.deviations > self.bound[None, :], axis=0)

    def slope(self):
        """Least-squares slope of log median deviation against log n."""
        med = self.median_deviation
        if np.any(med <= 0):
            return math.nan
        return float(np.polyfit(np.log(self.n_grid), np.log(med), 1)[0])

    def rows(self):
        for j, n in enumerate(self.n_grid):
            yield (
                int(n),
                float(np.median(self.ratios[:, j])),
                self.reference,
                float(self.median_deviation[j]),
                float(self.bound[j]),
                float(self.violation_fraction[j]),
            )

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(
                ["n", "median_ratio", "reference_ratio", "median_deviation", "bound", "violation_fraction"]
            )
            for row in self.rows():
                w.writerow([row[0], *(repr(v) for v in row[1:])])


def mercer_eigenvalues(series, d, max_l):
    # both kernels share the same truncation, so the bias cancels in comparisons
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        return to_gegenbauer(series, d, max_l).eigenvalues()


def reference_decrement(mu, target):
    """``E[g K g] = sum_k a_k^2 mu_k / N(d, k)``."""
    d = target.dimension
    return float(
        sum(a * a * mu[k] / harmonic_space_dim(d, k) for k, a in zip(target.degrees, target.amplitudes))
    )


def concentration_bound(n, delta, A, B, C, D, lam1, lam2):
    """``log(4/delta) / sqrt(n) * max(sqrt(A C^2 / (2 lam1^2)), sqrt(B D^2 / (2 lam2^2)))``."""
    n = np.asarray(n, dtype=np.float64)
    scale = max(math.sqrt(A * C * C / (2 * lam1 * lam1)), math.sqrt(B * D * D / (2 * lam2 * lam2)))
    return math.log(4.0 / delta) / np.sqrt(n) * scale


def inner_integral_circle(series, target, theta_i, order=None):
    """``int g(x) k(<x, x_i>) dtheta / (2 pi)`` by the periodic trapezoid rule (d = 2)."""
    if target.dimension != 2:
        raise ValueError("theta quadrature is for the circle only")
    if order is None:
        # exact for trigonometric polynomials of degree < order
        order = series.max_degree + max(target.degrees) + 1
    theta = 2 * np.pi * np.arange(order) / order
    g = target.profile(np.cos(theta))
    k = eval_series(series, np.cos(theta[None, :] - np.asarray(theta_i)[:, None]))
    return k @ g / order


def decrement_ratio_mc(first, second, target, n_grid, trials=400, seed=0, delta=0.05, inner="funk_hecke"):
    """Empirical decrement ratios over ``trials`` independent samples for every ``n``.

    ``inner="quadrature"`` evaluates the inner integral by direct theta
    quadrature (circle only); it matches the Funk-Hecke path to rounding.
    """
    d = target.dimension
    K = max(target.degrees)
    mu1 = mercer_eigenvalues(first, d, K)
    mu2 = mercer_eigenvalues(second, d, K)
    lam1 = reference_decrement(mu1, target)
    lam2 = reference_decrement(mu2, target)
    if not lam2 > DEGENERATE_TOL:
        raise DegenerateError(f"second-kernel decrement {lam2:.3e} vanishes for this target")
    A, B = series_sup(first), series_sup(second)
    C = D = target.sup()
    n_grid = np.asarray(sorted(n_grid), dtype=np.int64)
    bound = concentration_bound(n_grid, delta, A, B, C, D, lam1, lam2)

    w1 = [a * mu1[k] for k, a in zip(target.degrees, target.amplitudes)]
    w2 = [a * mu2[k] for k, a in zip(target.degrees, target.amplitudes)]
    ratios = np.empty((trials, n_grid.size))
    children = np.random.SeedSequence(seed).spawn(trials)
    for t, child in enumerate(children):
        rng = np.random.default_rng(child)
        for j, n in enumerate(n_grid):
            X = sample_sphere(int(n), d, rng)
            s = X @ target.pole
            g = target.profile(s)
            if inner == "funk_hecke":
                k1, k2 = target.profile(s, w1), target.profile(s, w2)
            elif inner == "quadrature":
                th = np.arctan2(X[:, 1], X[:, 0])
                k1 = inner_integral_circle(first, target, th)
                k2 = inner_integral_circle(second, target, th)
            else:
                raise ValueError(f"unknown inner integral method {inner!r}")
            ratios[t, j] = np.mean(g * k1) / np.mean(g * k2)

    return ConcentrationReport(
        target,
        ("first", "second"),
        n_grid,
        ratios,
        lam1 / lam2,
        (lam1, lam2),
        {"A": A, "B": B, "C": C, "D": D},
        delta,
        bound,
    )
