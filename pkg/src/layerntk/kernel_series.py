"""Hermite expansions of activations and the two-layer per-layer NTK kernels.

For a two-layer network ``f(x) = m^{-1/2} sum_j v_j sigma(w_j . x)`` with
standard normal weights, the per-layer kernels are dot-product kernels of
``u = <x, x'>`` on the sphere:

* output layer:  ``E[sigma(w.x) sigma(w.x')]``
* first layer:   ``u * E[sigma'(w.x) sigma'(w.x')]``

With ``sigma = sum_i a_i He_i`` (``a_i = E[sigma He_i] / i!``) the output-layer
kernel is ``sum_i i! a_i^2 u^i`` and, because ``He_n' = n He_{n-1}``, the
first-layer kernel is ``sum_i i * i! a_i^2 u^i``.

Internally coefficients are carried in the orthonormal basis
``h_i = He_i / sqrt(i!)`` (``e_i = sqrt(i!) a_i``) so degrees in the thousands
stay finite.
"""
import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import erf as _erf
from scipy.special import gammaln, zeta

from . import _kernels
from .errors import DomainError, QuadratureAccuracyWarning
from .specfun import DOMAIN_SLACK, gauss_hermite_rule

DEFAULT_TRUNCATION = 30
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class ActivationSpec:
    name: str
    value_fn: Callable[[np.ndarray], np.ndarray]
    derivative_fn: Callable[[np.ndarray], np.ndarray]
    smoothness: str = "smooth"

    def __post_init__(self):
        if self.name not in ("relu", "tanh", "erf", "custom"):
            raise ValueError(f"unknown activation tag {self.name!r}")
        if self.smoothness not in ("smooth", "piecewise"):
            raise ValueError(f"unknown smoothness tag {self.smoothness!r}")

    def __call__(self, t):
        return self.value_fn(t)

    def derivative(self, t):
        return self.derivative_fn(t)

    def check(self, points=None, step=1e-5, tol=1e-5):
        """Derivative/finite-difference agreement and Gaussian growth condition.

        Returns ``(max_fd_error, growth)``; raises ``ValueError`` on failure.
        Points within ``10 * step`` of zero are skipped for piecewise
        activations.
        """
        if points is None:
            points = np.linspace(-3.0, 3.0, 61)
        points = np.asarray(points, dtype=np.float64)
        if self.smoothness == "piecewise":
            points = points[np.abs(points) > 10 * step]
        fd = (self.value_fn(points + step) - self.value_fn(points - step)) / (2 * step)
        err = float(np.max(np.abs(fd - self.derivative_fn(points))))
        if err > tol:
            raise ValueError(f"{self.name}: derivative disagrees with FD by {err:.2e}")
        ends = np.array([-8.0, 8.0])
        growth = float(np.max(np.abs(self.value_fn(ends) * np.exp(-(ends**2) / 2))))
        if not growth < 1e-6:
            raise ValueError(f"{self.name}: sigma(t) exp(-t^2/2) not small at |t|=8")
        return err, growth


def relu():
    return ActivationSpec(
        "relu",
        lambda t: np.maximum(t, 0.0),
        lambda t: (np.asarray(t) > 0).astype(np.float64),
        "piecewise",
    )


def tanh():
    return ActivationSpec("tanh", np.tanh, lambda t: 1.0 / np.cosh(t) ** 2)


def erf():
    return ActivationSpec(
        "erf", _erf, lambda t: (2.0 / math.sqrt(math.pi)) * np.exp(-np.square(t))
    )


def identity():
    return ActivationSpec(
        "custom", lambda t: np.asarray(t, dtype=np.float64), lambda t: np.ones_like(t, dtype=np.float64)
    )


ACTIVATIONS = {"relu": relu, "tanh": tanh, "erf": erf, "identity": identity}


def get_activation(name):
    try:
        return ACTIVATIONS[name]()
    except KeyError:
        raise ValueError(
            f"unknown activation {name!r}; choose from {sorted(ACTIVATIONS)}"
        ) from None


@dataclass(frozen=True)
class HermiteCoefficients:
    """Hermite coefficients of an activation.

    ``normalized[i] = sqrt(i!) * coeffs[i]`` are the coefficients in the
    orthonormal basis; ``coeffs`` follow the ``He_i`` convention and may
    underflow to zero at very high degree.
    """

    normalized: np.ndarray
    source: ActivationSpec = field(repr=False)

    @property
    def max_degree(self):
        return self.normalized.size - 1

    @property
    def coeffs(self):
        i = np.arange(self.normalized.size)
        return self.normalized * np.exp(-0.5 * gammaln(i + 1.0))

    def energy(self):
        """``sum_i i! a_i^2`` = truncated estimate of ``E[sigma(w)^2]``."""
        return float(np.sum(self.normalized**2))


@dataclass(frozen=True)
class PowerSeries:
    coeffs: np.ndarray
    tail_mass: float = 0.0
    label: str = ""

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @property
    def max_degree(self):
        return self.coeffs.size - 1

    def __call__(self, u):
        return eval_series(self, u)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["degree", "coefficient"])
            for i, c in enumerate(self.coeffs):
                writer.writerow([i, repr(float(c))])

    @classmethod
    def from_csv(cls, path, label=""):
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        coeffs = np.zeros(max(int(r["degree"]) for r in rows) + 1)
        for r in rows:
            coeffs[int(r["degree"])] = float(r["coefficient"])
        return cls(coeffs, estimate_tail_mass(coeffs), label)


def estimate_tail_mass(coeffs, window=6):
    """Extrapolated ``sum_{i > M} |c_i|`` from the last nonzero terms.

    Both a geometric and a power-law decay are fitted; the larger tail is
    returned, so slowly (algebraically) decaying series such as ReLU's are
    not underestimated.
    """
    coeffs = np.asarray(coeffs, dtype=np.float64)
    # quadrature leaves ~1e-34 residue at parity-forbidden degrees
    floor = 1e-20 * float(np.max(np.abs(coeffs), initial=0.0))
    idx = np.flatnonzero(np.abs(coeffs) > floor)
    if idx.size == 0:
        return 0.0
    if idx.size < 3:
        # too few terms to fit a decay; only exact polynomials end up here
        return 0.0 if idx[-1] < coeffs.size - 2 else math.inf
    idx = idx[-window:]
    vals = np.abs(coeffs[idx])
    step = int(np.median(np.diff(idx)))
    last, M = float(vals[-1]), float(idx[-1])

    slope = np.polyfit(idx.astype(np.float64), np.log(vals), 1)[0]
    if slope >= 0:
        return math.inf
    q = math.exp(slope * step)
    geometric = last * q / (1.0 - q)

    if idx[0] == 0:
        return geometric
    p = -np.polyfit(np.log(idx.astype(np.float64)), np.log(vals), 1)[0]
    if p <= 1:
        return math.inf
    # sum_{j >= 1} last * (M / (M + j step))^p via the Hurwitz zeta function
    algebraic = last * (M / step) ** p * float(zeta(p, M / step + 1.0))
    return float(max(geometric, algebraic))


def _relu_normalized(max_degree):
    # E[relu He_0] = phi(0), E[relu He_1] = 1/2, E[relu He_n] = phi(0) He_{n-2}(0)
    e = np.zeros(max_degree + 1)
    e[0] = _INV_SQRT_2PI
    if max_degree >= 1:
        e[1] = 0.5
    for n in range(2, max_degree + 1, 2):
        j = (n - 2) // 2
        # (2j-1)!! = (2j)! / (2^j j!)
        log_dfact = gammaln(2 * j + 1) - j * math.log(2.0) - gammaln(j + 1)
        mag = math.exp(math.log(_INV_SQRT_2PI) + log_dfact - 0.5 * gammaln(n + 1))
        e[n] = mag if j % 2 == 0 else -mag
    return e


def _project(fn, max_degree, order):
    rule = gauss_hermite_rule(order)
    table = _kernels.hermite_table(max_degree, np.asarray(rule.nodes))
    return table @ (rule.weights * fn(rule.nodes))


def expand_activation(sigma, max_degree=DEFAULT_TRUNCATION, order=None):
    """Hermite coefficients of ``sigma`` up to ``max_degree``.

    ReLU uses closed-form Gaussian half-line moments; everything else is
    projected with a Gauss-Hermite rule of ``order`` nodes (default
    ``max(2 * max_degree, 100)``, capped at 200).
    """
    if max_degree < 0:
        raise ValueError("max_degree must be >= 0")
    if sigma.name == "relu":
        return HermiteCoefficients(_relu_normalized(max_degree), sigma)
    if order is None:
        order = min(max(2 * max_degree, 100), 200)
    if order < 2 * max_degree:
        raise ValueError(f"quadrature order {order} < 2 * max_degree")
    e = _project(sigma.value_fn, max_degree, order)
    if sigma.smoothness == "piecewise":
        coarse = _project(sigma.value_fn, max_degree, max(order * 3 // 4, max_degree + 1))
        err = float(np.max(np.abs(coarse - e)))
        if err > 1e-6:
            warnings.warn(
                f"{sigma.name}: Hermite coefficients unstable to {err:.1e} under "
                "quadrature refinement",
                QuadratureAccuracyWarning,
                stacklevel=2,
            )
    return HermiteCoefficients(e, sigma)


def derivative_coefficients(a):
    """Coefficients of ``sigma'`` from those of ``sigma``: ``a'_n = (n + 1) a_{n+1}``."""
    if a.max_degree < 1:
        raise ValueError("need max_degree >= 1")
    n = np.arange(a.max_degree)
    # orthonormal form of (n+1) a_{n+1}
    e = np.sqrt(n + 1.0) * a.normalized[1:]
    source = ActivationSpec(
        "custom", a.source.derivative_fn, _no_second_derivative, a.source.smoothness
    )
    return HermiteCoefficients(e, source)


def _no_second_derivative(t):
    raise NotImplementedError("second derivative not tracked")


def psi_series(a, label=""):
    """Power series of ``rho -> E[xi(x) xi(y)]`` for correlation ``rho``."""
    coeffs = a.normalized**2
    return PowerSeries(coeffs, estimate_tail_mass(coeffs), label)


def layer_kernel_series(a, layer):
    """Per-layer NTK kernel of a two-layer net as a power series in ``<x, x'>``.

    ``layer="second"``: ``E[sigma sigma]``; ``layer="first"``:
    ``u * E[sigma' sigma']``. Both are returned with degree ``a.max_degree``.
    """
    if layer == "second":
        return psi_series(a, label="second")
    if layer == "first":
        inner = psi_series(derivative_coefficients(a)).coeffs
        coeffs = np.concatenate([[0.0], inner])
        return PowerSeries(coeffs, estimate_tail_mass(coeffs), "first")
    raise ValueError(f"layer must be 'first' or 'second', got {layer!r}")


def two_layer_series(sigma, max_degree=DEFAULT_TRUNCATION, order=None):
    """``(first, second)`` layer kernel series for an activation spec or name."""
    if isinstance(sigma, str):
        sigma = get_activation(sigma)
    a = expand_activation(sigma, max_degree, order)
    return layer_kernel_series(a, "first"), layer_kernel_series(a, "second")


def eval_series(s, u):
    scalar = np.ndim(u) == 0
    vals = np.atleast_1d(np.asarray(u, dtype=np.float64))
    if np.any(np.abs(vals) > 1.0 + DOMAIN_SLACK) or np.any(np.isnan(vals)):
        raise DomainError("power series evaluated outside [-1, 1]")
    vals = np.clip(vals, -1.0, 1.0)
    out = _kernels.horner(s.coeffs, vals.ravel()).reshape(vals.shape)
    return float(out[0]) if scalar else out


def series_sup(s, grid=4001):
    """``sup_{|u| <= 1} |s(u)|`` on a uniform grid (endpoints included)."""
    u = np.linspace(-1.0, 1.0, grid)
    return float(np.max(np.abs(eval_series(s, u))))


def write_expansion_csv(path, a):
    first = layer_kernel_series(a, "first")
    second = layer_kernel_series(a, "second")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["degree", "hermite_coeff", "first_layer", "second_layer"])
        for i, (c, f, s) in enumerate(zip(a.coeffs, first.coeffs, second.coeffs)):
            writer.writerow([i, repr(float(c)), repr(float(f)), repr(float(s))])
