"""Orthogonal-polynomial primitives.

Conventions used throughout the package:

* Hermite polynomials are the probabilists' ``He_n`` (orthogonal under the
  standard normal density, ``E[He_n He_m] = n! delta_nm``).
* Gegenbauer polynomials for the sphere ``S^{d-1}`` are normalised so that
  ``P_k(1) = 1``. They are orthogonal under ``(1 - u^2)^((d-3)/2)`` on [-1, 1];
  for ``d = 2`` they are the Chebyshev polynomials ``cos(k arccos u)``.
"""
from dataclasses import dataclass
from math import comb, gamma, pi, sqrt

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

from . import _kernels
from .errors import DomainError

MAX_QUADRATURE_ORDER = 200
# inner products of unit vectors can overshoot 1 by a few ulps
DOMAIN_SLACK = 1e-12


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    measure: str

    def integrate(self, f):
        """Integrate ``f`` (callable or values at the nodes) against the measure."""
        values = f(self.nodes) if callable(f) else np.asarray(f)
        return float(np.dot(self.weights, values))

    @property
    def order(self):
        return self.nodes.size

    @property
    def mass(self):
        return float(self.weights.sum())


@dataclass(frozen=True)
class HermiteBasis:
    max_degree: int

    def __post_init__(self):
        if self.max_degree < 0:
            raise ValueError("max_degree must be >= 0")

    def __call__(self, w):
        """Table of He_0..He_max at ``w``; shape ``(max_degree + 1, len(w))``."""
        w = np.atleast_1d(np.asarray(w, dtype=np.float64))
        table = _kernels.hermite_table(self.max_degree, w)
        norms = np.exp(0.5 * gammaln(np.arange(self.max_degree + 1) + 1.0))
        return table * norms[:, None]

    def orthonormal(self, w):
        w = np.atleast_1d(np.asarray(w, dtype=np.float64))
        return _kernels.hermite_table(self.max_degree, w)


@dataclass(frozen=True)
class GegenbauerBasis:
    dimension: int
    max_degree: int

    def __post_init__(self):
        if self.dimension < 2:
            raise DomainError(f"dimension must be >= 2, got {self.dimension}")
        if self.max_degree < 0:
            raise ValueError("max_degree must be >= 0")

    def __call__(self, u):
        """Table of P_0..P_max at ``u``; shape ``(max_degree + 1, len(u))``."""
        u = _check_unit_interval(u)
        return _kernels.gegenbauer_table(self.dimension, self.max_degree, u)


def _check_unit_interval(u):
    u = np.atleast_1d(np.asarray(u, dtype=np.float64))
    if np.any(np.abs(u) > 1.0 + DOMAIN_SLACK) or np.any(np.isnan(u)):
        raise DomainError("argument must lie in [-1, 1]")
    return np.clip(u, -1.0, 1.0)


def hermite_eval(n, w):
    """Probabilists' Hermite polynomial He_n(w) by the three-term recurrence."""
    if n < 0:
        raise ValueError("degree must be >= 0")
    w_arr = np.asarray(w, dtype=np.float64)
    prev, cur = np.zeros_like(w_arr), np.ones_like(w_arr)
    for k in range(n):
        prev, cur = cur, w_arr * cur - k * prev
    return float(cur) if cur.ndim == 0 else cur


def gegenbauer_eval(basis, k, u):
    if k < 0 or k > basis.max_degree:
        raise ValueError(f"degree {k} outside 0..{basis.max_degree}")
    scalar = np.ndim(u) == 0
    vals = _check_unit_interval(u)
    if basis.dimension == 2:
        out = np.cos(k * np.arccos(vals))
    else:
        out = _kernels.gegenbauer_table(basis.dimension, k, vals)[k]
    return float(out[0]) if scalar else out


def _golub_welsch(offdiag, mu0, measure):
    """Symmetric-measure Gauss rule from orthonormal recurrence coefficients."""
    offdiag = np.asarray(offdiag, dtype=np.float64)
    order = offdiag.size + 1
    if order == 1:
        nodes = np.zeros(1)
    else:
        nodes = eigh_tridiagonal(np.zeros(order), offdiag, eigvals_only=True)
    nodes = np.sort(nodes)
    # exact symmetry: the measure is even, so the rule must be too
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = _kernels.christoffel_weights(nodes, offdiag, float(mu0))
    weights = 0.5 * (weights + weights[::-1])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes, weights, measure)


def _check_order(order):
    if order < 1:
        raise ValueError("quadrature order must be >= 1")
    if order > MAX_QUADRATURE_ORDER:
        raise ValueError(
            f"quadrature order {order} exceeds cap {MAX_QUADRATURE_ORDER}"
        )


def gauss_hermite_rule(order):
    """Gauss rule for the standard normal probability measure."""
    _check_order(order)
    offdiag = np.sqrt(np.arange(1, order, dtype=np.float64))
    return _golub_welsch(offdiag, 1.0, "gaussian")


def gegenbauer_mass(d):
    """Total mass of (1 - u^2)^((d-3)/2) on [-1, 1]."""
    a = (d - 3) / 2
    return sqrt(pi) * gamma(a + 1) / gamma(a + 1.5)


def gegenbauer_rule(d, order):
    """Gauss rule for the weight (1 - u^2)^((d-3)/2) on [-1, 1] (unnormalised)."""
    if d < 2:
        raise DomainError(f"dimension must be >= 2, got {d}")
    _check_order(order)
    k = np.arange(1, order, dtype=np.float64)
    if d == 2:
        b = np.where(k == 1, 0.5, 0.25)
    else:
        b = k * (k + d - 3) / ((2 * k + d - 2) * (2 * k + d - 4))
    return _golub_welsch(np.sqrt(b), gegenbauer_mass(d), f"gegenbauer({d})")


def harmonic_space_dim(d, k):
    """Dimension N(d, k) of degree-k spherical harmonics on S^{d-1}."""
    if d < 2 or k < 0:
        raise ValueError("need d >= 2 and k >= 0")
    if k == 0:
        return 1
    return (2 * k + d - 2) * comb(k + d - 3, k - 1) // k


def funk_hecke_check_2d(k, theta, theta_prime):
    """Residual of the addition identity on the circle for degree ``k``."""
    if k < 1:
        raise ValueError("degree must be >= 1")
    basis = GegenbauerBasis(2, k)
    lhs = gegenbauer_eval(basis, k, np.cos(theta - theta_prime))
    rhs = np.cos(k * theta) * np.cos(k * theta_prime) + np.sin(k * theta) * np.sin(
        k * theta_prime
    )
    return np.abs(lhs - rhs)
