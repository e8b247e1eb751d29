"""Power series -> Gegenbauer series on S^{d-1}, and layer-wise eigen-ratios.

A dot-product kernel ``k(<x, x'>) = sum_l lam_l P_l(<x, x'>)`` has Mercer
eigenvalue ``lam_l / N(d, l)`` on the degree-l harmonics, so ratios of two
kernels' ``lam_l`` are ratios of eigenvalues.
"""
import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DegenerateError, TruncationWarning
from .kernel_series import PowerSeries, eval_series
from .specfun import MAX_QUADRATURE_ORDER, GegenbauerBasis, gegenbauer_rule, harmonic_space_dim

DEGENERATE_TOL = 1e-12
TAIL_WARN = 1e-6


@dataclass(frozen=True)
class BetaMatrix:
    """``entries[i, l] = beta^i_l`` with ``u^i = sum_l beta^i_l P_l(u)``."""

    dimension: int
    entries: np.ndarray

    @property
    def max_power(self):
        return self.entries.shape[0] - 1


@dataclass(frozen=True)
class GegenbauerSeries:
    dimension: int
    coeffs: np.ndarray
    source: PowerSeries = field(repr=False, default=None)

    @property
    def max_degree(self):
        return self.coeffs.size - 1

    def __call__(self, u):
        basis = GegenbauerBasis(self.dimension, self.max_degree)
        return self.coeffs @ basis(u)

    def eigenvalues(self):
        """Mercer eigenvalues ``lam_l / N(d, l)`` under the uniform probability measure."""
        dims = np.array(
            [harmonic_space_dim(self.dimension, l) for l in range(self.coeffs.size)],
            dtype=np.float64,
        )
        return self.coeffs / dims


def beta_matrix(d, max_power, max_l=None):
    """Monomial-to-Gegenbauer change of basis.

    Built by repeatedly multiplying by ``u`` with the normalised three-term
    relation ``u P_l = (l+d-2)/(2l+d-2) P_{l+1} + l/(2l+d-2) P_{l-1}``.
    Every step moves nonnegative mass, so entries are nonnegative and rows
    sum to one by construction.
    """
    if d < 2:
        raise ValueError("dimension must be >= 2")
    if max_power < 0:
        raise ValueError("max_power must be >= 0")
    max_l = max_power if max_l is None else min(max_l, max_power)
    return BetaMatrix(d, _kernels.beta_walk(d, max_power, max_l))


def beta_matrix_quadrature(d, max_power, order=None):
    """Same matrix by projection ``int u^i P_l dnu / int P_l^2 dnu``."""
    if order is None:
        order = max_power + 1
    rule = gegenbauer_rule(d, order)
    u = np.asarray(rule.nodes)
    P = GegenbauerBasis(d, max_power)(u)
    norms = P**2 @ rule.weights
    powers = u[None, :] ** np.arange(max_power + 1)[:, None]
    entries = (powers * rule.weights) @ P.T / norms
    return BetaMatrix(d, np.tril(entries))


def to_gegenbauer(s, d, max_l=None, method="beta"):
    """Gegenbauer coefficients ``lam_l = sum_{m >= l} c_m beta^m_l`` of a power series."""
    if s.tail_mass > TAIL_WARN:
        warnings.warn(
            f"series {s.label or ''} truncated at degree {s.max_degree} with tail "
            f"mass {s.tail_mass:.1e}; high-degree Gegenbauer coefficients are biased",
            TruncationWarning,
            stacklevel=2,
        )
    M = s.max_degree
    max_l = M if max_l is None else min(max_l, M)
    if method == "beta":
        beta = beta_matrix(d, M, max_l).entries
        coeffs = s.coeffs @ beta
    elif method == "quadrature":
        order = (M + max_l) // 2 + 1
        if order > MAX_QUADRATURE_ORDER:
            raise ValueError(f"degree {M} too high for direct quadrature")
        rule = gegenbauer_rule(d, order)
        u = np.asarray(rule.nodes)
        P = GegenbauerBasis(d, max_l)(u)
        g = eval_series(s, u)
        coeffs = (P * (rule.weights * g)).sum(axis=1) / (P**2 @ rule.weights)
    else:
        raise ValueError(f"unknown method {method!r}")
    return GegenbauerSeries(d, coeffs, s)


def layerwise_eigen_ratio(first, second, l):
    if first.dimension != second.dimension:
        raise ValueError("series live on different spheres")
    den = second.coeffs[l]
    if not den > DEGENERATE_TOL:
        raise DegenerateError(f"degree {l}: second-layer coefficient {den:.3e} vanishes")
    return float(first.coeffs[l] / den)


@dataclass
class RatioReport:
    hypothesis_holds: bool
    conclusion_holds: bool
    first_hypothesis_violation: int | None
    first_conclusion_violation: int | None
    power_ratios: np.ndarray
    gegenbauer_ratios: np.ndarray

    @property
    def ok(self):
        return self.hypothesis_holds and self.conclusion_holds


def check_ratio_monotonicity(g, h, d, max_l=None, rtol=1e-9):
    """Check the hypothesis and conclusion of the coefficient-ratio monotonicity property.

    Hypothesis: ``g_i / h_i`` non-decreasing over degrees with ``h_i > 0``.
    Conclusion: ``g_{P_l} / h_{P_l} >= g_l / h_l`` wherever both sides exist.
    """
    n = min(g.coeffs.size, h.coeffs.size)
    gc, hc = g.coeffs[:n], h.coeffs[:n]
    if np.any(hc < -DEGENERATE_TOL):
        raise ValueError("h must have nonnegative coefficients")
    live = hc > DEGENERATE_TOL
    power = np.full(n, np.nan)
    power[live] = gc[live] / hc[live]

    hyp_violation = None
    seq = np.flatnonzero(live)
    for a, b in zip(seq[:-1], seq[1:]):
        if power[b] < power[a] * (1 - rtol) - rtol:
            hyp_violation = int(b)
            break

    max_l = n - 1 if max_l is None else min(max_l, n - 1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        gg = to_gegenbauer(PowerSeries(gc, g.tail_mass), d, max_l).coeffs
        hg = to_gegenbauer(PowerSeries(hc, h.tail_mass), d, max_l).coeffs
    geg = np.full(max_l + 1, np.nan)
    ok = hg > DEGENERATE_TOL
    geg[ok] = gg[ok] / hg[ok]
    con_violation = None
    for l in range(max_l + 1):
        if ok[l] and live[l] and geg[l] < power[l] * (1 - rtol) - rtol:
            con_violation = l
            break
    return RatioReport(
        hyp_violation is None,
        con_violation is None,
        hyp_violation,
        con_violation,
        power,
        geg,
    )


def ratio_table(first, second, max_l):
    """Rows ``(degree, lam_first, lam_second, ratio, l^2, pass_l2, pass_l)``.

    Degenerate degrees carry ``ratio = nan`` and ``"skip"`` in both pass columns.
    """
    rows = []
    for l in range(max_l + 1):
        lf, ls = float(first.coeffs[l]), float(second.coeffs[l])
        try:
            r = layerwise_eigen_ratio(first, second, l)
        except DegenerateError:
            rows.append((l, lf, ls, math.nan, l * l, "skip", "skip"))
            continue
        rows.append(
            (l, lf, ls, r, l * l, r >= l * l * (1 - 1e-6), r >= l * (1 - 1e-6))
        )
    return rows


def write_ratio_csv(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["degree", "lambda_first", "lambda_second", "ratio", "l_squared", "pass", "pass_linear"]
        )
        for row in rows:
            writer.writerow(
                [
                    row[0],
                    repr(row[1]),
                    repr(row[2]),
                    "" if math.isnan(row[3]) else repr(row[3]),
                    row[4],
                    str(row[5]).lower(),
                    str(row[6]).lower(),
                ]
            )
