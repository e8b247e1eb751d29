"""Hot numeric loops.

Every kernel exists twice: a ``*_nb`` loop version compiled with numba and a
``*_np`` version that vectorises over the sample axis. The public name points at
whichever backend :mod:`layerntk._accel` selected. Both return float64 arrays
and must agree to rounding.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, njit

# ---------------------------------------------------------------------------
# orthonormal probabilists' Hermite table: h_k = He_k / sqrt(k!)


def hermite_table_np(max_degree, x):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty((max_degree + 1, x.size))
    out[0] = 1.0
    if max_degree >= 1:
        out[1] = x
    for k in range(1, max_degree):
        out[k + 1] = (x * out[k] - math.sqrt(k) * out[k - 1]) / math.sqrt(k + 1)
    return out


@njit
def hermite_table_nb(max_degree, x):
    n = x.size
    out = np.empty((max_degree + 1, n))
    for j in range(n):
        out[0, j] = 1.0
    if max_degree >= 1:
        for j in range(n):
            out[1, j] = x[j]
    # degree-outer, point-inner: contiguous rows, vectorisable inner loop
    for k in range(1, max_degree):
        a = math.sqrt(k)
        b = math.sqrt(k + 1)
        for j in range(n):
            out[k + 1, j] = (x[j] * out[k, j] - a * out[k - 1, j]) / b
    return out


# ---------------------------------------------------------------------------
# Gegenbauer table normalised to P_k(1) = 1 for the sphere S^{d-1}


def gegenbauer_table_np(d, max_degree, u):
    u = np.asarray(u, dtype=np.float64)
    out = np.empty((max_degree + 1, u.size))
    if d == 2:
        theta = np.arccos(u)
        for k in range(max_degree + 1):
            out[k] = np.cos(k * theta)
        return out
    out[0] = 1.0
    if max_degree >= 1:
        out[1] = u
    for k in range(1, max_degree):
        out[k + 1] = ((2 * k + d - 2) * u * out[k] - k * out[k - 1]) / (k + d - 2)
    return out


@njit
def gegenbauer_table_nb(d, max_degree, u):
    n = u.size
    out = np.empty((max_degree + 1, n))
    if d == 2:
        for j in range(n):
            theta = math.acos(u[j])
            for k in range(max_degree + 1):
                out[k, j] = math.cos(k * theta)
        return out
    for j in range(n):
        out[0, j] = 1.0
    if max_degree >= 1:
        for j in range(n):
            out[1, j] = u[j]
    for k in range(1, max_degree):
        a = 2 * k + d - 2
        b = k + d - 2
        for j in range(n):
            out[k + 1, j] = (a * u[j] * out[k, j] - k * out[k - 1, j]) / b
    return out


# ---------------------------------------------------------------------------
# monomial -> Gegenbauer coefficients via u * P_l = up_l P_{l+1} + down_l P_{l-1}


def _walk_steps(d, size):
    l = np.arange(size, dtype=np.float64)
    if d == 2:
        up = np.where(l == 0, 1.0, 0.5)
        down = np.where(l == 0, 0.0, 0.5)
    else:
        up = (l + d - 2) / (2 * l + d - 2)
        down = l / (2 * l + d - 2)
    return up, down


def beta_walk_np(d, max_power, max_l):
    up, down = _walk_steps(d, max_power + 2)
    out = np.zeros((max_power + 1, max_l + 1))
    row = np.zeros(max_power + 2)
    row[0] = 1.0
    out[0, 0] = 1.0
    for m in range(1, max_power + 1):
        new = np.zeros_like(row)
        new[1 : m + 1] += row[:m] * up[:m]
        new[: m - 1] += row[1:m] * down[1:m]
        row = new
        out[m] = row[: max_l + 1]
    return out


@njit
def beta_walk_nb(d, max_power, max_l):
    size = max_power + 2
    up = np.empty(size)
    down = np.empty(size)
    for l in range(size):
        if d == 2:
            up[l] = 1.0 if l == 0 else 0.5
            down[l] = 0.0 if l == 0 else 0.5
        else:
            up[l] = (l + d - 2) / (2.0 * l + d - 2)
            down[l] = l / (2.0 * l + d - 2)
    out = np.zeros((max_power + 1, max_l + 1))
    row = np.zeros(size)
    new = np.zeros(size)
    row[0] = 1.0
    out[0, 0] = 1.0
    for m in range(1, max_power + 1):
        for l in range(m + 1):
            new[l] = 0.0
        # parity: only l with the parity of m-1 are populated
        for l in range((m - 1) % 2, m, 2):
            v = row[l]
            new[l + 1] += v * up[l]
            if l > 0:
                new[l - 1] += v * down[l]
        for l in range(m + 1):
            row[l] = new[l]
        for l in range(min(m, max_l) + 1):
            out[m, l] = row[l]
    return out


# ---------------------------------------------------------------------------
# Christoffel weights 1 / sum_k p_k(x)^2 from an orthonormal three-term recurrence
# x p_k = b_{k+1} p_{k+1} + b_k p_{k-1} (zero diagonal, symmetric measures)


def christoffel_weights_np(nodes, offdiag, mu0):
    nodes = np.asarray(nodes, dtype=np.float64)
    order = nodes.size
    prev = np.zeros_like(nodes)
    cur = np.full_like(nodes, 1.0 / math.sqrt(mu0))
    total = cur * cur
    for k in range(order - 1):
        nxt = (nodes * cur - (offdiag[k - 1] if k > 0 else 0.0) * prev) / offdiag[k]
        prev, cur = cur, nxt
        total += cur * cur
    return 1.0 / total


@njit
def christoffel_weights_nb(nodes, offdiag, mu0):
    order = nodes.size
    out = np.empty(order)
    p0 = 1.0 / math.sqrt(mu0)
    for j in range(order):
        x = nodes[j]
        prev = 0.0
        cur = p0
        total = cur * cur
        for k in range(order - 1):
            b_prev = offdiag[k - 1] if k > 0 else 0.0
            nxt = (x * cur - b_prev * prev) / offdiag[k]
            prev = cur
            cur = nxt
            total += cur * cur
        out[j] = 1.0 / total
    return out


# ---------------------------------------------------------------------------
# Horner evaluation of a power series


def horner_np(coeffs, u):
    u = np.asarray(u, dtype=np.float64)
    acc = np.zeros_like(u)
    for c in coeffs[::-1]:
        acc = acc * u + c
    return acc


@njit
def horner_nb(coeffs, u):
    n = u.size
    out = np.zeros(n)
    for i in range(coeffs.size - 1, -1, -1):
        c = coeffs[i]
        for j in range(n):
            out[j] = out[j] * u[j] + c
    return out


if USE_NUMBA:
    hermite_table = hermite_table_nb
    gegenbauer_table = gegenbauer_table_nb
    beta_walk = beta_walk_nb
    christoffel_weights = christoffel_weights_nb
    horner = horner_nb
else:
    hermite_table = hermite_table_np
    gegenbauer_table = gegenbauer_table_np
    beta_walk = beta_walk_np
    christoffel_weights = christoffel_weights_np
    horner = horner_np

PAIRS = {
    "hermite_table": (hermite_table_nb, hermite_table_np),
    "gegenbauer_table": (gegenbauer_table_nb, gegenbauer_table_np),
    "beta_walk": (beta_walk_nb, beta_walk_np),
    "christoffel_weights": (christoffel_weights_nb, christoffel_weights_np),
    "horner": (horner_nb, horner_np),
}
