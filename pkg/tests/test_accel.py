import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from layerntk import _kernels
from layerntk.specfun import gegenbauer_rule

floats = st.floats(-6, 6, allow_nan=False)
unit = st.floats(-1, 1, allow_nan=False)


def agree(name, *args):
    nb, npy = _kernels.PAIRS[name]
    np.testing.assert_allclose(nb(*args), npy(*args), rtol=1e-13, atol=1e-13)


@given(st.integers(0, 40), st.lists(floats, min_size=1, max_size=30))
def test_hermite_table_backends(M, xs):
    agree("hermite_table", M, np.array(xs))


@given(st.integers(2, 12), st.integers(0, 40), st.lists(unit, min_size=1, max_size=30))
def test_gegenbauer_table_backends(d, M, us):
    agree("gegenbauer_table", d, M, np.array(us))


@given(st.integers(2, 12), st.integers(0, 120), st.integers(0, 20))
def test_beta_walk_backends(d, M, L):
    agree("beta_walk", d, M, min(L, M))


@given(st.integers(2, 12), st.integers(1, 80))
def test_christoffel_backends(d, order):
    rule = gegenbauer_rule(d, order)
    k = np.arange(1, order, dtype=np.float64)
    if d == 2:
        off = np.sqrt(np.where(k == 1, 0.5, 0.25))
    else:
        off = np.sqrt(k * (k + d - 3) / ((2 * k + d - 2) * (2 * k + d - 4)))
    agree("christoffel_weights", np.asarray(rule.nodes), off, 1.7)


@given(st.lists(st.floats(0, 1), min_size=1, max_size=40), st.lists(unit, min_size=1, max_size=30))
def test_horner_backends(cs, us):
    agree("horner", np.array(cs), np.array(us))


def test_pairs_cover_public_kernels():
    for name, (nb, npy) in _kernels.PAIRS.items():
        assert getattr(_kernels, name) in (nb, npy)


@pytest.mark.parametrize("flag,expected", [("1", "numpy"), ("0", "numba")])
def test_env_flag_selects_backend(flag, expected):
    env = dict(os.environ, LAYERNTK_DISABLE_NUMBA=flag)
    out = subprocess.run(
        [sys.executable, "-c", "import layerntk; print(layerntk.backend())"],
        capture_output=True,
        text=True,
        env=env,
        check=True,
    )
    assert out.stdout.strip() == expected
