import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jumphedge.market import (
    JumpPath,
    count_at,
    count_before,
    derive_params,
    sample_path,
    stock_at,
    stock_before,
)

# log(1.1) to 20 digits (mpmath)
LOG_1_1 = 0.09531017980432486004


def test_derive_params_e_minus_one():
    p = derive_params(100, math.e - 1, 2, 1)
    assert p.alpha == pytest.approx(1.0, abs=1e-15)
    assert p.beta == pytest.approx(2 * (math.e - 1), abs=1e-15)


def test_derive_params_small_sigma():
    p = derive_params(100, 0.1, 1, 1)
    assert p.alpha == pytest.approx(LOG_1_1, abs=1e-16)
    assert p.beta == 0.1


@pytest.mark.parametrize("field,args", [
    ("lambda_rn", (1, 0.1, -1, 1)),
    ("s0", (0, 0.1, 1, 1)),
    ("sigma", (1, 0.0, 1, 1)),
    ("T", (1, 0.1, 1, -2)),
])
def test_derive_params_rejects_nonpositive(field, args):
    with pytest.raises(ValueError, match=field):
        derive_params(*args)


def test_counts_at_jump_boundary():
    path = JumpPath((0.3, 0.7), 1.0)
    assert count_at(path, 0.3) == 1
    assert count_before(path, 0.3) == 0
    assert count_at(path, 1.0) == 2
    assert count_at(path, 0.0) == 0


def test_counts_empty_path():
    path = JumpPath((), 1.0)
    for t in (0.0, 0.5, 1.0):
        assert count_at(path, t) == count_before(path, t) == 0


def test_counts_reject_time_outside_horizon():
    path = JumpPath((0.3,), 1.0)
    with pytest.raises(ValueError):
        count_at(path, 1.5)
    with pytest.raises(ValueError):
        count_before(path, -0.1)


def test_jump_path_validation():
    with pytest.raises(ValueError):
        JumpPath((0.5, 0.5), 1.0)
    with pytest.raises(ValueError):
        JumpPath((0.0, 0.5), 1.0)
    with pytest.raises(ValueError):
        JumpPath((0.5, 1.2), 1.0)


def test_stock_values(params):
    empty = JumpPath((), 1.0)
    assert stock_at(params, empty, 0.0) == 100.0
    # 100 e^{-0.1} (mpmath)
    assert stock_at(params, empty, 1.0) == pytest.approx(90.48374180359595732, rel=1e-15)
    one = JumpPath((0.5,), 1.0)
    assert stock_at(params, one, 0.5) == pytest.approx(1.1 * stock_before(params, one, 0.5), rel=1e-15)


jump_lists = st.lists(st.floats(min_value=1e-6, max_value=1.0), max_size=8, unique=True).map(sorted)


@given(jumps=jump_lists, t=st.floats(min_value=0.0, max_value=1.0))
def test_stock_jump_factor_and_lower_bound(jumps, t):
    params = derive_params(50.0, 0.3, 2.0, 1.0)
    path = JumpPath(tuple(jumps), 1.0)
    dn = count_at(path, t) - count_before(path, t)
    assert dn in (0, 1)
    assert stock_at(params, path, t) == pytest.approx(stock_before(params, path, t) * 1.3**dn, rel=1e-14)
    assert stock_at(params, path, t) >= params.s0 * math.exp(-params.beta * params.T) * (1 - 1e-15)


def test_sample_path_deterministic_and_separated():
    a = sample_path(11, 5, 3.0, 2.0)
    b = sample_path(11, 5, 3.0, 2.0)
    c = sample_path(11, 6, 3.0, 2.0)
    assert a == b
    assert a.jump_times != c.jump_times
    assert all(0 < t <= 2.0 for t in a.jump_times)


def test_sample_path_handles_many_jumps():
    path = sample_path(3, 0, 500.0, 1.0)
    assert 350 < path.n_jumps < 650
    assert list(path.jump_times) == sorted(path.jump_times)


def test_sample_path_poisson_mean():
    n = 100_000
    counts = np.array([sample_path(2024, i, 1.0, 1.0).n_jumps for i in range(n)])
    se = math.sqrt(1.0 / n)
    assert abs(counts.mean() - 1.0) <= 3 * se


@pytest.mark.parametrize("mu", [0.5, 2.0])
def test_sample_path_other_intensity_mean(mu):
    n = 20_000
    counts = np.array([sample_path(7, i, mu, 1.0).n_jumps for i in range(n)])
    assert abs(counts.mean() - mu) <= 3 * math.sqrt(mu / n)


def test_stock_martingale_under_pricing_intensity(params):
    n = 100_000
    st_ = np.array([stock_at(params, sample_path(99, i, 1.0, 1.0), 1.0) for i in range(n)])
    se = st_.std(ddof=1) / math.sqrt(n)
    assert abs(st_.mean() - params.s0) <= 3 * se
