"""Monte-Carlo power: determinism, validation, and quick calibration."""

import numpy as np
import pytest

from berrymetrics.mixedmodel import power_mc


def two_group_design(m):
    X = np.ones((2 * m, 2))
    X[:m, 1] = 0.0
    return X


def test_power_requires_enough_sims():
    with pytest.raises(ValueError):
        power_mc(two_group_design(10), (), [0.0, 0.0], (), 1.0, n_sims=50)


def test_power_rejects_negative_variance():
    X = two_group_design(10)
    Z = np.eye(20)
    with pytest.raises(ValueError):
        power_mc(X, (Z,), [0.0, 0.0], (-1.0,), 1.0, n_sims=100)


def test_power_deterministic_per_seed():
    X = two_group_design(15)
    a = power_mc(X, (), [0.0, 1.0], (), 1.0, n_sims=200, seed=99)
    b = power_mc(X, (), [0.0, 1.0], (), 1.0, n_sims=200, seed=99)
    assert a == b


def test_power_large_effect_near_one():
    X = two_group_design(15)
    r = power_mc(X, (), [0.0, 5.0], (), 1.0, n_sims=200, seed=1)
    assert r.power > 0.99


def test_power_monotone_in_effect():
    X = two_group_design(15)
    weak = power_mc(X, (), [0.0, 0.3], (), 1.0, n_sims=400, seed=5)
    strong = power_mc(X, (), [0.0, 1.2], (), 1.0, n_sims=400, seed=5)
    assert strong.power > weak.power


def test_power_mc_std_error_formula():
    X = two_group_design(12)
    r = power_mc(X, (), [0.0, 0.8], (), 1.0, n_sims=300, seed=2)
    assert r.mc_std_error == pytest.approx(
        np.sqrt(r.power * (1 - r.power) / r.n_sims))
    assert r.n_failed == 0
