import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from smalltime.asymptotics import classify, implied_vol_asymptote, leading_price
from smalltime.errors import DomainError, PriceOutOfRange
from smalltime.impliedvol import atm_implied_vol, atm_price_bs
from smalltime.model import NIG, CompoundPoisson, FrozenLevy, Heston, Stable

PHI_TENTH = 0.53982783727702899082


def test_price_examples():
    assert atm_price_bs(100.0, 0.0, 1.0) == 0.0
    assert atm_price_bs(100.0, 0.2, 1.0) == pytest.approx(100 * (2 * PHI_TENTH - 1), rel=1e-13)
    assert atm_price_bs(100.0, 0.2, 1.0) == pytest.approx(7.9656, abs=1e-4)
    assert atm_price_bs(100.0, math.inf, 1.0) == 100.0
    assert atm_price_bs(100.0, 1e6, 1.0) == pytest.approx(100.0)


def test_inversion_examples():
    assert atm_implied_vol(0.0, 100.0, 0.5).sigma_impl == 0.0
    r = atm_implied_vol(atm_price_bs(100, 0.2, 1), 100, 1)
    assert abs(r.sigma_impl - 0.2) < 1e-10
    assert atm_implied_vol(7.9656, 100, 1).sigma_impl == pytest.approx(0.2, abs=1e-5)
    top = atm_implied_vol(100.0, 100.0, 1.0)
    assert top.infinite and top.sigma_impl == math.inf


def test_errors():
    with pytest.raises(PriceOutOfRange):
        atm_implied_vol(-1e-12, 100, 1)
    with pytest.raises(PriceOutOfRange):
        atm_implied_vol(100.5, 100, 1)
    with pytest.raises(DomainError):
        atm_implied_vol(1.0, 0.0, 1)
    with pytest.raises(DomainError):
        atm_price_bs(1.0, 0.2, 0.0)


def test_tiny_maturity_does_not_lose_precision():
    # sigma sqrt(T) ~ 1e-9: the Phi difference would cancel catastrophically
    price = atm_price_bs(1.0, 0.3, 1e-16)
    assert atm_implied_vol(price, 1.0, 1e-16).sigma_impl == pytest.approx(0.3, rel=1e-9)


def test_roundtrip_grid():
    rng = np.random.default_rng(11)
    s0 = rng.uniform(1, 200, 1000)
    sig = rng.uniform(0.01, 3, 1000)
    T = rng.uniform(1e-4, 5, 1000)
    for a, b, c in zip(s0, sig, T):
        r = atm_implied_vol(atm_price_bs(a, b, c), a, c)
        assert abs(r.sigma_impl - b) <= 1e-9 * b


@settings(max_examples=300, deadline=None)
@given(st.floats(1, 200), st.floats(0.01, 3), st.floats(1e-4, 5))
def test_roundtrip_property(s0, sigma, T):
    r = atm_implied_vol(atm_price_bs(s0, sigma, T), s0, T)
    assert r.sigma_impl == pytest.approx(sigma, rel=1e-9)
    assert r.residual <= 1e-12 * s0


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 2.0), st.floats(0.01, 2.0))
def test_price_monotone_in_sigma(a, b):
    lo, hi = sorted((a, b))
    assert atm_price_bs(1.0, lo, 0.5) <= atm_price_bs(1.0, hi, 0.5)


@pytest.mark.parametrize("model", [
    Heston(100.0, 0.04),
    FrozenLevy(1.0, 0.0, CompoundPoisson(((0.5, 1.0), (-0.5, 1.0)))),
    FrozenLevy(2.0, 0.0, Stable(1.5, 1.0, 1.0)),
    FrozenLevy(1.0, 0.0, NIG(math.pi)),
])
def test_small_maturity_consistency(model):
    res = classify(model)
    asym = implied_vol_asymptote(model)
    ratios = []
    for k in range(8, 21):
        T = 2.0 ** -k
        iv = atm_implied_vol(leading_price(res, T), model.s0, T).sigma_impl
        ratios.append(iv / asym(T))
    assert abs(ratios[-1] - 1) < 0.02
    dev = np.abs(np.array(ratios) - 1)
    assert np.all(np.diff(dev) <= 1e-12)
