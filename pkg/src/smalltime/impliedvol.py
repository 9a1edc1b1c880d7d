"""At-the-money Black-Scholes implied volatility (zero rates)."""

import math
from dataclasses import dataclass

from .errors import DomainError, PriceOutOfRange

__all__ = ["ImpliedVolResult", "atm_price_bs", "atm_implied_vol"]

_SQRT8 = math.sqrt(8.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_Y_MAX = 20.0


@dataclass(frozen=True)
class ImpliedVolResult:
    """``sigma_impl`` is ``inf`` exactly when ``infinite`` is set."""

    sigma_impl: float
    residual: float
    iterations: int
    infinite: bool = False


def _normalized(y):
    # Phi(y/2) - Phi(-y/2) without cancellation for tiny y
    return math.erf(y / _SQRT8)


def atm_price_bs(s0, sigma, T):
    """``S0 [Phi(sigma sqrt(T)/2) - Phi(-sigma sqrt(T)/2)]``."""
    if not s0 > 0.0 or not T > 0.0 or not sigma >= 0.0:
        raise DomainError(f"need s0 > 0, sigma >= 0, T > 0; got {s0}, {sigma}, {T}")
    if math.isinf(sigma):
        return float(s0)
    return s0 * _normalized(sigma * math.sqrt(T))


def atm_implied_vol(price, s0, T):
    """Invert :func:`atm_price_bs` in ``sigma``.

    Bisection on ``y = sigma sqrt(T)`` over ``[0, 20]`` down to width 1e-14,
    followed by one Newton step.
    """
    if not s0 > 0.0 or not T > 0.0:
        raise DomainError(f"need s0 > 0 and T > 0; got {s0}, {T}")
    if not 0.0 <= price <= s0:
        raise PriceOutOfRange(f"price {price} outside [0, {s0}]")
    if price == 0.0:
        return ImpliedVolResult(0.0, 0.0, 0)
    if price == s0:
        return ImpliedVolResult(math.inf, 0.0, 0, infinite=True)
    target = price / s0
    lo, hi = 0.0, _Y_MAX
    if _normalized(hi) <= target:
        # erf(20/sqrt 8) rounds to 1: price indistinguishable from s0
        return ImpliedVolResult(math.inf, s0 * (1.0 - target), 0, infinite=True)
    it = 0
    while hi - lo > 1e-14:
        mid = 0.5 * (lo + hi)
        if _normalized(mid) < target:
            lo = mid
        else:
            hi = mid
        it += 1
    y = 0.5 * (lo + hi)
    slope = _INV_SQRT_2PI * math.exp(-y * y / 8.0)
    if slope > 0.0:
        y_new = y - (_normalized(y) - target) / slope
        if lo <= y_new <= hi or abs(y_new - y) < 1e-13:
            y = y_new
        it += 1
    residual = s0 * abs(_normalized(y) - target)
    return ImpliedVolResult(y / math.sqrt(T), residual, it)
