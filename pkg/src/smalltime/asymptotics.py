"""Leading-order small-maturity asymptotics of near-the-money call prices.

Regimes, by the frozen model at time zero:

* Brownian part present: ``E[N(-theta, sigma0**2)^+] sqrt(T)``, jumps irrelevant;
* pure jumps of finite variation: ``C/2 T``;
* stable-like small jumps with index ``alpha`` in (1, 2): ``C/2 T**(1/alpha)``;
* symmetric index-one small jumps: ``(f+ + f-)/2 T |log T|``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from .errors import (AsymmetricOneStable, DomainError, NotFiniteVariation,
                     UnsupportedModel, UnsupportedStrike, ValidationError)
from .model import (AsymptoticResult, FiniteVariation, FrozenLevy, GaussianPower,
                    Heston, LevySde, OrderClass, OrderTag, StableLike, StrikeRule,
                    first_abs_moment, scale_stable_like, stable_like_data)
from .specialfn import bessel_k, gamma_fn, std_normal_cdf, std_normal_pdf

__all__ = [
    "ImpliedVolForm", "ImpliedVolAsymptote", "diffusive_coefficient", "fv_constant",
    "stable_constant", "stable_like_constant", "one_log_constant", "frozen_model",
    "classify", "leading_price", "stable_abs_moment", "nig_abs_moment",
    "implied_vol_asymptote",
]


def diffusive_coefficient(sigma0, theta=0.0):
    """``E[(X - theta)^+]`` for ``X ~ N(0, sigma0**2)``."""
    sigma0 = float(sigma0)
    theta = float(theta)
    if sigma0 < 0:
        raise DomainError(f"sigma0 must be >= 0, got {sigma0}")
    if sigma0 == 0.0:
        return max(-theta, 0.0)
    d = theta / sigma0
    return sigma0 * std_normal_pdf(d) - theta * std_normal_cdf(-d)


def fv_constant(jumps):
    """``int |x| nu(dx) + |int x nu(dx)|`` for finite-variation jumps.

    The ATM call coefficient on the rate ``T`` is half of this.
    """
    if not isinstance(stable_like_data(jumps), FiniteVariation):
        raise NotFiniteVariation(f"{type(jumps).__name__} jumps have infinite variation")
    mu, mean = first_abs_moment(jumps)
    return mu + abs(mean)


def stable_constant(alpha, f_plus, f_minus):
    """First absolute moment of the stable law at unit time, ``E|Z_1|``.

    ``Z_1`` has index ``alpha``, skewness ``(f+ - f-)/(f+ + f-)`` and scale
    ``(f+ + f-)**(1/alpha)``.
    """
    alpha = float(alpha)
    if not 1.0 < alpha < 2.0:
        raise DomainError(f"alpha must lie in (1, 2), got {alpha}")
    if f_plus < 0 or f_minus < 0:
        raise DomainError("f_plus and f_minus must be >= 0")
    total = f_plus + f_minus
    if total == 0.0:
        return 0.0
    skew = (f_plus - f_minus) / total
    tan = math.tan(alpha * math.pi / 2.0)
    return (2.0 / math.pi * total ** (1.0 / alpha) * gamma_fn(1.0 - 1.0 / alpha)
            * (1.0 + skew * skew * tan * tan) ** (1.0 / (2.0 * alpha))
            * math.cos(math.atan(skew * tan) / alpha))


def stable_like_constant(alpha_plus, alpha_minus, f_plus, f_minus):
    """Return ``(alpha, C)`` with ``alpha = max(alpha+, alpha-)`` in (1, 2)."""
    alpha = max(alpha_plus, alpha_minus)
    if not 1.0 < alpha < 2.0:
        raise DomainError(f"max(alpha+, alpha-) must lie in (1, 2), got {alpha}")
    if alpha_plus == alpha_minus:
        return alpha, stable_constant(alpha, f_plus, f_minus)
    if alpha_plus > alpha_minus:
        return alpha, stable_constant(alpha_plus, f_plus, 0.0)
    return alpha, stable_constant(alpha_minus, 0.0, f_minus)


def one_log_constant(f_plus, f_minus):
    """Coefficient of ``T |log T|`` in ``E|Z_T|`` for symmetric index-one jumps."""
    if f_plus != f_minus:
        raise AsymmetricOneStable(f"f_plus ({f_plus}) != f_minus ({f_minus})")
    return f_plus + f_minus


@dataclass(frozen=True)
class _Frozen:
    s0: float
    sigma0: float
    jumps: Optional[object]
    jump_scale: float


def frozen_model(model):
    """Frozen Levy data ``(s0, sigma0, jumps, jump_scale)`` of a model."""
    if isinstance(model, FrozenLevy):
        return _Frozen(model.s0, model.sigma0, model.jumps, 1.0)
    if isinstance(model, Heston):
        if model.v0 == 0.0 and model.mean_reversion * model.long_run_var > 0.0:
            raise UnsupportedModel("Heston with v0 = 0: the frozen model is degenerate "
                                   "although the variance becomes positive")
        return _Frozen(model.s0, model.s0 * math.sqrt(model.v0), None, 1.0)
    if isinstance(model, LevySde):
        f0 = model.coefficient(model.s0)
        return _Frozen(model.s0, abs(f0) * model.driver_sigma, model.driver_jumps, f0)
    if isinstance(model, GaussianPower):
        raise UnsupportedModel("spot volatility vanishes at 0: frozen coefficients do not "
                               "determine the leading order of this model")
    raise UnsupportedModel(f"unknown model type {type(model).__name__}")


def _pure_jump(frozen):
    jumps, scale = frozen.jumps, frozen.jump_scale
    if jumps is None or scale == 0.0:
        return OrderClass(OrderTag.TRIVIAL), 0.0
    data = stable_like_data(jumps)
    if isinstance(data, FiniteVariation):
        c = fv_constant(jumps) * abs(scale)
        if c == 0.0:
            return OrderClass(OrderTag.TRIVIAL), 0.0
        return OrderClass(OrderTag.LINEAR_T), c / 2.0
    data = scale_stable_like(data, scale)
    alpha = data.alpha
    if alpha == 1.0:
        if data.alpha_plus != data.alpha_minus:
            raise AsymmetricOneStable(
                f"index one on one side only (alpha+={data.alpha_plus}, alpha-={data.alpha_minus})")
        return OrderClass(OrderTag.T_LOG_T), one_log_constant(data.f_plus, data.f_minus) / 2.0
    alpha, c = stable_like_constant(*data.as_tuple())
    return OrderClass(OrderTag.POWER_T, 1.0 / alpha), c / 2.0


def classify(model, strike=StrikeRule()):
    """Leading-order regime and call coefficient of ``model`` at ``strike``."""
    frozen = frozen_model(model)
    if frozen.sigma0 > 0.0:
        return AsymptoticResult(OrderClass(OrderTag.SQRT_T),
                                diffusive_coefficient(frozen.sigma0, strike.theta),
                                strike.theta)
    if strike.theta != 0.0:
        raise UnsupportedStrike("theta != 0 is only supported with a Brownian component")
    order, coeff = _pure_jump(frozen)
    return AsymptoticResult(order, coeff, 0.0)


def leading_price(result, T):
    T = float(T)
    if not T > 0.0:
        raise DomainError(f"T must be > 0, got {T}")
    return result.coefficient * result.order.rate(T)


def stable_abs_moment(alpha, f_plus, f_minus, T):
    """``E|Z_T|`` for the stable Levy motion with the given intensities."""
    if not T > 0.0:
        raise DomainError(f"T must be > 0, got {T}")
    return stable_constant(alpha, f_plus, f_minus) * T ** (1.0 / alpha)


def nig_abs_moment(rho, T):
    """Exact ``E|Z_T|`` for the symmetric NIG Levy motion of parameter ``rho``."""
    if not rho > 0.0 or not T > 0.0:
        raise DomainError(f"rho and T must be > 0, got rho={rho}, T={T}")
    x = rho * T
    return 2.0 * rho / math.pi * math.exp(x) * T * bessel_k(0, x)


class ImpliedVolForm(str, enum.Enum):
    CONSTANT = "Constant"
    SQRT_T = "SqrtT"
    POWER_T = "PowerT"
    SQRT_T_LOG_T = "SqrtTLogT"


@dataclass(frozen=True)
class ImpliedVolAsymptote:
    """``sigma_impl(T) ~ coefficient * form(T)``.

    For ``PowerT`` the form is ``T**exponent`` with ``exponent = 1/alpha - 1/2``.
    """

    form: ImpliedVolForm
    coefficient: float
    exponent: Optional[float] = None

    def __post_init__(self):
        if not (math.isfinite(self.coefficient) and self.coefficient >= 0.0):
            raise ValidationError(f"coefficient must be finite and >= 0, got {self.coefficient}")

    def __call__(self, T):
        if self.form is ImpliedVolForm.CONSTANT:
            return self.coefficient
        if self.form is ImpliedVolForm.SQRT_T:
            return self.coefficient * math.sqrt(T)
        if self.form is ImpliedVolForm.POWER_T:
            return self.coefficient * T ** self.exponent
        return self.coefficient * math.sqrt(T) * abs(math.log(T))


_SQRT_HALF_PI = math.sqrt(math.pi / 2.0)


def implied_vol_asymptote(model):
    frozen = frozen_model(model)
    s0 = frozen.s0
    if not s0 > 0.0:
        raise DomainError(f"implied volatility needs s0 > 0, got {s0}")
    res = classify(model)
    tag = res.order.tag
    if tag is OrderTag.TRIVIAL:
        return ImpliedVolAsymptote(ImpliedVolForm.CONSTANT, 0.0)
    if tag is OrderTag.SQRT_T:
        return ImpliedVolAsymptote(ImpliedVolForm.CONSTANT, frozen.sigma0 / s0)
    # absolute-moment constant is twice the call coefficient
    c = 2.0 * res.coefficient
    if tag is OrderTag.LINEAR_T:
        return ImpliedVolAsymptote(ImpliedVolForm.SQRT_T, _SQRT_HALF_PI * c / s0)
    if tag is OrderTag.POWER_T:
        return ImpliedVolAsymptote(ImpliedVolForm.POWER_T, _SQRT_HALF_PI * c / s0,
                                   res.order.exponent - 0.5)
    return ImpliedVolAsymptote(ImpliedVolForm.SQRT_T_LOG_T, _SQRT_HALF_PI * c / s0)
