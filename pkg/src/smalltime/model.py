"""Domain types: jump measures, martingale models, strikes, asymptotic results.

Jump measures are given directly as the Levy measure ``nu`` of the frozen
process (the pushforward of the compensator under the time-zero jump
coefficient).

Intensity convention for the stable families
--------------------------------------------
For :class:`Stable` and :class:`TemperedStable` the intensities ``f_plus``,
``f_minus`` (resp. ``c_plus``, ``c_minus``) are expressed in *stable-scale
units*: the physical Levy density on ``x > 0`` is::

    levy_density_factor(alpha) * c_plus * exp(-decay_plus * x) / x**(1 + alpha)

with ``levy_density_factor(alpha) = 1 / (-Gamma(-alpha) cos(pi alpha / 2))``
(continuously extended by ``2/pi`` at ``alpha = 1``). With this choice an
untempered ``Stable(alpha, f_plus, f_minus)`` at time ``t`` is exactly the
stable law with index ``alpha``, skewness ``(f_plus - f_minus)/(f_plus +
f_minus)`` and scale ``((f_plus + f_minus) t)**(1/alpha)``, and the closed
form stable constant in :mod:`smalltime.asymptotics` applies verbatim.
:class:`NIG` and :class:`VarianceGamma` use their physical densities.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

from scipy import integrate, special

from .errors import NonIntegrable, ValidationError

__all__ = [
    "CompoundPoisson", "Stable", "TemperedStable", "NIG", "VarianceGamma",
    "JumpSpec", "Coefficient", "FrozenLevy", "Heston", "LevySde",
    "GaussianPower", "ModelSpec", "StrikeRule", "OrderTag", "OrderClass",
    "AsymptoticResult", "FiniteVariation", "StableLike",
    "levy_density_factor", "levy_density", "stable_like_data",
    "first_abs_moment", "second_moment", "scale_stable_like",
]


def _finite(name, value):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{name} must be a real number, got {value!r}") from None
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}")
    return value


def _check(name, value, ok, rng):
    value = _finite(name, value)
    if not ok(value):
        raise ValidationError(f"{name} must lie in {rng}, got {value!r}")
    return value


def _set(obj, name, value):
    object.__setattr__(obj, name, value)


def levy_density_factor(alpha):
    """Multiplier turning a stable-scale intensity into a density coefficient."""
    alpha = float(alpha)
    if abs(alpha - 1.0) < 1e-12:
        return 2.0 / math.pi
    return 1.0 / (-math.gamma(-alpha) * math.cos(math.pi * alpha / 2.0))


# --------------------------------------------------------------------------
# jump measures

@dataclass(frozen=True)
class CompoundPoisson:
    """Finitely many jump sizes, each with its own Poisson intensity."""

    atoms: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self):
        atoms = []
        for i, atom in enumerate(self.atoms):
            try:
                size, intensity = atom
            except (TypeError, ValueError):
                raise ValidationError(f"atoms[{i}] must be a (size, intensity) pair") from None
            size = _check(f"atoms[{i}].size", size, lambda v: v != 0.0, "R \\ {0}")
            intensity = _check(f"atoms[{i}].intensity", intensity, lambda v: v > 0.0, "(0, inf)")
            atoms.append((size, intensity))
        _set(self, "atoms", tuple(atoms))


@dataclass(frozen=True)
class Stable:
    alpha: float
    f_plus: float
    f_minus: float
    truncate_at: Optional[float] = None

    def __post_init__(self):
        _set(self, "alpha", _check("alpha", self.alpha, lambda v: 0.0 < v < 2.0, "(0, 2)"))
        _set(self, "f_plus", _check("f_plus", self.f_plus, lambda v: v >= 0.0, "[0, inf)"))
        _set(self, "f_minus", _check("f_minus", self.f_minus, lambda v: v >= 0.0, "[0, inf)"))
        if self.truncate_at is not None:
            _set(self, "truncate_at",
                 _check("truncate_at", self.truncate_at, lambda v: v > 0.0, "(0, inf)"))
        elif self.alpha <= 1.0 and self.f_plus + self.f_minus > 0.0:
            raise ValidationError(
                "alpha must lie in (1, 2) for an untruncated Stable with mass "
                f"(no first moment otherwise), got alpha={self.alpha!r}; set truncate_at")


@dataclass(frozen=True)
class TemperedStable:
    """CGMY-style tempered stable measure (stable-scale intensities)."""

    alpha_plus: float
    alpha_minus: float
    c_plus: float
    c_minus: float
    decay_plus: float
    decay_minus: float
    truncate_at: Optional[float] = None

    def __post_init__(self):
        for side in ("plus", "minus"):
            _set(self, f"alpha_{side}", _check(f"alpha_{side}", getattr(self, f"alpha_{side}"),
                                               lambda v: 0.0 < v < 2.0, "(0, 2)"))
            _set(self, f"c_{side}", _check(f"c_{side}", getattr(self, f"c_{side}"),
                                           lambda v: v >= 0.0, "[0, inf)"))
            _set(self, f"decay_{side}", _check(f"decay_{side}", getattr(self, f"decay_{side}"),
                                               lambda v: v > 0.0, "(0, inf)"))
        if self.truncate_at is not None:
            _set(self, "truncate_at",
                 _check("truncate_at", self.truncate_at, lambda v: v > 0.0, "(0, inf)"))


@dataclass(frozen=True)
class NIG:
    """Symmetric normal inverse Gaussian measure ``rho K_1(|x|) / (pi |x|)``."""

    rho: float

    def __post_init__(self):
        _set(self, "rho", _check("rho", self.rho, lambda v: v > 0.0, "(0, inf)"))


@dataclass(frozen=True)
class VarianceGamma:
    c_plus: float
    c_minus: float
    decay_plus: float
    decay_minus: float

    def __post_init__(self):
        for side in ("plus", "minus"):
            _set(self, f"c_{side}", _check(f"c_{side}", getattr(self, f"c_{side}"),
                                           lambda v: v >= 0.0, "[0, inf)"))
            _set(self, f"decay_{side}", _check(f"decay_{side}", getattr(self, f"decay_{side}"),
                                               lambda v: v > 0.0, "(0, inf)"))


JumpSpec = Union[CompoundPoisson, Stable, TemperedStable, NIG, VarianceGamma]
_JUMP_TYPES = (CompoundPoisson, Stable, TemperedStable, NIG, VarianceGamma)


def _check_jumps(name, jumps):
    if jumps is not None and not isinstance(jumps, _JUMP_TYPES):
        raise ValidationError(f"{name} must be a JumpSpec or None, got {type(jumps).__name__}")
    return jumps


# --------------------------------------------------------------------------
# models

@dataclass(frozen=True)
class FrozenLevy:
    """Levy martingale ``s0 + sigma0 W + compensated jumps``."""

    s0: float
    sigma0: float = 0.0
    jumps: Optional[JumpSpec] = None

    def __post_init__(self):
        _set(self, "s0", _finite("s0", self.s0))
        _set(self, "sigma0", _check("sigma0", self.sigma0, lambda v: v >= 0.0, "[0, inf)"))
        _check_jumps("jumps", self.jumps)


@dataclass(frozen=True)
class Heston:
    s0: float
    v0: float
    mean_reversion: float = 0.0
    long_run_var: float = 0.0
    vol_of_vol: float = 0.0
    correlation: float = 0.0

    def __post_init__(self):
        _set(self, "s0", _check("s0", self.s0, lambda v: v > 0.0, "(0, inf)"))
        for name in ("v0", "mean_reversion", "long_run_var", "vol_of_vol"):
            _set(self, name, _check(name, getattr(self, name), lambda v: v >= 0.0, "[0, inf)"))
        _set(self, "correlation",
             _check("correlation", self.correlation, lambda v: -1.0 <= v <= 1.0, "[-1, 1]"))


COEFFICIENT_IDS = ("linear", "affine")


@dataclass(frozen=True)
class Coefficient:
    """SDE coefficient ``f(s) = a s`` (linear) or ``f(s) = a s + b`` (affine)."""

    id: str
    a: float
    b: float = 0.0

    def __post_init__(self):
        if self.id not in COEFFICIENT_IDS:
            raise ValidationError(f"id must be one of {COEFFICIENT_IDS}, got {self.id!r}")
        _set(self, "a", _finite("a", self.a))
        _set(self, "b", _finite("b", self.b))
        if self.id == "linear" and self.b != 0.0:
            raise ValidationError("b must be 0 for the linear coefficient")

    def __call__(self, s):
        return self.a * s + self.b


@dataclass(frozen=True)
class LevySde:
    """``dS = f(S-) dL`` with ``L = driver_sigma W + compensated jumps``."""

    s0: float
    coefficient: Coefficient
    driver_sigma: float = 0.0
    driver_jumps: Optional[JumpSpec] = None

    def __post_init__(self):
        _set(self, "s0", _finite("s0", self.s0))
        if not isinstance(self.coefficient, Coefficient):
            raise ValidationError("coefficient must be a Coefficient")
        _set(self, "driver_sigma",
             _check("driver_sigma", self.driver_sigma, lambda v: v >= 0.0, "[0, inf)"))
        _check_jumps("driver_jumps", self.driver_jumps)


@dataclass(frozen=True)
class GaussianPower:
    """Continuous martingale ``S_t = s0 + int sigma_u dW_u`` with ``Var S_T = T**(1 + 2 eps)``.

    Its spot volatility vanishes at time zero although prices are of order
    ``T**(1/2 + eps)``, so no frozen-coefficient classification applies.
    """

    eps_exponent: float
    s0: float = 0.0

    def __post_init__(self):
        _set(self, "eps_exponent",
             _check("eps_exponent", self.eps_exponent, lambda v: v > 0.0, "(0, inf)"))
        _set(self, "s0", _finite("s0", self.s0))


ModelSpec = Union[FrozenLevy, Heston, LevySde, GaussianPower]


@dataclass(frozen=True)
class StrikeRule:
    """Strike ``K_T = S0 + theta sqrt(T)``; ``theta = 0`` is at the money."""

    theta: float = 0.0

    def __post_init__(self):
        _set(self, "theta", _finite("theta", self.theta))

    def strike(self, s0, T):
        return s0 + self.theta * math.sqrt(T)


# --------------------------------------------------------------------------
# asymptotic outputs

class OrderTag(str, enum.Enum):
    TRIVIAL = "Trivial"
    SQRT_T = "SqrtT"
    POWER_T = "PowerT"
    T_LOG_T = "TLogT"
    LINEAR_T = "LinearT"


@dataclass(frozen=True)
class OrderClass:
    tag: OrderTag
    exponent: Optional[float] = None

    def __post_init__(self):
        _set(self, "tag", OrderTag(self.tag))
        if self.tag is OrderTag.POWER_T:
            _set(self, "exponent", _check("exponent", self.exponent,
                                          lambda v: 0.5 < v < 1.0, "(1/2, 1)"))
        elif self.exponent is not None:
            raise ValidationError(f"exponent only applies to PowerT, not {self.tag.value}")

    @property
    def nominal_exponent(self):
        """Power of T in the rate; ``TLogT`` reports 1 (log factor aside)."""
        return {OrderTag.TRIVIAL: None, OrderTag.SQRT_T: 0.5, OrderTag.POWER_T: self.exponent,
                OrderTag.T_LOG_T: 1.0, OrderTag.LINEAR_T: 1.0}[self.tag]

    def rate(self, T):
        T = float(T)
        if self.tag is OrderTag.TRIVIAL:
            return 0.0
        if self.tag is OrderTag.SQRT_T:
            return math.sqrt(T)
        if self.tag is OrderTag.POWER_T:
            return T ** self.exponent
        if self.tag is OrderTag.T_LOG_T:
            return T * abs(math.log(T))
        return T


@dataclass(frozen=True)
class AsymptoticResult:
    """Leading term ``coefficient * order.rate(T)`` of the call price.

    The coefficient always refers to the call price ``E[(S_T - K_T)^+]``,
    i.e. half the coefficient of the centred absolute moment in the
    pure-jump regimes.
    """

    order: OrderClass
    coefficient: float
    moneyness_theta: float = 0.0

    def __post_init__(self):
        _set(self, "coefficient", _check("coefficient", self.coefficient,
                                         lambda v: v >= 0.0, "[0, inf)"))
        if self.order.tag is OrderTag.TRIVIAL and self.coefficient != 0.0:
            raise ValidationError("Trivial order requires coefficient 0")


# --------------------------------------------------------------------------
# operations on jump measures

@dataclass(frozen=True)
class FiniteVariation:
    pass


@dataclass(frozen=True)
class StableLike:
    """Small-jump boundary data of a stable-like measure.

    Intensities are in the units the leading constants use: stable-scale
    units when the governing index differs from 1, raw density limits
    ``lim |x|**2 nu(dx)/dx`` at index 1. A side without mass reports
    ``alpha = 0`` and ``f = 0``.
    """

    alpha_plus: float
    alpha_minus: float
    f_plus: float
    f_minus: float

    @property
    def alpha(self):
        return max(self.alpha_plus, self.alpha_minus)

    def as_tuple(self):
        return (self.alpha_plus, self.alpha_minus, self.f_plus, self.f_minus)


def _sides(jumps):
    """(alpha, intensity, decay) per side for the stable families."""
    if isinstance(jumps, Stable):
        return ((jumps.alpha, jumps.f_plus, 0.0), (jumps.alpha, jumps.f_minus, 0.0))
    return ((jumps.alpha_plus, jumps.c_plus, jumps.decay_plus),
            (jumps.alpha_minus, jumps.c_minus, jumps.decay_minus))


def stable_like_data(jumps):
    """Classify a jump measure by its small jumps.

    Returns :class:`FiniteVariation` when ``int |x| nu(dx)`` is finite near
    zero, otherwise :class:`StableLike` boundary data.
    """
    if jumps is None or isinstance(jumps, (CompoundPoisson, VarianceGamma)):
        return FiniteVariation()
    if isinstance(jumps, NIG):
        f = jumps.rho / math.pi
        return StableLike(1.0, 1.0, f, f)
    sides = []
    for alpha, c, _ in _sides(jumps):
        sides.append((alpha, c) if c > 0.0 else (0.0, 0.0))
    top = max(sides[0][0], sides[1][0])
    if top < 1.0:
        return FiniteVariation()
    if top == 1.0:
        # raw density limits at index 1
        sides = [(a, c * levy_density_factor(1.0) if a == 1.0 else c) for a, c in sides]
    return StableLike(sides[0][0], sides[1][0], sides[0][1], sides[1][1])


def scale_stable_like(data, scale):
    """Boundary data of the pushforward of the measure under ``x -> scale * x``."""
    if scale == 0.0:
        return StableLike(0.0, 0.0, 0.0, 0.0)
    mag = abs(scale)
    fp = data.f_plus * mag ** data.alpha_plus if data.f_plus > 0 else 0.0
    fm = data.f_minus * mag ** data.alpha_minus if data.f_minus > 0 else 0.0
    if scale > 0:
        return StableLike(data.alpha_plus, data.alpha_minus, fp, fm)
    return StableLike(data.alpha_minus, data.alpha_plus, fm, fp)


def _power_integral(power, alpha, decay, lo, hi):
    """``int_lo^hi x**(power - 1 - alpha) exp(-decay x) dx`` (hi may be inf)."""
    p = power - alpha
    if decay == 0.0:
        if hi == math.inf and p >= 0.0:
            return math.inf
        if lo == 0.0 and p <= 0.0:
            return math.inf
        if p == 0.0:
            return math.log(hi / lo)
        top = 0.0 if hi == math.inf else hi ** p
        return (top - lo ** p) / p
    if lo == 0.0:
        if p <= 0.0:
            return math.inf
        full = special.gamma(p) * decay ** (-p)
        return full if hi == math.inf else full * special.gammainc(p, decay * hi)
    # substitute x = exp(u) to tame the power singularity
    f = lambda u: math.exp(p * u - decay * math.exp(u))
    a = math.log(lo)
    b = math.log(hi) if hi != math.inf else max(a, math.log(800.0 / decay)) + 1.0
    if b <= a:
        return 0.0
    val, _ = integrate.quad(f, a, b, limit=400, epsabs=0.0, epsrel=1e-12)
    return val


def _side_moment(power, alpha, c, decay, trunc, lo=0.0):
    """``int_lo^trunc |x|**power`` of one side of a stable-family measure."""
    if c == 0.0:
        return 0.0
    hi = math.inf if trunc is None else trunc
    if lo >= hi:
        return 0.0
    return levy_density_factor(alpha) * c * _power_integral(power, alpha, decay, lo, hi)


def first_abs_moment(jumps):
    """``(int |x| nu(dx), int x nu(dx))`` of the jump measure.

    Raises
    ------
    NonIntegrable
        If ``int |x| nu(dx)`` diverges, i.e. the jumps have infinite variation.
    """
    if jumps is None:
        return 0.0, 0.0
    if isinstance(jumps, CompoundPoisson):
        mu = sum(abs(s) * lam for s, lam in jumps.atoms)
        mean = sum(s * lam for s, lam in jumps.atoms)
        return mu, mean
    if isinstance(jumps, VarianceGamma):
        up = jumps.c_plus / jumps.decay_plus
        down = jumps.c_minus / jumps.decay_minus
        return up + down, up - down
    if isinstance(jumps, NIG):
        raise NonIntegrable("NIG jumps have infinite variation")
    trunc = jumps.truncate_at
    vals = []
    for alpha, c, decay in _sides(jumps):
        if c > 0.0 and alpha >= 1.0:
            raise NonIntegrable(f"int |x| nu(dx) diverges at 0 for alpha = {alpha}")
        vals.append(_side_moment(1.0, alpha, c, decay, trunc))
    return vals[0] + vals[1], vals[0] - vals[1]


def second_moment(jumps):
    """``int x**2 nu(dx)`` (may be ``inf`` for untruncated stable measures)."""
    if jumps is None:
        return 0.0
    if isinstance(jumps, CompoundPoisson):
        return sum(s * s * lam for s, lam in jumps.atoms)
    if isinstance(jumps, VarianceGamma):
        return jumps.c_plus / jumps.decay_plus ** 2 + jumps.c_minus / jumps.decay_minus ** 2
    if isinstance(jumps, NIG):
        # 2 rho/pi * int_0^inf x K_1(x) dx = rho
        return jumps.rho
    return sum(_side_moment(2.0, a, c, d, jumps.truncate_at) for a, c, d in _sides(jumps))


def levy_density(jumps, x):
    """Physical Levy density at ``x != 0`` (absolutely continuous families only)."""
    x = float(x)
    if x == 0.0:
        raise ValueError("density undefined at 0")
    if isinstance(jumps, NIG):
        return jumps.rho / (math.pi * abs(x)) * float(special.k1(abs(x)))
    if isinstance(jumps, VarianceGamma):
        c, d = (jumps.c_plus, jumps.decay_plus) if x > 0 else (jumps.c_minus, jumps.decay_minus)
        return c * math.exp(-d * abs(x)) / abs(x)
    if isinstance(jumps, (Stable, TemperedStable)):
        if jumps.truncate_at is not None and abs(x) > jumps.truncate_at:
            return 0.0
        alpha, c, decay = _sides(jumps)[0 if x > 0 else 1]
        if c == 0.0:
            return 0.0
        return levy_density_factor(alpha) * c * math.exp(-decay * abs(x)) / abs(x) ** (1 + alpha)
    raise ValueError(f"{type(jumps).__name__} has no density")
