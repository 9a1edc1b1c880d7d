"""Random generation for every supported model.

Draws are vectorised: each sampler takes a ``size`` and a
:class:`numpy.random.Generator`. Reproducible, order-independent streams come
from :class:`RngStream`, which derives one counter-based Philox generator per
``(seed, stream_id, chunk)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from . import kernels
from .errors import StepCountTooSmall, UnsupportedExact, UnsupportedModel, ValidationError
from .model import (CompoundPoisson, FrozenLevy, GaussianPower, Heston, LevySde, NIG,
                    Stable, TemperedStable, VarianceGamma, _power_integral,
                    levy_density_factor)

__all__ = [
    "CHUNK", "RngStream", "PathConfig", "default_truncation_eps", "sample_terminal",
    "sample_increments", "sample_path", "sample_truncated_pair",
    "gaussian_exact_power_model", "has_exact_sampler", "is_heavy_tailed",
]

#: paths per generator; fixes the mapping from path index to random stream
CHUNK = 1 << 15

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """Keyed random stream; identical keys reproduce identical draws."""

    seed: int
    stream_id: int = 0
    sub: Tuple[int, ...] = field(default=(), repr=False)

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not 0 <= int(v) <= _MASK64:
                raise ValidationError(f"{name} must be an unsigned 64-bit integer, got {v!r}")

    def substream(self, index):
        return RngStream(self.seed, self.stream_id, self.sub + (int(index),))

    def generator(self, chunk=0):
        ss = np.random.SeedSequence(int(self.seed),
                                    spawn_key=(int(self.stream_id),) + self.sub + (int(chunk),))
        return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class PathConfig:
    horizon: float
    n_steps: int = 64
    truncation_eps: float = 1e-3

    def __post_init__(self):
        if not (math.isfinite(self.horizon) and self.horizon > 0):
            raise ValidationError(f"horizon must be > 0, got {self.horizon!r}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValidationError(f"n_steps must be an integer >= 1, got {self.n_steps!r}")
        if not (math.isfinite(self.truncation_eps) and self.truncation_eps > 0):
            raise ValidationError(f"truncation_eps must be > 0, got {self.truncation_eps!r}")


# --------------------------------------------------------------------------
# jump laws

def has_exact_sampler(jumps):
    if isinstance(jumps, TemperedStable):
        return False
    if isinstance(jumps, Stable):
        return jumps.truncate_at is None
    return True


def is_heavy_tailed(model):
    """True if the terminal law has infinite variance (untruncated stable jumps)."""
    jumps = getattr(model, "jumps", None) or getattr(model, "driver_jumps", None)
    return (isinstance(jumps, Stable) and jumps.truncate_at is None
            and jumps.f_plus + jumps.f_minus > 0)


def _stable_sides(jumps):
    if isinstance(jumps, Stable):
        return [(+1.0, jumps.alpha, jumps.f_plus, 0.0), (-1.0, jumps.alpha, jumps.f_minus, 0.0)]
    return [(+1.0, jumps.alpha_plus, jumps.c_plus, jumps.decay_plus),
            (-1.0, jumps.alpha_minus, jumps.c_minus, jumps.decay_minus)]


def default_truncation_eps(jumps, T, rel=0.1):
    """Small-jump cutoff proportional to the stable scale at horizon ``T``."""
    sides = [s for s in _stable_sides(jumps) if s[2] > 0]
    if not sides:
        return 1.0
    alpha = max(s[1] for s in sides)
    total = sum(s[2] for s in sides if s[1] == alpha)
    return rel * (total * T) ** (1.0 / alpha)


def _exact_jumps(jumps, T, size, gen):
    if isinstance(jumps, CompoundPoisson):
        out = np.zeros(size)
        drift = 0.0
        for s, lam in jumps.atoms:
            out += s * gen.poisson(lam * T, size)
            drift += s * lam
        return out - drift * T
    if isinstance(jumps, Stable):
        total = jumps.f_plus + jumps.f_minus
        if total == 0.0:
            return np.zeros(size)
        beta = (jumps.f_plus - jumps.f_minus) / total
        v = gen.uniform(-np.pi / 2, np.pi / 2, size)
        w = gen.standard_exponential(size)
        scale = (total * T) ** (1.0 / jumps.alpha)
        return scale * kernels.stable_cms(jumps.alpha, beta, v, w)
    if isinstance(jumps, NIG):
        delta = jumps.rho * T
        ig = gen.wald(delta, delta * delta, size)
        return np.sqrt(ig) * gen.standard_normal(size)
    if isinstance(jumps, VarianceGamma):
        out = np.zeros(size)
        if jumps.c_plus > 0:
            out += gen.gamma(jumps.c_plus * T, 1.0 / jumps.decay_plus, size)
        if jumps.c_minus > 0:
            out -= gen.gamma(jumps.c_minus * T, 1.0 / jumps.decay_minus, size)
        return out - T * (jumps.c_plus / jumps.decay_plus - jumps.c_minus / jumps.decay_minus)
    raise UnsupportedExact(f"no exact sampler for {type(jumps).__name__}; use sample_path")


def _side_integrals(alpha, c, decay, trunc, eps):
    """(rate above eps, first moment above eps, second moment below eps)."""
    k = levy_density_factor(alpha) * c
    hi = math.inf if trunc is None else trunc
    if eps >= hi:
        return 0.0, 0.0, k * _power_integral(2.0, alpha, decay, 0.0, hi)
    return (k * _power_integral(0.0, alpha, decay, eps, hi),
            k * _power_integral(1.0, alpha, decay, eps, hi),
            k * _power_integral(2.0, alpha, decay, 0.0, eps))


def _draw_tail(alpha, decay, trunc, eps, count, gen):
    """``count`` i.i.d. sizes with density ~ x**(-1-alpha) exp(-decay x) on (eps, trunc)."""
    out = np.empty(count)
    have = 0
    hi = math.inf if trunc is None else trunc
    # acceptance of the Pareto proposal, bounded below to cap batch sizes
    acc = (_power_integral(0.0, alpha, decay, eps, hi) * alpha * eps ** alpha) if count else 1.0
    acc = max(acc, 1e-3)
    while have < count:
        need = count - have
        batch = int(need / acc * 1.1) + 16
        x = eps * gen.uniform(0.0, 1.0, batch) ** (-1.0 / alpha)
        keep = x <= hi
        if decay > 0:
            keep &= gen.uniform(0.0, 1.0, batch) < np.exp(-decay * (x - eps))
        x = x[keep][:need]
        out[have:have + x.size] = x
        have += x.size
    return out


def _truncated_jumps(jumps, T, size, gen, eps_list):
    """Compound-Poisson-plus-Gaussian approximations, one per cutoff, on shared draws.

    Jumps above the smallest cutoff are drawn once; a coarser cutoff keeps only
    the jumps above itself and widens its Gaussian accordingly. A single normal
    vector drives every Gaussian part.
    """
    eps_min = min(eps_list)
    trunc = jumps.truncate_at
    zeta = gen.standard_normal(size)
    outs = [np.zeros(size) for _ in eps_list]
    small_var = [0.0] * len(eps_list)
    for sign, alpha, c, decay in _stable_sides(jumps):
        if c == 0.0:
            continue
        lam_min = _side_integrals(alpha, c, decay, trunc, eps_min)[0]
        counts = gen.poisson(lam_min * T, size)
        total = int(counts.sum())
        sizes = _draw_tail(alpha, decay, trunc, eps_min, total, gen)
        owner = np.repeat(np.arange(size), counts)
        for j, eps in enumerate(eps_list):
            _, m1, v2 = _side_integrals(alpha, c, decay, trunc, eps)
            sel = sizes > eps if eps > eps_min else slice(None)
            summed = np.bincount(owner[sel], weights=sizes[sel], minlength=size)
            outs[j] += sign * (summed - T * m1)
            small_var[j] += v2
    for j in range(len(eps_list)):
        outs[j] += math.sqrt(T * small_var[j]) * zeta
    return outs


def sample_increments(sigma, jumps, T, size, gen, eps=None):
    """Draws of the centred Levy increment ``sigma W_T + jumps_T``.

    Jump laws without an exact sampler require the cutoff ``eps``.
    """
    out = sigma * math.sqrt(T) * gen.standard_normal(size) if sigma > 0 else np.zeros(size)
    if jumps is None:
        return out
    if has_exact_sampler(jumps):
        return out + _exact_jumps(jumps, T, size, gen)
    if eps is None:
        raise UnsupportedExact(f"{type(jumps).__name__} needs a truncation cutoff")
    return out + _truncated_jumps(jumps, T, size, gen, [eps])[0]


def sample_terminal(model, T, size, gen):
    """Exact draws of ``Z_T`` for a :class:`FrozenLevy` model."""
    if not isinstance(model, FrozenLevy):
        raise UnsupportedModel("sample_terminal takes a FrozenLevy model")
    if model.jumps is not None and not has_exact_sampler(model.jumps):
        raise UnsupportedExact(f"{type(model.jumps).__name__} requires sample_path")
    return model.s0 + sample_increments(model.sigma0, model.jumps, T, size, gen)


def sample_truncated_pair(model, T, eps, size, gen):
    """Coupled draws of ``Z_T`` with cutoffs ``eps`` and ``eps / 2``."""
    if not isinstance(model, FrozenLevy) or model.jumps is None or has_exact_sampler(model.jumps):
        raise UnsupportedModel("truncation pairs need a FrozenLevy model with truncated jumps")
    base = model.sigma0 * math.sqrt(T) * gen.standard_normal(size) if model.sigma0 > 0 else 0.0
    coarse, fine = _truncated_jumps(model.jumps, T, size, gen, [eps, eps / 2.0])
    return model.s0 + base + coarse, model.s0 + base + fine


def gaussian_exact_power_model(eps_exponent, T, size, gen):
    """Draws of ``N(0, T**(1 + 2 eps_exponent))``."""
    if not eps_exponent > 0:
        raise ValidationError(f"eps_exponent must be > 0, got {eps_exponent}")
    return T ** (0.5 + eps_exponent) * gen.standard_normal(size)


def sample_path(model, cfg, size, gen):
    """Coupled terminal pair ``(S_T, Z_T)`` sharing all Brownian and jump noise.

    ``Z`` is the frozen Levy approximation of ``S``. For Levy models the two
    coincide.
    """
    T = cfg.horizon
    if isinstance(model, FrozenLevy):
        eps = None if model.jumps is None or has_exact_sampler(model.jumps) else cfg.truncation_eps
        z = model.s0 + sample_increments(model.sigma0, model.jumps, T, size, gen, eps)
        return z, z
    if isinstance(model, GaussianPower):
        z = model.s0 + gaussian_exact_power_model(model.eps_exponent, T, size, gen)
        return z, z
    if cfg.n_steps < 16:
        raise StepCountTooSmall(f"SDE models need n_steps >= 16, got {cfg.n_steps}")
    n = int(cfg.n_steps)
    dt = T / n
    if isinstance(model, Heston):
        zv = gen.standard_normal((size, n))
        zp = gen.standard_normal((size, n))
        s, w = kernels.heston_terminal(model.s0, model.v0, model.mean_reversion,
                                       model.long_run_var, model.vol_of_vol,
                                       model.correlation, dt, zv, zp)
        z = model.s0 + model.s0 * math.sqrt(model.v0) * w
        return s, z
    if isinstance(model, LevySde):
        jumps = model.driver_jumps
        eps = None if jumps is None or has_exact_sampler(jumps) else cfg.truncation_eps
        dl = sample_increments(model.driver_sigma, jumps, dt, size * n, gen, eps).reshape(size, n)
        f = model.coefficient
        s = kernels.sde_euler(model.s0, f.a, f.b, dl)
        z = model.s0 + f(model.s0) * dl.sum(axis=1)
        return s, z
    raise UnsupportedModel(f"unknown model type {type(model).__name__}")
