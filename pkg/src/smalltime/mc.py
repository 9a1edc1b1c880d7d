"""Monte Carlo call prices, robust estimators and rate fits."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from .errors import DegenerateFit, HeavyTailNeedsRobust, UnsupportedModel, ValidationError
from .model import FrozenLevy, Heston, LevySde, StrikeRule, Stable, TemperedStable
from .sampler import (CHUNK, PathConfig, RngStream, default_truncation_eps,
                      has_exact_sampler, is_heavy_tailed, sample_path, sample_terminal,
                      sample_truncated_pair)

__all__ = [
    "Mean", "MedianOfMeans", "McEstimate", "RateFit", "ApproxCheckSpec", "ApproxCheckResult",
    "default_blocks", "estimate", "payoff_samples", "estimate_call", "price_curve",
    "truncation_pair", "fit_rate", "approx_error_curve", "geometric_grid",
]

_Z95 = 1.959963984540054


@dataclass(frozen=True)
class Mean:
    pass


@dataclass(frozen=True)
class MedianOfMeans:
    blocks: int = 8

    def __post_init__(self):
        if int(self.blocks) != self.blocks or self.blocks < 8:
            raise ValidationError(f"MedianOfMeans needs blocks >= 8, got {self.blocks!r}")


Estimator = Union[Mean, MedianOfMeans]


def default_blocks(delta=0.025):
    """Block count ``ceil(2 ln(1/delta))``, floored at 8."""
    return max(8, math.ceil(2.0 * math.log(1.0 / delta)))


@dataclass(frozen=True)
class McEstimate:
    value: float
    half_width: float
    n_paths: int
    estimator: Estimator
    seed: int

    def __post_init__(self):
        if not (math.isfinite(self.half_width) and self.half_width >= 0):
            raise ValidationError(f"half_width must be finite and >= 0, got {self.half_width}")

    def covers(self, truth, k=1.0):
        return abs(self.value - truth) <= k * self.half_width


def _median_ci_rank(k, level=0.95):
    """Largest ``j`` with ``[x_(j), x_(k+1-j)]`` covering the median at ``level``."""
    j = 1
    while 2.0 * stats.binom.cdf(j, k, 0.5) <= 1.0 - level:
        j += 1
    return j


def estimate(samples, estimator):
    """``(value, half_width)`` of the mean of ``samples`` (95% level)."""
    x = np.asarray(samples, dtype=float)
    n = x.size
    if isinstance(estimator, Mean):
        sd = float(np.std(x, ddof=1)) if n > 1 else 0.0
        return float(np.mean(x)), _Z95 * sd / math.sqrt(n)
    k = estimator.blocks
    if n < k:
        raise ValidationError(f"{n} samples cannot fill {k} blocks")
    means = np.sort([b.mean() for b in np.array_split(x, k)])
    j = _median_ci_rank(k)
    return float(np.median(means)), 0.5 * float(means[k - j] - means[j - 1])


def _payoff_chunk(model, K, T, size, gen, cfg, direct):
    if isinstance(model, FrozenLevy) and (model.jumps is None or has_exact_sampler(model.jumps)):
        s = sample_terminal(model, T, size, gen)
    else:
        s = sample_path(model, cfg, size, gen)[0]
    if direct:
        return np.maximum(s - K, 0.0)
    # put-call parity for a martingale: E(S-K)^+ = (E|S-K| + S0 - K) / 2
    return 0.5 * (np.abs(s - K) + (model.s0 - K))


def _default_cfg(model, T):
    jumps = getattr(model, "jumps", None) or getattr(model, "driver_jumps", None)
    eps = 1e-3
    if isinstance(jumps, (Stable, TemperedStable)) and not has_exact_sampler(jumps):
        dt = T if isinstance(model, FrozenLevy) else T / 64
        eps = default_truncation_eps(jumps, dt)
    return PathConfig(T, 64, eps)


def _chunked(fn, n_paths, rng, workers):
    sizes = [min(CHUNK, n_paths - i) for i in range(0, n_paths, CHUNK)]
    jobs = [(i, s) for i, s in enumerate(sizes)]
    run = lambda job: fn(job[1], rng.generator(job[0]))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(job) for job in jobs]
    return parts


def payoff_samples(model, strike, T, n_paths, rng, cfg=None, workers=1, direct=False):
    """Per-path call payoff samples in path order (parity form unless ``direct``)."""
    if not T > 0:
        raise ValidationError(f"T must be > 0, got {T}")
    cfg = cfg or _default_cfg(model, T)
    if cfg.horizon != T:
        cfg = PathConfig(T, cfg.n_steps, cfg.truncation_eps)
    K = strike.strike(model.s0, T)
    parts = _chunked(lambda size, gen: _payoff_chunk(model, K, T, size, gen, cfg, direct),
                     n_paths, rng, workers)
    return np.concatenate(parts)


def estimate_call(model, strike, T, n_paths, estimator=Mean(), rng=RngStream(0), cfg=None,
                  workers=1, direct=False):
    """Monte Carlo estimate of ``E[(S_T - K_T)^+]``.

    ``Mean`` is refused for untruncated stable jumps (infinite payoff
    variance); use :class:`MedianOfMeans` there.
    """
    if n_paths < 1000:
        raise ValidationError(f"n_paths must be >= 1000, got {n_paths}")
    if isinstance(estimator, Mean) and is_heavy_tailed(model):
        raise HeavyTailNeedsRobust("stable jumps give infinite payoff variance; use MedianOfMeans")
    y = payoff_samples(model, strike, T, n_paths, rng, cfg, workers, direct)
    value, hw = estimate(y, estimator)
    return McEstimate(value, hw, int(n_paths), estimator, int(rng.seed))


def geometric_grid(first, ratio, count):
    return [first * ratio ** i for i in range(count)]


def _check_grid(grid, min_points=5):
    grid = [float(t) for t in grid]
    if len(grid) < min_points:
        raise ValidationError(f"grid needs at least {min_points} points, got {len(grid)}")
    if any(t <= 0 for t in grid) or any(b >= a for a, b in zip(grid, grid[1:])):
        raise ValidationError("grid must be positive and strictly decreasing")
    ratios = [b / a for a, b in zip(grid, grid[1:])]
    if max(ratios) - min(ratios) > 1e-9 * max(ratios):
        raise ValidationError("grid must be geometric")
    return grid


def price_curve(model, strike, grid, n_paths, estimator=Mean(), rng=RngStream(0), cfg=None,
                workers=1):
    """Estimates on a decreasing geometric grid, one substream per maturity."""
    grid = _check_grid(grid)
    out = []
    for i, T in enumerate(grid):
        point_cfg = None if cfg is None else PathConfig(T, cfg.n_steps, cfg.truncation_eps)
        out.append((T, estimate_call(model, strike, T, n_paths, estimator, rng.substream(i),
                                     point_cfg, workers)))
    return out


def truncation_pair(model, strike, T, eps, n_paths, estimator=Mean(), rng=RngStream(0),
                    workers=1):
    """Call estimates with cutoffs ``eps`` and ``eps / 2`` on coupled draws."""
    K = strike.strike(model.s0, T)

    def chunk(size, gen):
        a, b = sample_truncated_pair(model, T, eps, size, gen)
        return np.stack([np.abs(a - K), np.abs(b - K)]) * 0.5 + 0.5 * (model.s0 - K)

    y = np.concatenate(_chunked(chunk, n_paths, rng, workers), axis=1)
    return tuple(McEstimate(*estimate(row, estimator), int(n_paths), estimator, int(rng.seed))
                 for row in y)


# --------------------------------------------------------------------------
# rate fits

PURE_POWER = "PurePower"
POWER_WITH_LOG = "PowerWithLog"


@dataclass(frozen=True)
class RateFit:
    model_class: str
    coefficient_hat: float
    exponent_hat: float
    r_squared: float


def fit_rate(points, model_class=PURE_POWER, half_widths=None):
    """Fit ``c T**p`` (``PurePower``) or ``c T |log T|`` (``PowerWithLog``).

    ``points`` is a sequence of ``(T, value)``. With ``half_widths`` each point
    is weighted by its inverse squared relative half-width.
    """
    pts = [(float(t), float(v)) for t, v in points]
    if len(pts) < 4:
        raise DegenerateFit(f"need at least 4 points, got {len(pts)}")
    T = np.array([p[0] for p in pts])
    v = np.array([p[1] for p in pts])
    if np.any(v <= 0) or np.any(T <= 0):
        raise DegenerateFit("maturities and values must be > 0")
    if half_widths is None:
        w = np.ones_like(v)
    else:
        hw = np.asarray(half_widths, dtype=float)
        w = np.where(hw > 0, (v / np.where(hw > 0, hw, 1.0)) ** 2, 0.0)
        if not np.any(w > 0):
            w = np.ones_like(v)
        w = np.where(w > 0, w, w[w > 0].max())
    x, y = np.log(T), np.log(v)
    if model_class == PURE_POWER:
        xm = np.average(x, weights=w)
        ym = np.average(y, weights=w)
        sxx = np.sum(w * (x - xm) ** 2)
        if sxx == 0:
            raise DegenerateFit("all maturities coincide")
        slope = np.sum(w * (x - xm) * (y - ym)) / sxx
        intercept = ym - slope * xm
        fitted = intercept + slope * x
        coef, expo = math.exp(intercept), float(slope)
    elif model_class == POWER_WITH_LOG:
        if np.any(T >= 1.0 / math.e):
            raise DegenerateFit("PowerWithLog needs T < 1/e")
        rate = T * np.abs(np.log(T))
        q = v / rate
        # inverse-variance weights of the ratio v / rate
        coef = float(np.sum(w * q) / np.sum(w))
        fitted = np.log(coef * rate)
        expo = 1.0
    else:
        raise ValidationError(f"unknown model_class {model_class!r}")
    ym = np.average(y, weights=w)
    ss_tot = np.sum(w * (y - ym) ** 2)
    ss_res = np.sum(w * (y - fitted) ** 2)
    r2 = 1.0 if ss_tot == 0 else min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return RateFit(model_class, coef, expo, float(r2))


@dataclass(frozen=True)
class ApproxCheckSpec:
    """Decay assumption on the coefficient gap: order ``t**gamma`` in ``L^beta``."""

    beta: float = 2.0
    gamma: float = 0.0

    def __post_init__(self):
        if not 1.0 <= self.beta <= 2.0:
            raise ValidationError(f"beta must lie in [1, 2], got {self.beta}")
        if not self.gamma >= 0.0:
            raise ValidationError(f"gamma must be >= 0, got {self.gamma}")

    @property
    def predicted_exponent(self):
        return (1.0 + self.gamma) / self.beta


@dataclass(frozen=True)
class ApproxCheckResult:
    fit: RateFit
    points: List[Tuple[float, McEstimate]]
    predicted_exponent: float
    margin: float

    @property
    def passed(self):
        return self.fit.exponent_hat >= self.predicted_exponent - self.margin


def approx_error_curve(model, spec, grid, n_paths, n_steps=64, rng=RngStream(0), workers=1,
                       margin=0.1):
    """Fit the decay of ``E|S_T - Z_T|`` from coupled pairs on ``grid``."""
    if not isinstance(model, (Heston, LevySde)):
        raise UnsupportedModel("approximation checks need a Heston or LevySde model")
    grid = _check_grid(grid, min_points=4)
    points = []
    for i, T in enumerate(grid):
        base = _default_cfg(model, T)
        cfg = PathConfig(T, n_steps, base.truncation_eps)
        sub = rng.substream(i)
        gaps = np.concatenate(_chunked(
            lambda size, gen: np.abs(np.subtract(*sample_path(model, cfg, size, gen))),
            n_paths, sub, workers))
        value, hw = estimate(gaps, Mean())
        points.append((T, McEstimate(value, hw, int(n_paths), Mean(), int(rng.seed))))
    fit = fit_rate([(T, e.value) for T, e in points], PURE_POWER,
                   [e.half_width for _, e in points])
    return ApproxCheckResult(fit, points, spec.predicted_exponent, margin)
