"""Pure numpy versions of the compiled kernels (vectorised across paths)."""

import numpy as np


def heston_terminal(s0, v0, kappa, theta, xi, rho, dt, zv, zp):
    n, m = zv.shape
    rho_perp = np.sqrt(1.0 - rho * rho)
    sdt = np.sqrt(dt)
    v = np.full(n, float(v0))
    lns = np.zeros(n)
    w = np.zeros(n)
    for k in range(m):
        vp = np.maximum(v, 0.0)
        zs = rho * zv[:, k] + rho_perp * zp[:, k]
        sv = np.sqrt(vp * dt)
        lns += -0.5 * vp * dt + sv * zs
        w += sdt * zs
        v = v + kappa * (theta - vp) * dt + xi * sv * zv[:, k]
    return s0 * np.exp(lns), w


def sde_euler(s0, a, b, dl):
    s = np.full(dl.shape[0], float(s0))
    for k in range(dl.shape[1]):
        s = s + (a * s + b) * dl[:, k]
    return s


def stable_cms(alpha, beta, v, w):
    t = np.tan(np.pi * alpha / 2.0)
    shift = np.arctan(beta * t) / alpha
    amp = (1.0 + beta * beta * t * t) ** (1.0 / (2.0 * alpha))
    x = alpha * (v + shift)
    return (amp * np.sin(x) / np.cos(v) ** (1.0 / alpha)
            * (np.cos(v - x) / w) ** ((1.0 - alpha) / alpha))
