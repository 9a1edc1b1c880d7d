"""Real special functions used by the closed-form constants.

Gamma and the normal law come from :mod:`math`; the modified Bessel
functions of the second kind come from :mod:`scipy.special`. The wrappers
only add domain checks so that callers get :class:`DomainError` instead of
``nan`` or ``inf``.
"""

import math

from scipy import special as _sp

from .errors import DomainError

__all__ = ["gamma_fn", "bessel_k", "std_normal_cdf", "std_normal_pdf"]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def gamma_fn(x):
    """Euler's Gamma function for ``x > 0``."""
    x = float(x)
    if not x > 0.0 or math.isinf(x):
        raise DomainError(f"gamma_fn requires finite x > 0, got {x!r}")
    return math.gamma(x)


def bessel_k(order, x):
    """Modified Bessel function of the second kind, ``K_0`` or ``K_1``.

    Parameters
    ----------
    order : {0, 1}
    x : float
        Strictly positive argument.
    """
    x = float(x)
    if not x > 0.0 or math.isinf(x):
        raise DomainError(f"bessel_k requires finite x > 0, got {x!r}")
    if order == 0:
        return float(_sp.k0(x))
    if order == 1:
        return float(_sp.k1(x))
    raise DomainError(f"bessel_k supports orders 0 and 1, got {order!r}")


def std_normal_cdf(x):
    # erfc keeps full relative accuracy in the lower tail
    return 0.5 * math.erfc(-float(x) / math.sqrt(2.0))


def std_normal_pdf(x):
    x = float(x)
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)
