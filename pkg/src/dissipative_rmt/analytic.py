"""Reference spacing laws.

* ``p2d(s, beta)`` - exact spacing densities of 2x2 matrices for beta = 0, 1, 2,
  all with unit mean.  beta = 1 involves the modified Bessel function K0.
* ``ginibre_nnsd_largeN`` - nearest-neighbour law of the infinite Ginibre
  ensemble at density ``1/pi``, and a unit-mean rescaling of it.
* ``spacing_mc_2x2`` - Monte Carlo draws of the 2x2 spacing written as
  ``|w_1^2 + ... + w_{beta+1}^2|^(1/2)`` for i.i.d. complex Gaussians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .numcore import RngStream, gaussian_complex
from .spectrastats import SpacingSet

__all__ = [
    "Curve",
    "bessel_k0",
    "bessel_k1",
    "C1",
    "C2",
    "p2d",
    "cdf2d",
    "ginibre_survival",
    "ginibre_nnsd_largeN",
    "ginibre_mean_spacing",
    "ginibre_nnsd_unit_mean",
    "ginibre_cdf_unit_mean",
    "spacing_mc_2x2",
    "curve",
]

EULER_GAMMA = 0.57721566490153286061

# P(s, 1) = C1 s^3 K0(C2 s^2)
C1 = math.gamma(0.25) ** 8 / 2**13
C2 = 2.0 * math.gamma(1.25) ** 4

_WIGNER = math.pi / 4.0
_GIN2 = 9.0 * math.pi / 16.0


@dataclass(frozen=True, eq=False)
class Curve:
    abscissas: np.ndarray
    ordinates: np.ndarray
    label: str = ""

    def __post_init__(self):
        x = np.asarray(self.abscissas, dtype=float)
        y = np.asarray(self.ordinates, dtype=float)
        if x.shape != y.shape:
            raise ValueError("abscissas and ordinates differ in shape")
        if np.any(np.diff(x) <= 0):
            raise ValueError("abscissas must be strictly ascending")
        if np.any(y < 0):
            raise ValueError("densities must be non-negative")
        object.__setattr__(self, "abscissas", x)
        object.__setattr__(self, "ordinates", y)

    def integral(self) -> float:
        return float(np.trapezoid(self.ordinates, self.abscissas))


# --------------------------------------------------------------------------
# Bessel functions


def _k0_series(x):
    # K0(x) = -(ln(x/2) + gamma) I0(x) + sum_k (x^2/4)^k / (k!)^2 H_k
    q = 0.25 * x * x
    term = np.ones_like(x)
    i0 = np.ones_like(x)
    tail = np.zeros_like(x)
    harmonic = 0.0
    for k in range(1, 40):
        term = term * q / (k * k)
        harmonic += 1.0 / k
        i0 = i0 + term
        tail = tail + term * harmonic
    return -(np.log(0.5 * x) + EULER_GAMMA) * i0 + tail


def _k_integral(x, order):
    # K_nu(x) = exp(-x) int_0^inf exp(-2 x sinh^2(t/2)) cosh(nu t) dt.  The
    # trapezoid rule converges geometrically for this integrand once the
    # step resolves the peak width ~ x^(-1/2).
    h = min(0.05, 0.25 / math.sqrt(float(np.max(x))))
    t_max = math.acosh(1.0 + 50.0 / float(np.min(x)))
    t = np.arange(0.0, t_max + h, h)
    w = np.full(t.size, h)
    w[0] = 0.5 * h
    if order:
        w = w * np.cosh(order * t)
    f = np.exp(-2.0 * np.multiply.outer(x, np.sinh(0.5 * t) ** 2))
    return np.exp(-x) * (f @ w)


def bessel_k0(x):
    """Modified Bessel function of the second kind, order zero.

    Power series for ``x <= 2``, trapezoidal quadrature of
    ``int_0^inf exp(-x cosh t) dt`` above.  Relative error is below 1e-13.
    """
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("K0 is defined for x > 0 only")
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    small = x <= 2.0
    if small.any():
        out[small] = _k0_series(x[small])
    if (~small).any():
        out[~small] = _k_integral(x[~small], 0)
    return float(out[0]) if scalar else out


def bessel_k1(x):
    """Order-one companion of :func:`bessel_k0` (quadrature for all ``x``)."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("K1 is defined for x > 0 only")
    scalar = x.ndim == 0
    out = _k_integral(np.atleast_1d(x), 1)
    return float(out[0]) if scalar else out


# --------------------------------------------------------------------------
# 2x2 spacing laws


def p2d(s, beta: int):
    """Unit-mean spacing density of 2x2 complex Gaussian matrices."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("spacings are non-negative")
    if beta == 0:
        out = 0.5 * math.pi * s * np.exp(-_WIGNER * s * s)
    elif beta == 1:
        s1 = np.atleast_1d(s)
        out = np.zeros_like(s1)
        pos = s1 > 0
        if pos.any():
            sp = s1[pos]
            out[pos] = C1 * sp**3 * bessel_k0(C2 * sp * sp)
        out = out.reshape(s.shape)
    elif beta == 2:
        out = 2.0 * _GIN2**2 * s**3 * np.exp(-_GIN2 * s * s)
    else:
        raise ValueError(f"no closed-form 2x2 spacing law for beta={beta}")
    return float(out) if np.ndim(out) == 0 else out


def cdf2d(s, beta: int):
    """Cumulative distribution of :func:`p2d`, in closed form."""
    s = np.asarray(s, dtype=float)
    if beta == 0:
        out = -np.expm1(-_WIGNER * s * s)
    elif beta == 1:
        # int_0^U u K0(u) du = 1 - U K1(U),  U = C2 s^2,  and C1 = 2 C2^2
        u = C2 * np.atleast_1d(s) ** 2
        out = np.zeros_like(u)
        pos = u > 0
        if pos.any():
            out[pos] = 1.0 - u[pos] * bessel_k1(u[pos])
        out = out.reshape(s.shape)
    elif beta == 2:
        x = _GIN2 * s * s
        out = -np.expm1(-x) - x * np.exp(-x)
    else:
        raise ValueError(f"no closed-form 2x2 spacing law for beta={beta}")
    return float(out) if np.ndim(out) == 0 else out


# --------------------------------------------------------------------------
# infinite Ginibre nearest-neighbour law

_PRODUCT_CAP = 512


def _poisson_factors(x, n_max=None):
    """Columns ``Q_n = exp(-x) e_n(x)`` for n = 1..n_stop and the terms ``x^n/n! exp(-x)``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    cap = _PRODUCT_CAP if n_max is None else int(n_max)
    term = np.exp(-x)  # k = 0 Poisson weight
    cdf = term.copy()
    qs, terms = [], []
    for n in range(1, cap + 1):
        term = term * x / n
        cdf = cdf + term
        qs.append(cdf.copy())
        terms.append(term.copy())
        if n_max is None and np.all(1.0 - cdf < 1e-14) and np.all(term < 1e-14):
            break
    return np.array(qs), np.array(terms)


def ginibre_survival(s, n_max=None):
    """``prod_n exp(-s^2) e_n(s^2)``: probability that the nearest neighbour is farther than s."""
    s = np.asarray(s, dtype=float)
    qs, _ = _poisson_factors(s * s, n_max)
    out = np.prod(qs, axis=0)
    return float(out[0]) if s.ndim == 0 else out.reshape(s.shape)


def ginibre_nnsd_largeN(s, n_max=None):
    """Nearest-neighbour spacing density of the infinite Ginibre ensemble.

    Density ``1/pi`` (unit-variance entries); the mean spacing is
    :func:`ginibre_mean_spacing`, not one.  Uses the analytic derivative
    ``P(s) * sum_n 2 s^(2n+1) / (n! e_n(s^2))`` of the survival product.
    """
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("spacings are non-negative")
    qs, terms = _poisson_factors(s * s, n_max)
    surv = np.prod(qs, axis=0)
    # x^n/(n! e_n(x)) = (x^n e^-x / n!) / Q_n
    with np.errstate(invalid="ignore", divide="ignore"):
        rate = np.sum(np.where(qs > 0, terms / qs, 0.0), axis=0)
    out = surv * 2.0 * np.atleast_1d(s) * rate
    return float(out[0]) if s.ndim == 0 else out.reshape(s.shape)


@lru_cache(maxsize=1)
def ginibre_mean_spacing() -> float:
    """Mean of :func:`ginibre_nnsd_largeN`, i.e. the integral of the survival product."""
    val, _ = integrate.quad(lambda t: ginibre_survival(t), 0.0, 12.0,
                            epsabs=1e-12, epsrel=1e-12, limit=200)
    return val


def ginibre_nnsd_unit_mean(s):
    """:func:`ginibre_nnsd_largeN` rescaled to unit mean spacing."""
    mu = ginibre_mean_spacing()
    return mu * ginibre_nnsd_largeN(mu * np.asarray(s, dtype=float))


def ginibre_cdf_unit_mean(s):
    mu = ginibre_mean_spacing()
    return 1.0 - ginibre_survival(mu * np.asarray(s, dtype=float))


# --------------------------------------------------------------------------
# Monte Carlo


def spacing_mc_2x2(beta: int, samples: int, stream: RngStream) -> SpacingSet:
    """Unit-mean draws of ``|sum_{j=1}^{beta+1} w_j^2|^(1/2)``."""
    if beta not in (0, 1, 2, 4):
        raise ValueError(f"beta must be 0, 1, 2 or 4, got {beta}")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    w = gaussian_complex(stream, 1.0, (samples, beta + 1))
    s = np.sqrt(np.abs(np.sum(w * w, axis=1)))
    return SpacingSet(s[s > 0], "nn").normalize()


def curve(beta, s_max: float = 4.0, points: int = 401) -> Curve:
    """Tabulate a reference law on ``[0, s_max]``.

    ``beta`` is 0, 1, 2 for the 2x2 laws, or ``"ginibre"`` for the
    unit-mean large-N Ginibre law.
    """
    s = np.linspace(0.0, s_max, points)
    if beta == "ginibre":
        return Curve(s, ginibre_nnsd_unit_mean(s), "ginibre-largeN")
    return Curve(s, p2d(s, int(beta)), f"p2d-beta{beta}")
