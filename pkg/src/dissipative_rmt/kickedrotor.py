"""Floquet operators of the quantum kicked rotor on an N-site torus.

With hbar = 1 and ``N' = (N - 1) / 2`` the one-period operator in the
position basis is ``F = B G D`` where ``B`` is the diagonal kick,
``G`` the free rotation and ``D = exp(-alpha p^2)`` a momentum damping
(``alpha_d`` below).  Entries are indexed by ``m, n = -N'..N'``::

    F_mn = exp(-i kappa cos(2 pi m / N + theta0)) / N
           * sum_l exp(-i ((1 - i alpha_d) l^2 / 2 - gamma l + 2 pi l (m - n) / N))

The momentum sum depends on ``m - n`` only modulo ``N`` so it is
tabulated once; building an operator costs ``O(N^2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .eigensolver import SolverOptions, eigenvalues

__all__ = [
    "RotorParams",
    "default_params",
    "floquet_kernel",
    "build_floquet",
    "build_dissipative_floquet",
    "build_floquet_direct",
    "rotor_ensemble",
    "annulus_fraction",
    "calibrate_dissipation",
    "SPACING_RING",
    "RATIO_RING",
]

DEFAULT_N = 501
DEFAULT_THETA0 = 0.205
DEFAULT_KAPPA_STEP = 1.0
SPACING_RING = (0.255, 0.520)
RATIO_RING = (0.203, 0.601)


@dataclass(frozen=True)
class RotorParams:
    n: int = DEFAULT_N
    kappa: float = math.sqrt(1000.0 * DEFAULT_N)
    gamma: float = 0.0
    theta0: float = DEFAULT_THETA0
    alpha_d: float = 0.0

    def __post_init__(self):
        if self.n < 1 or self.n % 2 == 0:
            raise ValueError(f"rotor dimension must be a positive odd integer, got {self.n}")
        if not self.alpha_d >= 0:
            raise ValueError(f"dissipation must be non-negative, got {self.alpha_d}")
        if not self.kappa >= 0:
            raise ValueError(f"kick strength must be non-negative, got {self.kappa}")

    @property
    def half(self) -> int:
        return (self.n - 1) // 2

    def with_(self, **changes) -> "RotorParams":
        return replace(self, **changes)


def default_params(n: int = DEFAULT_N, **changes) -> RotorParams:
    """Chaotic-regime defaults: ``kappa**2 / n = 1000``, ``theta0 = 0.205``."""
    base = RotorParams(n=n, kappa=math.sqrt(1000.0 * n))
    return replace(base, **changes)


def _positions(n):
    h = (n - 1) // 2
    return np.arange(-h, h + 1)


def floquet_kernel(params: RotorParams) -> np.ndarray:
    """``g[d] = (1/N) sum_l exp(-i(...))`` for ``d = (m - n) mod N``, d = 0..N-1."""
    n = params.n
    ell = _positions(n).astype(float)
    d = np.arange(n)
    # l-dependent factor kept separate from the Fourier phase
    weight = np.exp(-1j * (0.5 * (1.0 - 1j * params.alpha_d) * ell**2 - params.gamma * ell))
    phase = np.exp(-2j * np.pi * np.outer(d, ell) / n)
    return phase @ weight / n


def _kick(params: RotorParams) -> np.ndarray:
    m = _positions(params.n)
    return np.exp(-1j * params.kappa * np.cos(2 * np.pi * m / params.n + params.theta0))


def build_dissipative_floquet(params: RotorParams) -> np.ndarray:
    """Dense ``F = B G D`` in the position basis; contractive for ``alpha_d > 0``."""
    n = params.n
    g = floquet_kernel(params)
    m = _positions(n)
    idx = (m[:, None] - m[None, :]) % n
    return _kick(params)[:, None] * g[idx]


def build_floquet(params: RotorParams) -> np.ndarray:
    """Unitary Floquet operator ``U = B G`` (no dissipation)."""
    if params.alpha_d != 0:
        raise ValueError("build_floquet is the non-dissipative operator; use alpha_d = 0")
    return build_dissipative_floquet(params)


def build_floquet_direct(params: RotorParams) -> np.ndarray:
    """Entry-by-entry ``O(N^3)`` evaluation; reference for the tabulated kernel."""
    n = params.n
    m = _positions(n).astype(float)
    ell = m
    diff = m[:, None, None] - m[None, :, None]
    arg = (0.5 * (1.0 - 1j * params.alpha_d) * ell**2 - params.gamma * ell
           + 2 * np.pi * ell * diff / n)
    total = np.exp(-1j * arg).sum(axis=-1) / n
    return _kick(params)[:, None] * total


def rotor_ensemble(params: RotorParams, count: int, kappa_step: float = DEFAULT_KAPPA_STEP):
    """Parameter sets for ``count`` operators with ``kappa + j * kappa_step``.

    One operator only yields N eigenvalues, so statistics are pooled over
    neighbouring kick strengths.  Steps below ~0.5 give visibly correlated
    spectra at N = 501.
    """
    return [params.with_(kappa=params.kappa + j * kappa_step) for j in range(count)]


def annulus_fraction(params: RotorParams, r_in: float, r_out: float, operators: int = 2,
                     kappa_step: float = DEFAULT_KAPPA_STEP,
                     opts: SolverOptions | None = None) -> float:
    """Fraction of eigenvalues with ``r_in <= |z| <= r_out``, pooled over operators."""
    inside = total = 0
    for p in rotor_ensemble(params, operators, kappa_step):
        r = np.abs(eigenvalues(build_dissipative_floquet(p), opts).eigenvalues)
        inside += int(np.count_nonzero((r >= r_in) & (r <= r_out)))
        total += r.size
    return inside / total


def calibrate_dissipation(params: RotorParams, target: float = 0.5,
                          ring: tuple[float, float] = SPACING_RING, operators: int = 2,
                          kappa_step: float = DEFAULT_KAPPA_STEP, start: float = 1e-5,
                          rel_tol: float = 0.01, opts: SolverOptions | None = None) -> float:
    """Smallest damping ``alpha_d`` at which ``ring`` holds ``target`` of the eigenvalues.

    Without damping every eigenvalue sits on the unit circle; as ``alpha_d``
    grows the spectrum contracts into a ring that first sweeps into the
    annulus and later falls through it.  The fraction is therefore not
    monotone, so we scan upward geometrically from ``start`` to the first
    crossing and bisect in ``log(alpha_d)`` inside that bracket.
    """
    if not 0 < target < 1:
        raise ValueError("target fraction must lie in (0, 1)")

    def frac(a):
        return annulus_fraction(params.with_(alpha_d=a), *ring, operators, kappa_step, opts)

    lo = start
    if frac(lo) >= target:
        raise ValueError(f"annulus already holds >= {target} at alpha_d={start}; lower start")
    hi = lo
    for _ in range(60):
        hi = lo * 1.5
        if frac(hi) >= target:
            break
        lo = hi
    else:
        raise RuntimeError("annulus fraction never reached the target")
    while hi / lo > 1.0 + rel_tol:
        mid = math.sqrt(lo * hi)
        if frac(mid) >= target:
            hi = mid
        else:
            lo = mid
    return math.sqrt(lo * hi)
