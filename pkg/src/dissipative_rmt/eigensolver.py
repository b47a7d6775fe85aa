"""Dense eigenvalues of general complex matrices.

The pipeline is the textbook one: Parlett-Reinsch balancing, Householder
reduction to upper Hessenberg form, then single-shift complex QR sweeps
with Wilkinson shifts and small-subdiagonal deflation.  Only eigenvalues
are computed, so rotations are confined to the active window.

The inner loops are compiled with numba; a 300x300 matrix takes a few
tenths of a second.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numba
import numpy as np

__all__ = [
    "ConvergenceError",
    "SolverOptions",
    "Spectrum",
    "balance",
    "hessenberg",
    "qr_eigenvalues",
    "eigenvalues",
]

_EPS = float(np.finfo(np.float64).eps)
_TINY = float(np.finfo(np.float64).tiny)


class ConvergenceError(RuntimeError):
    """QR iteration did not deflate an eigenvalue within the sweep budget."""

    def __init__(self, lo: int, hi: int, sweeps: int):
        self.lo = lo
        self.hi = hi
        self.sweeps = sweeps
        super().__init__(
            f"QR iteration stalled on active block [{lo}, {hi}] after {sweeps} sweeps"
        )


@dataclass(frozen=True)
class SolverOptions:
    deflation_tol: float = _EPS
    max_sweeps: int = 30
    balance: bool = True

    def __post_init__(self):
        if not self.deflation_tol > 0:
            raise ValueError("deflation_tol must be positive")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues of one matrix plus provenance.

    ``reference`` optionally marks the subset of eigenvalues used as
    reference points by the spacing statistics (see
    :func:`dissipative_rmt.spectrastats.annulus_filter`); neighbours are
    always searched in the full multiset.
    """

    eigenvalues: np.ndarray
    meta: dict[str, Any] = field(default_factory=dict)
    reference: np.ndarray | None = None

    def __post_init__(self):
        z = np.asarray(self.eigenvalues, dtype=np.complex128).ravel()
        if not np.all(np.isfinite(z)):
            raise ValueError("spectrum contains non-finite eigenvalues")
        object.__setattr__(self, "eigenvalues", z)
        if self.reference is not None:
            mask = np.asarray(self.reference, dtype=bool).ravel()
            if mask.shape != z.shape:
                raise ValueError("reference mask must match the eigenvalue count")
            object.__setattr__(self, "reference", mask)

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    def __len__(self) -> int:
        return self.eigenvalues.size

    @property
    def reference_mask(self) -> np.ndarray:
        if self.reference is None:
            return np.ones(self.n, dtype=bool)
        return self.reference

    @property
    def points(self) -> np.ndarray:
        """Reference eigenvalues (all of them unless filtered)."""
        return self.eigenvalues[self.reference_mask]

    def with_reference(self, mask: np.ndarray) -> "Spectrum":
        return Spectrum(self.eigenvalues, dict(self.meta), mask)


# --------------------------------------------------------------------------
# compiled kernels


@numba.njit(cache=True)
def _balance_kernel(a):
    n = a.shape[0]
    scale = np.ones(n)
    radix = 2.0
    sqrdx = radix * radix
    done = False
    while not done:
        done = True
        for i in range(n):
            c = 0.0
            r = 0.0
            for j in range(n):
                if j != i:
                    c += abs(a[j, i])
                    r += abs(a[i, j])
            if c == 0.0 or r == 0.0:
                continue
            g = r / radix
            f = 1.0
            s = c + r
            while c < g:
                f *= radix
                c *= sqrdx
            g = r * radix
            while c > g:
                f /= radix
                c /= sqrdx
            if (c + r) / f < 0.95 * s:
                done = False
                scale[i] *= f
                for j in range(n):
                    a[i, j] /= f
                for j in range(n):
                    a[j, i] *= f
    return scale


@numba.njit(cache=True, fastmath=True)
def _hessenberg_kernel(a):
    n = a.shape[0]
    v = np.empty(n, dtype=np.complex128)
    w = np.empty(n, dtype=np.complex128)
    for k in range(n - 2):
        m = n - k - 1
        xnorm2 = 0.0
        for i in range(k + 2, n):
            xnorm2 += a[i, k].real ** 2 + a[i, k].imag ** 2
        if xnorm2 == 0.0:
            continue
        x0 = a[k + 1, k]
        ax0 = abs(x0)
        xnorm = np.sqrt(xnorm2 + ax0 * ax0)
        phase = x0 / ax0 if ax0 > 0.0 else 1.0 + 0.0j
        alpha = -phase * xnorm
        # v = x - alpha e1, normalised so that H = I - 2 v v^H
        v[0] = x0 - alpha
        for i in range(1, m):
            v[i] = a[k + 1 + i, k]
        vnorm2 = 0.0
        for i in range(m):
            vnorm2 += v[i].real ** 2 + v[i].imag ** 2
        inv = 1.0 / np.sqrt(vnorm2)
        for i in range(m):
            v[i] *= inv
        # left: A[k+1:, k:] -= 2 v (v^H A[k+1:, k:])
        for j in range(k, n):
            w[j] = 0.0
        for i in range(m):
            vc = v[i].conjugate()
            for j in range(k, n):
                w[j] += vc * a[k + 1 + i, j]
        for i in range(m):
            t = 2.0 * v[i]
            for j in range(k, n):
                a[k + 1 + i, j] -= t * w[j]
        # right: A[:, k+1:] -= 2 (A[:, k+1:] v) v^H
        for r in range(n):
            acc = 0.0j
            for i in range(m):
                acc += a[r, k + 1 + i] * v[i]
            acc *= 2.0
            for i in range(m):
                a[r, k + 1 + i] -= acc * v[i].conjugate()
        a[k + 1, k] = alpha
        for i in range(k + 2, n):
            a[i, k] = 0.0j


@numba.njit(cache=True)
def _givens(a, b):
    # c real, s complex, [[c, s], [-conj(s), c]] @ [a, b] = [r, 0]
    aa = abs(a)
    if aa == 0.0:
        return 0.0, 1.0 + 0.0j
    r = np.hypot(aa, abs(b))
    return aa / r, (a / aa) * b.conjugate() / r


@numba.njit(cache=True, fastmath=True)
def _qr_kernel(h, tol, max_sweeps, eig):
    """Returns 0 on success, otherwise encodes the stuck block as hi*n+lo+1."""
    n = h.shape[0]
    # absolute deflation floor for subdiagonals near the underflow threshold
    small = _TINY * n / _EPS
    cs = np.empty(n)
    sn = np.empty(n, dtype=np.complex128)
    hi = n - 1
    its = 0
    while hi >= 0:
        if hi == 0:
            eig[0] = h[0, 0]
            break
        # locate the start of the unreduced block ending at hi
        lo = hi
        while lo > 0:
            sub = abs(h[lo, lo - 1])
            tst = abs(h[lo - 1, lo - 1]) + abs(h[lo, lo])
            if tst == 0.0:
                # both diagonals vanish; compare against the neighbouring entries
                tst = abs(h[lo - 1, lo])
                if lo + 1 <= hi:
                    tst += abs(h[lo + 1, lo])
                if lo - 2 >= 0:
                    tst += abs(h[lo - 1, lo - 2])
            if sub <= tol * tst or sub <= small:
                h[lo, lo - 1] = 0.0j
                break
            lo -= 1
        if lo == hi:
            eig[hi] = h[hi, hi]
            hi -= 1
            its = 0
            continue
        its += 1
        if its > max_sweeps:
            return hi * n + lo + 1
        if its % 10 == 0:
            # exceptional shift to break cycles
            mu = h[hi, hi] + 0.75 * abs(h[hi, hi - 1])
        else:
            a = h[hi - 1, hi - 1]
            b = h[hi - 1, hi]
            c = h[hi, hi - 1]
            d = h[hi, hi]
            half = 0.5 * (a - d)
            disc = np.sqrt(half * half + b * c)
            mid = 0.5 * (a + d)
            l1 = mid + disc
            l2 = mid - disc
            mu = l1 if abs(l1 - d) <= abs(l2 - d) else l2
        for k in range(lo, hi + 1):
            h[k, k] -= mu
        # H - mu I = Q R and R Q, fused: rotation k-1 is applied from the
        # right as soon as rotation k has been applied from the left.
        for k in range(lo, hi + 1):
            if k < hi:
                c_, s_ = _givens(h[k, k], h[k + 1, k])
                cs[k] = c_
                sn[k] = s_
                sc = s_.conjugate()
                for j in range(k, hi + 1):
                    x = h[k, j]
                    y = h[k + 1, j]
                    h[k, j] = c_ * x + s_ * y
                    h[k + 1, j] = -sc * x + c_ * y
                h[k + 1, k] = 0.0j
            if k > lo:
                c_ = cs[k - 1]
                s_ = sn[k - 1]
                sc = s_.conjugate()
                for i in range(lo, k + 1):
                    x = h[i, k - 1]
                    y = h[i, k]
                    h[i, k - 1] = c_ * x + sc * y
                    h[i, k] = -s_ * x + c_ * y
        for k in range(lo, hi + 1):
            h[k, k] += mu
    return 0


# --------------------------------------------------------------------------
# public API


def _as_square(m) -> np.ndarray:
    a = np.array(m, dtype=np.complex128, copy=True, order="C")
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def _power_of_two_scale(a) -> int:
    # exponent of an exact rescaling that keeps the largest entry near one,
    # so shifts and rotations neither underflow nor overflow
    peak = float(np.max(np.abs(a), initial=0.0))
    if peak == 0.0 or 2.0**-64 <= peak <= 2.0**64:
        return 0
    return -int(np.frexp(peak)[1])


def _ldexp(z: np.ndarray, k: int) -> np.ndarray:
    # z * 2**k without forming 2**k, which overflows for subnormal inputs
    return np.ldexp(z.real, k) + 1j * np.ldexp(z.imag, k)


def balance(m) -> tuple[np.ndarray, np.ndarray]:
    """Equilibrate row and column norms by a diagonal similarity.

    Returns ``(D^-1 M D, d)`` where ``d`` holds the diagonal of ``D``; its
    entries are powers of two so the scaling is exact in floating point.
    """
    a = _as_square(m)
    d = _balance_kernel(a)
    return a, d


def hessenberg(m) -> np.ndarray:
    """Unitarily similar upper Hessenberg form (Householder reflections).

    Entries below the first subdiagonal are exactly zero.
    """
    a = _as_square(m)
    if a.shape[0] > 2:
        _hessenberg_kernel(a)
    return a


def qr_eigenvalues(h, opts: SolverOptions | None = None, meta: dict | None = None) -> Spectrum:
    """Eigenvalues of an upper Hessenberg matrix by shifted complex QR.

    Raises
    ------
    ConvergenceError
        If some eigenvalue fails to deflate within ``opts.max_sweeps``
        sweeps.  The error carries the active block bounds.
    """
    opts = opts or SolverOptions()
    a = _as_square(h)
    n = a.shape[0]
    if n > 2 and np.any(np.tril(a, -2)):
        raise ValueError("input is not upper Hessenberg")
    eig = np.empty(n, dtype=np.complex128)
    if n:
        shift = _power_of_two_scale(a)
        if shift:
            a = _ldexp(a, shift)
        code = _qr_kernel(a, opts.deflation_tol, opts.max_sweeps, eig)
        if code:
            code -= 1
            raise ConvergenceError(code % n, code // n, opts.max_sweeps)
        if shift:
            eig = _ldexp(eig, -shift)
    return Spectrum(eig, dict(meta or {}))


def eigenvalues(m, opts: SolverOptions | None = None, meta: dict | None = None) -> Spectrum:
    """All eigenvalues of a dense complex matrix: balance, reduce, iterate."""
    opts = opts or SolverOptions()
    a = _as_square(m)
    shift = _power_of_two_scale(a)
    if shift:
        a = _ldexp(a, shift)
    if opts.balance:
        a, _ = balance(a)
    info = {"n": a.shape[0]}
    info.update(meta or {})
    spec = qr_eigenvalues(hessenberg(a), opts, info)
    if shift:
        return Spectrum(_ldexp(spec.eigenvalues, -shift), spec.meta)
    return spec
