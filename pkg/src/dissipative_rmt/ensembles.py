"""Gaussian samplers for the four complex universality classes and the
symmetric-to-Ginibre crossover.

Every sampler takes an :class:`EnsembleSpec` and an
:class:`~dissipative_rmt.numcore.RngStream` and returns a dense complex
ndarray.  Structural symmetries are imposed by construction, so
``is_symmetric(m, 0)`` and friends hold exactly.

===== ================================ =======================
beta  matrices                         eigenvalue support
===== ================================ =======================
0     complex diagonal                 Gaussian cloud
1     complex symmetric                disk, radius sqrt(2 n v2)
2     Ginibre (no symmetry)            disk, radius sqrt(2 n v2)
4     self-dual complex quaternion     disk, radius 2 sqrt(2 n v2)
===== ================================ =======================
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numcore import RngStream, gaussian_complex

__all__ = [
    "SpecError",
    "EnsembleSpec",
    "QUATERNION_UNITS",
    "sample_diagonal",
    "sample_symmetric",
    "sample_ginibre",
    "sample_selfdual_quaternion",
    "sample_crossover",
    "sample",
    "two_by_two_spacing",
]

BETAS = (0, 1, 2, 4)


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class EnsembleSpec:
    beta: int
    n: int
    v2: float = 0.5
    alpha: float = 0.0

    def __post_init__(self):
        if self.beta not in BETAS:
            raise SpecError(f"beta must be one of {BETAS}, got {self.beta}")
        if self.n < 1:
            raise SpecError(f"dimension must be positive, got {self.n}")
        if not self.v2 > 0:
            raise SpecError(f"v2 must be positive, got {self.v2}")
        if not self.alpha >= 0:
            raise SpecError(f"alpha must be non-negative, got {self.alpha}")


# Quaternion units as 2x2 complex matrices; e1 e2 = e3 and cyclic.
QUATERNION_UNITS = (
    np.eye(2, dtype=complex),
    np.array([[1j, 0], [0, -1j]]),
    np.array([[0, 1], [-1, 0]], dtype=complex),
    np.array([[0, 1j], [1j, 0]]),
)


def _check_beta(spec: EnsembleSpec, beta: int):
    if spec.beta != beta:
        raise SpecError(f"sampler needs beta={beta}, spec has beta={spec.beta}")


def _symmetric(n, v2, stream):
    # off-diagonal variance v2, diagonal 2 v2
    upper = np.triu(gaussian_complex(stream, v2, (n, n)), 1)
    diag = gaussian_complex(stream, 2 * v2, n)
    return upper + upper.T + np.diag(diag)


def _antisymmetric(n, v2, stream):
    upper = np.triu(gaussian_complex(stream, v2, (n, n)), 1)
    return upper - upper.T


def sample_diagonal(spec: EnsembleSpec, stream: RngStream) -> np.ndarray:
    _check_beta(spec, 0)
    return np.diag(gaussian_complex(stream, spec.v2, spec.n))


def sample_symmetric(spec: EnsembleSpec, stream: RngStream) -> np.ndarray:
    _check_beta(spec, 1)
    return _symmetric(spec.n, spec.v2, stream)


def sample_ginibre(spec: EnsembleSpec, stream: RngStream) -> np.ndarray:
    _check_beta(spec, 2)
    return gaussian_complex(stream, spec.v2, (spec.n, spec.n))


def sample_selfdual_quaternion(spec: EnsembleSpec, stream: RngStream) -> np.ndarray:
    """2n x 2n complex image of an n x n self-dual quaternion matrix.

    ``M = S (x) e0 + A1 (x) e1 + A2 (x) e2 + A3 (x) e3`` with ``S`` complex
    symmetric and ``A1..A3`` complex antisymmetric, all with per-component
    off-diagonal variance ``v2``.  Self-duality shows up as ``Z @ M`` being
    antisymmetric for ``Z = I_n (x) e2``; eigenvalues come in degenerate pairs.
    """
    _check_beta(spec, 4)
    n, v2 = spec.n, spec.v2
    parts = [_symmetric(n, v2, stream)]
    parts += [_antisymmetric(n, v2, stream) for _ in range(3)]
    return sum(np.kron(p, e) for p, e in zip(parts, QUATERNION_UNITS))


def sample_crossover(spec: EnsembleSpec, stream: RngStream) -> np.ndarray:
    """``(S + alpha A) / sqrt(1 + alpha^2)``: symmetric at alpha=0, Ginibre at alpha=1.

    ``A`` has a zero diagonal, so the diagonal variance of the result is
    ``2 v2 / (1 + alpha^2)``; off-diagonal entries keep variance ``v2``.
    The ``beta`` field of the spec is ignored.
    """
    alpha = spec.alpha
    if not alpha >= 0:
        raise SpecError(f"alpha must be non-negative, got {alpha}")
    s = _symmetric(spec.n, spec.v2, stream)
    a = _antisymmetric(spec.n, spec.v2, stream)
    if alpha == 0:
        return s
    return (s + alpha * a) / np.sqrt(1.0 + alpha * alpha)


_SAMPLERS = {
    0: sample_diagonal,
    1: sample_symmetric,
    2: sample_ginibre,
    4: sample_selfdual_quaternion,
}


def sample(spec: EnsembleSpec, stream: RngStream) -> np.ndarray:
    """Dispatch on ``spec.beta``."""
    return _SAMPLERS[spec.beta](spec, stream)


def two_by_two_spacing(m) -> np.ndarray:
    """Eigenvalue distance of 2x2 matrices, straight from the entries.

    Accepts a single ``(2, 2)`` array or a stack ``(..., 2, 2)``.
    """
    m = np.asarray(m, dtype=complex)
    d = m[..., 0, 0] - m[..., 1, 1]
    return np.sqrt(np.abs(d * d + 4.0 * m[..., 0, 1] * m[..., 1, 0]))
