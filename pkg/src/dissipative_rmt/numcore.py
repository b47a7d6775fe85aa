"""Shared numerical plumbing: seeded random streams, matrix predicates, summaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "RngStream",
    "StatSummary",
    "gaussian_complex",
    "summary",
    "is_symmetric",
    "is_antisymmetric",
    "is_unitary",
    "as_complex_matrix",
]


class RngStream:
    """Independent, reproducible random stream for one ensemble member.

    The pair ``(master_seed, stream_index)`` is hashed by
    :class:`numpy.random.SeedSequence` into a fresh PCG64 state, so member
    ``i`` draws the same numbers no matter which worker runs it or in
    which order.
    """

    def __init__(self, master_seed: int, stream_index: int = 0):
        if stream_index < 0:
            raise ValueError("stream_index must be non-negative")
        if not 0 <= master_seed < 2**64:
            raise ValueError("master_seed must fit in 64 unsigned bits")
        self.master_seed = int(master_seed)
        self.stream_index = int(stream_index)
        seq = np.random.SeedSequence([self.master_seed, self.stream_index])
        self.generator = np.random.Generator(np.random.PCG64(seq))

    def __repr__(self):
        return f"RngStream(master_seed={self.master_seed}, stream_index={self.stream_index})"


def gaussian_complex(stream: RngStream, v2: float, size=None):
    """Complex Gaussian draws ``x + iy`` with ``x, y ~ N(0, v2)`` independent."""
    if not v2 > 0:
        raise ValueError(f"variance must be positive, got {v2}")
    g = stream.generator
    sd = np.sqrt(v2)
    if size is None:
        x, y = g.standard_normal(2)
        return complex(sd * x, sd * y)
    re = g.standard_normal(size)
    im = g.standard_normal(size)
    return sd * (re + 1j * im)


@dataclass(frozen=True)
class StatSummary:
    count: int
    mean: float
    variance: float  # population convention

    def as_dict(self):
        return {"count": self.count, "mean": self.mean, "variance": self.variance}


def summary(values) -> StatSummary:
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("summary of an empty sequence")
    if not np.all(np.isfinite(x)):
        raise ValueError("summary input contains non-finite values")
    mean = float(x.mean())
    var = float(np.mean((x - mean) ** 2))
    return StatSummary(int(x.size), mean, var)


def as_complex_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def is_symmetric(m, tol: float = 0.0) -> bool:
    a = as_complex_matrix(m)
    return bool(np.max(np.abs(a - a.T), initial=0.0) <= tol)


def is_antisymmetric(m, tol: float = 0.0) -> bool:
    a = as_complex_matrix(m)
    return bool(np.max(np.abs(a + a.T), initial=0.0) <= tol)


def is_unitary(m, tol: float = 1e-10) -> bool:
    a = as_complex_matrix(m)
    err = a.conj().T @ a - np.eye(a.shape[0])
    return bool(np.max(np.abs(err), initial=0.0) <= tol)
