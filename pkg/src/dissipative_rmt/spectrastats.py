"""Spacing statistics of eigenvalues in the complex plane.

Spacings are Euclidean distances between eigenvalues.  A spectrum may carry
a reference mask (from :func:`annulus_filter`); statistics are collected
only at reference points but neighbours are always searched in the full
spectrum, so a ring cut does not create artificial edges.

Unfolding multiplies a spacing by ``sqrt(pi * R1)`` where ``R1`` is the
mean eigenvalue density (per unit area) near the reference point.  For
the Ginibre ensemble with unit-variance entries ``R1 = 1/pi`` and
unfolding is the identity.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .eigensolver import Spectrum
from .numcore import StatSummary, summary

log = logging.getLogger(__name__)

__all__ = [
    "SpacingSet",
    "Histogram",
    "RadialProfile",
    "nearest_neighbors",
    "knn_spacings",
    "radial_density",
    "local_density",
    "unfold",
    "annulus_filter",
    "quantile_annulus",
    "ratios_type1",
    "ratios_type2",
    "histogram",
    "ks_distance",
    "unfolded_spacings",
    "pooled_ratios",
    "collapse_degenerate",
]

KINDS = ("nn", "next-nn", "ratio1", "ratio2")

# brute force below this many eigenvalues, k-d tree above
BRUTE_FORCE_MAX = 1000


@dataclass(frozen=True, eq=False)
class SpacingSet:
    values: np.ndarray
    kind: str = "nn"
    normalized: bool = False
    excluded: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown spacing kind {self.kind!r}")
        v = np.asarray(self.values, dtype=float).ravel()
        if np.any(~(v > 0)):
            raise ValueError("spacings must be strictly positive")
        if self.kind.startswith("ratio") and np.any(v > 1.0):
            raise ValueError("spacing ratios must not exceed 1")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    @property
    def mean(self) -> float:
        return float(self.values.mean())

    def summary(self) -> StatSummary:
        return summary(self.values)

    def normalize(self) -> "SpacingSet":
        return SpacingSet(self.values / self.values.mean(), self.kind, True, self.excluded)

    def scaled(self, factor: float) -> "SpacingSet":
        return SpacingSet(self.values * factor, self.kind, False, self.excluded)

    @classmethod
    def concat(cls, sets: Sequence["SpacingSet"]) -> "SpacingSet":
        sets = list(sets)
        if not sets:
            raise ValueError("nothing to concatenate")
        kinds = {s.kind for s in sets}
        if len(kinds) != 1:
            raise ValueError(f"mixed spacing kinds {kinds}")
        return cls(np.concatenate([s.values for s in sets]), sets[0].kind, False,
                   sum(s.excluded for s in sets))


@dataclass(frozen=True, eq=False)
class Histogram:
    edges: np.ndarray
    densities: np.ndarray
    clipped: int = 0

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Radial eigenvalue density ``R1(r)`` on annular bins.

    Normalised so that ``sum(2 pi r R1 dr)`` is the mean number of
    eigenvalues per spectrum.
    """

    edges: np.ndarray
    density: np.ndarray
    spectra: int = 1
    meta: dict = field(default_factory=dict)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    def total(self) -> float:
        area = np.pi * (self.edges[1:] ** 2 - self.edges[:-1] ** 2)
        return float(np.sum(area * self.density))

    def __call__(self, r) -> np.ndarray:
        """Linear interpolation between bin centres; zero beyond the last edge."""
        r = np.asarray(r, dtype=float)
        out = np.interp(r, self.centers, self.density)
        return np.where(r > self.edges[-1], 0.0, out)


# --------------------------------------------------------------------------
# neighbour search


def _as_spectrum(spec) -> Spectrum:
    return spec if isinstance(spec, Spectrum) else Spectrum(np.asarray(spec))


def nearest_neighbors(z, k: int, reference=None):
    """Distances and indices of the ``k`` nearest other points.

    Parameters
    ----------
    z : complex array
        All points.
    k : int
        Number of neighbours.
    reference : bool mask or index array, optional
        Points for which neighbours are wanted; defaults to all.

    Returns
    -------
    dist, idx : arrays of shape ``(m, k)``
        Sorted by distance; equidistant neighbours resolve to the lower index
        on the brute-force path.
    """
    z = np.asarray(z, dtype=complex).ravel()
    n = z.size
    if n < k + 1:
        raise ValueError(f"need at least {k + 1} points for {k} neighbours, got {n}")
    if reference is None:
        ref = np.arange(n)
    else:
        ref = np.asarray(reference)
        ref = np.flatnonzero(ref) if ref.dtype == bool else ref.astype(int)
    if n <= BRUTE_FORCE_MAX:
        d = np.abs(z[ref, None] - z[None, :])
        d[np.arange(ref.size), ref] = np.inf
        order = np.argsort(d, axis=1, kind="stable")[:, :k]
        return np.take_along_axis(d, order, axis=1), order
    pts = np.column_stack([z.real, z.imag])
    dist, idx = cKDTree(pts).query(pts[ref], k + 1)
    # drop the self match, wherever the tree put it
    keep = idx != ref[:, None]
    first = np.cumsum(keep, axis=1) <= k
    sel = keep & first
    return dist[sel].reshape(ref.size, k), idx[sel].reshape(ref.size, k)


def _positive(values, kind):
    ok = values > 0
    excluded = int(values.size - ok.sum())
    if excluded:
        log.info("dropped %d zero %s spacings", excluded, kind)
    return SpacingSet(values[ok], kind, False, excluded)


def knn_spacings(spec, k: int = 1) -> SpacingSet:
    """Distance from each reference eigenvalue to its k-th nearest neighbour."""
    if k not in (1, 2):
        raise ValueError("k must be 1 (nearest) or 2 (next nearest)")
    spec = _as_spectrum(spec)
    dist, _ = nearest_neighbors(spec.eigenvalues, k, spec.reference_mask)
    return _positive(dist[:, k - 1], "nn" if k == 1 else "next-nn")


# --------------------------------------------------------------------------
# densities and unfolding


def radial_density(spectra, bins: int = 40, r_max: float | None = None) -> RadialProfile:
    """Ensemble-averaged radial density of one or more spectra."""
    if isinstance(spectra, Spectrum):
        spectra = [spectra]
    spectra = list(spectra)
    if not spectra:
        raise ValueError("no spectra")
    r = np.concatenate([np.abs(s.eigenvalues) for s in spectra])
    if r.size == 0:
        raise ValueError("radial density of an empty spectrum")
    if r_max is None:
        r_max = float(r.max()) * (1 + 1e-9) or 1.0
    counts, edges = np.histogram(r, bins=bins, range=(0.0, r_max))
    area = np.pi * (edges[1:] ** 2 - edges[:-1] ** 2)
    return RadialProfile(edges, counts / (len(spectra) * area), len(spectra))


def local_density(spec, z: complex, radius: float, exclude: Iterable[int] = ()) -> float:
    """Eigenvalue count inside a disk, per unit area.

    ``exclude`` lists eigenvalue indices left out of the count (typically
    the two members of the pair being unfolded).
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    spec = _as_spectrum(spec)
    inside = np.abs(spec.eigenvalues - z) <= radius
    ex = np.fromiter(exclude, dtype=int)
    if ex.size:
        inside[ex] = False
    return float(inside.sum()) / (np.pi * radius**2)


def unfold(spacings: SpacingSet, densities, normalize: bool = True) -> SpacingSet:
    """Scale each spacing by ``sqrt(pi * density)``, then (optionally) to unit mean."""
    dens = np.asarray(densities, dtype=float).ravel()
    if dens.size != len(spacings):
        raise ValueError(f"{len(spacings)} spacings but {dens.size} densities")
    bad = np.flatnonzero(~(dens > 0))
    if bad.size:
        raise ValueError(f"non-positive local density at spacing index {bad[0]}")
    out = SpacingSet(spacings.values * np.sqrt(np.pi * dens), spacings.kind, False,
                     spacings.excluded)
    return out.normalize() if normalize else out


# --------------------------------------------------------------------------
# filtering


def annulus_filter(spec, r_in: float, r_out: float) -> Spectrum:
    """Restrict reference points to ``r_in <= |z| <= r_out``."""
    if not 0 <= r_in < r_out:
        raise ValueError(f"need 0 <= r_in < r_out, got ({r_in}, {r_out})")
    spec = _as_spectrum(spec)
    r = np.abs(spec.eigenvalues)
    mask = spec.reference_mask & (r >= r_in) & (r <= r_out)
    if not mask.any():
        log.warning("annulus [%g, %g] contains no eigenvalues", r_in, r_out)
    out = spec.with_reference(mask)
    out.meta["annulus"] = (float(r_in), float(r_out))
    return out


def quantile_annulus(spectra, keep: float = 0.87) -> tuple[float, float]:
    """Radii of a ring holding the central ``keep`` fraction of pooled moduli.

    The excluded mass is split evenly between the centre and the edge.
    """
    if not 0 < keep <= 1:
        raise ValueError("keep must be in (0, 1]")
    if isinstance(spectra, Spectrum):
        spectra = [spectra]
    r = np.concatenate([np.abs(s.eigenvalues) for s in spectra])
    trim = 0.5 * (1.0 - keep)
    lo, hi = np.quantile(r, [trim, 1.0 - trim])
    return float(lo), float(hi)


def collapse_degenerate(spec, tol: float = 1e-6) -> Spectrum:
    """Keep one member of each eigenvalue pair closer than ``tol``."""
    spec = _as_spectrum(spec)
    z = spec.eigenvalues
    dist, idx = nearest_neighbors(z, 1)
    partner = idx[:, 0]
    paired = dist[:, 0] < tol
    keep = ~paired | (np.arange(z.size) < partner)
    return Spectrum(z[keep], dict(spec.meta))


# --------------------------------------------------------------------------
# ratios


def ratios_type1(spec) -> SpacingSet:
    """Nearest over next-nearest spacing at each reference point."""
    spec = _as_spectrum(spec)
    dist, _ = nearest_neighbors(spec.eigenvalues, 2, spec.reference_mask)
    ok = dist[:, 1] > 0
    r = dist[ok, 0] / dist[ok, 1]
    return _ratio_set(r, "ratio1", int((~ok).sum()))


def ratios_type2(spec) -> SpacingSet:
    """Neighbour's own nearest spacing over the spacing to that neighbour."""
    spec = _as_spectrum(spec)
    z = spec.eigenvalues
    ref = np.flatnonzero(spec.reference_mask)
    d1, i1 = nearest_neighbors(z, 1, ref)
    partner = i1[:, 0]
    d2, _ = nearest_neighbors(z, 1, partner)
    ok = d1[:, 0] > 0
    r = d2[ok, 0] / d1[ok, 0]
    return _ratio_set(r, "ratio2", int((~ok).sum()))


def _ratio_set(r, kind, excluded):
    pos = r > 0
    return SpacingSet(r[pos], kind, False, excluded + int((~pos).sum()))


# --------------------------------------------------------------------------
# histograms and goodness of fit


def histogram(values, bins: int = 50, range: tuple[float, float] | None = None) -> Histogram:
    v = values.values if isinstance(values, SpacingSet) else np.asarray(values, dtype=float)
    v = v.ravel()
    if v.size == 0:
        raise ValueError("histogram of an empty set")
    if bins < 1:
        raise ValueError("bins must be >= 1")
    if range is None:
        lo, hi = float(v.min()), float(v.max())
        if hi == lo:
            hi = lo + 1.0
        range = (lo, hi)
    inside = (v >= range[0]) & (v <= range[1])
    clipped = int(v.size - inside.sum())
    if clipped:
        log.info("histogram clipped %d of %d values outside %s", clipped, v.size, range)
    counts, edges = np.histogram(v[inside], bins=bins, range=range)
    total = counts.sum()
    dens = counts / (total * np.diff(edges)) if total else np.zeros(bins)
    return Histogram(edges, dens, clipped)


def ks_distance(values, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """One-sample Kolmogorov-Smirnov statistic against an analytic CDF."""
    v = values.values if isinstance(values, SpacingSet) else np.asarray(values, dtype=float)
    x = np.sort(v.ravel())
    n = x.size
    if n == 0:
        raise ValueError("KS distance of an empty sample")
    f = np.asarray(cdf(x), dtype=float)
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(n) / n
    return float(max(upper.max(), lower.max()))


# --------------------------------------------------------------------------
# ensemble pipelines


def _pooled_density(spectra, density, bins):
    if density is None:
        return radial_density(spectra, bins=bins)
    return density


def unfolded_spacings(spectra: Sequence[Spectrum], density=None, bins: int = 40,
                      at: str = "reference") -> tuple[SpacingSet, SpacingSet]:
    """Unfolded nearest and next-nearest spacings pooled over an ensemble.

    Parameters
    ----------
    spectra
        Spectra, optionally carrying reference masks.
    density
        Callable ``R1(|z|)``; defaults to the ensemble-averaged radial profile.
    at
        ``"reference"`` evaluates the density at the reference eigenvalue,
        ``"midpoint"`` at the middle of each pair.

    Returns
    -------
    nn, next_nn
        Both scaled by the same factor so the nearest-neighbour mean is one.
    """
    if at not in ("reference", "midpoint"):
        raise ValueError(f"unknown density location {at!r}")
    spectra = list(spectra)
    dens = _pooled_density(spectra, density, bins)
    s1, s2 = [], []
    for spec in spectra:
        z = spec.eigenvalues
        ref = np.flatnonzero(spec.reference_mask)
        if ref.size == 0:
            continue
        dist, idx = nearest_neighbors(z, 2, ref)
        if at == "reference":
            w = np.sqrt(np.pi * dens(np.abs(z[ref])))
            w1 = w2 = w
        else:
            w1 = np.sqrt(np.pi * dens(np.abs(0.5 * (z[ref] + z[idx[:, 0]]))))
            w2 = np.sqrt(np.pi * dens(np.abs(0.5 * (z[ref] + z[idx[:, 1]]))))
        ok = (dist[:, 0] > 0) & (w1 > 0) & (w2 > 0)
        s1.append(dist[ok, 0] * w1[ok])
        s2.append(dist[ok, 1] * w2[ok])
    if not s1:
        raise ValueError("no reference eigenvalues in any spectrum")
    s1 = np.concatenate(s1)
    s2 = np.concatenate(s2)
    scale = 1.0 / s1.mean()
    return (SpacingSet(s1 * scale, "nn", True), SpacingSet(s2 * scale, "next-nn", False))


def pooled_ratios(spectra: Sequence[Spectrum]) -> tuple[SpacingSet, SpacingSet]:
    """Type-I and type-II ratios pooled over an ensemble."""
    spectra = list(spectra)
    return (SpacingSet.concat([ratios_type1(s) for s in spectra]),
            SpacingSet.concat([ratios_type2(s) for s in spectra]))
