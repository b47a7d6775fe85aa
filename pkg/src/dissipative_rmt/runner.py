"""Experiment orchestration: configs, ensemble sweeps, report files.

An experiment is described by an :class:`ExperimentConfig` (``kind``,
``parameters``, ``outputs``).  :func:`run` produces CSV files of
histograms/spectra/curves and a JSON summary under the ``outputs`` prefix.
:func:`table1` and :func:`table2` rebuild the ratio and spacing tables.

Ensemble member ``i`` always draws from ``RngStream(seed, i)`` and results
are merged in member order, so output files do not depend on the number
of workers.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import analytic
from .eigensolver import ConvergenceError, SolverOptions, Spectrum, eigenvalues
from .ensembles import EnsembleSpec, sample, sample_crossover, two_by_two_spacing
from .kickedrotor import (
    DEFAULT_KAPPA_STEP,
    RATIO_RING,
    SPACING_RING,
    build_dissipative_floquet,
    calibrate_dissipation,
    default_params,
    rotor_ensemble,
)
from .numcore import RngStream, summary
from .spectrastats import (
    annulus_filter,
    collapse_degenerate,
    histogram,
    ks_distance,
    pooled_ratios,
    quantile_annulus,
    radial_density,
    unfolded_spacings,
)

log = logging.getLogger(__name__)

KINDS = ("ensemble-2x2", "ensemble-largeN", "dqkr", "crossover", "ratio-test",
         "analytic-curve", "table1", "table2")

# Reference rows: (m0, sigma0, m1, sigma1) for spacings and
# (mean, variance) of the type-1 and type-2 ratios.
TABLE2_REFERENCE = {
    "rmt-0": (1.0, 0.1103, 1.3986, 0.0869),
    "rmt-0.9": (1.0, 0.1000, 1.3842, 0.0791),
    "rmt-1.2": (1.0, 0.09578, 1.3771, 0.0746),
    "rmt-1.5": (1.0, 0.0929, 1.3727, 0.0713),
    "rmt-1": (1.0, 0.0881, 1.3682, 0.0647),
    "dqkr-0": (1.0, 0.1124, 1.3998, 0.0904),
    "dqkr-8": (1.0, 0.1004, 1.3826, 0.0805),
    "dqkr-11": (1.0, 0.0956, 1.3750, 0.0753),
    "dqkr-13": (1.0, 0.0940, 1.3722, 0.0731),
    "dqkr-0.7": (1.0, 0.0905, 1.3693, 0.0682),
}
TABLE1_REFERENCE = {
    "dqkr-0": (0.7232, 3.8789e-2, 0.8995, 3.1567e-2),
    "rmt-0": (0.7213, 3.9046e-2, 0.8990, 3.1701e-2),
    "dqkr-0.7": (0.7397, 3.5108e-2, 0.9084, 2.6903e-2),
    "rmt-1": (0.7371, 3.5415e-2, 0.9086, 2.6857e-2),
}
TABLE2_ROWS = tuple(TABLE2_REFERENCE)
TABLE1_ROWS = ("dqkr-0", "rmt-0", "dqkr-0.7", "rmt-1")


def row_parameter(row: str, n: int) -> float:
    """Crossover ``alpha`` (rmt rows) or rotor ``gamma`` (dqkr rows) for a table row."""
    family, _, tag = row.partition("-")
    if family == "rmt":
        return {"0": 0.0, "1": 1.0}.get(tag, float(tag) / math.sqrt(n) if tag else math.nan)
    if family == "dqkr":
        if tag in ("0", "0.7"):
            return float(tag)
        return float(tag) / n**1.5
    raise KeyError(row)


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


class MemberFailure(RuntimeError):
    """Eigenvalue computation failed for one ensemble member."""

    def __init__(self, index: int, cause: Exception):
        self.index = index
        self.cause = cause
        super().__init__(f"ensemble member {index}: {cause}")


# --------------------------------------------------------------------------
# configuration

_DEFAULTS: dict[str, dict[str, Any]] = {
    "ensemble-2x2": {"beta": None, "samples": 100_000, "route": "matrix", "bins": 60,
                     "s_max": 4.0},
    "ensemble-largeN": {"beta": None, "n": 300, "samples": 500, "v2": 0.5, "bulk": 0.8,
                        "bins": 60, "s_max": 3.0, "density_bins": 40, "ratio_keep": 0.87,
                        "dump": 1},
    "crossover": {"alpha_cross": None, "n": 300, "samples": 500, "v2": 0.5, "bulk": 0.8,
                  "bins": 60, "s_max": 3.0, "density_bins": 40, "ratio_keep": 0.87,
                  "dump": 1},
    "dqkr": {"n": 501, "kappa": None, "gamma": 0.0, "theta0": 0.205, "alpha_d": "auto",
             "samples": 30, "kappa_step": DEFAULT_KAPPA_STEP, "r_in": SPACING_RING[0],
             "r_out": SPACING_RING[1], "ratio_r_in": RATIO_RING[0],
             "ratio_r_out": RATIO_RING[1], "bins": 60, "s_max": 3.0, "density_bins": 60,
             "dump": 1},
    "ratio-test": {"system": "rmt", "alpha_cross": 0.0, "gamma": 0.0, "n": None,
                   "samples": None, "ratio_keep": 0.87, "r_in": RATIO_RING[0],
                   "r_out": RATIO_RING[1], "kappa": None, "theta0": 0.205,
                   "alpha_d": "auto", "kappa_step": DEFAULT_KAPPA_STEP, "v2": 0.5},
    "analytic-curve": {"beta": None, "s_max": 4.0, "points": 401},
    "table1": {"rows": list(TABLE1_ROWS)},
    "table2": {"rows": list(TABLE2_ROWS)},
}

_TABLE_DEFAULTS = {"rmt_n": 300, "rmt_samples": 500, "bulk": 0.8, "density_bins": 40,
                   "ratio_keep": 0.87, "dqkr_n": 501, "dqkr_samples": 30,
                   "kappa": None, "theta0": 0.205, "alpha_d": "auto",
                   "kappa_step": DEFAULT_KAPPA_STEP}
_DEFAULTS["table1"].update(_TABLE_DEFAULTS)
_DEFAULTS["table2"].update(_TABLE_DEFAULTS)


@dataclass
class ExperimentConfig:
    kind: str
    parameters: dict[str, Any] = field(default_factory=dict)
    outputs: str = "out/run"

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config", "must be a JSON object")
        unknown = set(data) - {"kind", "parameters", "outputs"}
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown top-level field")
        if "kind" not in data:
            raise ConfigError("kind", "missing")
        params = data.get("parameters", {})
        if not isinstance(params, dict):
            raise ConfigError("parameters", "must be an object")
        cfg = cls(data["kind"], dict(params), data.get("outputs", "out/run"))
        return cfg.validated()

    @classmethod
    def load(cls, path, seed: int | None = None, outputs: str | None = None) -> "ExperimentConfig":
        """Read a JSON config; ``seed`` and ``outputs`` override the file."""
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError("config", f"cannot read {path}: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc}") from exc
        if isinstance(data, dict):
            if seed is not None:
                params = data.get("parameters", {})
                data["parameters"] = dict(params, seed=seed) if isinstance(params, dict) else params
            if outputs is not None:
                data["outputs"] = outputs
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "parameters": dict(self.parameters), "outputs": self.outputs}

    def validated(self) -> "ExperimentConfig":
        if self.kind not in KINDS:
            raise ConfigError("kind", f"must be one of {KINDS}, got {self.kind!r}")
        defaults = _DEFAULTS[self.kind]
        params = dict(defaults)
        for key, value in self.parameters.items():
            if key != "seed" and key not in defaults:
                raise ConfigError(f"parameters.{key}", f"not a parameter of {self.kind}")
            params[key] = value
        _validate(self.kind, params)
        return ExperimentConfig(self.kind, params, self.outputs)


def _require(params, key, check: Callable[[Any], bool], message: str):
    if key not in params or params[key] is None:
        raise ConfigError(f"parameters.{key}", "required")
    try:
        ok = check(params[key])
    except TypeError:
        ok = False
    if not ok:
        raise ConfigError(f"parameters.{key}", message)


def _is_int(x):
    return isinstance(x, int) and not isinstance(x, bool)


def _is_real(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _validate(kind: str, p: dict):
    _require(p, "seed", lambda s: _is_int(s) and 0 <= s < 2**64, "must be an unsigned 64-bit integer")
    if kind == "ensemble-2x2":
        _require(p, "beta", lambda b: b in (0, 1, 2, 4), "must be 0, 1, 2 or 4")
        _require(p, "samples", lambda s: _is_int(s) and s >= 1, "must be a positive integer")
        _require(p, "route", lambda r: r in ("matrix", "mc"), "must be 'matrix' or 'mc'")
    elif kind in ("ensemble-largeN", "crossover"):
        if kind == "ensemble-largeN":
            _require(p, "beta", lambda b: b in (0, 1, 2, 4), "must be 0, 1, 2 or 4")
        else:
            _require(p, "alpha_cross", lambda a: _is_real(a) and a >= 0, "must be >= 0")
        _require(p, "n", lambda n: _is_int(n) and n >= 3, "must be an integer >= 3")
        _require(p, "samples", lambda s: _is_int(s) and s >= 1, "must be a positive integer")
        _require(p, "v2", lambda v: _is_real(v) and v > 0, "must be positive")
        _require(p, "bulk", lambda b: _is_real(b) and 0 < b <= 1, "must lie in (0, 1]")
        _require(p, "ratio_keep", lambda k: _is_real(k) and 0 < k <= 1, "must lie in (0, 1]")
    elif kind == "dqkr":
        _validate_rotor(p)
        _require(p, "samples", lambda s: _is_int(s) and s >= 1, "must be a positive integer")
        _require(p, "r_out", lambda r: _is_real(r) and r > p.get("r_in", 0) >= 0,
                 "need 0 <= r_in < r_out")
        _require(p, "ratio_r_out", lambda r: _is_real(r) and r > p.get("ratio_r_in", 0) >= 0,
                 "need 0 <= ratio_r_in < ratio_r_out")
    elif kind == "ratio-test":
        _require(p, "system", lambda s: s in ("rmt", "dqkr"), "must be 'rmt' or 'dqkr'")
        if p["system"] == "rmt":
            p["n"] = p["n"] if p["n"] is not None else 300
            p["samples"] = p["samples"] if p["samples"] is not None else 500
            _require(p, "alpha_cross", lambda a: _is_real(a) and a >= 0, "must be >= 0")
            _require(p, "n", lambda n: _is_int(n) and n >= 3, "must be an integer >= 3")
        else:
            p["n"] = p["n"] if p["n"] is not None else 501
            p["samples"] = p["samples"] if p["samples"] is not None else 30
            _validate_rotor(p)
        _require(p, "samples", lambda s: _is_int(s) and s >= 1, "must be a positive integer")
    elif kind == "analytic-curve":
        _require(p, "beta", lambda b: b in (0, 1, 2, "ginibre"), "must be 0, 1, 2 or 'ginibre'")
        _require(p, "s_max", lambda s: _is_real(s) and s > 0, "must be positive")
        _require(p, "points", lambda n: _is_int(n) and n >= 2, "must be an integer >= 2")
    elif kind in ("table1", "table2"):
        allowed = TABLE1_ROWS if kind == "table1" else TABLE2_ROWS
        _require(p, "rows", lambda rows: isinstance(rows, list) and rows
                 and all(r in allowed for r in rows), f"rows must be drawn from {allowed}")
        _require(p, "rmt_n", lambda n: _is_int(n) and n >= 3, "must be an integer >= 3")
        _require(p, "rmt_samples", lambda s: _is_int(s) and s >= 1, "must be a positive integer")
        _require(p, "dqkr_samples", lambda s: _is_int(s) and s >= 1, "must be a positive integer")
        rotor = dict(p, n=p["dqkr_n"])
        _validate_rotor(rotor)
    if "bins" in p:
        _require(p, "bins", lambda b: _is_int(b) and b >= 1, "must be a positive integer")


def _validate_rotor(p):
    _require(p, "n", lambda n: _is_int(n) and n >= 3 and n % 2 == 1, "must be an odd integer >= 3")
    if p.get("kappa") is not None:
        _require(p, "kappa", lambda k: _is_real(k) and k >= 0, "must be >= 0")
    if p.get("gamma") is not None:
        _require(p, "gamma", _is_real, "must be a real number")
    _require(p, "theta0", _is_real, "must be a real number")
    _require(p, "kappa_step", lambda k: _is_real(k) and k > 0, "must be positive")
    _require(p, "alpha_d", lambda a: a == "auto" or (_is_real(a) and a >= 0),
             "must be 'auto' or a non-negative number")


# --------------------------------------------------------------------------
# ensemble generation


def _pmap(func, items, workers: int):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    chunk = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items, chunksize=chunk))


def _rmt_member(task):
    kind, beta, alpha, n, v2, seed, index = task
    stream = RngStream(seed, index)
    if kind == "crossover":
        m = sample_crossover(EnsembleSpec(1, n, v2, alpha), stream)
        meta = {"ensemble": "crossover", "alpha": alpha}
    else:
        m = sample(EnsembleSpec(beta, n, v2), stream)
        meta = {"ensemble": f"beta{beta}"}
    meta.update(n=n, v2=v2, seed=seed, stream=index)
    try:
        return eigenvalues(m, meta=meta)
    except ConvergenceError as exc:
        raise MemberFailure(index, exc) from exc


def rmt_spectra(n: int, samples: int, seed: int, *, beta: int | None = None,
                alpha: float | None = None, v2: float = 0.5, workers: int = 1) -> list[Spectrum]:
    """Spectra of ``samples`` matrices; crossover ensemble when ``alpha`` is given."""
    kind = "crossover" if alpha is not None else "beta"
    if alpha is None and beta is None:
        raise ValueError("give beta or alpha")
    tasks = [(kind, beta, alpha, n, v2, seed, i) for i in range(samples)]
    return _pmap(_rmt_member, tasks, workers)


def _rotor_member(task):
    index, params = task
    meta = {"ensemble": "dqkr", "n": params.n, "kappa": params.kappa, "gamma": params.gamma,
            "theta0": params.theta0, "alpha_d": params.alpha_d, "stream": index}
    try:
        return eigenvalues(build_dissipative_floquet(params), meta=meta)
    except ConvergenceError as exc:
        raise MemberFailure(index, exc) from exc


_CALIBRATION: dict[tuple, float] = {}


def resolve_dissipation(n: int, kappa: float | None, theta0: float, alpha_d,
                        kappa_step: float = DEFAULT_KAPPA_STEP) -> float:
    """``alpha_d`` itself, or the calibrated value when it is ``"auto"``.

    Calibration always uses the time-reversal invariant rotor (gamma = 0)
    so that every row of a table shares one damping strength.
    """
    if alpha_d != "auto":
        return float(alpha_d)
    params = default_params(n, theta0=theta0)
    if kappa is not None:
        params = params.with_(kappa=kappa)
    key = (params.n, params.kappa, params.theta0, kappa_step)
    if key not in _CALIBRATION:
        _CALIBRATION[key] = calibrate_dissipation(params, kappa_step=kappa_step)
        log.info("calibrated alpha_d=%.6g for %s", _CALIBRATION[key], key)
    return _CALIBRATION[key]


def dqkr_spectra(n: int, samples: int, *, gamma: float = 0.0, kappa: float | None = None,
                 theta0: float = 0.205, alpha_d="auto", kappa_step: float = DEFAULT_KAPPA_STEP,
                 workers: int = 1) -> list[Spectrum]:
    alpha = resolve_dissipation(n, kappa, theta0, alpha_d, kappa_step)
    params = default_params(n, gamma=gamma, theta0=theta0, alpha_d=alpha)
    if kappa is not None:
        params = params.with_(kappa=kappa)
    tasks = list(enumerate(rotor_ensemble(params, samples, kappa_step)))
    return _pmap(_rotor_member, tasks, workers)


# --------------------------------------------------------------------------
# statistics


def support_radius(n: int, v2: float = 0.5, beta: int = 1) -> float:
    r = math.sqrt(2.0 * n * v2)
    return 2.0 * r if beta == 4 else r


def pairing_fraction(spec: Spectrum, tol: float = 1e-6) -> float:
    """Fraction of eigenvalues with another eigenvalue closer than ``tol``."""
    z = spec.eigenvalues
    d = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(d, np.inf)
    return float(np.mean(d.min(axis=1) < tol))


def spacing_stats(spectra, r_in: float, r_out: float, density_bins: int = 40) -> dict:
    """Table-II style moments of unfolded spacings on a ring of reference points."""
    filtered = [annulus_filter(s, r_in, r_out) for s in spectra]
    retained = float(np.mean([s.reference_mask.mean() for s in filtered]))
    nn, nnn = unfolded_spacings(filtered, bins=density_bins)
    s0, s1 = nn.summary(), nnn.summary()
    return {"m0": s0.mean, "sigma0": s0.variance, "m1": s1.mean, "sigma1": s1.variance,
            "count": s0.count, "retained_fraction": retained,
            "_nn": nn, "_next_nn": nnn}


def ratio_stats(spectra, r_in: float, r_out: float) -> dict:
    filtered = [annulus_filter(s, r_in, r_out) for s in spectra]
    retained = float(np.mean([s.reference_mask.mean() for s in filtered]))
    r1, r2 = pooled_ratios(filtered)
    a, b = r1.summary(), r2.summary()
    return {"type1_mean": a.mean, "type1_variance": a.variance,
            "type2_mean": b.mean, "type2_variance": b.variance,
            "count": a.count, "retained_fraction": retained, "r_in": r_in, "r_out": r_out,
            "_ratio1": r1, "_ratio2": r2}


def rmt_statistics(spectra, n: int, v2: float = 0.5, beta: int = 1, bulk: float = 0.8,
                   density_bins: int = 40, ratio_keep: float = 0.87) -> dict:
    """Spacing moments on the bulk disk and ratio moments on a quantile ring."""
    R = support_radius(n, v2, beta)
    out = spacing_stats(spectra, 0.0, bulk * R, density_bins)
    lo, hi = quantile_annulus(spectra, ratio_keep)
    ratios = ratio_stats(spectra, lo, hi)
    ratios["r_in"], ratios["r_out"] = lo / R, hi / R
    out["ratios"] = ratios
    return out


def dqkr_statistics(spectra, spacing_ring=SPACING_RING, ratio_ring=RATIO_RING,
                    density_bins: int = 60) -> dict:
    out = spacing_stats(spectra, *spacing_ring, density_bins=density_bins)
    out["ratios"] = ratio_stats(spectra, *ratio_ring)
    return out


def _public(d: dict) -> dict:
    """Drop private payload (underscore keys) recursively."""
    return {k: (_public(v) if isinstance(v, dict) else v)
            for k, v in d.items() if not k.startswith("_")}


# --------------------------------------------------------------------------
# file output


def _fmt(x) -> str:
    return repr(float(x))


def write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def write_histogram(path: Path, hist):
    write_csv(path, ["s", "density"], zip(hist.centers.tolist(), hist.densities.tolist()))


def write_spectrum(path: Path, spec: Spectrum):
    z = spec.eigenvalues
    write_csv(path, ["re", "im"], zip(z.real.tolist(), z.imag.tolist()))


def write_json(path: Path, payload: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2)
        fh.write("\n")


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _deviation(results: dict, reference: dict) -> dict:
    return {k: abs(results[k] - v) for k, v in reference.items()
            if isinstance(results.get(k), (int, float))}


@dataclass
class RunContext:
    workers: int = 1
    timing: bool = False
    written: list = field(default_factory=list)

    def csv(self, prefix, suffix, header, rows):
        path = Path(f"{prefix}_{suffix}.csv")
        write_csv(path, header, rows)
        self.written.append(path)

    def hist(self, prefix, suffix, hist):
        path = Path(f"{prefix}_{suffix}.csv")
        write_histogram(path, hist)
        self.written.append(path)

    def spectrum(self, prefix, suffix, spec):
        path = Path(f"{prefix}_{suffix}.csv")
        write_spectrum(path, spec)
        self.written.append(path)

    def summary(self, prefix, config, results, reference, started):
        path = Path(f"{prefix}_summary.json")
        payload = {
            "config": config.to_dict(),
            "results": _public(results),
            "reference": reference,
            "deviation": _deviation(_flat(results), _flat(reference)),
            "runtime_seconds": (time.perf_counter() - started) if self.timing else None,
        }
        write_json(path, payload)
        self.written.append(path)
        return payload


def _flat(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        if k.startswith("_"):
            continue
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flat(v, key + "."))
        else:
            out[key] = v
    return out


# --------------------------------------------------------------------------
# experiments

SECTIONS = ("spectra", "spacings", "ratios")


def run(config: ExperimentConfig, workers: int = 1, sections=SECTIONS,
        timing: bool = False) -> dict:
    """Execute one experiment and write its report files.

    Returns the JSON summary payload (as written) with an extra ``files``
    entry listing the paths produced.
    """
    config = config.validated()
    ctx = RunContext(workers=workers, timing=timing)
    started = time.perf_counter()
    handler = {
        "ensemble-2x2": _run_2x2,
        "ensemble-largeN": _run_rmt,
        "crossover": _run_rmt,
        "dqkr": _run_dqkr,
        "ratio-test": _run_ratio_test,
        "analytic-curve": _run_curve,
        "table1": lambda c, x, s: _run_table(c, x, 1),
        "table2": lambda c, x, s: _run_table(c, x, 2),
    }[config.kind]
    results, reference = handler(config, ctx, set(sections))
    payload = ctx.summary(config.outputs, config, results, reference, started)
    payload["files"] = [str(p) for p in ctx.written]
    return payload


def _run_curve(config, ctx, sections):
    p = config.parameters
    c = analytic.curve(p["beta"], p["s_max"], p["points"])
    ctx.csv(config.outputs, "curve", ["s", "density"],
            zip(c.abscissas.tolist(), c.ordinates.tolist()))
    mean = float(np.trapezoid(c.abscissas * c.ordinates, c.abscissas))
    return {"label": c.label, "integral": c.integral(), "mean": mean}, {}


def _spacings_2x2(beta, samples, seed, route):
    if route == "mc":
        return analytic.spacing_mc_2x2(beta, samples, RngStream(seed, 0)).values
    stream = RngStream(seed, 0)
    spec = EnsembleSpec(beta, 2, 0.5)
    out = np.empty(samples)
    for i in range(samples):
        m = sample(spec, stream)
        if beta == 4:
            z = eigenvalues(m).eigenvalues
            out[i] = np.max(np.abs(z - z[0]))
        else:
            out[i] = two_by_two_spacing(m)
    out = out[out > 0]
    return out / out.mean()


def _run_2x2(config, ctx, sections):
    p = config.parameters
    beta = p["beta"]
    s = _spacings_2x2(beta, p["samples"], p["seed"], p["route"])
    hist = histogram(s, p["bins"], (0.0, p["s_max"]))
    ctx.hist(config.outputs, "hist", hist)
    st = summary(s)
    results = {"beta": beta, "count": st.count, "mean": st.mean, "variance": st.variance,
               "clipped": hist.clipped}
    reference = {}
    if beta in (0, 1, 2):
        c = analytic.curve(beta, p["s_max"], 401)
        ctx.csv(config.outputs, "curve", ["s", "density"],
                zip(c.abscissas.tolist(), c.ordinates.tolist()))
        results["ks"] = ks_distance(s, lambda x: analytic.cdf2d(x, beta))
        reference = {"mean": 1.0, "ks": 0.0}
    return results, reference


def _rmt_source(p, ctx):
    if "alpha_cross" in p and (p.get("beta") is None):
        return rmt_spectra(p["n"], p["samples"], p["seed"], alpha=float(p["alpha_cross"]),
                           v2=p["v2"], workers=ctx.workers), 1
    beta = p["beta"]
    return rmt_spectra(p["n"], p["samples"], p["seed"], beta=beta, v2=p["v2"],
                       workers=ctx.workers), beta


def _rmt_reference(p) -> tuple[str | None, dict]:
    alpha = p.get("alpha_cross")
    if p.get("beta") == 1 or alpha == 0:
        row = "rmt-0"
    elif p.get("beta") == 2 or alpha == 1:
        row = "rmt-1"
    elif alpha is not None:
        row = next((r for r in TABLE2_ROWS if r.startswith("rmt-")
                    and math.isclose(row_parameter(r, p["n"]), alpha, rel_tol=1e-9)), None)
    else:
        row = None
    return row, (_reference_for(row) if row else {})


def _reference_for(row: str) -> dict:
    ref = {}
    if row in TABLE2_REFERENCE:
        ref.update(dict(zip(("m0", "sigma0", "m1", "sigma1"), TABLE2_REFERENCE[row])))
    if row in TABLE1_REFERENCE:
        ref["ratios"] = dict(zip(("type1_mean", "type1_variance", "type2_mean",
                                  "type2_variance"), TABLE1_REFERENCE[row]))
    return ref


def _emit_spectra(config, ctx, spectra, dump):
    for i, spec in enumerate(spectra[:dump]):
        ctx.spectrum(config.outputs, f"spectrum_{i:04d}", spec)


def _run_rmt(config, ctx, sections):
    p = config.parameters
    spectra, beta = _rmt_source(p, ctx)
    results: dict[str, Any] = {"spectra": len(spectra), "n": p["n"]}
    if beta == 4:
        results["pairing_fraction"] = float(np.mean([pairing_fraction(s) for s in spectra]))
        spectra = [collapse_degenerate(s) for s in spectra]
    if "spectra" in sections:
        _emit_spectra(config, ctx, spectra, p["dump"] if sections != {"spectra"} else len(spectra))
        prof = radial_density(spectra, bins=p["density_bins"])
        ctx.csv(config.outputs, "radial", ["r", "density"],
                zip(prof.centers.tolist(), prof.density.tolist()))
        results["support_radius"] = support_radius(p["n"], p["v2"], beta)
        results["max_modulus"] = float(max(np.abs(s.eigenvalues).max() for s in spectra))
    row, reference = _rmt_reference(p)
    if row:
        results["row"] = row
    if "spacings" in sections or "ratios" in sections:
        stats = rmt_statistics(spectra, p["n"], p["v2"], beta, p["bulk"], p["density_bins"],
                               p["ratio_keep"])
        if "spacings" in sections:
            ctx.hist(config.outputs, "nn", histogram(stats["_nn"], p["bins"], (0, p["s_max"])))
            ctx.hist(config.outputs, "next_nn",
                     histogram(stats["_next_nn"], p["bins"], (0, p["s_max"])))
            results.update({k: stats[k] for k in ("m0", "sigma0", "m1", "sigma1", "count",
                                                  "retained_fraction")})
            if beta == 2 or p.get("alpha_cross") == 1:
                results["ks_ginibre_largeN"] = ks_distance(stats["_nn"],
                                                           analytic.ginibre_cdf_unit_mean)
        if "ratios" in sections:
            results["ratios"] = _public(stats["ratios"])
    if "spacings" not in sections:
        reference = {k: v for k, v in reference.items() if k == "ratios"}
    if "ratios" not in sections:
        reference.pop("ratios", None)
    return results, reference


def _dqkr_source(p, ctx, gamma):
    return dqkr_spectra(p["n"], p["samples"], gamma=gamma, kappa=p.get("kappa"),
                        theta0=p["theta0"], alpha_d=p["alpha_d"],
                        kappa_step=p["kappa_step"], workers=ctx.workers)


def _dqkr_reference(gamma, n) -> tuple[str | None, dict]:
    row = next((r for r in TABLE2_ROWS if r.startswith("dqkr-")
                and math.isclose(row_parameter(r, n), gamma, rel_tol=1e-9, abs_tol=1e-15)), None)
    return row, (_reference_for(row) if row else {})


def _run_dqkr(config, ctx, sections):
    p = config.parameters
    spectra = _dqkr_source(p, ctx, p["gamma"])
    alpha = spectra[0].meta["alpha_d"]
    results: dict[str, Any] = {"spectra": len(spectra), "n": p["n"], "alpha_d": alpha,
                               "kappa": spectra[0].meta["kappa"]}
    if "spectra" in sections:
        _emit_spectra(config, ctx, spectra, p["dump"] if sections != {"spectra"} else len(spectra))
        prof = radial_density(spectra, bins=p["density_bins"])
        ctx.csv(config.outputs, "radial", ["r", "density"],
                zip(prof.centers.tolist(), prof.density.tolist()))
    row, reference = _dqkr_reference(p["gamma"], p["n"])
    if row:
        results["row"] = row
    if "spacings" in sections:
        st = spacing_stats(spectra, p["r_in"], p["r_out"], p["density_bins"])
        ctx.hist(config.outputs, "nn", histogram(st["_nn"], p["bins"], (0, p["s_max"])))
        ctx.hist(config.outputs, "next_nn", histogram(st["_next_nn"], p["bins"], (0, p["s_max"])))
        results.update(_public(st))
    else:
        reference = {k: v for k, v in reference.items() if k == "ratios"}
    if "ratios" in sections:
        results["ratios"] = _public(ratio_stats(spectra, p["ratio_r_in"], p["ratio_r_out"]))
    else:
        reference.pop("ratios", None)
    return results, reference


def _run_ratio_test(config, ctx, sections):
    p = config.parameters
    if p["system"] == "rmt":
        spectra = rmt_spectra(p["n"], p["samples"], p["seed"], alpha=float(p["alpha_cross"]),
                              v2=p["v2"], workers=ctx.workers)
        R = support_radius(p["n"], p["v2"], 1)
        lo, hi = quantile_annulus(spectra, p["ratio_keep"])
        st = ratio_stats(spectra, lo, hi)
        st["r_in"], st["r_out"] = lo / R, hi / R
        row, ref = _rmt_reference(p)
    else:
        spectra = _dqkr_source(p, ctx, p["gamma"])
        st = ratio_stats(spectra, p["r_in"], p["r_out"])
        row, ref = _dqkr_reference(p["gamma"], p["n"])
    ctx.hist(config.outputs, "ratio1", histogram(st["_ratio1"], 50, (0.0, 1.0)))
    ctx.hist(config.outputs, "ratio2", histogram(st["_ratio2"], 50, (0.0, 1.0)))
    results = {"system": p["system"], "spectra": len(spectra), "ratios": _public(st)}
    if row:
        results["row"] = row
    return results, ({"ratios": ref["ratios"]} if "ratios" in ref else {})


# --------------------------------------------------------------------------
# tables


class TableRunner:
    """Computes table rows, sharing spectra between rows and tables."""

    def __init__(self, params: dict, workers: int = 1):
        self.p = dict(_TABLE_DEFAULTS)
        self.p.update(params)
        self.workers = workers
        self._spectra: dict[str, list[Spectrum]] = {}
        self._stats: dict[str, dict] = {}
        # wall-clock seconds spent generating each row (not written to reports)
        self.seconds: dict[str, float] = {}

    def spectra(self, row: str) -> list[Spectrum]:
        if row not in self._spectra:
            started = time.perf_counter()
            p = self.p
            if row.startswith("rmt-"):
                alpha = row_parameter(row, p["rmt_n"])
                self._spectra[row] = rmt_spectra(p["rmt_n"], p["rmt_samples"], p["seed"],
                                                 alpha=alpha, workers=self.workers)
            else:
                gamma = row_parameter(row, p["dqkr_n"])
                self._spectra[row] = dqkr_spectra(p["dqkr_n"], p["dqkr_samples"], gamma=gamma,
                                                  kappa=p["kappa"], theta0=p["theta0"],
                                                  alpha_d=p["alpha_d"],
                                                  kappa_step=p["kappa_step"],
                                                  workers=self.workers)
            self.seconds[row] = time.perf_counter() - started
        return self._spectra[row]

    def stats(self, row: str) -> dict:
        if row not in self._stats:
            p = self.p
            spectra = self.spectra(row)
            if row.startswith("rmt-"):
                st = rmt_statistics(spectra, p["rmt_n"], bulk=p["bulk"],
                                    density_bins=p["density_bins"], ratio_keep=p["ratio_keep"])
                st["alpha"] = row_parameter(row, p["rmt_n"])
            else:
                st = dqkr_statistics(spectra)
                st["gamma"] = row_parameter(row, p["dqkr_n"])
                st["alpha_d"] = spectra[0].meta["alpha_d"]
            self._stats[row] = st
        return self._stats[row]

    def table2_row(self, row: str) -> dict:
        st = self.stats(row)
        keys = ("m0", "sigma0", "m1", "sigma1", "count", "retained_fraction",
                "alpha", "gamma", "alpha_d")
        return {k: st[k] for k in keys if k in st}

    def table1_row(self, row: str) -> dict:
        return _public(self.stats(row)["ratios"])


def table2(config: ExperimentConfig, workers: int = 1, runner: TableRunner | None = None,
           timing: bool = False) -> dict:
    config = ExperimentConfig("table2", config.parameters, config.outputs).validated()
    return _table(config, workers, runner, timing, 2)


def table1(config: ExperimentConfig, workers: int = 1, runner: TableRunner | None = None,
           timing: bool = False) -> dict:
    config = ExperimentConfig("table1", config.parameters, config.outputs).validated()
    return _table(config, workers, runner, timing, 1)


def _table(config, workers, runner, timing, which):
    ctx = RunContext(workers=workers, timing=timing)
    started = time.perf_counter()
    results, reference = _run_table(config, ctx, which, runner)
    payload = ctx.summary(config.outputs, config, results, reference, started)
    payload["files"] = [str(p) for p in ctx.written]
    return payload


def _run_table(config, ctx, which, runner=None):
    runner = runner or TableRunner(config.parameters, ctx.workers)
    rows = config.parameters["rows"]
    results, reference = {}, {}
    if which == 2:
        cols = ("m0", "sigma0", "m1", "sigma1")
        for row in rows:
            results[row] = runner.table2_row(row)
            reference[row] = dict(zip(cols, TABLE2_REFERENCE[row]))
    else:
        cols = ("type1_mean", "type1_variance", "type2_mean", "type2_variance")
        for row in rows:
            results[row] = runner.table1_row(row)
            reference[row] = dict(zip(cols, TABLE1_REFERENCE[row]))
    table_rows = []
    for row in rows:
        got = [results[row][c] for c in cols]
        ref = [reference[row][c] for c in cols]
        table_rows.append([row, *got, *ref, *[abs(a - b) for a, b in zip(got, ref)]])
    header = ["row", *cols, *[f"ref_{c}" for c in cols], *[f"dev_{c}" for c in cols]]
    ctx.csv(config.outputs, f"table{which}", header, table_rows)
    return results, reference


# --------------------------------------------------------------------------
# figure/table reproduction

REPRODUCE_TARGETS = ("fig1", "fig2", "fig3", "fig4", "table1", "table2")


def reproduce_plan(target: str, seed: int, out: str, overrides: dict | None = None):
    """Configs that regenerate one figure or table, with desk-scale defaults.

    ``overrides`` is merged into every config's parameters (only keys valid
    for that kind are applied).
    """
    if target not in REPRODUCE_TARGETS:
        raise ConfigError("target", f"must be one of {REPRODUCE_TARGETS}")
    overrides = dict(overrides or {})
    base = Path(out)
    plan: list[ExperimentConfig] = []

    def add(kind, name, **params):
        params["seed"] = seed
        for key, value in overrides.items():
            if key in _DEFAULTS[kind] or key == "seed":
                params[key] = value
        plan.append(ExperimentConfig(kind, params, str(base / name)))

    if target == "fig1":
        for beta in (0, 1, 2, 4):
            add("ensemble-2x2", f"fig1_beta{beta}", beta=beta)
    elif target == "fig2":
        for beta, n in ((1, 300), (2, 300), (4, 150)):
            add("ensemble-largeN", f"fig2_beta{beta}", beta=beta, n=n, samples=20)
    elif target == "fig3":
        for gamma in (0.0, 0.7):
            add("dqkr", f"fig3_dqkr_gamma{gamma}", gamma=gamma)
        for beta, n, count in ((1, 300, 500), (2, 300, 500), (4, 150, 100)):
            add("ensemble-largeN", f"fig3_beta{beta}", beta=beta, n=n, samples=count)
    elif target == "fig4":
        n = overrides.get("n", 300)
        for row in TABLE2_ROWS:
            if row.startswith("rmt-"):
                add("crossover", f"fig4_{row}", alpha_cross=row_parameter(row, n))
        n_rotor = overrides.get("n", 501) if "n" in overrides else 501
        for row in TABLE2_ROWS:
            if row.startswith("dqkr-"):
                add("dqkr", f"fig4_{row}", gamma=row_parameter(row, n_rotor))
    else:
        add(target, target)
    return plan


def reproduce(target: str, seed: int, out: str, workers: int = 1,
              overrides: dict | None = None, timing: bool = False) -> list[dict]:
    plan = reproduce_plan(target, seed, out, overrides)
    shared = None
    payloads = []
    for cfg in plan:
        if cfg.kind in ("table1", "table2"):
            cfg = cfg.validated()
            shared = shared or TableRunner(cfg.parameters, workers)
            fn = table1 if cfg.kind == "table1" else table2
            payloads.append(fn(cfg, workers, shared, timing))
        else:
            payloads.append(run(cfg, workers, timing=timing))
    return payloads


def default_workers() -> int:
    return os.cpu_count() or 1
