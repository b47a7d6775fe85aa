"""Spectral statistics of non-Hermitian random matrices and the dissipative
quantum kicked rotor.

Submodules
----------
numcore       seeded random streams, summaries, matrix predicates
ensembles     Gaussian samplers for beta = 0, 1, 2, 4 and the crossover
eigensolver   balancing + Hessenberg + shifted complex QR eigenvalues
kickedrotor   Floquet operators of the (dissipative) kicked rotor
spectrastats  nearest-neighbour spacings, unfolding, ratios, histograms
analytic      reference spacing laws
runner        experiment configs, ensemble sweeps, report files
"""

from .analytic import curve, ginibre_nnsd_unit_mean, p2d
from .eigensolver import ConvergenceError, SolverOptions, Spectrum, eigenvalues
from .ensembles import EnsembleSpec, sample, sample_crossover
from .kickedrotor import RotorParams, build_dissipative_floquet, default_params
from .numcore import RngStream, summary
from .spectrastats import pooled_ratios, unfolded_spacings

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "EnsembleSpec",
    "RngStream",
    "RotorParams",
    "SolverOptions",
    "Spectrum",
    "build_dissipative_floquet",
    "curve",
    "default_params",
    "eigenvalues",
    "ginibre_nnsd_unit_mean",
    "p2d",
    "pooled_ratios",
    "sample",
    "sample_crossover",
    "summary",
    "unfolded_spacings",
]
