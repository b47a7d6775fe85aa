import math

import numpy as np
import pytest

from dissipative_rmt.eigensolver import eigenvalues
from dissipative_rmt.kickedrotor import (
    RotorParams,
    annulus_fraction,
    build_dissipative_floquet,
    build_floquet,
    build_floquet_direct,
    default_params,
    floquet_kernel,
    rotor_ensemble,
)
from dissipative_rmt.numcore import is_unitary


def test_params_validation():
    with pytest.raises(ValueError):
        RotorParams(n=10)
    with pytest.raises(ValueError):
        RotorParams(n=11, alpha_d=-1e-3)
    p = default_params(51)
    assert p.half == 25
    assert p.kappa == pytest.approx(math.sqrt(51_000))
    assert p.with_(gamma=0.7).gamma == 0.7


def test_default_chaotic_regime():
    p = default_params()
    assert p.n == 501
    assert p.kappa**2 / p.n == pytest.approx(1000)
    assert p.theta0 == 0.205


def test_tabulated_kernel_matches_direct_sum():
    for p in (default_params(51, gamma=0.3), default_params(51, gamma=0.7, alpha_d=1e-3)):
        assert np.max(np.abs(build_dissipative_floquet(p) - build_floquet_direct(p))) < 1e-12


def test_free_rotation_is_circulant_in_modulus():
    p = default_params(31, kappa=0.0)
    u = build_floquet(p)
    g = np.abs(floquet_kernel(p))
    m = np.arange(31)
    assert np.allclose(np.abs(u), g[(m[:, None] - m[None, :]) % 31], atol=1e-14)


@pytest.mark.parametrize("gamma", [0.0, 0.7, 2.1])
def test_unitarity(gamma):
    assert is_unitary(build_floquet(default_params(101, gamma=gamma)), 1e-10)


def test_no_dissipation_reduces_to_unitary_operator():
    p = default_params(51, gamma=0.4)
    assert np.array_equal(build_dissipative_floquet(p), build_floquet(p))
    with pytest.raises(ValueError):
        build_floquet(p.with_(alpha_d=0.1))


def test_gamma_period():
    p = default_params(51, gamma=0.3)
    a = build_floquet(p)
    b = build_floquet(p.with_(gamma=0.3 + 2 * math.pi))
    assert np.max(np.abs(a - b)) <= 1e-10


def test_dissipation_contracts():
    p = default_params(101, alpha_d=1e-3)
    z = eigenvalues(build_dissipative_floquet(p)).eigenvalues
    assert np.abs(z).max() <= 1 + 1e-12
    assert np.linalg.norm(build_dissipative_floquet(p), 2) <= 1 + 1e-12


def test_mean_modulus_decreases_with_dissipation():
    means = []
    for a in (0.0, 0.01, 0.05, 0.1):
        z = eigenvalues(build_dissipative_floquet(default_params(101, alpha_d=a))).eigenvalues
        means.append(np.abs(z).mean())
    assert all(x > y for x, y in zip(means, means[1:]))


def test_ensemble_steps_kappa():
    ps = rotor_ensemble(default_params(51), 3, kappa_step=1.0)
    assert [p.kappa - ps[0].kappa for p in ps] == [0.0, 1.0, 2.0]


def test_annulus_fraction_bounds():
    p = default_params(51)
    assert annulus_fraction(p, 0.5, 0.9) == 0.0
    assert annulus_fraction(p, 0.99, 1.01) == 1.0


def test_circular_ensemble_spacing_variance():
    # unit-mean eigenphase spacings of the time-reversal invariant rotor
    # against the Wigner surmise variance 4/pi - 1
    spacings = []
    for p in rotor_ensemble(default_params(501), 6, kappa_step=1.0):
        phases = np.sort(np.angle(eigenvalues(build_floquet(p)).eigenvalues))
        gaps = np.diff(np.concatenate([phases, phases[:1] + 2 * np.pi]))
        spacings.append(gaps * p.n / (2 * np.pi))
    s = np.concatenate(spacings)
    assert abs(s.var() - (4 / np.pi - 1)) < 0.02
