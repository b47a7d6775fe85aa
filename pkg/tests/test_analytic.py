import math

import numpy as np
import pytest
from scipy import integrate, special

from dissipative_rmt import analytic
from dissipative_rmt.analytic import (
    C1,
    C2,
    bessel_k0,
    bessel_k1,
    cdf2d,
    curve,
    ginibre_cdf_unit_mean,
    ginibre_mean_spacing,
    ginibre_nnsd_largeN,
    ginibre_nnsd_unit_mean,
    ginibre_survival,
    p2d,
    spacing_mc_2x2,
)
from dissipative_rmt.numcore import RngStream
from dissipative_rmt.spectrastats import ks_distance


def k0_defining_integral(s):
    """int_s^inf exp(-x) / sqrt(x^2 - s^2) dx by adaptive quadrature."""
    # integrable endpoint singularity handled by the algebraic weight
    head, _ = integrate.quad(lambda x: math.exp(-x) / math.sqrt(x + s), s, s + 1.0,
                             weight="alg", wvar=(-0.5, 0.0), epsabs=0, epsrel=1e-13)
    tail, _ = integrate.quad(lambda x: math.exp(-x) / math.sqrt(x * x - s * s), s + 1.0,
                             np.inf, epsabs=0, epsrel=1e-13)
    return head + tail


def test_k0_reference_values():
    # frozen values of the defining integral
    assert bessel_k0(1.0) == pytest.approx(0.42102443824070834, rel=1e-13)
    assert bessel_k0(0.1) == pytest.approx(2.427069024702016, rel=1e-13)


@pytest.mark.parametrize("s", np.geomspace(0.1, 10, 17))
def test_k0_against_defining_integral(s):
    assert bessel_k0(s) == pytest.approx(k0_defining_integral(s), rel=1e-8)


def test_k0_k1_against_scipy():
    x = np.geomspace(1e-3, 50, 400)
    assert np.max(np.abs(bessel_k0(x) / special.k0(x) - 1)) < 1e-12
    assert np.max(np.abs(bessel_k1(x) / special.k1(x) - 1)) < 1e-12


def test_bessel_domain():
    with pytest.raises(ValueError):
        bessel_k0(0.0)
    with pytest.raises(ValueError):
        bessel_k1(-1.0)


def test_constants_from_gamma_function():
    assert C1 == pytest.approx(special.gamma(0.25) ** 8 / 2**13, rel=1e-14)
    assert C2 == pytest.approx(2 * special.gamma(1.25) ** 4, rel=1e-14)
    assert C1 == pytest.approx(3.644673731862157, rel=1e-14)
    assert C2 == pytest.approx(1.3499395786223471, rel=1e-14)
    assert C1 == pytest.approx(2 * C2**2, rel=1e-14)


def test_p2d_reference_values():
    assert p2d(1.0, 0) == pytest.approx(0.7161859363, rel=1e-9)
    assert p2d(1.0, 2) == pytest.approx(1.0668739120, rel=1e-9)
    assert p2d(0.0, 1) == 0.0
    with pytest.raises(ValueError):
        p2d(1.0, 4)
    with pytest.raises(ValueError):
        p2d(-1.0, 0)


@pytest.mark.parametrize("beta", [0, 1, 2])
def test_cdf_is_integral_of_density(beta):
    for s in (0.3, 1.0, 2.2):
        val, _ = integrate.quad(lambda t: p2d(t, beta), 0, s, epsabs=1e-13)
        assert cdf2d(s, beta) == pytest.approx(val, abs=1e-10)


def test_small_s_repulsion():
    s = 1e-3
    assert p2d(s, 0) == pytest.approx(math.pi / 2 * s, rel=1e-5)
    assert p2d(s, 2) / s**3 == pytest.approx(2 * (9 * math.pi / 16) ** 2, rel=1e-5)


def test_ginibre_small_s():
    # leading terms 2 s^3 - s^5 at density 1/pi
    s = 0.1
    assert ginibre_nnsd_largeN(s) == pytest.approx(2 * s**3 - s**5, rel=1e-3)
    assert ginibre_nnsd_largeN(0.0) == 0.0


def test_ginibre_derivative_matches_finite_difference():
    h = 1e-5
    for s in (0.2, 0.5, 0.9, 1.3, 2.0, 3.0):
        fd = -(ginibre_survival(s + h) - ginibre_survival(s - h)) / (2 * h)
        assert ginibre_nnsd_largeN(s) == pytest.approx(fd, rel=1e-6)


def test_ginibre_normalization_and_mean():
    total, _ = integrate.quad(ginibre_nnsd_largeN, 0, 10, epsabs=1e-12)
    assert total == pytest.approx(1.0, abs=1e-9)
    mean, _ = integrate.quad(lambda s: s * ginibre_nnsd_largeN(s), 0, 10, epsabs=1e-12)
    assert mean == pytest.approx(ginibre_mean_spacing(), rel=1e-9)
    assert ginibre_mean_spacing() == pytest.approx(1.1429294269, rel=1e-9)
    m1, _ = integrate.quad(lambda s: s * ginibre_nnsd_unit_mean(s), 0, 10, epsabs=1e-12)
    assert m1 == pytest.approx(1.0, abs=1e-9)


def test_ginibre_survival_truncation():
    # a longer product changes nothing at moderate s
    s = np.linspace(0.0, 3.0, 31)
    assert np.allclose(ginibre_survival(s), ginibre_survival(s, n_max=600), atol=1e-14)
    assert ginibre_cdf_unit_mean(0.0) == 0.0


@pytest.mark.parametrize("beta", [0, 1, 2])
def test_monte_carlo_matches_closed_forms(beta):
    s = spacing_mc_2x2(beta, 100_000, RngStream(31, beta))
    assert s.mean == pytest.approx(1.0)
    assert ks_distance(s, lambda x: cdf2d(x, beta)) < 0.015


def test_monte_carlo_quaternion_class():
    s = spacing_mc_2x2(4, 100_000, RngStream(31, 4))
    assert s.mean == pytest.approx(1.0)
    assert np.all(s.values > 0)
    # stronger repulsion than beta = 2: fewer small spacings
    s2 = spacing_mc_2x2(2, 100_000, RngStream(31, 2))
    assert np.mean(s.values < 0.3) < np.mean(s2.values < 0.3)
    with pytest.raises(ValueError):
        spacing_mc_2x2(3, 10, RngStream(0))


def test_curve_beta2_pointwise():
    c = curve(2, 4.0, 401)
    s = c.abscissas
    x = 9 * math.pi / 16 * s**2
    expected = 2 * (9 * math.pi / 16) ** 2 * s**3 * np.exp(-x)
    assert np.max(np.abs(c.ordinates - expected)) < 1e-12
    assert c.integral() == pytest.approx(1.0, abs=1e-6)


def test_curve_ginibre_label():
    c = curve("ginibre", 5.0, 501)
    assert c.label == "ginibre-largeN"
    assert c.integral() == pytest.approx(1.0, abs=1e-4)


def test_curve_validation():
    with pytest.raises(ValueError):
        analytic.Curve([0, 1], [0, -1])
    with pytest.raises(ValueError):
        analytic.Curve([1, 0], [0, 1])


def test_k0_large_argument_asymptotics():
    x = 50.0
    ratio = bessel_k0(x) * math.exp(x) * math.sqrt(2 * x / math.pi)
    # leading term alone is off by the 1/(8x) correction
    assert abs(ratio - 1) < 3e-3
    assert ratio == pytest.approx(1 - 1 / (8 * x) + 9 / (128 * x**2), abs=1e-5)


def test_symmetric_class_log_repulsion():
    r = [p2d(s, 1) / (-(s**3) * math.log(s)) for s in (1e-3, 1e-4)]
    assert r[0] > 0 and abs(r[1] / r[0] - 1) < 0.05


def test_ginibre_cubic_coefficient():
    assert ginibre_nnsd_largeN(0.05) / 0.05**3 == pytest.approx(2.0, rel=0.01)
    assert abs(ginibre_nnsd_largeN(0.1) - 0.0019900) < 1e-6


@pytest.mark.parametrize("beta", [0, 1, 2])
def test_monte_carlo_matches_matrix_route(beta):
    from scipy.stats import ks_2samp

    from dissipative_rmt.ensembles import EnsembleSpec, sample, two_by_two_spacing

    stream = RngStream(40, beta)
    spec = EnsembleSpec(beta, 2)
    direct = two_by_two_spacing(np.array([sample(spec, stream) for _ in range(100_000)]))
    mc = spacing_mc_2x2(beta, 100_000, RngStream(41, beta))
    assert ks_2samp(direct / direct.mean(), mc.values).statistic < 0.01
