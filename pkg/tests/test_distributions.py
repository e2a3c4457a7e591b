import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose
from scipy import integrate, special, stats

from opcombine.distributions import (
    BetaParams,
    GammaParams,
    GIGParams,
    LognormalParams,
    NegBinParams,
    NormalParams,
    PoissonParams,
    bessel_k,
    gig_mean,
    gig_mode,
    gig_variance,
    log_bessel_k,
    make_rng,
)
from opcombine.errors import DegenerateParameterError, DomainError


# ---------------------------------------------------------------- Bessel K

def test_bessel_half_order_closed_form():
    assert_allclose(bessel_k(0.5, 1.0), math.sqrt(math.pi / 2) * math.exp(-1.0), rtol=1e-12)


def test_bessel_symmetric_in_order():
    assert bessel_k(-0.5, 2.0) == pytest.approx(bessel_k(0.5, 2.0), rel=1e-14)


@pytest.mark.parametrize("z", [0.0, -1.0])
def test_bessel_domain(z):
    with pytest.raises(DomainError):
        bessel_k(1.0, z)


def _bessel_u_form(order_minus_one, z):
    # K_{v+1}(z) = 1/2 int_0^inf u^v exp(-z (u + 1/u) / 2) du, evaluated independently
    v = mpmath.mpf(order_minus_one)
    f = lambda u: u ** v * mpmath.exp(-z * (u + 1 / u) / 2)
    return float(mpmath.quad(f, [0, 1, mpmath.inf]) / 2)


def test_bessel_matches_integral_at_worked_gig_argument():
    z = 2 * math.sqrt(6.803 * 2.8)
    nu = -1.593 + 1
    mpmath.mp.dps = 30
    assert_allclose(bessel_k(nu, z), _bessel_u_form(nu - 1, z), rtol=1e-10)


@pytest.mark.parametrize("nu", [-7.3, -2.0, -0.4, 0.0, 0.5, 1.0, 3.7, 10.0])
@pytest.mark.parametrize("z", [1e-6, 0.01, 0.3, 1.0, 5.0, 40.0, 300.0])
def test_bessel_against_scipy(nu, z):
    assert_allclose(bessel_k(nu, z), special.kv(nu, z), rtol=1e-10)


def test_log_bessel_large_order_against_mpmath():
    mpmath.mp.dps = 30
    for nu, z in [(6000.0, 3.0), (2.5, 1e-300), (150.0, 800.0)]:
        ref = float(mpmath.log(mpmath.besselk(nu, z)))
        assert_allclose(log_bessel_k(nu, z), ref, rtol=1e-12)


@settings(max_examples=200, deadline=None)
@given(nu=st.floats(-10, 10), z=st.floats(0.1, 50))
def test_bessel_recurrence(nu, z):
    lhs = bessel_k(nu + 1, z)
    rhs = bessel_k(nu - 1, z) + 2 * nu / z * bessel_k(nu, z)
    assert lhs == pytest.approx(rhs, rel=1e-9)


# ---------------------------------------------------------------- families

def _random_families(seed, n=50):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        yield "gamma", GammaParams(rng.uniform(0.3, 20), rng.uniform(0.05, 5))
        yield "normal", NormalParams(rng.uniform(-5, 5), rng.uniform(0.1, 4))
        yield "lognormal", LognormalParams(rng.uniform(-2, 3), rng.uniform(0.2, 2.5))
        yield "beta", BetaParams(rng.uniform(0.5, 20), rng.uniform(0.5, 20))


def _support(name, d):
    return {"gamma": (0, np.inf), "normal": (-np.inf, np.inf), "lognormal": (0, np.inf), "beta": (0, 1)}[name]


def test_pdfs_integrate_to_one():
    for name, d in _random_families(0):
        lo, hi = _support(name, d)
        # split at the median so quad sees the bulk
        mid = d.quantile(0.5)
        f = lambda x: float(d.pdf(x))
        total = integrate.quad(f, lo, mid, epsabs=0, epsrel=1e-11, limit=200)[0]
        total += integrate.quad(f, mid, hi, epsabs=0, epsrel=1e-11, limit=200)[0]
        assert total == pytest.approx(1.0, abs=1e-8), (name, d)


def test_cdfs_monotone_with_limits():
    for name, d in _random_families(1, n=10):
        lo, hi = _support(name, d)
        x = np.linspace(d.quantile(1e-6), d.quantile(1 - 1e-6), 400)
        c = np.array([float(d.cdf(v)) for v in x])
        assert np.all(np.diff(c) >= 0)
        assert float(d.cdf(-1e300 if lo == -np.inf else lo)) == pytest.approx(0.0, abs=1e-300)
        assert float(d.cdf(1e300 if hi == np.inf else hi)) == pytest.approx(1.0, abs=1e-15)


def test_quantile_inverts_cdf_on_interior_points():
    for name, d in _random_families(2, n=15):
        for p in (0.001, 0.1, 0.37, 0.5, 0.9, 0.999):
            x = d.quantile(p)
            # x = quantile(cdf(x))
            assert d.quantile(float(d.cdf(x))) == pytest.approx(x, rel=1e-9, abs=1e-12)


def test_scipy_cross_check_of_cdfs():
    x = np.array([0.2, 1.0, 3.0, 11.0])
    assert_allclose(GammaParams(2.5, 1.7).cdf(x), stats.gamma(2.5, scale=1.7).cdf(x), rtol=1e-12)
    assert_allclose(LognormalParams(0.3, 1.2).cdf(x), stats.lognorm(1.2, scale=math.exp(0.3)).cdf(x), rtol=1e-12)
    assert_allclose(BetaParams(2, 7).cdf(x / 12), stats.beta(2, 7).cdf(x / 12), rtol=1e-12)
    k = np.arange(15)
    assert_allclose(NegBinParams(3.4, 0.3).pmf(k), stats.nbinom(3.4, 0.3).pmf(k), rtol=1e-12)
    assert_allclose(PoissonParams(2.2).cdf(k), stats.poisson(2.2).cdf(k), rtol=1e-12)


def test_boundary_and_symmetry_examples():
    assert GammaParams(3.0, 2.0).cdf(0.0) == 0.0
    assert BetaParams(5, 5).cdf(0.5) == pytest.approx(0.5, abs=1e-15)
    assert_allclose(LognormalParams(0, 2).quantile(0.999), math.exp(2 * special.ndtri(0.999)), rtol=1e-12)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, float("nan")])
def test_quantile_domain(p):
    with pytest.raises(DomainError):
        GammaParams(2, 1).quantile(p)


@pytest.mark.parametrize("make", [
    lambda: GammaParams(0, 1), lambda: GammaParams(1, -1), lambda: NormalParams(0, 0),
    lambda: LognormalParams(0, -1), lambda: NegBinParams(1, 1.0), lambda: NegBinParams(0, 0.5),
    lambda: GIGParams(-1.5, 1, 0), lambda: GIGParams(0, 0, 1), lambda: GIGParams(0, 1, -1),
])
def test_invalid_parameters(make):
    with pytest.raises(DomainError):
        make()


def test_negbin_predictive_example():
    nb = NegBinParams(1.0, 0.5)
    assert_allclose(nb.pmf(np.arange(10)), 0.5 ** (np.arange(10) + 1), rtol=1e-13)
    assert nb.mean() == pytest.approx(1.0)


def test_rng_is_reproducible_and_needs_seed():
    assert np.array_equal(make_rng(7).random(5), make_rng(7).random(5))
    with pytest.raises(DomainError):
        make_rng(None)


# ---------------------------------------------------------------- GIG

WORKED = GIGParams(-1.593, 6.803, 2.8)


def _gig_quad_moment(p, k):
    c = p.log_normalizer()
    f = lambda x: x ** k * math.exp(c + p.nu * math.log(x) - p.omega * x - p.phi / x)
    m = gig_mode(p)
    return sum(integrate.quad(f, a, b, epsabs=0, epsrel=1e-12, limit=400)[0]
               for a, b in [(0, m), (m, 10 * m + 10), (10 * m + 10, np.inf)])


def test_gig_normalizer_and_mean_by_quadrature():
    rng = np.random.default_rng(3)
    draws = [WORKED] + [GIGParams(rng.uniform(-6, 6), rng.uniform(0.1, 20), rng.uniform(0.05, 10))
                        for _ in range(20)]
    for p in draws:
        assert _gig_quad_moment(p, 0) == pytest.approx(1.0, abs=1e-8)
        assert gig_mean(p) == pytest.approx(_gig_quad_moment(p, 1), rel=1e-6)
        m1 = _gig_quad_moment(p, 1)
        assert gig_variance(p) == pytest.approx(_gig_quad_moment(p, 2) - m1 * m1, rel=1e-6)


def test_gig_mean_bessel_ratio_example():
    assert gig_mean(GIGParams(0, 1, 1)) == pytest.approx(special.kv(2, 2) / special.kv(1, 2), rel=1e-12)


def test_gig_mean_gamma_limit():
    assert gig_mean(GIGParams(1, 2, 1e-12)) == pytest.approx(1.0, rel=1e-6)
    assert gig_mean(GIGParams(1, 2, 0), gamma_limit=True) == 1.0
    with pytest.raises(DegenerateParameterError):
        gig_mean(GIGParams(1, 2, 0))


@settings(max_examples=50, deadline=None)
@given(nu=st.floats(0, 8), omega=st.floats(0.1, 10))
def test_gig_converges_to_gamma_as_phi_vanishes(nu, omega):
    g = GammaParams(nu + 1, 1 / omega)
    p = GIGParams(nu, omega, 1e-12)
    assert gig_mean(p) == pytest.approx(g.mean(), rel=1e-6)
    assert gig_mode(p) == pytest.approx(max(nu, 0) / omega, rel=1e-6, abs=1e-5)


def test_gig_small_shape_limit_is_slow_but_exact():
    # for nu + 1 < 1 the phi correction is of order phi^(nu+1); at nu = -1/2
    # the Bessel ratio has the closed form 1 + 1/z
    p = GIGParams(-0.5, 1.0, 1e-12)
    z = p.bessel_argument
    assert gig_mean(p) == pytest.approx((1 + 1 / z) * math.sqrt(p.phi / p.omega), rel=1e-12)


def test_gig_mode_examples():
    assert gig_mode(GIGParams(0, 1, 1)) == pytest.approx(1.0)
    assert gig_mode(GIGParams(2, 1, 0)) == pytest.approx(2.0)
    expected = (-1.593 + math.sqrt(1.593 ** 2 + 4 * 6.803 * 2.8)) / (2 * 6.803)
    assert gig_mode(WORKED) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("p", [WORKED, GIGParams(3, 2, 0.5), GIGParams(-4, 0.3, 7)])
def test_gig_mode_is_argmax(p):
    m = gig_mode(p)
    for h in (1e-3, 1e-5):
        assert p.logpdf(m) > p.logpdf(m * (1 + h))
        assert p.logpdf(m) > p.logpdf(m * (1 - h))


def test_gig_cdf_quantile_and_sampling():
    q = WORKED.quantile(0.3)
    assert WORKED.cdf(q) == pytest.approx(0.3, abs=1e-10)
    x = WORKED.sample(make_rng(11), 200_000)
    se = math.sqrt(gig_variance(WORKED) / x.size)
    assert abs(x.mean() - gig_mean(WORKED)) < 4 * se
