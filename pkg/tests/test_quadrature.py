"""Radial/sphere/annulus rules, error estimates, determinism, Monte Carlo."""

import math

import numpy as np
import pytest

from finslerineq.models import HyperbolicBall, RandersFlat, euclidean_flat
from finslerineq.quadrature import (QuadratureError, QuadratureSpec,
                                    annulus_integrate, box_montecarlo,
                                    pairwise_sum, power_integral,
                                    radial_integrate, sphere_integrate,
                                    unit_sphere_area)

SPEC = QuadratureSpec()


def test_radial_log_integral():
    val, err = radial_integrate(lambda t: 1.0 / t, 1e-4, 0.5, SPEC)
    assert val == pytest.approx(math.log(0.5 / 1e-4), rel=1e-12)
    assert err < 1e-10


def test_radial_polynomial_exactness():
    val, _ = radial_integrate(lambda t: t**2, 0.1, 1.0, SPEC)
    assert val == pytest.approx((1.0 - 1e-3) / 3.0, rel=1e-14)


def test_radial_rejects_bad_interval_and_nan():
    with pytest.raises(QuadratureError):
        radial_integrate(lambda t: t, -1.0, 1.0, SPEC)
    with pytest.raises(QuadratureError):
        radial_integrate(lambda t: np.full_like(t, np.nan), 0.1, 1.0, SPEC)


def test_radial_convergence_order():
    # a low-order spec: halving panels must gain at least a factor 8
    exact = math.exp(1.0) - math.exp(0.25)
    coarse = QuadratureSpec(radial_nodes=2, radial_panels=4)
    fine = QuadratureSpec(radial_nodes=2, radial_panels=8)
    e1 = abs(radial_integrate(np.exp, 0.25, 1.0, coarse)[0] - exact)
    e2 = abs(radial_integrate(np.exp, 0.25, 1.0, fine)[0] - exact)
    assert e1 / e2 >= 8.0


def test_sphere_area_and_moments():
    for n in (2, 3, 4, 5):
        got = sphere_integrate(lambda w: np.ones(len(w)), n, SPEC)
        assert got == pytest.approx(unit_sphere_area(n), rel=1e-12)
    # the angular factor h integrates to zero, h^2 to area/n
    assert sphere_integrate(lambda w: w[:, -1], 3, SPEC) == \
        pytest.approx(0.0, abs=1e-12)
    assert sphere_integrate(lambda w: w[:, -1] ** 2, 3, SPEC) == \
        pytest.approx(4.0 * math.pi / 3.0, rel=1e-12)


def test_annulus_j1_identity():
    # frozen: 4 pi ln(5000) = 107.03020623743303
    m = RandersFlat(3, 0.5)
    val, err = annulus_integrate(m, "bh", lambda r, w: r**-3.0,
                                 1e-4, 0.5, SPEC)
    assert val == pytest.approx(107.03020623743303, rel=1e-9)
    assert err < 1e-7


def test_annulus_constant_euclidean():
    e = euclidean_flat(3)
    val, _ = annulus_integrate(e, "bh", lambda r, w: np.ones_like(r),
                               0.2, 1.0, SPEC)
    want = 4.0 / 3.0 * math.pi * (1.0 - 0.2**3)
    assert val == pytest.approx(want, rel=1e-10)


def test_annulus_hyperbolic_volume_growth():
    for n in (2, 3):
        h = HyperbolicBall(n, -1.0)
        val, _ = annulus_integrate(h, "bh", lambda r, w: np.ones_like(r),
                                   0.05, 1.5, SPEC)
        if n == 2:
            want = 2 * math.pi * (math.cosh(1.5) - math.cosh(0.05))
        else:
            want = 4 * math.pi * ((math.sinh(3.0) / 2 - 1.5)
                                  - (math.sinh(0.1) / 2 - 0.05)) / 2.0
        assert val == pytest.approx(want, rel=1e-9)


def test_coarea_consistency():
    # the annulus integral of f F(grad rho~+) equals the iterated
    # radial-sphere integral (F(grad of the reverse-forward distance) = 1)
    m = RandersFlat(3, 0.5)

    def f(r, w):
        return np.exp(-r) * (1.0 + 0.3 * w[:, 0] ** 2)

    full, _ = annulus_integrate(m, "bh", f, 0.1, 1.0, SPEC)

    def shell_exact(r):
        # angular integral of (1 + 0.3 w0^2)(1 + t h) over S^2 = area(1+0.1)
        return np.exp(-r) * r**2 * 4.0 * math.pi * 1.1

    iterated, _ = radial_integrate(shell_exact, 0.1, 1.0, SPEC)
    assert full == pytest.approx(iterated, rel=1e-10)


def test_power_integral_helper():
    assert power_integral(2.0, 0.0, 1.0) == pytest.approx(1.0 / 3.0)
    assert power_integral(-1.0, 0.1, 1.0) == pytest.approx(math.log(10.0))
    with pytest.raises(QuadratureError):
        power_integral(-2.0, 0.0, 1.0)


def test_pairwise_sum_matches_numpy():
    rng = np.random.default_rng(30)
    a = rng.standard_normal(1000)
    assert pairwise_sum(a) == pytest.approx(float(np.sum(a)), rel=1e-12)
    assert pairwise_sum(np.array([])) == 0.0


def test_determinism_bit_identical():
    m = RandersFlat(3, 0.5)
    a = annulus_integrate(m, "ht", lambda r, w: r**-2.0, 1e-3, 0.7, SPEC)
    b = annulus_integrate(m, "ht", lambda r, w: r**-2.0, 1e-3, 0.7, SPEC)
    assert a == b
    s1 = box_montecarlo(m, "bh", lambda x: np.ones(len(x)),
                        -np.ones(3), np.ones(3), SPEC)
    s2 = box_montecarlo(m, "bh", lambda x: np.ones(len(x)),
                        -np.ones(3), np.ones(3), SPEC)
    assert s1 == s2


def test_montecarlo_ball_volume():
    e = euclidean_flat(3)
    val, stderr = box_montecarlo(
        e, "ht", lambda x: (np.linalg.norm(x, axis=1) < 1.0).astype(float),
        -np.ones(3), np.ones(3), SPEC)
    want = 4.0 / 3.0 * math.pi
    assert abs(val - want) < 4.0 * stderr + 1e-3


def test_montecarlo_measure_ratio():
    # same integrand under BH vs HT differs by (1-t^2)^((n+1)/2)
    m = RandersFlat(3, 0.5)
    f = lambda x: np.exp(-np.sum(x * x, axis=1))
    bh, _ = box_montecarlo(m, "bh", f, -np.ones(3), np.ones(3), SPEC)
    ht, _ = box_montecarlo(m, "ht", f, -np.ones(3), np.ones(3), SPEC)
    assert bh / ht == pytest.approx((1 - 0.25) ** 2.0, rel=1e-12)


def test_montecarlo_agrees_with_annulus_for_radial_field():
    m = RandersFlat(3, 0.5)
    spec = QuadratureSpec(mc_samples=400_000, seed=7)

    def radial(x):
        rho = np.asarray(m.rho_minus(x))
        return np.where(rho < 1.0, (1.0 - rho) ** 2, 0.0)

    mc, stderr = box_montecarlo(m, "bh", radial,
                                -2 * np.ones(3), 2 * np.ones(3), spec)
    exact, _ = annulus_integrate(
        m, "bh", lambda r, w: np.where(r < 1.0, (1.0 - r) ** 2, 0.0),
        1e-8, 1.0, SPEC)
    assert abs(mc - exact) < 3.0 * stderr


def test_montecarlo_exclusion_required_for_singular():
    m = euclidean_flat(2)

    def singular(x):
        r = np.linalg.norm(x, axis=1)
        return np.where(r < 0.3, np.inf, 1.0)

    with pytest.raises(QuadratureError):
        box_montecarlo(m, "bh", singular, -np.ones(2), np.ones(2),
                       QuadratureSpec(mc_samples=500, seed=0))
    val, _ = box_montecarlo(m, "bh", singular, -np.ones(2), np.ones(2),
                            QuadratureSpec(mc_samples=500, seed=0),
                            exclude_radius=0.3)
    assert np.isfinite(val)


def test_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(radial_nodes=1)
    with pytest.raises(ValueError):
        QuadratureSpec(abs_tol=0.0)


def test_holmes_thompson_ellipsoid_volume():
    # dm_HT = dx: the backward ball {rho_minus < R} is an ellipsoid of
    # Lebesgue volume omega_n R^n / (1 - t^2)^((n+1)/2)
    m = RandersFlat(3, 0.5)
    val, _ = annulus_integrate(m, "ht", lambda r, w: np.ones_like(r),
                               1e-9, 1.0, SPEC)
    want = (4.0 / 3.0) * math.pi / (1 - 0.25) ** 2.0
    assert val == pytest.approx(want, rel=1e-8)


def test_hyperbolic_annulus_mass_lower_bound():
    # int_eps^r t^{-1} (sinh t / t)^{n-1} dt >= log(r/eps): the curved-model
    # annulus mass dominates the flat one
    h = HyperbolicBall(3, -1.0)
    eps, r = 1e-4, 0.5
    val, _ = radial_integrate(
        lambda t: t ** -3.0 * np.sinh(t) ** 2, eps, r, SPEC)
    assert val >= math.log(r / eps)
