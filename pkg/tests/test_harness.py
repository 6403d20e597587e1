"""Inequality reports, admissibility functional, sharpness sweeps, campaign."""

import math

import numpy as np
import pytest

from finslerineq import fields as fc
from finslerineq import harness as H
from finslerineq.minkowski import MinkowskiNorm
from finslerineq.models import (HyperbolicBall, RadialTestFunction,
                                RandersFlat, SmoothCutoff, cutoff_profile,
                                euclidean_flat)
from finslerineq.quadrature import QuadratureSpec

SPEC = QuadratureSpec()
FAST = QuadratureSpec(radial_nodes=12, radial_panels=6, sphere_order=6)


def family(gamma, eps, r=0.5, R=1.0, orientation="minus"):
    return RadialTestFunction(gamma, eps, SmoothCutoff(r, R), orientation)


# ----------------------------------------------------------------- constants
def test_constants():
    assert H.hardy_gamma(3, 0.0) == 0.5
    assert H.rellich_sharp_constant(6, 0.0) == 9.0
    assert H.rellich_sharp_constant(7, 1.0) == 16.0
    assert H.bv_constant(HyperbolicBall(4, -1.0)) == pytest.approx(0.25)
    assert H.bv_constant(HyperbolicBall(6, -1.0)) == pytest.approx(0.25)
    assert H.poincare_constant(HyperbolicBall(3, -1.0)) == pytest.approx(4.0)
    with pytest.raises(H.PreconditionError):
        H.bv_constant(RandersFlat(3, 0.5))


# -------------------------------------------------------------------- hardy
def test_hardy_flat_remainder_vanishes():
    m = RandersFlat(3, 0.5)
    rep = H.hardy_report(m, "bh", family(0.5, 0.01), 0.0, SPEC)
    assert rep.terms["remainder"].value == 0.0
    assert rep.passed and rep.slack >= -rep.slack_tolerance
    assert rep.constants["gamma"] == 0.5


def test_hardy_hyperbolic_remainder_positive():
    h = HyperbolicBall(4, -1.0)
    for prof in H.radial_battery(5):
        rep = H.hardy_report(h, "bh", prof, 0.0, SPEC)
        assert rep.terms["remainder"].value > 0.0
        assert rep.passed


def test_hardy_truncated_family_slack_shrinks():
    m = RandersFlat(3, 0.5)
    slacks = []
    for eps in (1e-2, 1e-3, 1e-4):
        rep = H.hardy_report(m, "bh", family(0.5, eps), 0.0, SPEC)
        slacks.append(rep.slack / rep.terms["lhs"].value)
    assert slacks[0] > slacks[1] > slacks[2] > 0.0


def test_hardy_both_orientations_agree():
    m = RandersFlat(3, 0.5)
    a = H.hardy_report(m, "bh", family(0.5, 1e-3, orientation="minus"),
                       0.0, SPEC)
    b = H.hardy_report(m, "bh", family(0.5, 1e-3, orientation="plus"),
                       0.0, SPEC)
    assert a.terms["lhs"].value == pytest.approx(b.terms["lhs"].value,
                                                 rel=1e-12)
    assert a.slack == pytest.approx(b.slack, rel=1e-10)


def test_hardy_precondition():
    with pytest.raises(H.PreconditionError):
        H.hardy_report(RandersFlat(3, 0.5), "bh",
                       cutoff_profile(0.4, 0.9), 1.5, SPEC)


def modulated_field(m, profile_f, profile_d1, support, amp=0.5):
    """w(rho_minus) * (1 + amp * x0/|x|) with analytic differential."""

    def fn(x):
        rho = float(m.rho_minus(x))
        return float(profile_f(rho)) * (
            1.0 + amp * x[0] / max(np.linalg.norm(x), 1e-300))

    def grad(x):
        r = np.linalg.norm(x)
        rho = float(m.rho_minus(x))
        drho = x / r
        drho[-1] -= m.drift
        mod = 1.0 + amp * x[0] / r
        dmod = -amp * x[0] * x / r**3
        dmod[0] += amp / r
        return float(profile_d1(rho)) * drho * mod \
            + float(profile_f(rho)) * dmod

    return fc.ScalarField(fn, grad, support_radius=support)


def test_hardy_generic_field_path():
    # a radially modulated (non-radial) nonnegative field on the flat model
    m = RandersFlat(3, 0.4)
    psi = SmoothCutoff(0.5, 1.0)
    u = modulated_field(m, psi.value, psi.d1, psi.R, amp=0.5)
    spec = QuadratureSpec(radial_nodes=8, radial_panels=4, sphere_order=4)
    rep = H.hardy_report(m, "bh", u, 0.0, spec)
    assert rep.passed
    assert rep.terms["lhs"].value > 0.0


# ----------------------------------------------------------- hardy-bv et al.
def test_hardy_bv_battery():
    h = HyperbolicBall(4, -1.0)
    assert H.bv_constant(h) == pytest.approx(0.25)
    for prof in H.radial_battery(6):
        rep = H.hardy_bv_report(h, "bh", prof, 0.0, SPEC)
        assert rep.passed
        assert rep.terms["brezis_vazquez"].value > 0.0
        assert rep.constants["C"] == pytest.approx(0.25)
    with pytest.raises(H.PreconditionError):
        H.hardy_bv_report(RandersFlat(4, 0.3), "bh",
                          cutoff_profile(0.4, 0.9), 0.0, SPEC)


def test_poincare_battery_and_scaling():
    h = HyperbolicBall(3, -1.0)
    rep = H.poincare_report(h, "bh", cutoff_profile(0.4, 0.9), 1, SPEC)
    assert rep.constants["constant"] == pytest.approx(4.0)
    assert rep.passed
    # both sides are quadratic in v: the ratio is scale invariant
    prof = cutoff_profile(0.4, 0.9)
    import finslerineq.models as models
    scaled = models.RadialProfile(
        f=lambda rho: 3.0 * prof.f(rho), d1=lambda rho: 3.0 * prof.d1(rho),
        d2=lambda rho: 3.0 * prof.d2(rho), support=prof.support,
        breakpoints=prof.breakpoints)
    rep2 = H.poincare_report(h, "bh", scaled, 1, SPEC)
    r1 = rep.terms["lhs"].value / rep.terms["gradient_side"].value
    r2 = rep2.terms["lhs"].value / rep2.terms["gradient_side"].value
    assert r1 == pytest.approx(r2, rel=1e-12)
    for prof in H.radial_battery(10):
        assert H.poincare_report(h, "bh", prof, 1, SPEC).passed


def test_uncertainty_battery():
    m = RandersFlat(4, 0.3)
    for prof in H.radial_battery(5):
        rep = H.uncertainty_report(m, "bh", prof, 0.0, SPEC)
        assert rep.passed and rep.slack >= 0.0


def test_uncertainty_consistent_with_hardy():
    # the product bound is never tighter than Hardy plus Cauchy-Schwarz
    m = RandersFlat(4, 0.3)
    prof = cutoff_profile(0.3, 0.8)
    rep = H.uncertainty_report(m, "bh", prof, 0.0, SPEC)
    hardy = H.hardy_report(m, "bh", prof, 0.0, SPEC)
    implied = math.sqrt(rep.terms["weighted_mass"].value) * (
        math.sqrt(hardy.terms["lhs"].value)
        - math.sqrt(hardy.terms["main"].value))
    assert rep.slack >= implied - 1e-9


# -------------------------------------------------------------------- gbeta
def test_gbeta_vanishes_on_radial_nonincreasing():
    for model in (RandersFlat(6, 0.5), HyperbolicBall(6, -1.0)):
        for measure in ("bh", "ht"):
            for beta in (0.0, 1.0):
                for prof in H.radial_battery(4):
                    val, scale, _ = H.gbeta(model, measure, prof, beta, SPEC)
                    assert abs(val) <= 1e-6 * scale


def test_gbeta_truncated_family():
    # the sweep family is in the kernel class by construction
    m = RandersFlat(6, 0.5)
    val, scale, _ = H.gbeta(m, "bh", family(1.0, 1e-3), 0.0, SPEC)
    assert abs(val) <= 1e-6 * scale


def test_gbeta_nonradial_is_nonzero():
    # a deliberately non-radial field: the kernel class is a proper subset
    m = RandersFlat(6, 0.5)
    outer = SmoothCutoff(0.55, 1.0)
    inner = SmoothCutoff(0.25, 0.45)

    def w(rho):
        return float(outer.value(rho)) * (1.0 - float(inner.value(rho)))

    def w1(rho):
        return float(outer.d1(rho)) * (1.0 - float(inner.value(rho))) \
            - float(outer.value(rho)) * float(inner.d1(rho))

    u = modulated_field(m, w, w1, outer.R, amp=0.8)
    spec = QuadratureSpec(radial_nodes=6, radial_panels=3, sphere_order=2)
    val, scale, err = H.gbeta(m, "bh", u, 0.0, spec)
    assert abs(val) > 1e-3 * scale


# ------------------------------------------------------------------- rellich
def test_rellich_flat_report():
    m = RandersFlat(6, 0.5)
    rep = H.rellich_report(m, "bh", family(1.0, 1e-3), 0.0, SPEC)
    assert rep.constants["delta"] == 9.0
    assert rep.passed
    assert rep.terms["remainder"].value == 0.0


def test_rellich_radial_laplacian_shortcut():
    # (Delta u)^2 / rho^beta = gamma^2 ((n+beta)/2)^2 rho^{-n} on the annulus
    m = RandersFlat(6, 0.5)
    gamma, beta = 1.0, 0.0
    tf = family(gamma, 1e-2)
    prof = tf.profile()
    rho = np.linspace(0.05, 0.45, 20)
    lap = prof.d2(rho) + prof.d1(rho) * np.asarray(
        m.radial_mean_curvature(rho))
    want = gamma**2 * ((m.n + beta) / 2.0) ** 2 * rho ** (-m.n)
    assert np.allclose(lap**2 * rho ** (-beta) * rho ** (2 * gamma + 4),
                       want * rho ** (2 * gamma + 4), rtol=1e-12)


def test_rellich_hyperbolic_battery():
    h = HyperbolicBall(6, -1.0)
    for prof in H.radial_battery(4):
        rep = H.rellich_report(h, "bh", prof, 0.0, SPEC)
        assert rep.passed
        assert rep.terms["remainder"].value > 0.0


def test_rellich_preconditions():
    m = RandersFlat(6, 0.5)
    with pytest.raises(H.PreconditionError):
        H.rellich_report(m, "bh", family(1.0, 1e-3), 2.5, SPEC)
    with pytest.raises(H.PreconditionError):
        H.rellich_report(RandersFlat(5, 0.5), "bh", family(0.5, 1e-3),
                         1.5, SPEC)


def test_rellich_gbeta_gate():
    # an increasing radial profile is rejected by the kernel gate
    m = RandersFlat(6, 0.5)
    prof = cutoff_profile(0.4, 0.9)
    import finslerineq.models as models
    rising = models.RadialProfile(
        f=lambda rho: prof.f(rho) * (0.2 + np.asarray(rho)),
        d1=lambda rho: prof.d1(rho) * (0.2 + np.asarray(rho)) + prof.f(rho),
        d2=lambda rho: prof.d2(rho) * (0.2 + np.asarray(rho))
        + 2.0 * prof.d1(rho),
        support=prof.support, breakpoints=prof.breakpoints,
        nonincreasing=False)
    with pytest.raises(H.PreconditionError):
        H.rellich_report(m, "bh", rising, 0.0, SPEC)


def test_rellich_bv_battery_and_de1():
    h = HyperbolicBall(6, -1.0)
    for prof in H.radial_battery(4):
        rep = H.rellich_bv_report(h, "bh", prof, 0.0, SPEC)
        assert rep.passed
        assert rep.checks["de1_ok"]
        assert rep.checks["de1_lhs"] >= 0.0
        # all five coefficients are closed-form computable
        for key in ("delta", "coeff_remainder4", "coeff_weight2",
                    "coeff_weight2_remainder", "coeff_weight0"):
            assert np.isfinite(rep.constants[key])
    assert rep.constants["C"] == pytest.approx(0.25)
    assert rep.constants["coeff_weight0"] == pytest.approx(0.0625)


def test_rellich_bv_unit_uniformity_simplification():
    h = HyperbolicBall(6, -1.0)
    rep = H.rellich_bv_report(h, "bh", cutoff_profile(0.4, 0.9), 0.0, SPEC)
    c = rep.constants["C"]
    assert rep.constants["coeff_weight0"] == pytest.approx(c * c)
    assert rep.constants["coeff_weight2_remainder"] == \
        pytest.approx((6 - 1) * (6 - 2) * c)


# -------------------------------------------------------------------- sweeps
def test_hardy_sweep_flat():
    m = RandersFlat(3, 0.5)
    tab = H.hardy_sharpness_sweep(m, "bh", 0.0, 0.5, 1.0,
                                  [1e-1, 1e-2, 1e-3, 1e-4, 1e-5], SPEC)
    assert tab.sharp_constant == 0.25
    assert tab.monotone and tab.passed
    assert tab.extrapolated == pytest.approx(0.25, rel=1e-6)
    assert tab.extrapolated_moebius == pytest.approx(0.25, rel=1e-6)
    assert tab.gap_coefficient > 0.0
    # J1 identity rows
    for row in tab.rows:
        assert row.j1_quadrature == pytest.approx(row.j1_exact, rel=1e-6)


def test_hardy_sweep_quotient_gap_structure():
    # the gap R - gamma^2 decays like c / log(r/eps)
    m = RandersFlat(3, 0.5)
    tab = H.hardy_sharpness_sweep(m, "bh", 0.0, 0.5, 1.0,
                                  [1e-2, 1e-3, 1e-4, 1e-5], SPEC)
    ls = np.log(0.5 / np.array([row.eps for row in tab.rows]))
    gaps = np.array([row.quotient for row in tab.rows]) - 0.25
    products = gaps * ls
    assert np.all(gaps > 0)
    # products stabilize (within 25% across the sweep)
    assert np.max(products) / np.min(products) < 1.25


def test_hardy_sweep_measure_invariance():
    m = RandersFlat(3, 0.5)
    bh = H.hardy_sharpness_sweep(m, "bh", 0.0, 0.5, 1.0,
                                 [1e-3, 1e-4, 1e-5], SPEC)
    ht = H.hardy_sharpness_sweep(m, "ht", 0.0, 0.5, 1.0,
                                 [1e-3, 1e-4, 1e-5], SPEC)
    for a, b in zip(bh.rows, ht.rows):
        assert a.quotient == pytest.approx(b.quotient, rel=1e-12)
    assert ht.extrapolated == pytest.approx(0.25, rel=1e-6)


def test_hardy_sweep_orientations_identical():
    m = RandersFlat(3, 0.5)
    minus = H.hardy_sharpness_sweep(m, "bh", 0.0, 0.5, 1.0,
                                    [1e-3, 1e-4], SPEC, "minus")
    plus = H.hardy_sharpness_sweep(m, "bh", 0.0, 0.5, 1.0,
                                   [1e-3, 1e-4], SPEC, "plus")
    for a, b in zip(minus.rows, plus.rows):
        assert a.quotient == pytest.approx(b.quotient, rel=1e-12)


def test_hardy_sweep_quotient_scale_invariance():
    # I1 and I2 are quadratic in u, so the quotient ignores u -> c u;
    # verified through the report path on a scaled profile
    m = RandersFlat(3, 0.5)
    tf = family(0.5, 1e-3)
    rep = H.hardy_report(m, "bh", tf, 0.0, SPEC)
    prof = tf.profile()
    import finslerineq.models as models
    scaled = models.RadialProfile(
        f=lambda rho: 10.0 * prof.f(rho),
        d1=lambda rho: 10.0 * prof.d1(rho),
        d2=lambda rho: 10.0 * prof.d2(rho),
        support=prof.support, breakpoints=prof.breakpoints)
    rep10 = H.hardy_report(m, "bh", scaled, 0.0, SPEC)
    q1 = rep.terms["lhs"].value / rep.terms["main"].value
    q2 = rep10.terms["lhs"].value / rep10.terms["main"].value
    assert q1 == pytest.approx(q2, rel=1e-12)


def test_hardy_sweep_euclidean():
    e = euclidean_flat(3)
    tab = H.hardy_sharpness_sweep(e, "bh", 0.0, 0.5, 1.0,
                                  [1e-2, 1e-3, 1e-4], SPEC)
    assert tab.extrapolated == pytest.approx(0.25, rel=1e-6)


def test_hardy_sweep_nonzero_beta():
    m = RandersFlat(5, 0.3)
    beta = 1.0
    tab = H.hardy_sharpness_sweep(m, "bh", beta, 0.5, 1.0,
                                  [1e-2, 1e-3, 1e-4], SPEC)
    assert tab.extrapolated == pytest.approx(1.0, rel=1e-6)  # ((5-2-1)/2)^2


def test_rellich_sweep_flat():
    m = RandersFlat(6, 0.5)
    tab = H.rellich_sharpness_sweep(m, "bh", 0.0, 0.5, 1.0,
                                    [1e-1, 1e-2, 1e-3, 1e-4, 1e-5], SPEC)
    assert tab.sharp_constant == 9.0
    assert tab.passed and tab.monotone
    assert tab.extrapolated == pytest.approx(9.0, rel=1e-6)
    assert tab.extrapolated_moebius == pytest.approx(9.0, rel=1e-5)


def test_rellich_sweep_preconditions():
    with pytest.raises(H.PreconditionError):
        H.rellich_sharpness_sweep(RandersFlat(5, 0.5), "bh", 1.5, 0.5, 1.0,
                                  [1e-2], SPEC)
    with pytest.raises(H.PreconditionError):
        H.hardy_sharpness_sweep(RandersFlat(3, 0.5), "bh", 0.0, 0.5, 1.0,
                                [0.7], SPEC)


# ------------------------------------------------------------------ campaign
def test_refined_cs_campaign_properties():
    for b in (0.0, 0.3, 0.7):
        norm = MinkowskiNorm(3, b)
        s = H.refined_cs_campaign(norm, 20000, seed=99)
        assert s.passed
        assert s.min_slack >= -1e-10 * max(1.0, s.min_scale)
        assert s.colinear_max_dev <= 1e-10
        assert s.case2_max_dev <= 1e-9
        assert s.case3_margin >= -1e-9
    s0 = H.refined_cs_campaign(MinkowskiNorm(2, 0.0), 20000, seed=99)
    assert abs(s0.min_slack) <= 1e-12


def test_battery_profiles_admissible():
    for prof in H.radial_battery(12):
        assert prof.nonincreasing
        rho = np.linspace(1e-3, prof.support * 0.999, 200)
        assert np.all(prof.d1(rho) <= 1e-12)
        assert np.all(prof.f(rho) >= 0.0)
        assert prof.f(np.array([prof.support * 1.01]))[0] == 0.0


def test_hardy_bv_coefficient_on_unit_uniformity():
    # Lambda_F = 1 on the hyperbolic model: the remainder coefficient is C
    h = HyperbolicBall(4, -1.0)
    rep = H.hardy_bv_report(h, "bh", cutoff_profile(0.4, 0.9), 0.0, SPEC)
    assert rep.constants["bv_coefficient"] == rep.constants["C"] == 0.25


def test_uncertainty_coefficient_degenerates():
    # beta -> n-2 drives the right-hand coefficient to zero
    m = RandersFlat(4, 0.3)
    rep = H.uncertainty_report(m, "bh", cutoff_profile(0.4, 0.9),
                               1.999, SPEC)
    assert rep.constants["coefficient"] == pytest.approx(0.0005, abs=1e-12)
    assert rep.passed
