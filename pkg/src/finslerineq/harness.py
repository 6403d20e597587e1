"""Term-by-term evaluation of the Hardy/Rellich-type inequality functionals.

Each report computes every integral of one inequality instance separately,
records the constants in play, and exposes ``slack = LHS - sum(RHS terms)``
together with the quadrature error budget; an inequality "passes" when the
slack is above minus that budget.  The sharpness sweeps drive the truncated
radial family ``psi * max(eps, rho)^(-gamma)`` toward the origin and
extrapolate the Rayleigh quotients; on the flat models the quotient is an
exactly Moebius function of ``log(r/eps)``, which the extrapolators exploit.

Radial inputs reduce to one-dimensional integrals through the model's polar
reduction (``cp_constant`` x radial density); general scalar fields go
through the backward-polar product quadrature with the sign-cased distance
``rho_u`` evaluated pointwise.

Reports are independent of one another and deterministic, so batteries and
campaigns may be evaluated concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Sequence

import numpy as np

from . import fields as fc
from .minkowski import MinkowskiNorm
from .models import (RadialProfile, RadialTestFunction, SmoothCutoff,
                     cutoff_profile, profile_product)
from .quadrature import QuadratureSpec, annulus_integrate, power_integral, \
    radial_integrate

RADIAL_FLOOR = 1e-12     # relative inner cutoff for integrals reaching rho=0


class PreconditionError(ValueError):
    """A report was requested outside its parameter domain."""


class GBetaViolation(PreconditionError):
    """The test function is not in the kernel of the admissibility functional."""


# ------------------------------------------------------------------ records
@dataclass(frozen=True)
class TermValue:
    value: float
    error: float

    def as_dict(self) -> dict:
        return {"value": self.value, "error": self.error}


@dataclass
class InequalityReport:
    theorem: str
    model: str
    measure: str
    beta: float
    constants: dict
    terms: dict
    slack: float
    slack_tolerance: float
    passed: bool
    checks: dict = dc_field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "model": self.model,
            "measure": self.measure,
            "beta": self.beta,
            "constants": dict(self.constants),
            "terms": {k: v.as_dict() for k, v in self.terms.items()},
            "slack": self.slack,
            "slack_tolerance": self.slack_tolerance,
            "passed": self.passed,
            "checks": dict(self.checks),
        }


@dataclass
class SweepRow:
    eps: float
    i1: float
    i2: float
    quotient: float
    j1_quadrature: float
    j1_exact: float
    error: float

    def as_dict(self) -> dict:
        return {"eps": self.eps, "i1": self.i1, "i2": self.i2,
                "quotient": self.quotient,
                "j1_quadrature": self.j1_quadrature,
                "j1_exact": self.j1_exact
                if math.isfinite(self.j1_exact) else None,
                "error": self.error}


@dataclass
class SweepTable:
    theorem: str
    model: str
    measure: str
    beta: float
    constants: dict
    rows: list
    sharp_constant: float
    extrapolated: float
    extrapolated_moebius: float
    gap_coefficient: float
    monotone: bool
    passed: bool

    def as_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "model": self.model,
            "measure": self.measure,
            "beta": self.beta,
            "constants": dict(self.constants),
            "rows": [r.as_dict() for r in self.rows],
            "sharp_constant": self.sharp_constant,
            "extrapolated": self.extrapolated,
            "extrapolated_moebius": self.extrapolated_moebius,
            "gap_coefficient": self.gap_coefficient,
            "monotone": self.monotone,
            "passed": self.passed,
        }


@dataclass
class CampaignSummary:
    drift: float
    dim: int
    samples: int
    min_slack: float
    min_scale: float
    argmin_xi: list
    argmin_eta: list
    histogram_counts: list
    histogram_edges: list
    colinear_max_dev: float
    case2_max_dev: float
    case3_margin: float
    passed: bool

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "drift", "dim", "samples", "min_slack", "min_scale",
            "argmin_xi", "argmin_eta", "histogram_counts", "histogram_edges",
            "colinear_max_dev", "case2_max_dev", "case3_margin", "passed")}


# ---------------------------------------------------------------- constants
def hardy_gamma(n: int, beta: float) -> float:
    return 0.5 * (n - 2.0 - beta)


def rellich_gamma(n: int, beta: float) -> float:
    return 0.5 * (n - 4.0 - beta)


def rellich_sharp_constant(n: int, beta: float) -> float:
    return (n + beta) ** 2 * (n - 4.0 - beta) ** 2 / 16.0


def bv_constant(model) -> float:
    """The explicit Brezis-Vazquez constant |k| min(1, n-1)^2 / (4 lambda_F^2)
    (the reciprocal of the Poincare-type constant below)."""
    if not model.curvature < 0.0:
        raise PreconditionError("refined inequalities need curvature k < 0")
    m = min(1.0, model.n - 1.0)
    return abs(model.curvature) * m * m / (4.0 * model.reversibility**2)


def poincare_constant(model) -> float:
    """(2 lambda_F / (sqrt(|k|) min(1, n-1)))^2."""
    return 1.0 / bv_constant(model)


# ----------------------------------------------------------- radial plumbing
def _as_radial(u) -> tuple[RadialProfile, str] | None:
    if isinstance(u, RadialTestFunction):
        return u.profile(), u.orientation
    if isinstance(u, RadialProfile):
        return u, "minus"
    if isinstance(u, tuple) and len(u) == 2:
        return u[0], u[1]
    return None


def _require_radial(u) -> tuple[RadialProfile, str]:
    radial = _as_radial(u)
    if radial is None:
        raise PreconditionError("this report needs a radial test function")
    return radial


def _radial_integral(model, measure: str, g: Callable[[np.ndarray], np.ndarray],
                     hi: float, spec: QuadratureSpec,
                     breakpoints: Sequence[float] = (),
                     lo: float | None = None) -> TermValue:
    """cp * integral of g(rho) * radial density over (lo, hi), split at the
    breakpoints.  ``lo`` defaults to a floor tiny enough that the omitted
    mass of every integrable report integrand is below the error budget."""
    cp = model.cp_constant(measure)
    lo = RADIAL_FLOOR * hi if lo is None else lo
    cuts = sorted({lo, hi, *[b for b in breakpoints if lo < b < hi]})
    total, err = 0.0, 0.0

    def h(rho: np.ndarray) -> np.ndarray:
        return np.asarray(g(rho), dtype=float) * \
            model.radial_volume_density(rho)

    for a, b in zip(cuts[:-1], cuts[1:]):
        v, e = radial_integrate(h, a, b, spec)
        total += v
        err += e
    return TermValue(cp * total, cp * err)


def _slack_budget(spec: QuadratureSpec, terms: dict) -> float:
    err = sum(t.error for t in terms.values())
    scale = max((abs(t.value) for t in terms.values()), default=1.0)
    return err + spec.abs_tol + spec.rel_tol * max(1.0, scale)


def _model_tag(model) -> str:
    return repr(model)


# ------------------------------------------------------------- hardy family
def hardy_report(model, measure: str, u, beta: float,
                 spec: QuadratureSpec | None = None) -> InequalityReport:
    """The curvature-weighted Hardy inequality: gradient energy against the
    sharp ``(n-2-beta)^2/4`` term plus the comparison remainder term."""
    spec = spec or QuadratureSpec()
    n = model.n
    if not n - 2.0 > beta:
        raise PreconditionError(f"hardy needs n - 2 > beta, got n={n}, "
                                f"beta={beta}")
    gam = hardy_gamma(n, beta)
    c_main = gam * gam
    c_rem = 0.5 * (n - 1.0) * (n - 2.0 - beta)

    radial = _as_radial(u)
    if radial is not None:
        prof, _orient = radial
        hi = prof.support
        bks = prof.breakpoints
        lhs = _radial_integral(
            model, measure,
            lambda rho: prof.d1(rho) ** 2 * rho ** (-beta), hi, spec, bks)
        main = _radial_integral(
            model, measure,
            lambda rho: prof.f(rho) ** 2 * rho ** (-2.0 - beta), hi, spec, bks)
        if model.curvature == 0.0:
            rem = TermValue(0.0, 0.0)
        else:
            rem = _radial_integral(
                model, measure,
                lambda rho: prof.f(rho) ** 2 * rho ** (-2.0 - beta)
                * model.comparison_remainder(rho), hi, spec, bks)
    else:
        lhs, main, rem = _hardy_terms_field(model, measure, u, beta, spec)

    terms = {"lhs": lhs,
             "main": TermValue(c_main * main.value, c_main * main.error),
             "remainder": TermValue(c_rem * rem.value, c_rem * rem.error)}
    slack = terms["lhs"].value - terms["main"].value - terms["remainder"].value
    tol = _slack_budget(spec, terms)
    constants = {"n": n, "beta": beta, "gamma": gam,
                 "main_coefficient": c_main, "remainder_coefficient": c_rem,
                 "k": model.curvature, "lambda_F": model.reversibility,
                 "Lambda_F": model.uniformity}
    return InequalityReport("hardy", _model_tag(model), measure, beta,
                            constants, terms, slack, tol, slack >= -tol)


def _hardy_terms_field(model, measure: str, u: fc.ScalarField, beta: float,
                       spec: QuadratureSpec) -> tuple[TermValue, ...]:
    if u.support_radius is None:
        raise PreconditionError("scalar fields need a support_radius bound")
    hi = u.support_radius * model.reversibility

    def pointwise(rr: np.ndarray, ww: np.ndarray):
        x = model.point_from_backward_polar(rr, ww)
        vals = np.array([u(p) for p in x])
        du = np.array([fc.differential(u, p) for p in x])
        fstar = np.asarray(model.conorm(x, du))
        sgn = np.sign(vals)
        rho_u = np.where(sgn > 0, model.rho_minus(x),
                         np.where(sgn < 0, model.rho_plus(x),
                                  0.5 * (np.asarray(model.rho_plus(x))
                                         + np.asarray(model.rho_minus(x)))))
        return vals, fstar, rho_u

    def make(which: str):
        def integrand(rr: np.ndarray, ww: np.ndarray) -> np.ndarray:
            vals, fstar, rho_u = pointwise(rr, ww)
            if which == "lhs":
                return fstar**2 * rho_u ** (-beta)
            core = vals**2 * rho_u ** (-2.0 - beta)
            if which == "main":
                return core
            return core * np.asarray(model.comparison_remainder(rho_u))
        return integrand

    lo = RADIAL_FLOOR * hi
    lhs = TermValue(*annulus_integrate(model, measure, make("lhs"),
                                       lo, hi, spec))
    main = TermValue(*annulus_integrate(model, measure, make("main"),
                                        lo, hi, spec))
    if model.curvature == 0.0:
        rem = TermValue(0.0, 0.0)
    else:
        rem = TermValue(*annulus_integrate(model, measure, make("rem"),
                                           lo, hi, spec))
    return lhs, main, rem


def hardy_bv_report(model, measure: str, u, beta: float,
                    spec: QuadratureSpec | None = None) -> InequalityReport:
    """Refined Hardy inequality with the Brezis-Vazquez remainder
    (C/Lambda_F) * integral of u^2/rho_u^beta, for strictly negative k."""
    spec = spec or QuadratureSpec()
    base = hardy_report(model, measure, u, beta, spec)
    cbv = bv_constant(model)
    coeff = cbv / model.uniformity
    prof, _ = _require_radial(u)
    extra = _radial_integral(
        model, measure,
        lambda rho: prof.f(rho) ** 2 * rho ** (-beta),
        prof.support, spec, prof.breakpoints)
    terms = dict(base.terms)
    terms["brezis_vazquez"] = TermValue(coeff * extra.value,
                                        coeff * extra.error)
    slack = base.slack - terms["brezis_vazquez"].value
    tol = _slack_budget(spec, terms)
    constants = dict(base.constants)
    constants.update({"C": cbv, "bv_coefficient": coeff})
    return InequalityReport("hardy-bv", _model_tag(model), measure, beta,
                            constants, terms, slack, tol, slack >= -tol)


def poincare_report(model, measure: str, v, anchor_sign: int = 1,
                    spec: QuadratureSpec | None = None) -> InequalityReport:
    """Weighted Poincare-type inequality
    int v^2/rho^{n-2} <= (2 lambda_F/(sqrt(|k|) min(1,n-1)))^2
    int F^2(grad v)/rho^{n-2}; slack is RHS - LHS."""
    spec = spec or QuadratureSpec()
    if not model.curvature < 0.0:
        raise PreconditionError("poincare-type inequality needs k < 0")
    c = poincare_constant(model)
    n = model.n
    prof, _ = _require_radial(v)
    lhs = _radial_integral(
        model, measure,
        lambda rho: prof.f(rho) ** 2 * rho ** (2.0 - n),
        prof.support, spec, prof.breakpoints)
    grad = _radial_integral(
        model, measure,
        lambda rho: prof.d1(rho) ** 2 * rho ** (2.0 - n),
        prof.support, spec, prof.breakpoints)
    terms = {"lhs": lhs,
             "gradient_side": TermValue(c * grad.value, c * grad.error)}
    slack = terms["gradient_side"].value - terms["lhs"].value
    tol = _slack_budget(spec, terms)
    constants = {"n": n, "k": model.curvature, "constant": c,
                 "anchor_sign": anchor_sign,
                 "lambda_F": model.reversibility}
    return InequalityReport("poincare", _model_tag(model), measure, 0.0,
                            constants, terms, slack, tol, slack >= -tol)


def uncertainty_report(model, measure: str, u, beta: float,
                       spec: QuadratureSpec | None = None) -> InequalityReport:
    """Uncertainty-principle corollary:
    sqrt(int rho^{2+beta} u^2) sqrt(int F^2(grad u)/rho^beta)
    >= ((n-2-beta)/2) int u^2."""
    spec = spec or QuadratureSpec()
    n = model.n
    if not n - 2.0 > beta:
        raise PreconditionError("uncertainty needs n - 2 > beta")
    if model.curvature > 0.0:
        raise PreconditionError("uncertainty corollary needs K <= 0")
    gam = hardy_gamma(n, beta)
    prof, _ = _require_radial(u)
    hi, bks = prof.support, prof.breakpoints
    weighted = _radial_integral(
        model, measure,
        lambda rho: prof.f(rho) ** 2 * rho ** (2.0 + beta), hi, spec, bks)
    grad = _radial_integral(
        model, measure,
        lambda rho: prof.d1(rho) ** 2 * rho ** (-beta), hi, spec, bks)
    mass = _radial_integral(
        model, measure, lambda rho: prof.f(rho) ** 2, hi, spec, bks)
    lhs = math.sqrt(max(weighted.value, 0.0)) * math.sqrt(max(grad.value, 0.0))
    lhs_err = 0.0
    if weighted.value > 0.0 and grad.value > 0.0:
        lhs_err = 0.5 * lhs * (weighted.error / weighted.value
                               + grad.error / grad.value)
    terms = {"weighted_mass": weighted, "gradient_energy": grad,
             "mass": mass,
             "lhs_product": TermValue(lhs, lhs_err),
             "rhs": TermValue(gam * mass.value, gam * mass.error)}
    slack = lhs - gam * mass.value
    tol = _slack_budget(spec, terms)
    constants = {"n": n, "beta": beta, "coefficient": gam,
                 "k": model.curvature}
    return InequalityReport("uncertainty", _model_tag(model), measure, beta,
                            constants, terms, slack, tol, slack >= -tol)


# ----------------------------------------------------------- rellich family
def gbeta(model, measure: str, u, beta: float,
          spec: QuadratureSpec | None = None) -> tuple[float, float, float]:
    """The admissibility functional
    G^beta(u) = int [u^2 varrho_{u,beta} + 2 rho_u^{-beta-2} div(u grad u)].

    Returns (value, scale, error) where scale is the sum of the absolute
    term integrals; membership in the kernel class is |value| <= 1e-6 * scale.
    """
    spec = spec or QuadratureSpec()
    nn = beta + 2.0
    radial = _as_radial(u)
    if radial is not None:
        prof, _orient = radial
        hi, bks = prof.support, prof.breakpoints
        if not prof.nonincreasing:
            raise PreconditionError("radial G^beta path expects a "
                                    "nonincreasing profile")

        def varrho(rho: np.ndarray) -> np.ndarray:
            return -np.asarray(model.radial_laplacian(measure, nn, "minus",
                                                      rho))

        t1 = _radial_integral(
            model, measure, lambda rho: prof.f(rho) ** 2 * varrho(rho),
            hi, spec, bks)

        def div_term(rho: np.ndarray) -> np.ndarray:
            lap = prof.d2(rho) + prof.d1(rho) * \
                np.asarray(model.radial_mean_curvature(rho))
            return 2.0 * rho ** (-nn) * (prof.d1(rho) ** 2
                                         + prof.f(rho) * lap)

        t2 = _radial_integral(model, measure, div_term, hi, spec, bks)
        # Lipschitz kinks of the profile put a sphere-supported flux jump
        # into div(u grad u); the divergence is read distributionally there
        jump = _profile_flux_jump(model, measure, prof, nn, hi)
        # at the marginal exponent beta + 2 = n - 2 the power rho^{-(n-2)}
        # is the Green kernel: its distributional Laplacian carries the
        # point mass -(n-2) cp delta_p, which the classical formula misses
        green = 0.0
        f0 = float(prof.f(np.array([RADIAL_FLOOR * hi]))[0])
        if f0 != 0.0:
            if nn > model.n - 2.0 + 1e-12:
                raise PreconditionError(
                    "G^beta undefined: the profile is nonzero at the base "
                    "point while beta + 2 exceeds n - 2")
            if abs(nn - (model.n - 2.0)) <= 1e-12:
                green = (model.n - 2.0) * model.cp_constant(measure) * f0 * f0
        value = t1.value + t2.value + jump + green
        scale = abs(t1.value) + abs(t2.value)
        return value, scale, t1.error + t2.error

    return _gbeta_field(model, measure, u, beta, spec)


def _profile_flux_jump(model, measure: str, prof: RadialProfile, nn: float,
                       hi: float) -> float:
    """Interface contribution of 2 rho^{-nn} div(u grad u) across the radial
    spheres where the profile derivative jumps (the radial flux is f f')."""
    cp = model.cp_constant(measure)
    total = 0.0
    for bp in prof.breakpoints:
        if not 0.0 < bp < hi:
            continue
        below = float(prof.d1(np.array([np.nextafter(bp, 0.0)]))[0])
        above = float(prof.d1(np.array([np.nextafter(bp, np.inf)]))[0])
        if below == above:
            continue
        fval = float(prof.f(np.array([bp]))[0])
        w = float(model.radial_volume_density(np.array([bp]))[0])
        total += 2.0 * bp ** (-nn) * fval * (above - below) * w
    return cp * total


def _gbeta_field(model, measure: str, u: fc.ScalarField, beta: float,
                 spec: QuadratureSpec) -> tuple[float, float, float]:
    if u.support_radius is None:
        raise PreconditionError("scalar fields need a support_radius bound")
    hi = u.support_radius * model.reversibility
    nn = beta + 2.0

    def make(which: str):
        def integrand(rr: np.ndarray, ww: np.ndarray) -> np.ndarray:
            x = model.point_from_backward_polar(rr, ww)
            out = np.empty(rr.size)
            for i, p in enumerate(x):
                val = u(p)
                sgn = 0 if val == 0.0 else (1 if val > 0.0 else -1)
                if which == "varrho":
                    out[i] = val * val * fc.varrho_density(model, sgn, beta,
                                                           p, measure)
                    continue
                du = fc.differential(u, p)
                fstar = float(model.conorm(p, du))
                if val == 0.0 and fstar < 1e-10:
                    out[i] = 0.0        # outside the support
                    continue
                rho_u = model.rho_u(sgn, p)
                try:
                    lap = fc.numeric_laplacian(model, measure, u, p)
                except fc.CriticalPointError:
                    lap = 0.0           # isolated critical point, excluded
                out[i] = 2.0 * rho_u ** (-nn) * (fstar**2 + val * lap)
            return out
        return integrand

    lo = 1e-6 * hi
    t1 = annulus_integrate(model, measure, make("varrho"), lo, hi, spec)
    t2 = annulus_integrate(model, measure, make("div"), lo, hi, spec)
    return t1[0] + t2[0], abs(t1[0]) + abs(t2[0]), t1[1] + t2[1]


def _rellich_core_terms(model, measure: str, prof: RadialProfile,
                        beta: float, spec: QuadratureSpec
                        ) -> dict[str, TermValue]:
    hi, bks = prof.support, prof.breakpoints

    def lap(rho: np.ndarray) -> np.ndarray:
        return prof.d2(rho) + prof.d1(rho) * \
            np.asarray(model.radial_mean_curvature(rho))

    out = {
        "lhs": _radial_integral(
            model, measure, lambda rho: lap(rho) ** 2 * rho ** (-beta),
            hi, spec, bks),
        "weight4": _radial_integral(
            model, measure,
            lambda rho: prof.f(rho) ** 2 * rho ** (-4.0 - beta),
            hi, spec, bks),
    }
    if model.curvature == 0.0:
        out["weight4_rem"] = TermValue(0.0, 0.0)
    else:
        out["weight4_rem"] = _radial_integral(
            model, measure,
            lambda rho: prof.f(rho) ** 2 * rho ** (-4.0 - beta)
            * model.comparison_remainder(rho), hi, spec, bks)
    return out


def _require_kernel(model, measure, u, beta, spec) -> tuple[float, float]:
    gval, gscale, _gerr = gbeta(model, measure, u, beta, spec)
    if abs(gval) > 1e-6 * max(gscale, 1e-300):
        raise GBetaViolation(
            f"G^beta(u) = {gval:.3e} exceeds the membership band "
            f"1e-6 * {gscale:.3e}")
    return gval, gscale


def rellich_report(model, measure: str, u, beta: float,
                   spec: QuadratureSpec | None = None) -> InequalityReport:
    """Sharp Rellich inequality for kernel-class test functions."""
    spec = spec or QuadratureSpec()
    n = model.n
    if not (-2.0 < beta < n - 4.0):
        raise PreconditionError(f"rellich needs -2 < beta < n - 4, got "
                                f"beta={beta}, n={n}")
    gval, gscale = _require_kernel(model, measure, u, beta, spec)
    prof, _ = _require_radial(u)
    delta = rellich_sharp_constant(n, beta)
    c_rem = (n - 1.0) * (n - 2.0) * (n + beta) * (n - 4.0 - beta) / 4.0
    core = _rellich_core_terms(model, measure, prof, beta, spec)
    terms = {
        "lhs": core["lhs"],
        "main": TermValue(delta * core["weight4"].value,
                          delta * core["weight4"].error),
        "remainder": TermValue(c_rem * core["weight4_rem"].value,
                               c_rem * core["weight4_rem"].error),
    }
    slack = terms["lhs"].value - terms["main"].value - terms["remainder"].value
    tol = _slack_budget(spec, terms)
    constants = {"n": n, "beta": beta, "gamma": rellich_gamma(n, beta),
                 "delta": delta, "remainder_coefficient": c_rem,
                 "k": model.curvature, "gbeta_value": gval,
                 "gbeta_scale": gscale}
    return InequalityReport("rellich", _model_tag(model), measure, beta,
                            constants, terms, slack, tol, slack >= -tol)


def rellich_bv_report(model, measure: str, u, beta: float,
                      spec: QuadratureSpec | None = None) -> InequalityReport:
    """Refined Rellich inequality with three Brezis-Vazquez style remainders,
    plus the intermediate square-completion inequality as an internal check."""
    spec = spec or QuadratureSpec()
    n = model.n
    if not (0.0 <= beta < n - 2.0):
        raise PreconditionError("refined rellich needs 0 <= beta < n - 2")
    if not model.curvature < 0.0:
        raise PreconditionError("refined rellich needs k < 0")
    gval, gscale = _require_kernel(model, measure, u, beta, spec)
    prof, _ = _require_radial(u)
    hi, bks = prof.support, prof.breakpoints
    cbv = bv_constant(model)
    lam = model.uniformity
    delta = rellich_sharp_constant(n, beta)
    c_rem4 = (n - 1.0) * (n - 2.0) * (n + beta) * (n - 4.0 - beta) / 4.0
    c_w2 = (n - 2.0 - beta) * (n - 2.0 + beta) * cbv / (2.0 * lam)
    c_w2_rem = (n - 1.0) * (n - 2.0) * cbv / lam
    c_w0 = cbv * cbv / (lam * lam)

    core = _rellich_core_terms(model, measure, prof, beta, spec)
    w2 = _radial_integral(
        model, measure,
        lambda rho: prof.f(rho) ** 2 * rho ** (-2.0 - beta), hi, spec, bks)
    w2_rem = _radial_integral(
        model, measure,
        lambda rho: prof.f(rho) ** 2 * rho ** (-2.0 - beta)
        * model.comparison_remainder(rho), hi, spec, bks)
    w0 = _radial_integral(
        model, measure,
        lambda rho: prof.f(rho) ** 2 * rho ** (-beta), hi, spec, bks)

    terms = {
        "lhs": core["lhs"],
        "main": TermValue(delta * core["weight4"].value,
                          delta * core["weight4"].error),
        "remainder4": TermValue(c_rem4 * core["weight4_rem"].value,
                                c_rem4 * core["weight4_rem"].error),
        "weight2": TermValue(c_w2 * w2.value, c_w2 * w2.error),
        "weight2_remainder": TermValue(c_w2_rem * w2_rem.value,
                                       c_w2_rem * w2_rem.error),
        "weight0": TermValue(c_w0 * w0.value, c_w0 * w0.error),
    }
    slack = terms["lhs"].value - sum(t.value for k, t in terms.items()
                                     if k != "lhs")
    tol = _slack_budget(spec, terms)

    checks: dict = {}
    if beta < n - 4.0:
        # intermediate inequality: completed-square energy bounded by the
        # Rellich excess minus the first-order remainder
        q = (n + beta) * (n - 4.0 - beta) / 4.0

        def sq(rho: np.ndarray) -> np.ndarray:
            lap = prof.d2(rho) + prof.d1(rho) * \
                np.asarray(model.radial_mean_curvature(rho))
            return (lap + q * prof.f(rho) / rho**2) ** 2 * rho ** (-beta)

        de1_lhs = _radial_integral(model, measure, sq, hi, spec, bks)
        de1_rhs = (core["lhs"].value - delta * core["weight4"].value
                   - c_rem4 * core["weight4_rem"].value
                   - 2.0 * q * cbv / lam * w2.value)
        checks["de1_lhs"] = de1_lhs.value
        checks["de1_rhs"] = de1_rhs
        checks["de1_ok"] = bool(de1_lhs.value <= de1_rhs + tol
                                and de1_lhs.value >= -tol)

    constants = {"n": n, "beta": beta, "delta": delta, "C": cbv,
                 "Lambda_F": lam, "k": model.curvature,
                 "coeff_remainder4": c_rem4, "coeff_weight2": c_w2,
                 "coeff_weight2_remainder": c_w2_rem, "coeff_weight0": c_w0,
                 "gbeta_value": gval, "gbeta_scale": gscale}
    return InequalityReport("rellich-bv", _model_tag(model), measure, beta,
                            constants, terms, slack, tol, slack >= -tol,
                            checks)


# ------------------------------------------------------------------- sweeps
def _truncated_family_integrals(model, measure: str, gamma: float,
                                order: int, eps: float, r: float, R: float,
                                spec: QuadratureSpec
                                ) -> tuple[float, float, float, float]:
    """(I1, I2, J1, error) for u = psi * max(eps, rho)^(-gamma).

    ``order`` 1 selects the gradient functional (Hardy), 2 the Laplacian
    functional (Rellich); beta is implied by gamma through the sharp-exponent
    relations, so the inner power integrals stay exact.
    """
    n = model.n
    beta = (n - 2.0 - 2.0 * gamma) if order == 1 else (n - 4.0 - 2.0 * gamma)
    cp = model.cp_constant(measure)
    tf = RadialTestFunction(gamma, eps, SmoothCutoff(r, R))
    prof = tf.profile()

    # J1: the annulus mass of rho^{-n} between eps and r
    j1 = _radial_integral(model, measure, lambda rho: rho ** (-n),
                          r, spec, lo=eps)
    j1_val = j1.value
    err = j1.error

    if order == 1:
        # inner region: u constant, no gradient energy
        mid = gamma * gamma * j1_val
        err *= gamma * gamma
        outer = _radial_integral(
            model, measure,
            lambda rho: prof.d1(rho) ** 2 * rho ** (-beta), R, spec, lo=r)
        i1 = mid + outer.value
        weight = 2.0 + beta
    else:
        def lap_sq(rho: np.ndarray) -> np.ndarray:
            lap = prof.d2(rho) + prof.d1(rho) * \
                np.asarray(model.radial_mean_curvature(rho))
            return lap ** 2 * rho ** (-beta)

        mid_tv = _radial_integral(model, measure, lap_sq, r, spec, lo=eps)
        outer = _radial_integral(model, measure, lap_sq, R, spec, lo=r)
        i1 = mid_tv.value + outer.value
        err += mid_tv.error
        weight = 4.0 + beta
    err += outer.error + j1.error

    # I2: inner ball (exact monomial on flat models), annulus (= J1), tail
    if model.curvature == 0.0:
        inner = cp * eps ** (-2.0 * gamma) * \
            power_integral(n - 1.0 - weight, 0.0, eps)
    else:
        inner_tv = _radial_integral(
            model, measure,
            lambda rho: eps ** (-2.0 * gamma) * rho ** (-weight),
            eps, spec, lo=RADIAL_FLOOR * eps)
        inner = inner_tv.value
        err += inner_tv.error
    tail = _radial_integral(
        model, measure,
        lambda rho: prof.f(rho) ** 2 * rho ** (-weight), R, spec, lo=r)
    i2 = inner + j1_val + tail.value
    err += tail.error
    return i1, i2, j1_val, err


def _extrapolate_structured(ls: np.ndarray, quotients: np.ndarray,
                            j1s: np.ndarray, i2s: np.ndarray
                            ) -> tuple[float, float]:
    """Two-point log-gap extrapolation using the measured quotient structure.

    With K = J1/L and the epsilon-independent part c2 = I2 - J1, the
    quotient is A + d/(L + c2/K); the two smallest-eps points then determine
    the intercept A and gap coefficient d exactly on the flat models.
    """
    k_unit = j1s[-1] / ls[-1]
    b_off = (i2s[-1] - j1s[-1]) / k_unit
    l1, l2 = ls[-2] + b_off, ls[-1] + b_off
    a = (quotients[-1] * l2 - quotients[-2] * l1) / (l2 - l1)
    d = (quotients[-2] - a) * l1
    return a, d


def _extrapolate_moebius(ls: np.ndarray, quotients: np.ndarray) -> float:
    """Three-point rational fit R = A + d/(L + b) on the smallest epsilons."""
    l1, l2, l3 = ls[-3:]
    r1, r2, r3 = quotients[-3:]
    p = (l2 - l1) / (r1 - r2)
    q = (l3 - l2) / (r2 - r3)
    if p == q:
        return r3
    b = (q * l1 - p * l3) / (p - q)
    d = (l1 + b) * (l2 + b) / p
    return r1 - d / (l1 + b)


def _sharpness_sweep(model, measure: str, beta: float, r: float, R: float,
                     eps_list: Sequence[float], spec: QuadratureSpec,
                     order: int, orientation: str) -> SweepTable:
    n = model.n
    if order == 1:
        if not n - 2.0 > beta:
            raise PreconditionError("hardy sweep needs n - 2 > beta")
        gamma = hardy_gamma(n, beta)
        sharp = gamma * gamma
        theorem = "hardy-sweep"
    else:
        if not (-2.0 < beta < n - 4.0):
            raise PreconditionError("rellich sweep needs -2 < beta < n - 4")
        gamma = rellich_gamma(n, beta)
        sharp = rellich_sharp_constant(n, beta)
        theorem = "rellich-sweep"
    eps_arr = np.asarray(sorted(set(float(e) for e in eps_list), reverse=True))
    if not (0.0 < eps_arr[0] < r < R):
        raise PreconditionError("need 0 < eps < r < R")

    rows = []
    cp = model.cp_constant(measure)
    use_annulus = model.n <= 4
    for eps in eps_arr:
        i1, i2, j1, err = _truncated_family_integrals(
            model, measure, gamma, order, float(eps), r, R, spec)
        j1_exact = cp * math.log(r / eps) if model.curvature == 0.0 \
            else float("nan")
        if use_annulus:
            j1_quad = annulus_integrate(
                model, measure,
                lambda rr, ww: rr ** (-model.n), float(eps), r, spec)[0]
        else:
            j1_quad = j1
        rows.append(SweepRow(float(eps), i1, i2, i1 / i2, j1_quad, j1_exact,
                             err))

    ls = np.log(r / eps_arr)
    quotients = np.array([row.quotient for row in rows])
    j1s = np.array([row.j1_quadrature for row in rows])
    i2s = np.array([row.i2 for row in rows])
    a_struct, d_gap = _extrapolate_structured(ls, quotients, j1s, i2s)
    a_struct, d_gap = float(a_struct), float(d_gap)
    a_moeb = float(_extrapolate_moebius(ls, quotients)) \
        if eps_arr.size >= 3 else a_struct
    monotone = bool(np.all(np.diff(quotients) < 0.0))
    passed = bool(monotone and abs(a_struct - sharp) <= 0.01 * sharp
                  and d_gap > 0.0)
    constants = {"n": n, "beta": beta, "gamma": gamma, "r": r, "R": R,
                 "cp": cp, "orientation": orientation,
                 "k": model.curvature}
    return SweepTable(theorem, _model_tag(model), measure, beta, constants,
                      rows, sharp, a_struct, a_moeb, d_gap, monotone, passed)


def hardy_sharpness_sweep(model, measure: str, beta: float, r: float,
                          R: float, eps_list: Sequence[float],
                          spec: QuadratureSpec | None = None,
                          orientation: str = "minus") -> SweepTable:
    """Rayleigh quotients of the truncated family converging to the sharp
    Hardy constant (n-2-beta)^2/4, with the exact annulus-mass cross-check."""
    return _sharpness_sweep(model, measure, beta, r, R, eps_list,
                            spec or QuadratureSpec(), 1, orientation)


def rellich_sharpness_sweep(model, measure: str, beta: float, r: float,
                            R: float, eps_list: Sequence[float],
                            spec: QuadratureSpec | None = None,
                            orientation: str = "minus") -> SweepTable:
    """Rayleigh quotients converging to the sharp Rellich constant
    (n+beta)^2 (n-4-beta)^2/16; on the flat models the curvature correction
    vanishes and the limit is exact."""
    return _sharpness_sweep(model, measure, beta, r, R, eps_list,
                            spec or QuadratureSpec(), 2, orientation)


# ----------------------------------------------------------------- campaign
def refined_cs_campaign(norm: MinkowskiNorm, samples: int,
                        seed: int) -> CampaignSummary:
    """Randomized verification of the sharpened Cauchy-Schwarz inequality.

    Draws covector pairs, checks the slack is nonnegative (to rounding),
    compares the colinear tightness identity and the colinear-negative
    closed form, and bounds the second derivative along segments from below
    by 2 F*^2(eta)/Lambda_F.
    """
    rng = np.random.default_rng(seed)
    n = norm.dim
    xi = rng.standard_normal((samples, n))
    eta = rng.standard_normal((samples, n))
    slack = np.asarray(norm.refined_cs_slack(xi, eta))
    scale = np.maximum(1.0, np.asarray(norm.dual_norm(xi + eta)) ** 2)
    rel = slack / scale
    i_min = int(np.argmin(rel))
    counts, edges = np.histogram(np.log10(np.maximum(slack, 1e-300)),
                                 bins=24)
    lam = norm.uniformity()

    # colinear-positive tightness: slack(xi, s xi) = s^2 F*^2(xi) (1 - 1/Lam)
    s_vals = rng.uniform(0.1, 3.0, size=min(samples, 1000))
    xi_c = rng.standard_normal((s_vals.size, n))
    tight = np.asarray(norm.refined_cs_slack(xi_c, s_vals[:, None] * xi_c))
    fs2 = np.asarray(norm.dual_norm(xi_c)) ** 2
    colinear_dev = float(np.max(np.abs(
        tight - s_vals**2 * fs2 * (1.0 - 1.0 / lam))))

    # colinear-negative closed form (eta = -kappa xi, kappa >= 1, F*(-xi)
    # <= F*(xi)): slack/F*^2(xi) = (2kappa-1)
    #   + ((kappa-1)^2 - kappa^2/Lam) F*^2(-xi)/F*^2(xi)
    kap = rng.uniform(1.0, 4.0, size=min(samples, 1000))
    xi_k = rng.standard_normal((kap.size, n))
    swap = np.asarray(norm.dual_norm(-xi_k)) > np.asarray(norm.dual_norm(xi_k))
    xi_k[swap] = -xi_k[swap]
    got = np.asarray(norm.refined_cs_slack(xi_k, -kap[:, None] * xi_k))
    f_p = np.asarray(norm.dual_norm(xi_k)) ** 2
    f_m = np.asarray(norm.dual_norm(-xi_k)) ** 2
    want = f_p * ((2.0 * kap - 1.0)
                  + ((kap - 1.0) ** 2 - kap**2 / lam) * f_m / f_p)
    case2_dev = float(np.max(np.abs(got - want)
                             / np.maximum(1.0, np.abs(want))))

    # segment convexity: f''(t) = 2 g*_{xi+t eta}(eta, eta) >= 2 F*^2(eta)/Lam
    margin = math.inf
    t_grid = np.linspace(0.0, 1.0, 9)
    for i in range(min(samples, 200)):
        a, e = xi[i], eta[i]
        seg = a[None, :] + t_grid[:, None] * e[None, :]
        norms = np.linalg.norm(seg, axis=1)
        if np.min(norms) < 1e-6:
            continue
        bound = 2.0 * float(norm.dual_norm(e)) ** 2 / lam
        for row in seg:
            f2 = 2.0 * norm.dual_fundamental_form(row, e, e)
            margin = min(margin, f2 - bound)

    min_slack = float(slack[i_min])
    passed = bool(np.all(slack >= -1e-10 * scale)
                  and colinear_dev <= 1e-10
                  and case2_dev <= 1e-9
                  and margin >= -1e-9)
    return CampaignSummary(
        drift=norm.drift, dim=n, samples=samples,
        min_slack=min_slack, min_scale=float(scale[i_min]),
        argmin_xi=[float(v) for v in xi[i_min]],
        argmin_eta=[float(v) for v in eta[i_min]],
        histogram_counts=[int(c) for c in counts],
        histogram_edges=[float(e) for e in edges],
        colinear_max_dev=colinear_dev, case2_max_dev=case2_dev,
        case3_margin=float(margin), passed=passed)


# ---------------------------------------------------------------- batteries
def _gauss_profile(a: float, support: float) -> RadialProfile:
    return RadialProfile(
        f=lambda rho: np.exp(-a * np.asarray(rho) ** 2),
        d1=lambda rho: -2.0 * a * np.asarray(rho)
        * np.exp(-a * np.asarray(rho) ** 2),
        d2=lambda rho: (4.0 * a * a * np.asarray(rho) ** 2 - 2.0 * a)
        * np.exp(-a * np.asarray(rho) ** 2),
        support=support, nonincreasing=True, label=f"gauss[{a}]")


def _expdec_profile(a: float, support: float) -> RadialProfile:
    return RadialProfile(
        f=lambda rho: np.exp(-a * np.asarray(rho)),
        d1=lambda rho: -a * np.exp(-a * np.asarray(rho)),
        d2=lambda rho: a * a * np.exp(-a * np.asarray(rho)),
        support=support, nonincreasing=True, label=f"exp[{a}]")


def _lorentz_profile(q: float, support: float) -> RadialProfile:
    def f(rho):
        return (1.0 + np.asarray(rho) ** 2) ** (-q)

    def d1(rho):
        rho = np.asarray(rho)
        return -2.0 * q * rho * (1.0 + rho**2) ** (-q - 1.0)

    def d2(rho):
        rho = np.asarray(rho)
        return (-2.0 * q * (1.0 + rho**2) ** (-q - 1.0)
                + 4.0 * q * (q + 1.0) * rho**2 * (1.0 + rho**2) ** (-q - 2.0))

    return RadialProfile(f, d1, d2, support=support, nonincreasing=True,
                         label=f"lorentz[{q}]")


def radial_battery(count: int, radius: float = 1.0) -> list[RadialProfile]:
    """A deterministic family of smooth, nonnegative, nonincreasing,
    compactly supported radial profiles (cutoffs times decaying modifiers)."""
    out = []
    for i in range(count):
        frac = i / max(count - 1, 1)
        r_i = radius * (0.25 + 0.35 * frac)
        big_r = radius * (0.65 + 0.35 * frac)
        base = cutoff_profile(r_i, big_r)
        kind = i % 4
        if kind == 0:
            prof = base
        elif kind == 1:
            prof = profile_product(base, _gauss_profile(0.5 + frac, big_r))
        elif kind == 2:
            prof = profile_product(base, _expdec_profile(0.4 + frac, big_r))
        else:
            prof = profile_product(base, _lorentz_profile(1.0 + frac, big_r))
        out.append(prof)
    return out
