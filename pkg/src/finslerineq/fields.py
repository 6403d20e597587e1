"""Pointwise differential calculus on model spaces.

Differentials are analytic when the field carries one, otherwise central
finite differences.  Gradients go through the inverse Legendre transform of
the model's norm (``model.sharp``), and the Laplacian is assembled in
divergence form: the flux ``sigma(x) * grad u`` is differenced componentwise.
The nonlinear Finsler Laplacian is only defined where ``du != 0``; stencil
points with a nearly vanishing differential are reported via
:class:`CriticalPointError` so callers can exclude them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

CRITICAL_DIFFERENTIAL = 1e-8


class CriticalPointError(ValueError):
    """The differential is too small for the Laplacian branch to be reliable."""


@dataclass
class ScalarField:
    """A scalar field with optional analytic differential.

    ``fn`` maps a point (n,) to a float; ``grad``, when given, maps a point
    to the differential components (n,).  ``support_radius`` bounds the
    support in the relevant radial variable when known.
    """

    fn: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray] | None = None
    support_radius: float | None = None

    def __call__(self, x: np.ndarray) -> float:
        return float(self.fn(np.asarray(x, dtype=float)))

    def negated(self) -> "ScalarField":
        g = None if self.grad is None else (lambda x: -self.grad(x))
        return ScalarField(lambda x: -self.fn(x), g, self.support_radius)


def differential(field: ScalarField, x: np.ndarray,
                 step: float | None = None) -> np.ndarray:
    """du at x: analytic when available, else O(step^2) central differences."""
    x = np.asarray(x, dtype=float)
    if field.grad is not None:
        return np.asarray(field.grad(x), dtype=float)
    h = step if step is not None else 1e-6 * max(1.0, float(np.linalg.norm(x)))
    out = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        out[i] = (field(x + e) - field(x - e)) / (2.0 * h)
    return out


def gradient(model, field: ScalarField, x: np.ndarray,
             step: float | None = None) -> np.ndarray:
    """Finsler gradient: inverse Legendre transform of du (zero covector maps
    to the zero vector by convention)."""
    x = np.asarray(x, dtype=float)
    du = differential(field, x, step)
    if float(np.linalg.norm(du)) == 0.0:
        return np.zeros_like(du)
    return model.sharp(x, du)


def gradient_norm(model, field: ScalarField, x: np.ndarray,
                  step: float | None = None) -> float:
    """F(grad u) = F*(du) at x."""
    du = differential(field, np.asarray(x, dtype=float), step)
    return float(model.conorm(x, du))


def numeric_laplacian(model, measure: str, field: ScalarField, x: np.ndarray,
                      flux_step: float | None = None,
                      diff_step: float | None = None) -> float:
    """Divergence-form Laplacian: (1/sigma) d_i (sigma (grad u)^i) by central
    differences of the flux.  Raises CriticalPointError when any stencil
    point has |du| below the reliability threshold."""
    x = np.asarray(x, dtype=float)
    h = flux_step if flux_step is not None \
        else 1e-4 * max(1.0, float(np.linalg.norm(x)))

    def flux(z: np.ndarray) -> np.ndarray:
        du = differential(field, z, diff_step)
        if float(np.linalg.norm(du)) < CRITICAL_DIFFERENTIAL:
            raise CriticalPointError(
                f"|du| ~ {np.linalg.norm(du):.2e} at {z}: Laplacian branch "
                "undefined near critical points")
        return float(model.density(z, measure)) * model.sharp(z, du)

    div = 0.0
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        div += (flux(x + e)[i] - flux(x - e)[i]) / (2.0 * h)
    return div / float(model.density(x, measure))


def div_u_grad_u(model, measure: str, field: ScalarField, x: np.ndarray,
                 flux_step: float | None = None) -> float:
    """div(u grad u) = F^2(grad u) + u * Laplacian(u) at x."""
    x = np.asarray(x, dtype=float)
    fsq = gradient_norm(model, field, x) ** 2
    return fsq + field(x) * numeric_laplacian(model, measure, field, x,
                                              flux_step=flux_step)


def varrho_density(model, sign: int, beta: float, x: np.ndarray,
                   measure: str = "bh") -> float:
    """The sign-cased density entering the G^beta functional:
    -Delta(rho_minus^(-beta-2)) where u > 0, Delta(-rho_plus^(-beta-2)) where
    u < 0, and the average of the two branches on the zero set.  Evaluated
    through the model's closed-form radial Laplacians (the rho_minus branch
    is exactly the reverse-metric forward computation)."""
    x = np.asarray(x, dtype=float)
    nn = beta + 2.0
    if sign > 0:
        return -float(model.radial_laplacian(measure, nn, "minus",
                                             model.rho_minus(x)))
    if sign < 0:
        return float(model.radial_laplacian(measure, nn, "plus",
                                            model.rho_plus(x)))
    minus = -float(model.radial_laplacian(measure, nn, "minus",
                                          model.rho_minus(x)))
    plus = float(model.radial_laplacian(measure, nn, "plus",
                                        model.rho_plus(x)))
    return 0.5 * (minus + plus)


# ------------------------------------------------------- field constructors
def radial_field(model, profile, orientation: str = "minus") -> ScalarField:
    """The scalar field u = f(rho_minus) (orientation "minus") or
    u = -f(rho_plus) (orientation "plus") with analytic differential."""
    sgn = 1.0 if orientation == "minus" else -1.0

    def fn(x: np.ndarray) -> float:
        rho = model.rho_minus(x) if orientation == "minus" \
            else model.rho_plus(x)
        return sgn * float(profile.f(np.asarray(rho)))

    def grad(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if orientation == "minus":
            rho = float(model.rho_minus(x))
            drho = _d_rho_minus(model, x)
        else:
            rho = float(model.rho_plus(x))
            drho = _d_rho_plus(model, x)
        return sgn * float(profile.d1(np.asarray(rho))) * drho

    return ScalarField(fn, grad, support_radius=profile.support)


def _d_rho_plus(model, x: np.ndarray) -> np.ndarray:
    from .models import RandersFlat, HyperbolicBall
    if isinstance(model, RandersFlat):
        out = x / np.linalg.norm(x)
        out[-1] += model.drift
        return out
    if isinstance(model, HyperbolicBall):
        lam = model._conformal(x)
        r = np.linalg.norm(x)
        return float(lam) * x / r
    raise TypeError(f"unsupported model {model!r}")


def _d_rho_minus(model, x: np.ndarray) -> np.ndarray:
    from .models import RandersFlat, HyperbolicBall
    if isinstance(model, RandersFlat):
        out = x / np.linalg.norm(x)
        out[-1] -= model.drift
        return out
    if isinstance(model, HyperbolicBall):
        return _d_rho_plus(model, x)
    raise TypeError(f"unsupported model {model!r}")
