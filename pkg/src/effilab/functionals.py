"""Cumulant functionals of a location density, by adaptive quadrature.

Computes the Fisher information

    I(f) = E psi_1(X)^2 = integral (f'/f)^2 f,

the five normalised moment ratios consumed by the quantile expansions,

    eta2 = E psi_2^2 / I^2      eta3 = E psi_1^3 / I^(3/2)
    eta4 = E psi_1^4 / I^2      eta5 = E psi_1^5 / I^(5/2)
    eta6 = E psi_2 psi_3 / I^(5/2),

and the derived quantities that govern third/fourth-order efficiency of
the location MLE: the Cauchy-Schwarz gap, the third-order coefficient,
the integration-by-parts identity residuals, and the L2(f) defect of
the score-dependence relation psi_1 = lambda * (psi_1' + I).

Expectations are evaluated with scipy's adaptive quadrature after a
change of variables; see ``DomainMap``.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate

from .densities import LocationDensity
from .errors import NumericalError

__all__ = [
    "DomainMap",
    "QuadratureSpec",
    "DEFAULT_QUADRATURE",
    "EtaSet",
    "IdentityResiduals",
    "DependenceResidual",
    "expectation",
    "fisher_information",
    "eta_set",
    "identity_suite",
    "cs_gap",
    "third_order_coeff",
    "cs_dependence_residual",
]


class DomainMap(enum.Enum):
    """Change of variables applied before adaptive quadrature.

    CDF_SUBSTITUTION integrates in u = F(x) over (0, 1), split at 1/2
    with the upper half parameterised by the survival probability so
    that both tails are resolved at full relative accuracy.  This is
    the default: it tames the doubly-exponential Gumbel tail and the
    exponential logistic tails uniformly.

    TWO_SIDED_EXPONENTIAL maps t in (-1, 1) to
    x = alpha + beta * sign(t) * (-log(1 - |t|)) and integrates
    g(x) f(x) dx/dt directly; kept as an independent cross-check.
    """

    CDF_SUBSTITUTION = "cdf-substitution"
    TWO_SIDED_EXPONENTIAL = "two-sided-exponential-map"


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_refinements: int = 60
    domain_map: DomainMap = DomainMap.CDF_SUBSTITUTION

    def __post_init__(self):
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise ValueError("quadrature tolerances must be positive")
        if self.max_refinements < 1:
            raise ValueError("max_refinements must be >= 1")


DEFAULT_QUADRATURE = QuadratureSpec()


@dataclass(frozen=True)
class EtaSet:
    """Functional fingerprint (I, eta2..eta6) of a location density.

    The constructor deliberately checks only I > 0: expansion formulas
    are routinely driven by hand-entered or synthetic eta values.  For
    sets derived from an actual density the moment inequalities
    eta2 >= 1, eta4 >= 1 and cs_gap >= 0 hold automatically and are
    asserted by the verification suite, not here.

    Fields accept exact ``fractions.Fraction`` values as well as
    floats; all downstream coefficient algebra preserves exactness.
    """

    I: float
    eta2: float
    eta3: float
    eta4: float
    eta5: float
    eta6: float

    def __post_init__(self):
        if not self.I > 0:
            raise ValueError(f"Fisher information must be positive, got {self.I}")

    def as_tuple(self):
        return (self.I, self.eta2, self.eta3, self.eta4, self.eta5, self.eta6)


class IdentityResiduals(NamedTuple):
    """Signed residuals (left minus right) of the four score identities.

    psi1_psi2:   E psi1 psi2   - (1/2) E psi1^3
    psi1sq_psi2: E psi1^2 psi2 - (2/3) E psi1^4
    psi1_mean:   E psi1
    psi2_mean:   E psi2
    """

    psi1_psi2: float
    psi1sq_psi2: float
    psi1_mean: float
    psi2_mean: float

    def max_abs(self) -> float:
        return max(abs(r) for r in self)


@dataclass(frozen=True)
class DependenceResidual:
    """Outcome of the score-dependence defect computation.

    residual is E (psi1 - lambda * Z)^2 with Z = psi2 - psi1^2 + I.
    When E Z^2 vanishes (the normal family: psi1' is constant, Z == 0)
    the minimisation over lambda is meaningless; that case is reported
    with degenerate=True and lambda_star=None rather than as an error.
    """

    residual: float
    lam: float
    z_second_moment: float
    degenerate: bool
    lambda_star: float | None


def _quad(fun, lo, hi, q: QuadratureSpec) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(
                fun, lo, hi,
                epsabs=q.abs_tol, epsrel=q.rel_tol,
                limit=max(q.max_refinements, 10),
            )
        except integrate.IntegrationWarning as exc:
            raise NumericalError(f"quadrature did not converge: {exc}") from None
    bound = max(q.abs_tol, q.rel_tol * abs(val)) * 100.0
    if err > bound and err > 1e-9:
        raise NumericalError("quadrature error estimate above tolerance",
                             residual=err)
    return val


def expectation(d: LocationDensity, g: Callable, q: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """E g(X) for X ~ d, via the configured domain map."""
    if q.domain_map is DomainMap.CDF_SUBSTITUTION:
        lower = _quad(lambda u: g(d.cdf_inverse(u)), 0.0, 0.5, q)
        upper = _quad(lambda s: g(d.survival_inverse(s)), 0.0, 0.5, q)
        return lower + upper

    # two-sided exponential map
    def integrand(t):
        x = d.alpha + d.beta * math.copysign(-math.log1p(-abs(t)), t)
        return g(x) * math.exp(d.log_density(x)) * d.beta / (1.0 - abs(t))

    return _quad(integrand, -1.0, 0.0, q) + _quad(integrand, 0.0, 1.0, q)


def fisher_information(d: LocationDensity, q: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """I(f) = E psi_1(X)^2, positive for every built-in family."""
    info = expectation(d, lambda x: d.psi(1, x) ** 2, q)
    if not info > 0.0:
        raise NumericalError(f"Fisher information came out non-positive: {info}")
    return info


def eta_set(d: LocationDensity, q: QuadratureSpec = DEFAULT_QUADRATURE) -> EtaSet:
    """Quadrature evaluation of (I, eta2..eta6) for a built-in density.

    The etas are invariant under the location-scale parameters by
    construction; the normalising powers of I make them dimensionless.
    """
    p1 = lambda x: d.psi(1, x)
    p2 = lambda x: d.psi(2, x)
    info = fisher_information(d, q)
    e_p2_sq = expectation(d, lambda x: p2(x) ** 2, q)
    e_p1_3 = expectation(d, lambda x: p1(x) ** 3, q)
    e_p1_4 = expectation(d, lambda x: p1(x) ** 4, q)
    e_p1_5 = expectation(d, lambda x: p1(x) ** 5, q)
    e_p2_p3 = expectation(d, lambda x: p2(x) * d.psi(3, x), q)
    return EtaSet(
        I=info,
        eta2=e_p2_sq / info**2,
        eta3=e_p1_3 / info**1.5,
        eta4=e_p1_4 / info**2,
        eta5=e_p1_5 / info**2.5,
        eta6=e_p2_p3 / info**2.5,
    )


def identity_suite(d: LocationDensity, q: QuadratureSpec = DEFAULT_QUADRATURE) -> IdentityResiduals:
    """Residuals of the integration-by-parts identities for the scores.

    For any sufficiently smooth density whose score moments exist,
    E psi1 = E psi2 = 0, E psi1 psi2 = (1/2) E psi1^3 and
    E psi1^2 psi2 = (2/3) E psi1^4.  These four relations do the heavy
    lifting in reducing the third-order coefficient to a Cauchy-Schwarz
    statement, so the suite checks them directly against quadrature.
    """
    p1 = lambda x: d.psi(1, x)
    p2 = lambda x: d.psi(2, x)
    return IdentityResiduals(
        psi1_psi2=expectation(d, lambda x: p1(x) * p2(x), q)
        - 0.5 * expectation(d, lambda x: p1(x) ** 3, q),
        psi1sq_psi2=expectation(d, lambda x: p1(x) ** 2 * p2(x), q)
        - (2.0 / 3.0) * expectation(d, lambda x: p1(x) ** 4, q),
        psi1_mean=expectation(d, p1, q),
        psi2_mean=expectation(d, p2, q),
    )


def cs_gap(e: EtaSet):
    """eta2 - eta4/3 - 1 - eta3^2/4, the Cauchy-Schwarz slack.

    Nonnegative for every eta set that comes from a genuine density;
    zero exactly when the normalised score satisfies the linear
    dependence that characterises the minimum-Gumbel family (and,
    degenerately, the normal family — see cs_dependence_residual).
    """
    return e.eta2 - e.eta4 / 3 - 1 - e.eta3 ** 2 / 4


def third_order_coeff(e: EtaSet):
    """12 - 12*eta2 + 3*eta3^2 + 4*eta4; equals -12 * cs_gap(e).

    Vanishing of this coefficient is the third-order efficiency
    condition for the location MLE.
    """
    return 12 - 12 * e.eta2 + 3 * e.eta3 ** 2 + 4 * e.eta4


def cs_dependence_residual(d: LocationDensity, lam: float,
                           q: QuadratureSpec = DEFAULT_QUADRATURE) -> DependenceResidual:
    """Squared L2(f) defect of psi1 = lambda * (psi2 - psi1^2 + I).

    The defect vanishes at lambda = beta for the minimum-Gumbel family,
    where psi1' + I = psi1 / beta holds identically.  The optimal
    multiplier is lambda* = -E psi1^3 / (2 E Z^2); when E Z^2 is below
    the quadrature's absolute tolerance the dependence is degenerate
    (Z vanishes a.e., as for the normal family) and lambda* is None.
    """
    info = fisher_information(d, q)

    def z_fun(x):
        p1 = d.psi(1, x)
        return d.psi(2, x) - p1 * p1 + info

    def defect(x):
        r = d.psi(1, x) - lam * z_fun(x)
        return r * r

    z2 = expectation(d, lambda x: z_fun(x) ** 2, q)
    degenerate = z2 < q.abs_tol
    if degenerate:
        lambda_star = None
    else:
        e_p1_3 = expectation(d, lambda x: d.psi(1, x) ** 3, q)
        lambda_star = -e_p1_3 / (2.0 * z2)
    return DependenceResidual(
        residual=expectation(d, defect, q),
        lam=lam,
        z_second_moment=z2,
        degenerate=degenerate,
        lambda_star=lambda_star,
    )
