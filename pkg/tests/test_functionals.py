"""Tests for the quadrature functionals against exact moment oracles.

Each built-in family admits an algebraic representation in which the
score derivatives are polynomials with known moments:

* minimum-Gumbel: polynomials in W = e^X with W ~ Exp(1), E W^k = k!;
* normal: polynomials in X with E X^(2k) = (2k-1)!!, odd moments 0;
* logistic: polynomials in U = F(X) with U ~ Uniform(0,1),
  E U^k = 1/(k+1).

The oracles below carry exact rationals end to end, so the expected
eta values are not transcribed constants but recomputed integers.
"""
import math
from fractions import Fraction

import numpy as np
import pytest
from numpy.testing import assert_allclose

from effilab import (
    DomainMap,
    EtaSet,
    QuadratureSpec,
    cs_dependence_residual,
    cs_gap,
    eta_set,
    expectation,
    fisher_information,
    gumbel_min,
    identity_suite,
    logistic,
    normal,
    third_order_coeff,
)
from effilab.errors import NumericalError

# ----------------------------------------------------------------------
# exact polynomial algebra (coefficient lists, ascending powers)
# ----------------------------------------------------------------------


def pmul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        for j, cb in enumerate(b):
            out[i + j] += Fraction(ca) * Fraction(cb)
    return out


def padd(a, b):
    n = max(len(a), len(b))
    a = list(a) + [Fraction(0)] * (n - len(a))
    b = list(b) + [Fraction(0)] * (n - len(b))
    return [Fraction(x) + Fraction(y) for x, y in zip(a, b)]


def pderiv(a):
    return [Fraction(k) * Fraction(c) for k, c in enumerate(a)][1:] or [Fraction(0)]


def exp_moment(a):
    # E W^k = k! for W ~ Exp(1).
    return sum(Fraction(c) * math.factorial(k) for k, c in enumerate(a))


def gauss_moment(a):
    # E X^(2k) = (2k-1)!!, odd moments vanish.
    total = Fraction(0)
    for k, c in enumerate(a):
        if k % 2 == 0:
            total += Fraction(c) * math.prod(range(1, k, 2))
    return total


def uniform_moment(a):
    # E U^k = 1/(k+1) for U ~ Uniform(0, 1).
    return sum(Fraction(c) / (k + 1) for k, c in enumerate(a))


def eta_tuple(moment, p1, p2, p3):
    info = moment(pmul(p1, p1))
    return (
        info,
        moment(pmul(p2, p2)) / info**2,
        moment(pmul(pmul(p1, p1), p1)) / info**Fraction(3, 2),
        moment(pmul(pmul(p1, p1), pmul(p1, p1))) / info**2,
        moment(pmul(pmul(pmul(p1, p1), pmul(p1, p1)), p1)) / info**Fraction(5, 2),
        moment(pmul(p2, p3)) / info**Fraction(5, 2),
    )


# Score polynomials.  Gumbel in W = e^x (note d/dx maps to W d/dW);
# normal in x; logistic in U = F(x) (d/dx maps to (U - U^2) d/dU).
GUMBEL_P1 = [1, -1]
GUMBEL_P2 = [1, -3, 1]
GUMBEL_P3 = [1, -7, 6, -1]
NORMAL_P1 = [0, -1]
NORMAL_P2 = [-1, 0, 1]
NORMAL_P3 = [0, 3, 0, -1]
LOGISTIC_P1 = [1, -2]
LOGISTIC_P2 = [1, -6, 6]
LOGISTIC_P3 = [1, -14, 36, -24]


def test_score_polynomials_satisfy_the_recurrence():
    # psi_{k+1} = psi_k' + psi_1 psi_k, verified in exact arithmetic in
    # each family's natural variable.
    w_shift = lambda p: [Fraction(0)] + list(pderiv(p))  # W * d/dW
    assert padd(w_shift(GUMBEL_P1), pmul(GUMBEL_P1, GUMBEL_P1)) == \
        [Fraction(c) for c in GUMBEL_P2]
    assert padd(w_shift(GUMBEL_P2), pmul(GUMBEL_P1, GUMBEL_P2)) == \
        [Fraction(c) for c in GUMBEL_P3]

    assert padd(pderiv(NORMAL_P1) + [Fraction(0)],
                pmul(NORMAL_P1, NORMAL_P1)) == [Fraction(c) for c in NORMAL_P2]
    assert padd(pderiv(NORMAL_P2), pmul(NORMAL_P1, NORMAL_P2)) == \
        [Fraction(c) for c in NORMAL_P3]

    u_shift = lambda p: pmul([0, 1, -1], pderiv(p))  # (U - U^2) d/dU
    assert padd(u_shift(LOGISTIC_P1), pmul(LOGISTIC_P1, LOGISTIC_P1))[:3] == \
        [Fraction(c) for c in LOGISTIC_P2]
    assert padd(u_shift(LOGISTIC_P2), pmul(LOGISTIC_P1, LOGISTIC_P2))[:4] == \
        [Fraction(c) for c in LOGISTIC_P3]


GUMBEL_GOLDEN = eta_tuple(exp_moment, GUMBEL_P1, GUMBEL_P2, GUMBEL_P3)
NORMAL_GOLDEN = eta_tuple(gauss_moment, NORMAL_P1, NORMAL_P2, NORMAL_P3)
LOGISTIC_GOLDEN = eta_tuple(uniform_moment, LOGISTIC_P1, LOGISTIC_P2,
                            LOGISTIC_P3)


def test_oracle_values_are_the_expected_integers():
    assert GUMBEL_GOLDEN == (1, 5, -2, 9, -44, -13)
    assert NORMAL_GOLDEN == (1, 2, 0, 3, 0, 0)
    assert LOGISTIC_GOLDEN == (Fraction(1, 3), Fraction(9, 5), 0,
                               Fraction(9, 5), 0, 0)


@pytest.mark.parametrize("density,golden", [
    (gumbel_min(), GUMBEL_GOLDEN),
    (normal(), NORMAL_GOLDEN),
    (logistic(), LOGISTIC_GOLDEN),
], ids=["gumbel", "normal", "logistic"])
def test_eta_set_matches_exact_moments(density, golden):
    e = eta_set(density)
    assert_allclose(e.as_tuple(), [float(g) for g in golden],
                    rtol=0, atol=1e-8)


def test_fisher_information_scales_inversely_with_variance():
    assert_allclose(fisher_information(gumbel_min()), 1.0, atol=1e-10)
    assert_allclose(fisher_information(gumbel_min(3.0, 2.0)), 0.25,
                    atol=1e-10)
    assert_allclose(fisher_information(normal(0.0, 0.5)), 4.0, atol=1e-9)
    assert_allclose(fisher_information(logistic()), 1.0 / 3.0, atol=1e-10)


@pytest.mark.parametrize("density,golden", [
    (gumbel_min(-3.0, 2.5), GUMBEL_GOLDEN),
    (normal(1.0, 0.4), NORMAL_GOLDEN),
    (logistic(5.0, 7.0), LOGISTIC_GOLDEN),
], ids=["gumbel", "normal", "logistic"])
def test_eta_ratios_are_location_scale_invariant(density, golden):
    e = eta_set(density)
    assert_allclose((e.eta2, e.eta3, e.eta4, e.eta5, e.eta6),
                    [float(g) for g in golden[1:]], rtol=0, atol=1e-8)
    assert_allclose(e.I, float(golden[0]) / density.beta**2, rtol=1e-9)


@pytest.mark.parametrize("density", [
    gumbel_min(), normal(), logistic(), gumbel_min(-1.0, 0.5),
    logistic(2.0, 3.0),
], ids=["gumbel", "normal", "logistic", "gumbel-scaled", "logistic-scaled"])
def test_integration_by_parts_identities(density):
    assert identity_suite(density).max_abs() <= 1e-8


def test_moment_inequalities_on_built_ins():
    for d in (gumbel_min(), normal(), logistic(), gumbel_min(1.0, 3.0)):
        e = eta_set(d)
        assert e.eta2 >= 1.0 - 1e-9
        assert e.eta4 >= 1.0 - 1e-9
        assert cs_gap(e) >= -1e-10


# ----------------------------------------------------------------------
# the gap functionals
# ----------------------------------------------------------------------

def test_cs_gap_values():
    assert abs(cs_gap(eta_set(gumbel_min()))) <= 1e-10
    assert abs(cs_gap(eta_set(normal()))) <= 1e-9
    assert_allclose(cs_gap(eta_set(logistic())), 0.2, rtol=0, atol=1e-8)
    # Exact arithmetic on the exact eta values.
    exact = EtaSet(Fraction(1, 3), Fraction(9, 5), Fraction(0),
                   Fraction(9, 5), Fraction(0), Fraction(0))
    assert cs_gap(exact) == Fraction(1, 5)
    assert cs_gap(EtaSet(1, 2, 0, 3, 0, 0)) == 0


def test_third_order_coeff_values():
    assert abs(third_order_coeff(eta_set(gumbel_min()))) <= 1e-8
    assert abs(third_order_coeff(eta_set(normal()))) <= 1e-8
    assert_allclose(third_order_coeff(eta_set(logistic())), -2.4,
                    rtol=0, atol=1e-8)
    exact = EtaSet(Fraction(1, 3), Fraction(9, 5), Fraction(0),
                   Fraction(9, 5), Fraction(0), Fraction(0))
    assert third_order_coeff(exact) == Fraction(-12, 5)
    assert third_order_coeff(EtaSet(1, 5, -2, 9, -44, -13)) == 0


def test_third_order_coeff_is_minus_twelve_gaps():
    rng = np.random.default_rng(2)
    for _ in range(200):
        vals = rng.standard_normal(5) * 10.0
        e = EtaSet(1.0, *vals)
        lhs = third_order_coeff(e)
        rhs = -12.0 * cs_gap(e)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_dependence_residual_gumbel_is_exact_at_scale():
    for beta in (0.5, 1.0, 3.0):
        r = cs_dependence_residual(gumbel_min(0.0, beta), beta)
        assert r.residual <= 1e-10
        assert not r.degenerate
        assert_allclose(r.lambda_star, beta, rtol=1e-8)
    # At unit scale the defect variable is Z = 1 - W with E Z^2 = 1,
    # so lambda = 2 leaves E (psi1 - 2 Z)^2 = E (W - 1)^2 = 1.
    r = cs_dependence_residual(gumbel_min(), 2.0)
    assert_allclose(r.residual, 1.0, rtol=0, atol=1e-8)
    assert_allclose(r.z_second_moment, 1.0, rtol=0, atol=1e-8)


def test_dependence_residual_normal_is_degenerate():
    r = cs_dependence_residual(normal(), 1.0)
    assert r.degenerate
    assert r.lambda_star is None
    assert r.z_second_moment <= 1e-10
    # With Z == 0 the residual is just E psi1^2 = I.
    assert_allclose(r.residual, 1.0, rtol=0, atol=1e-8)


def test_dependence_residual_logistic_at_zero_multiplier():
    r = cs_dependence_residual(logistic(), 0.0)
    assert_allclose(r.residual, 1.0 / 3.0, rtol=0, atol=1e-8)
    assert not r.degenerate


# ----------------------------------------------------------------------
# quadrature plumbing
# ----------------------------------------------------------------------

def test_domain_maps_agree_on_eta_sets():
    alt = QuadratureSpec(domain_map=DomainMap.TWO_SIDED_EXPONENTIAL)
    for ctor in (gumbel_min, normal, logistic):
        a = eta_set(ctor())
        b = eta_set(ctor(), alt)
        assert_allclose(a.as_tuple(), b.as_tuple(), rtol=0, atol=1e-8)


def test_expectation_basic_moments():
    assert_allclose(expectation(normal(), lambda x: x * x), 1.0, atol=1e-10)
    assert_allclose(expectation(logistic(), lambda x: x * x),
                    np.pi**2 / 3.0, rtol=1e-9)
    # Minimum-Gumbel mean is minus the Euler-Mascheroni constant.
    assert_allclose(expectation(gumbel_min(), lambda x: x),
                    -0.5772156649015329, atol=1e-10)


def test_unreachable_tolerance_raises_numerical_error():
    spec = QuadratureSpec(rel_tol=1e-300, abs_tol=1e-300, max_refinements=2)
    with pytest.raises(NumericalError):
        expectation(gumbel_min(), lambda x: x * x, spec)


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(rel_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureSpec(abs_tol=-1e-10)
    with pytest.raises(ValueError):
        QuadratureSpec(max_refinements=0)


def test_eta_set_validation_and_exact_fields():
    with pytest.raises(ValueError):
        EtaSet(0.0, 1, 0, 1, 0, 0)
    with pytest.raises(ValueError):
        EtaSet(-2.0, 1, 0, 1, 0, 0)
    e = EtaSet(Fraction(1), Fraction(5), Fraction(-2), Fraction(9),
               Fraction(-44), Fraction(-13))
    assert isinstance(e.eta5, Fraction)
    assert e.as_tuple() == (1, 5, -2, 9, -44, -13)
