import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wfh_growth import Params
from wfh_growth.bgp import (bgp_rates, convergence_exponent, corollary1_output_rate,
                            ies_distraction, ies_limit_scan, marginal_utility_elasticity,
                            prop1_identity, rates_row, utility_closed_form, validate_params)
from wfh_growth.errors import DegenerateError, DivergenceError, DomainError


def linear_system_rates(p):
    """Growth rates from the log-differentiated optimality conditions.

    Unknowns (h_hat, theta, l_hat, lambda1_hat, lambda2_hat), solved numerically:
      lambda1_hat = -sigma*theta                 (consumption condition)
      lambda2_hat = rho - 1                      (human-capital price law)
      (1 - beta(2+gamma)) l_hat = (1-beta) lambda2_hat - lambda1_hat - beta theta
      (1 + gamma) l_hat = lambda2_hat + h_hat    (labor condition)
      theta = h_hat + l_hat                      (capital tracks effective input)
    """
    s, g, r, b = p.sigma, p.gamma, p.rho, p.beta
    A = np.array([
        [0.0, s, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 1.0],
        [0.0, b, 1 - b * (2 + g), 1.0, -(1 - b)],
        [-1.0, 0.0, 1 + g, 0.0, -1.0],
        [-1.0, 1.0, -1.0, 0.0, 0.0],
    ])
    rhs = np.array([0.0, r - 1, 0.0, 0.0, 0.0])
    return np.linalg.solve(A, rhs)


regime = st.builds(Params, st.floats(1.05, 5.0), st.floats(0.1, 5.0),
                   st.floats(0.01, 0.99), st.floats(0.05, 0.95))


class TestReferenceValues:
    def test_set_a(self, set_a):
        r = bgp_rates(set_a)
        expected = dict(h_hat=0.3, theta=0.2, l_hat=-0.1, lambda1_hat=-0.4, lambda2_hat=-0.5,
                        x=-0.7, mpk=3.0, effort_bgp=0.7, ies=7 / 3)
        for name, value in expected.items():
            assert getattr(r, name) == pytest.approx(value, abs=1e-12), name
        assert r.verified_convergence
        assert r.mpk - r.theta == pytest.approx(2.8, abs=1e-12)

    def test_set_b(self, set_b):
        r = bgp_rates(set_b)
        assert r.h_hat == pytest.approx(1 / 11, abs=1e-12)
        assert r.theta == pytest.approx(0.6 / 11, abs=1e-12)
        assert r.l_hat == pytest.approx(-0.4 / 11, abs=1e-12)
        assert r.ies == pytest.approx(5.0, abs=1e-12)

    def test_patient_limit_all_rates_zero(self):
        p = Params(2.0, 1.0, 1.0, 0.3)
        r = bgp_rates(p)
        assert (r.h_hat, r.theta, r.l_hat, r.lambda1_hat, r.lambda2_hat) == (0, 0, 0, 0, 0)
        assert math.isnan(r.ies)
        assert not validate_params(p).ok

    def test_degenerate_denominator(self):
        with pytest.raises(DegenerateError):
            bgp_rates(Params(0.4, 0.5, 0.5, 0.3))

    @given(regime)
    def test_match_linear_system(self, p):
        oracle = linear_system_rates(p)
        r = bgp_rates(p)
        got = [r.h_hat, r.theta, r.l_hat, r.lambda1_hat, r.lambda2_hat]
        assert np.allclose(got, oracle, rtol=1e-9, atol=1e-12)


class TestValidation:
    def test_set_a_ok(self, set_a):
        rep = validate_params(set_a)
        assert rep.ok and rep.messages == ()

    def test_sigma_below_one_flagged(self):
        rep = validate_params(Params(0.5, 1.0, 0.5, 0.3))
        assert rep.basic_domain and not rep.convergence_regime and not rep.ok

    def test_denominator_zero_flagged(self):
        rep = validate_params(Params(0.4, 0.5, 0.5, 0.3))
        assert not rep.denominator_ok and math.isnan(rep.h_hat)

    def test_rho_above_one_flagged(self):
        rep = validate_params(Params(2.0, 1.0, 1.5, 0.3))
        assert not rep.basic_domain and not rep.convergence_regime and not rep.bgp_feasible

    def test_rates_row_contains_flags(self, set_a):
        row = rates_row(set_a)
        assert row["convergence_regime"] is True and row["h_hat"] == pytest.approx(0.3)

    def test_rates_row_degenerate_is_nan(self):
        row = rates_row(Params(0.4, 0.5, 0.5, 0.3))
        assert math.isnan(row["theta"]) and row["denominator_ok"] is False


@given(regime)
def test_identities(p):
    r = bgp_rates(p)
    tol = 1e-12 * max(1.0, abs(r.h_hat), abs(r.theta))
    assert abs(r.theta - r.h_hat * (1 + p.gamma) / (p.gamma + p.sigma)) <= tol
    assert abs(r.l_hat - r.h_hat * (1 - p.sigma) / (p.gamma + p.sigma)) <= tol
    assert abs(prop1_identity(r)) <= tol
    assert abs(corollary1_output_rate(p, r) - r.theta) <= tol
    # both transversality exponents collapse to x
    assert abs((r.h_hat + r.lambda2_hat - p.rho) - r.x) <= tol
    assert abs((r.theta + r.lambda1_hat - p.rho) - r.x) <= tol
    assert r.ies == pytest.approx(ies_distraction(p), rel=1e-9)
    assert convergence_exponent(p) == pytest.approx(r.x, rel=1e-12, abs=1e-14)


@given(regime)
def test_sign_regime(p):
    r = bgp_rates(p)
    assert 0 < r.h_hat < 1 and r.theta > 0 and r.l_hat < 0
    assert r.x < 0 and r.mpk > 0 and r.ies > 0
    assert r.mpk - r.theta > 0  # consumption-capital ratio
    assert validate_params(p).ok


class TestElasticity:
    @pytest.mark.parametrize("gamma, s, l, expected", [(1.0, 0.5, 1.0, 1.0),
                                                       (2.0, 0.25, 1.0, 2 / 3)])
    def test_examples(self, gamma, s, l, expected):
        p = Params(2.0, gamma, 0.5, 0.3)
        assert marginal_utility_elasticity(p, s, l) == pytest.approx(expected, rel=1e-15)

    @pytest.mark.parametrize("s, l", [(0.0, 1.0), (1.0, 1.0), (1.5, 1.0)])
    def test_domain(self, set_a, s, l):
        with pytest.raises(DomainError):
            marginal_utility_elasticity(set_a, s, l)

    def test_ies_is_reciprocal_elasticity_on_bgp(self, set_a):
        r = bgp_rates(set_a)
        assert 1 / marginal_utility_elasticity(set_a, r.h_hat, 1.0) == pytest.approx(r.ies)


class TestIes:
    def test_large_gamma(self):
        assert ies_distraction(Params(2.0, 1000.0, 0.5, 0.3)) == pytest.approx(
            1502 / 501000, rel=1e-12)

    def test_patient_limit_raises(self):
        with pytest.raises(DegenerateError):
            ies_distraction(Params(2.0, 1.0, 1.0, 0.3))

    def test_scan_decreasing_to_zero(self, set_a):
        scan = ies_limit_scan(set_a, [1, 10, 100, 1000, 1e5])
        values = [v for _, v in scan]
        assert all(a > b > 0 for a, b in zip(values, values[1:]))
        assert values[-1] < 1e-4
        assert values[0] == pytest.approx(7 / 3)


class TestUtilityClosedForm:
    def test_example(self, set_a):
        # A1 = -1, A2 = 1/2, x = -0.7
        assert utility_closed_form(set_a, 1.0, 1.0, 0.0) == pytest.approx(-1.5 / 0.7, rel=1e-14)

    def test_equal_terms_give_zero(self):
        p = Params(0.5, 1.0, 0.9, 0.3)  # x = -0.7 here as well
        assert convergence_exponent(p) == pytest.approx(-0.7)
        assert utility_closed_form(p, 1.0, 2.0, 0.0) == pytest.approx(0.0, abs=1e-15)

    def test_divergent(self):
        with pytest.raises(DivergenceError):
            utility_closed_form(Params(0.5, 1.0, 0.1, 0.3), 1.0, 1.0, 0.0)

    def test_domain(self, set_a):
        with pytest.raises(DomainError):
            utility_closed_form(set_a, 1.0, 1.0, 1.0)

    def test_convergence_exponent_examples(self, set_b):
        assert convergence_exponent(set_b) == pytest.approx(-1.2 / 11 - 0.8, abs=1e-12)
        assert convergence_exponent(Params(2.0, 1.0, 1.0, 0.3)) == pytest.approx(-1.0)
