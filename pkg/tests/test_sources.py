import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maoii.errors import ConstraintViolated, RangeError, RegimeViolated
from maoii.sources import (
    Belief,
    belief_update,
    make_params,
    pi_k,
    pi_k_recurrence,
)
from oracles import belief_after


class TestMakeParams:
    def test_scenario_class_derives_p(self):
        pp = make_params(r=0.05, num_states=10, rho=0.4)
        assert pp.p == pytest.approx(0.55, abs=1e-12)

    def test_second_scenario_class(self):
        pp = make_params(r=0.3, num_states=3, rho=0.4)
        assert pp.p == pytest.approx(0.4, abs=1e-12)

    def test_boundary_p_equals_r(self):
        pp = make_params(p=0.5, r=0.5, num_states=2, rho=1.0)
        assert pp.p == pp.r == 0.5

    def test_regime_rejected(self):
        with pytest.raises(RegimeViolated):
            make_params(p=0.2, r=0.4, num_states=3, rho=0.5)

    def test_constraint_rejected(self):
        with pytest.raises(ConstraintViolated):
            make_params(p=0.5, r=0.3, num_states=2, rho=0.5)

    def test_constraint_renormalized_exactly(self):
        # within the 1e-9 gate, p is rederived so the identity is exact
        pp = make_params(p=0.55 + 4e-10, r=0.05, num_states=10, rho=0.4)
        assert pp.p + (pp.num_states - 1) * pp.r - 1.0 == pytest.approx(0.0, abs=1e-12)

    def test_derive_r_from_p(self):
        pp = make_params(p=0.7, num_states=4, rho=0.5)
        assert pp.r == pytest.approx(0.1, abs=1e-12)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(r=0.1, num_states=1, rho=0.5),
            dict(r=0.1, num_states=2, rho=0.0),
            dict(r=0.1, num_states=2, rho=1.5),
            dict(r=-0.1, num_states=2, rho=0.5),
            dict(p=float("nan"), num_states=2, rho=0.5),
            dict(num_states=2, rho=0.5),
            dict(r=0.9, num_states=3, rho=0.5),  # derived p would be negative
        ],
    )
    def test_range_errors(self, kwargs):
        with pytest.raises((RangeError, RegimeViolated)):
            make_params(**kwargs)

    def test_r_zero_constant_source_allowed(self):
        pp = make_params(r=0.0, num_states=2, rho=0.5)
        assert pp.p == 1.0


class TestBelief:
    def test_reset_branch(self):
        pp = make_params(p=0.9, r=0.1, num_states=2, rho=1.0)
        assert belief_update(pp, Belief(0.3), updated=True).pi == 0.9

    def test_fixed_point(self):
        pp = make_params(p=0.9, r=0.1, num_states=2, rho=1.0)
        assert belief_update(pp, Belief(0.5), updated=False).pi == pytest.approx(0.5, abs=1e-15)

    def test_one_step_from_certainty(self):
        pp = make_params(p=0.9, r=0.1, num_states=2, rho=1.0)
        assert belief_update(pp, Belief(1.0), updated=False).pi == pytest.approx(0.9, abs=1e-15)

    def test_range_validation(self):
        with pytest.raises(RangeError):
            Belief(1.2)
        with pytest.raises(RangeError):
            Belief(-0.1)

    def test_iterated_update_equals_pi_k(self):
        pp = make_params(r=0.3, num_states=3, rho=0.4)
        b = Belief(1.0)
        for k in range(1, 60):
            b = belief_update(pp, b, updated=False)
            assert b.pi == pytest.approx(pi_k(pp, k), abs=1e-12)


class TestPiK:
    def test_k0_is_exactly_one(self):
        pp = make_params(r=0.3, num_states=3, rho=0.4)
        assert pi_k(pp, 0) == 1.0

    def test_k1_is_p(self):
        pp = make_params(p=0.9, r=0.1, num_states=2, rho=1.0)
        assert pi_k(pp, 1) == pytest.approx(0.9, abs=1e-15)

    def test_k2_value(self):
        pp = make_params(p=0.9, r=0.1, num_states=2, rho=1.0)
        assert belief_after(0.9, 0.1, 2) == pytest.approx(0.82, abs=1e-15)
        assert pi_k(pp, 2) == pytest.approx(0.82, abs=1e-12)

    def test_limit_is_uniform(self):
        pp = make_params(p=0.9, r=0.1, num_states=2, rho=1.0)
        assert pi_k(pp, 400) == pytest.approx(0.5, abs=1e-12)

    def test_negative_k_rejected(self):
        pp = make_params(p=0.9, r=0.1, num_states=2, rho=1.0)
        with pytest.raises(RangeError):
            pi_k(pp, -1)

    @pytest.mark.parametrize("shape", [(2, 0.1), (3, 0.3), (8, 0.1), (10, 0.05)])
    def test_closed_matches_recurrence_far_out(self, shape):
        n, r = shape
        pp = make_params(r=r, num_states=n, rho=1.0)
        for k in (0, 1, 2, 7, 100, 1000, 10_000):
            assert pi_k(pp, k) == pytest.approx(pi_k_recurrence(pp, k), abs=1e-12)

    def test_contraction_distance_exact_form(self):
        pp = make_params(r=0.05, num_states=10, rho=0.4)
        inv_n = 1.0 / pp.num_states
        for k in range(0, 50):
            dist = abs(pi_k(pp, k) - inv_n)
            assert dist == pytest.approx((1 - inv_n) * (pp.p - pp.r) ** k, abs=1e-15)

    def test_monotone_decreasing_when_sticky(self):
        pp = make_params(r=0.1, num_states=8, rho=0.7)
        vals = [pi_k(pp, k) for k in range(200)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_uniform_chain_boundary(self):
        pp = make_params(p=0.5, r=0.5, num_states=2, rho=1.0)
        assert pi_k(pp, 1) == pytest.approx(0.5, abs=1e-15)
        assert pi_k(pp, 17) == pytest.approx(0.5, abs=1e-15)

    @given(
        shape=st.sampled_from([(2, 0.1), (3, 0.3), (8, 0.1), (10, 0.05), (4, 0.2)]),
        k=st.integers(min_value=0, max_value=2000),
    )
    @settings(max_examples=60, deadline=None)
    def test_closed_vs_recurrence_property(self, shape, k):
        n, r = shape
        pp = make_params(r=r, num_states=n, rho=0.5)
        closed = pi_k(pp, k)
        rec = pi_k_recurrence(pp, k)
        assert math.isclose(closed, rec, rel_tol=0.0, abs_tol=1e-12)
        assert 1.0 / n - 1e-12 <= closed <= 1.0
