import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maoii.errors import DegenerateParams, RangeError
from maoii.metrics import (
    AoiState,
    MaoiiLadder,
    MaoiiState,
    aoi_transition,
    aoii_pmf,
    get_ladder,
    maoii_transition,
    maoii_value_closed,
    maoii_value_limit,
    maoii_value_series,
)
from maoii.sources import make_params
from oracles import (
    GRID_SHAPES,
    incorrectness_pmf_by_enumeration,
    ladder_value_by_enumeration,
)

PP = make_params(p=0.9, r=0.1, num_states=2, rho=1.0)


class TestPmf:
    def test_j1(self):
        np.testing.assert_allclose(aoii_pmf(PP, 1), [0.9, 0.1], atol=1e-15)

    def test_j2(self):
        np.testing.assert_allclose(aoii_pmf(PP, 2), [0.82, 0.09, 0.09], atol=1e-12)

    def test_matches_forward_enumeration(self):
        for n, r in GRID_SHAPES:
            pp = make_params(r=r, num_states=n, rho=1.0)
            for j in (1, 2, 3, 5, 10, 25, 60):
                np.testing.assert_allclose(
                    aoii_pmf(pp, j),
                    incorrectness_pmf_by_enumeration(pp.p, pp.r, j),
                    atol=1e-12,
                )

    def test_rejects_j0(self):
        with pytest.raises(RangeError):
            aoii_pmf(PP, 0)

    @given(
        shape=st.sampled_from(list(GRID_SHAPES) + [(5, 0.2), (2, 0.5)]),
        j=st.integers(min_value=1, max_value=400),
    )
    @settings(max_examples=80, deadline=None)
    def test_normalization_property(self, shape, j):
        n, r = shape
        pp = make_params(r=r, num_states=n, rho=1.0)
        pmf = aoii_pmf(pp, j)
        assert abs(math.fsum(pmf) - 1.0) < 1e-12
        assert (pmf >= 0.0).all()


class TestSeriesValue:
    def test_j0_empty_sum(self):
        assert maoii_value_series(PP, 0) == 0.0

    def test_first_rungs(self):
        assert maoii_value_series(PP, 1) == pytest.approx(0.1, abs=1e-12)
        assert maoii_value_series(PP, 2) == pytest.approx(0.27, abs=1e-12)
        assert maoii_value_series(PP, 3) == pytest.approx(0.487, abs=1e-12)

    def test_equals_pmf_mean(self):
        for n, r in GRID_SHAPES:
            pp = make_params(r=r, num_states=n, rho=1.0)
            for j in (1, 2, 4, 9, 30, 120):
                pmf = aoii_pmf(pp, j)
                mean = float(np.dot(np.arange(j + 1), pmf))
                assert maoii_value_series(pp, j) == pytest.approx(mean, abs=1e-10)

    def test_matches_enumeration(self):
        pp = make_params(r=0.3, num_states=3, rho=0.4)
        for j in (1, 2, 5, 12, 40):
            assert maoii_value_series(pp, j) == pytest.approx(
                ladder_value_by_enumeration(pp.p, pp.r, j), abs=1e-12
            )


class TestClosedValue:
    def test_matches_series_on_grid(self):
        for n, r in GRID_SHAPES:
            pp = make_params(r=r, num_states=n, rho=1.0)
            for j in range(1, 101):
                assert maoii_value_closed(pp, j) == pytest.approx(
                    maoii_value_series(pp, j), abs=1e-10
                )

    def test_first_rungs(self):
        assert maoii_value_closed(PP, 1) == pytest.approx(0.1, abs=1e-12)
        assert maoii_value_closed(PP, 2) == pytest.approx(0.27, abs=1e-12)

    def test_saturation_limit(self):
        assert maoii_value_limit(PP) == pytest.approx(5.0, abs=1e-12)
        # telescoping the steps reaches the same limit
        assert maoii_value_closed(PP, 600) == pytest.approx(5.0, abs=1e-12)
        # the limit equals (1-r)/r - (1-Nr)/(Nr)
        lim = (1 - PP.r) / PP.r - (1 - PP.nr) / PP.nr
        assert maoii_value_limit(PP) == pytest.approx(lim, abs=1e-12)

    def test_degenerate_r_zero(self):
        pp = make_params(r=0.0, num_states=2, rho=0.5)
        with pytest.raises(DegenerateParams):
            maoii_value_closed(pp, 1)
        assert maoii_value_series(pp, 5) == 0.0  # constant source is never wrong

    def test_uniform_chain_boundary(self):
        pp = make_params(p=0.5, r=0.5, num_states=2, rho=1.0)
        for j in (1, 2, 8):
            assert maoii_value_closed(pp, j) == pytest.approx(
                maoii_value_series(pp, j), abs=1e-12
            )


class TestLadder:
    def test_first_rung_is_one_minus_p(self):
        ladder = get_ladder(PP, 50)
        assert ladder.value(1) == pytest.approx(1 - PP.p, abs=1e-12)

    def test_matches_series_pointwise(self):
        for n, r in GRID_SHAPES:
            pp = make_params(r=r, num_states=n, rho=1.0)
            ladder = get_ladder(pp, 300)
            for j in range(0, 301, 7):
                assert ladder.value(j) == pytest.approx(
                    maoii_value_series(pp, j), abs=1e-10
                )

    def test_strictly_increasing_with_expected_steps(self):
        for n, r in GRID_SHAPES:
            pp = make_params(r=r, num_states=n, rho=1.0)
            vals = get_ladder(pp, 200).values
            steps = np.diff(vals[1:])
            assert (steps > 0).all()
            j = np.arange(1, 199)
            expected = (1 - pp.r) ** (j + 1) - (pp.p - pp.r) ** (j + 1)
            np.testing.assert_allclose(steps, expected, atol=1e-10)

    def test_steps_shrink_to_zero(self):
        vals = get_ladder(PP, 400).values
        steps = np.diff(vals[1:])
        assert steps[-1] < 1e-10 < steps[0]

    def test_saturating_lookup(self):
        ladder = get_ladder(PP, 40)
        assert ladder.value(40) == ladder.value(41) == ladder.value(10_000)

    def test_memoized(self):
        assert get_ladder(PP, 64) is get_ladder(PP, 64)

    def test_build_validates_length(self):
        with pytest.raises(RangeError):
            MaoiiLadder.build(PP, 0)


class TestTransitions:
    def test_aoi_reset(self):
        assert aoi_transition(AoiState(7), scheduled=True, success=True).j == 1

    def test_aoi_failure_increments(self):
        assert aoi_transition(AoiState(7), scheduled=True, success=False).j == 8

    def test_aoi_idle_increments_from_minimum(self):
        assert aoi_transition(AoiState(1), scheduled=False, success=False).j == 2

    def test_maoii_reset_value(self):
        ladder = get_ladder(PP, 50)
        state = MaoiiState(9, ladder.value(9))
        nxt = maoii_transition(ladder, state, scheduled=True, success=True)
        assert nxt.j == 1
        assert nxt.value == pytest.approx(1 - PP.p, abs=1e-12)

    def test_maoii_idle_steps_up(self):
        ladder = get_ladder(PP, 50)
        nxt = maoii_transition(ladder, MaoiiState(9, ladder.value(9)), False, False)
        assert nxt.j == 10
        assert nxt.value == pytest.approx(ladder.value(10), abs=1e-15)

    def test_maoii_failure_acts_as_idle(self):
        ladder = get_ladder(PP, 50)
        nxt = maoii_transition(ladder, MaoiiState(1, ladder.value(1)), True, False)
        assert nxt.j == 2

    def test_state_validation(self):
        with pytest.raises(RangeError):
            AoiState(0)
        with pytest.raises(RangeError):
            MaoiiState(0, 0.0)
