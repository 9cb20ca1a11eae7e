from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ckdv.analytic import HsSolitonIC, SolitonParams, sample_ic
from ckdv.config import scenario_presets
from ckdv.diagnostics import (
    ConvergenceRow,
    convergence_study,
    count_solitons,
    find_peaks,
    hs_conserved,
    l2_norm,
    percent_error,
    sample_diagnostics,
)
from ckdv.model import Grid, WaveState


def grid_of(n, h, x0=0.0):
    return Grid(x0=x0, h=h, n_points=n, tau=1e-3)


class TestL2Norm:
    def test_zero_state(self):
        per_mode, vec = l2_norm(WaveState(0.0, np.zeros((2, 8))), grid_of(8, 0.5))
        np.testing.assert_array_equal(per_mode, 0.0)
        assert vec == 0.0

    def test_single_mode_example(self):
        # four unit samples over cells of width 0.5: sqrt(4 * 0.5)
        per_mode, vec = l2_norm(WaveState(0.0, np.ones((1, 4))), grid_of(8, 0.5))
        assert per_mode[0] == pytest.approx(np.sqrt(2.0), rel=1e-15)
        assert vec == pytest.approx(np.sqrt(2.0), rel=1e-15)

    def test_two_mode_example(self):
        # two modes, both identically 1 over two cells of width 1:
        # each mode contributes 2, so the combined norm is 2
        state = WaveState(0.0, np.ones((2, 2)))
        per_mode, vec = l2_norm(state, grid_of(8, 1.0))
        np.testing.assert_allclose(per_mode, np.sqrt(2.0), rtol=1e-15)
        assert vec == pytest.approx(2.0, rel=1e-15)

    @given(st.integers(5, 30), st.floats(0.01, 2.0))
    def test_vector_norm_identity(self, n, h):
        rng = np.random.default_rng(n)
        state = WaveState(0.0, rng.standard_normal((3, n)))
        per_mode, vec = l2_norm(state, grid_of(n, h))
        assert vec == pytest.approx(np.sqrt((per_mode**2).sum()), rel=1e-12)


class TestPercentError:
    def test_identical_states_zero(self):
        state = WaveState(0.0, np.random.default_rng(0).standard_normal((2, 16)))
        np.testing.assert_array_equal(percent_error(state, state, 2.0), 0.0)

    def test_worked_example(self):
        a = WaveState(0.0, np.zeros((1, 8)))
        b = WaveState(0.0, np.full((1, 8), 0.02))
        assert percent_error(a, b, 2.0)[0] == pytest.approx(1.0, rel=1e-13)

    @given(st.floats(0.1, 50.0))
    def test_homogeneous_of_degree_minus_one(self, amp):
        rng = np.random.default_rng(2)
        a = WaveState(0.0, rng.standard_normal((2, 12)))
        b = WaveState(0.0, rng.standard_normal((2, 12)))
        one = percent_error(a, b, amp)
        two = percent_error(a, b, 2 * amp)
        np.testing.assert_allclose(two, one / 2, rtol=1e-12)

    def test_symmetric_in_states(self):
        rng = np.random.default_rng(3)
        a = WaveState(0.0, rng.standard_normal((2, 12)))
        b = WaveState(0.0, rng.standard_normal((2, 12)))
        np.testing.assert_array_equal(percent_error(a, b, 1.0), percent_error(b, a, 1.0))

    def test_rejects_bad_inputs(self):
        a = WaveState(0.0, np.zeros((1, 8)))
        with pytest.raises(ValueError, match="amplitude"):
            percent_error(a, a, 0.0)
        with pytest.raises(ValueError, match="meshes"):
            percent_error(a, WaveState(0.0, np.zeros((1, 9))), 1.0)
        with pytest.raises(ValueError, match="times"):
            percent_error(a, WaveState(1.0, np.zeros((1, 8))), 1.0)


class TestHsConserved:
    def test_zero_state(self):
        assert hs_conserved(WaveState(0.0, np.zeros((2, 8))), grid_of(8, 0.5)) == 0.0

    def test_vanishes_when_theta1_is_sqrt2_theta2(self):
        rng = np.random.default_rng(5)
        theta2 = rng.standard_normal(32)
        state = WaveState(0.0, np.stack([np.sqrt(2.0) * theta2, theta2]))
        assert hs_conserved(state, grid_of(32, 0.25)) == pytest.approx(0.0, abs=1e-13)

    def test_soliton_value_matches_refined_quadrature(self):
        # trapezoid quadrature of 0.5 theta1^2 - theta2^2 on [-20, 20] with
        # 400001 nodes gives -1.3333333333 for m = 1, d = 0.3 (the integral
        # is -4 m^3 / 3 independent of d)
        grid = Grid(x0=-20.0, h=0.1, n_points=400, tau=1e-3)
        state = sample_ic(HsSolitonIC(SolitonParams(1.0, 0.3)), grid)
        assert hs_conserved(state, grid) == pytest.approx(-4.0 / 3.0, abs=1e-10)

    def test_needs_two_modes(self):
        with pytest.raises(ValueError, match="modes"):
            hs_conserved(WaveState(0.0, np.zeros((1, 8))), grid_of(8, 0.5))


class TestPeaks:
    def bumps(self, centers, n=200, width=6.0, height=1.0):
        x = np.arange(n, dtype=float)
        v = np.zeros(n)
        for c, hgt in centers:
            v += hgt / np.cosh((x - c) / width) ** 2
        return WaveState(0.0, v[None, :])

    def test_zero_state_has_no_peaks(self):
        assert count_solitons(WaveState(0.0, np.zeros((1, 64)))) == 0

    def test_single_soliton(self):
        grid = Grid(x0=-20.0, h=0.1, n_points=400, tau=1e-3)
        state = sample_ic(HsSolitonIC(SolitonParams(1.0, 0.0)), grid)
        assert count_solitons(state) == 1

    def test_two_separated_bumps(self):
        state = self.bumps([(60, 1.0), (140, 0.7)])
        assert count_solitons(state) == 2

    def test_small_bumps_below_fraction_ignored(self):
        state = self.bumps([(60, 1.0), (140, 0.05)])
        assert count_solitons(state, min_height_fraction=0.1) == 1
        assert count_solitons(state, min_height_fraction=0.01) == 2

    def test_close_peaks_collapse_to_tallest(self):
        v = np.zeros(100)
        v[40] = 1.0
        v[43] = 0.9
        state = WaveState(0.0, v[None, :])
        assert count_solitons(state, min_separation=5) == 1
        assert count_solitons(state, min_separation=2) == 2
        peaks = find_peaks(state, min_separation=5)
        assert list(peaks) == [40]

    @given(st.integers(0, 199))
    def test_translation_invariance(self, shift):
        state = self.bumps([(60, 1.0), (140, 0.8)])
        rolled = WaveState(0.0, np.roll(state.theta, shift, axis=1))
        assert count_solitons(rolled) == count_solitons(state)

    def test_negative_only_mode_counts_zero(self):
        state = WaveState(0.0, -np.ones((1, 64)))
        assert count_solitons(state) == 0


class TestSampleDiagnostics:
    def test_fields(self):
        grid = Grid(x0=-20.0, h=0.1, n_points=400, tau=1e-3)
        state = sample_ic(HsSolitonIC(SolitonParams(1.0, 0.0)), grid)
        sample = sample_diagnostics(state, grid)
        assert sample.t == 0.0
        assert sample.peak_count_mode1 == 1
        assert sample.conserved_hs == pytest.approx(-4.0 / 3.0, abs=1e-10)
        assert sample.max_amp_per_mode[0] == pytest.approx(2.0, abs=1e-12)
        assert sample.vector_norm == pytest.approx(
            np.sqrt(sum(v**2 for v in sample.l2_per_mode)), rel=1e-12
        )
        row = sample.to_dict()
        assert set(row) == {
            "t", "l2_per_mode", "vector_norm", "conserved_hs",
            "max_amp_per_mode", "peak_count_mode1",
        }

    def test_conserved_absent_for_single_mode(self):
        grid = Grid(x0=0.0, h=0.5, n_points=16, tau=1e-3)
        sample = sample_diagnostics(WaveState(0.0, np.ones((1, 16))), grid)
        assert sample.conserved_hs is None


class TestConvergenceStudy:
    def test_zero_duration_gives_zero_errors(self):
        config = scenario_presets()["hs-soliton"].replace(t0=0.0)
        rows = convergence_study(config, [0.4, 0.2], t0=0.0)
        assert [row.error for row in rows] == [0.0, 0.0]
        assert rows[0].order_estimate is None

    def test_requires_decreasing_h(self):
        config = scenario_presets()["hs-soliton"]
        with pytest.raises(ValueError, match="decreasing"):
            convergence_study(config, [0.1, 0.2])

    def test_requires_oracle(self):
        config = scenario_presets()["hs-multisoliton"]
        with pytest.raises(ValueError, match="oracle"):
            convergence_study(config, [0.4, 0.2])

    def test_short_run_orders(self):
        # cheap two-row study over a short horizon still shows the error
        # dropping and an order estimate between the first pair
        config = scenario_presets()["hs-soliton"].replace(t0=0.05)
        rows, results = convergence_study(config, [0.8, 0.4], keep_results=True)
        assert rows[0].error > rows[1].error > 0
        assert rows[1].order_estimate is not None
        assert set(results) == {0.8, 0.4}
