import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from localglmnet import (
    ModelSpec,
    coverage_and_verdict,
    init_params,
    interaction_profiles,
    interval,
    rng_stream,
    selection_report,
    selection_stats,
    smooth_curve,
    variable_importance,
)
from localglmnet.model import Params


class TestSelectionStats:
    def test_constant_column(self):
        mean, sd = selection_stats(np.full(10, 3.0))
        assert mean == 3.0 and sd == 0.0

    def test_hand_arithmetic(self):
        mean, sd = selection_stats(np.array([0.0, 2.0]))
        assert mean == 1.0
        assert sd == pytest.approx(np.sqrt(2.0))

    def test_rejects_single_value(self):
        with pytest.raises(ValueError):
            selection_stats(np.array([1.0]))


class TestInterval:
    def test_paper_scale_half_width(self):
        lo, hi = interval(0.001, 0.0461)
        assert hi == pytest.approx(0.15169, abs=2e-4)
        assert lo == -hi

    def test_half_width_multiplier(self):
        lo, hi = interval(0.001, 1.0)
        assert hi == pytest.approx(3.2905, abs=1e-3)

    def test_zero_sd(self):
        assert interval(0.01, 0.0) == (0.0, 0.0)

    def test_symmetry_exact(self):
        lo, hi = interval(0.05, 0.7)
        assert lo == -hi

    @pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0, -0.1])
    def test_alpha_domain(self, alpha):
        with pytest.raises(ValueError):
            interval(alpha, 1.0)

    def test_negative_sd_rejected(self):
        with pytest.raises(ValueError):
            interval(0.01, -1.0)


class TestCoverageAndVerdict:
    def test_all_inside_droppable(self):
        cov, verdict = coverage_and_verdict(np.zeros(100), (-0.1, 0.1), 0.001)
        assert cov == 1.0 and verdict == "droppable"

    def test_half_outside_keep(self):
        col = np.r_[np.zeros(50), np.full(50, 5.0)]
        cov, verdict = coverage_and_verdict(col, (-0.1, 0.1), 0.001)
        assert cov == 0.5 and verdict == "keep"

    def test_threshold_is_twice_alpha(self):
        col = np.r_[np.zeros(998), np.full(2, 9.0)]
        cov, verdict = coverage_and_verdict(col, (-1.0, 1.0), 0.001)
        assert verdict == "droppable"  # outside fraction exactly 2 alpha
        col = np.r_[np.zeros(997), np.full(3, 9.0)]
        _, verdict = coverage_and_verdict(col, (-1.0, 1.0), 0.001)
        assert verdict == "keep"

    @settings(max_examples=50, deadline=None)
    @given(st.integers(min_value=0, max_value=2**31))
    def test_permutation_invariant_and_monotone_in_width(self, seed):
        rng = np.random.default_rng(seed)
        col = rng.standard_normal(200)
        cov1, _ = coverage_and_verdict(col, (-0.5, 0.5), 0.01)
        cov2, _ = coverage_and_verdict(rng.permutation(col), (-0.5, 0.5), 0.01)
        assert cov1 == cov2
        cov_wide, _ = coverage_and_verdict(col, (-1.0, 1.0), 0.01)
        assert cov_wide >= cov1


class TestSelectionReport:
    def test_report_structure(self):
        rng = rng_stream(0, "rep")
        beta = np.column_stack([np.full(500, 0.5) + 0.01 * rng.standard_normal(500),
                                0.05 * rng.standard_normal(500)])
        rep = selection_report(beta, ["signal", "noise"], control="noise", alpha=0.001)
        assert rep.verdict_of("signal") == "keep"
        assert rep.verdict_of("noise") == "droppable"
        assert rep.lo == -rep.hi
        assert 0.0 <= rep.rows[0].coverage <= 1.0

    def test_unknown_control(self):
        with pytest.raises(ValueError, match="control"):
            selection_report(np.zeros((10, 2)), ["a", "b"], control="c")

    def test_csv_written(self, tmp_path):
        beta = np.column_stack([np.ones(20), np.zeros(20)])
        rep = selection_report(beta, ["a", "b"], control="b", alpha=0.01)
        path = tmp_path / "sel.csv"
        rep.write_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0].startswith("feature,mean,sd,coverage,verdict")
        assert len(lines) == 3


class TestVariableImportance:
    def test_zero_attentions(self):
        rep = variable_importance(np.zeros((10, 3)))
        assert np.all(rep.vi == 0.0)

    def test_constant_negative_column(self):
        rep = variable_importance(np.full((10, 1), -0.5))
        assert rep.vi[0] == 0.5

    def test_ordering(self):
        beta = np.column_stack([np.full(10, 0.1), np.full(10, 0.9), np.full(10, 0.5)])
        rep = variable_importance(beta, ["a", "b", "c"])
        assert [rep.features[j] for j in rep.order] == ["b", "c", "a"]

    @settings(max_examples=30, deadline=None)
    @given(st.integers(min_value=0, max_value=2**31))
    def test_sign_flip_invariant(self, seed):
        rng = np.random.default_rng(seed)
        beta = rng.standard_normal((50, 4))
        flip = rng.choice([-1.0, 1.0], size=4)
        assert_allclose(variable_importance(beta).vi,
                        variable_importance(beta * flip).vi, rtol=1e-12)

    def test_flags_non_standardized(self):
        rep = variable_importance(np.ones((5, 2)), ["a", "b=x"],
                                  standardized=[True, False])
        assert rep.flagged == ["b=x"]


class TestSmoothCurve:
    def test_reproduces_constant(self):
        rng = rng_stream(1, "sc")
        x = rng.uniform(-2, 2, 400)
        grid, vals = smooth_curve(x, np.full(400, 3.25))
        assert np.abs(vals - 3.25).max() < 1e-8

    def test_reproduces_line(self):
        rng = rng_stream(2, "sc")
        x = rng.uniform(-3, 1, 800)
        grid, vals = smooth_curve(x, 0.4 - 1.3 * x)
        assert np.abs(vals - (0.4 - 1.3 * grid)).max() < 1e-6

    @pytest.mark.parametrize("n_knots", [4, 8, 20, 35])
    def test_linear_reproduction_any_knot_count(self, n_knots):
        rng = rng_stream(3, "sc")
        x = rng.standard_normal(600)
        grid, vals = smooth_curve(x, 2.0 + 0.5 * x, n_knots=n_knots)
        assert np.abs(vals - (2.0 + 0.5 * grid)).max() < 1e-6

    def test_recovers_sine_from_noise(self):
        # Monte Carlo oracle: the smoother tracks a known signal under noise.
        rng = rng_stream(4, "sc")
        x = rng.uniform(-3, 3, 5000)
        y = np.sin(2 * x) + 0.1 * rng.standard_normal(5000)
        grid, vals = smooth_curve(x, y)
        central = (grid >= np.quantile(x, 0.05)) & (grid <= np.quantile(x, 0.95))
        assert np.abs(vals - np.sin(2 * grid))[central].max() < 0.05

    def test_rejects_short_input(self):
        with pytest.raises(ValueError, match="at least 10"):
            smooth_curve(np.arange(5.0), np.arange(5.0))

    def test_rejects_constant_x(self):
        with pytest.raises(ValueError, match="constant"):
            smooth_curve(np.ones(20), np.arange(20.0))

    def test_grid_strictly_increasing(self):
        rng = rng_stream(5, "sc")
        x = rng.standard_normal(100)
        grid, vals = smooth_curve(x, x**2)
        assert np.all(np.diff(grid) > 0)
        assert np.all(np.isfinite(vals))


class TestInteractionProfiles:
    def test_zero_tower_flat_profiles(self):
        spec = ModelSpec(q=3, hidden_dims=(5,))
        dims = spec.layer_dims
        params = Params(weights=[np.zeros((a, b)) for a, b in zip(dims[:-1], dims[1:])],
                        biases=[np.zeros(b) for b in dims[1:]], beta0=1.0)
        X = rng_stream(6, "ip").standard_normal((200, 3))
        prof = interaction_profiles(params, spec, X, "x2")
        assert prof.focal == "x2"
        assert np.abs(prof.curves).max() < 1e-12

    def test_known_linear_interaction(self):
        # beta(x) = W^T x with a single off-diagonal entry gives a constant
        # sensitivity curve at exactly that entry's value.
        spec = ModelSpec(q=2)
        W = np.zeros((2, 2))
        W[1, 0] = 0.7  # beta_1(x) = 0.7 * x_2
        params = Params(weights=[W], biases=[np.zeros(2)], beta0=0.0)
        X = rng_stream(7, "ip").standard_normal((300, 2))
        prof = interaction_profiles(params, spec, X, "x1")
        assert np.abs(prof.curves[1] - 0.7).max() < 1e-8
        assert np.abs(prof.curves[0]).max() < 1e-8

    def test_csv_written(self, tmp_path):
        spec = ModelSpec(q=2, hidden_dims=(4,))
        params = init_params(spec, rng_stream(8, "ip"))
        X = rng_stream(9, "ip").standard_normal((120, 2))
        prof = interaction_profiles(params, spec, X, "x1", feature_names=["x1", "x2"])
        path = tmp_path / "prof.csv"
        prof.write_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "x1,d_x1_d_x1,d_x1_d_x2"
        assert len(lines) == 201
