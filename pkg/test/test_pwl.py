# encoding: utf-8-sig

import json
from unittest.mock import patch

import numpy as np
import pytest
from scipy.optimize import linprog

from pwlnash.errors import DomainError, FitError, ParameterError
from pwlnash.game import CostKind, cost_spec, security_cap
from pwlnash.pwl import (
    AffinePiece,
    PwlFunction,
    UnivariateSpec,
    eval_pwl,
    find_curvature_breaks,
    fit_pwl,
    min_pieces_oracle,
    verify_corridor,
)


def cubic_spec(delta=0.1):
    return UnivariateSpec(value=lambda x: np.asarray(x) ** 3,
                          derivative=lambda x: 3.0 * np.asarray(x) ** 2,
                          lo=-1.0, hi=1.0, tolerance=delta,
                          curvature_breaks=(0.0,))


def square_spec(delta):
    return UnivariateSpec(value=lambda x: np.asarray(x) ** 2,
                          derivative=lambda x: 2.0 * np.asarray(x),
                          lo=0.0, hi=1.0, tolerance=delta)


def neglog_spec(hi=0.95, delta=0.05):
    return UnivariateSpec(value=lambda x: -np.log1p(-np.asarray(x)),
                          derivative=lambda x: 1.0 / (1.0 - np.asarray(x)),
                          lo=0.0, hi=hi, tolerance=delta)


def missing_break_spec(delta=0.01):
    return UnivariateSpec(value=lambda x: np.asarray(x) ** 3,
                          derivative=lambda x: 3.0 * np.asarray(x) ** 2,
                          lo=-1.0, hi=0.5, tolerance=delta)


def random_convex_spec(seed, delta):
    rng = np.random.default_rng(seed)
    kind = (CostKind.LOG, CostKind.ISR)[seed % 2]
    alpha = float(rng.integers(1, 11))
    budget = float(rng.integers(1, 11)) * 0.5
    return cost_spec(kind, alpha, security_cap(kind, alpha, budget), delta)


def lp_min_pieces(spec, grid_size):
    """Greedy piece count on the grid, one feasibility LP per extension"""
    xs = np.linspace(spec.lo, spec.hi, grid_size)
    ys = np.asarray(spec.value(xs), dtype=float)

    def fits(lo, hi):
        if hi - lo <= 2:
            return True
        xc = xs[lo:hi] - xs[lo]
        ones = np.ones_like(xc)
        A_ub = np.vstack([np.column_stack([xc, ones]), np.column_stack([-xc, -ones])])
        b_ub = np.concatenate([ys[lo:hi] + spec.tolerance, -(ys[lo:hi] - spec.tolerance)])
        res = linprog(c=[0.0, 0.0], A_ub=A_ub, b_ub=b_ub, bounds=[(None, None), (None, None)], method="highs")
        return res.status == 0

    count, start = 0, 0
    while start < grid_size:
        count += 1
        end = start + 1
        while end < grid_size and fits(start, end + 1):
            end += 1
        start = end
    return count


class TestUnivariateSpec:
    """Test class for the fitted function description"""

    def test_empty_domain(self):
        with pytest.raises(ParameterError):
            UnivariateSpec(value=np.sin, derivative=np.cos, lo=1.0, hi=1.0, tolerance=0.1)

    @pytest.mark.parametrize("delta", [0.0, -1e-3])
    def test_nonpositive_tolerance(self, delta):
        with pytest.raises(ParameterError):
            UnivariateSpec(value=np.sin, derivative=np.cos, lo=0.0, hi=1.0, tolerance=delta)

    def test_break_outside_domain(self):
        with pytest.raises(ParameterError):
            UnivariateSpec(value=np.sin, derivative=np.cos, lo=0.0, hi=1.0, tolerance=0.1,
                           curvature_breaks=(1.0,))

    def test_unsorted_breaks(self):
        with pytest.raises(ParameterError):
            UnivariateSpec(value=np.sin, derivative=np.cos, lo=0.0, hi=3.0, tolerance=0.1,
                           curvature_breaks=(2.0, 1.0))

    def test_segments_and_signs(self):
        spec = cubic_spec()
        assert spec.delta == 0.1
        assert spec.segments() == [(-1.0, 0.0), (0.0, 1.0)]
        assert spec.segment_signs == (-1, 1)

    def test_missing_break_rejected(self):
        with pytest.raises(ParameterError, match="not convex or concave"):
            missing_break_spec()

        cubic_spec().validate()

    def test_narrow_nonconvex_domain(self):
        cap = security_cap(CostKind.NCF, 1.0, 1e-3)
        spec = cost_spec(CostKind.NCF, 1.0, cap, 1e-5)

        assert spec.curvature_breaks == ()
        assert verify_corridor(fit_pwl(spec), spec, 1001) <= 1e-5 + 1e-9

    def test_find_curvature_breaks_cubic(self):
        breaks = find_curvature_breaks(lambda x: np.asarray(x) ** 3, -1.0, 1.0)
        assert len(breaks) == 1
        assert abs(breaks[0]) < 1e-4

    def test_find_curvature_breaks_convex(self):
        assert find_curvature_breaks(lambda x: np.exp(x), 0.0, 2.0) == ()


class TestFitPwl:
    """Test class for the corridor fit"""

    def test_cubic_three_pieces(self):
        spec = cubic_spec(0.1)
        pwl = fit_pwl(spec)

        assert len(pwl) == 3
        assert verify_corridor(pwl, spec, 2001) <= 0.1 + 1e-9
        assert abs(eval_pwl(pwl, 0.0)) <= 0.1

    def test_affine_single_exact_piece(self):
        spec = UnivariateSpec(value=lambda x: 2.0 * np.asarray(x) + 1.0,
                              derivative=lambda x: np.full_like(np.asarray(x, dtype=float), 2.0),
                              lo=0.0, hi=5.0, tolerance=0.25)
        pwl = fit_pwl(spec)

        assert len(pwl) == 1
        assert pwl.pieces[0].slope == pytest.approx(2.0, abs=1e-6)
        assert pwl.pieces[0].intercept == pytest.approx(1.0, abs=1e-6)
        assert verify_corridor(pwl, spec, 1001) <= 1e-6

    def test_neglog_matches_oracle(self):
        spec = neglog_spec()
        pwl = fit_pwl(spec)

        assert verify_corridor(pwl, spec, 5001) <= spec.tolerance + 1e-9
        assert len(pwl) == min_pieces_oracle(spec, 10_000)

    def test_square_matches_oracle(self):
        spec = square_spec(1e-3)
        pwl = fit_pwl(spec)

        # sqrt(8 delta) is the widest piece on a parabola
        assert len(pwl) == 12
        assert min_pieces_oracle(spec, 10_000) == 12
        assert verify_corridor(pwl, spec, 5001) <= 1e-3 + 1e-9

    def test_coverage(self):
        spec = neglog_spec(hi=0.99, delta=0.01)
        pwl = fit_pwl(spec)

        assert pwl.lo == spec.lo
        assert pwl.hi == spec.hi
        for left, right in zip(pwl.pieces, pwl.pieces[1:]):
            assert abs(left.hi - right.lo) <= 1e-12
            assert left.lo < left.hi

    def test_monotone_in_tolerance(self):
        counts = [len(fit_pwl(neglog_spec(hi=0.99, delta=d))) for d in (0.2, 0.05, 0.01, 0.002)]

        assert counts == sorted(counts)
        assert counts[-1] > counts[0]

    def test_nonconvex_cost(self):
        cap = security_cap(CostKind.NCF, 3.0, 4.0)
        spec = cost_spec(CostKind.NCF, 3.0, cap, 0.01)
        pwl = fit_pwl(spec)

        assert len(spec.curvature_breaks) == 2
        assert verify_corridor(pwl, spec, 4001) <= 0.01 + 1e-9

    @pytest.mark.parametrize("delta", [0.05, 0.005])
    @pytest.mark.parametrize("alpha, budget", [(1.0, 0.5), (3.0, 4.0), (2.0, 5.0), (10.0, 2.0)])
    def test_nonconvex_cost_near_minimal(self, alpha, budget, delta):
        cap = security_cap(CostKind.NCF, alpha, budget)
        spec = cost_spec(CostKind.NCF, alpha, cap, delta)
        pwl = fit_pwl(spec)

        assert verify_corridor(pwl, spec, 5001) <= delta + 1e-9
        assert len(pwl) <= min_pieces_oracle(spec, 10_000) + len(spec.curvature_breaks)

    def test_fit_leaving_corridor_raises(self):
        # skip the construction check so the fit itself sees the missing break
        with patch.object(UnivariateSpec, "validate"):
            spec = missing_break_spec()

        with pytest.raises(FitError, match="exceeds the tolerance"):
            fit_pwl(spec)

    def test_non_finite_value(self):
        spec = UnivariateSpec(value=lambda x: np.log(np.asarray(x, dtype=float)),
                              derivative=lambda x: 1.0 / np.asarray(x, dtype=float),
                              lo=0.0, hi=1.0, tolerance=0.1)
        with np.errstate(divide="ignore"):
            with pytest.raises(FitError) as err:
                fit_pwl(spec)
        assert err.value.x == 0.0

    @pytest.mark.parametrize("seed", range(20))
    def test_convex_costs_match_oracle(self, seed):
        spec = random_convex_spec(seed, 0.1)

        pwl = fit_pwl(spec)
        assert verify_corridor(pwl, spec, 5001) <= 0.1 + 1e-9
        assert len(pwl) == min_pieces_oracle(spec, 10_000)

    @pytest.mark.slow
    @pytest.mark.parametrize("delta", [1e-2, 1e-3])
    @pytest.mark.parametrize("seed", range(8))
    def test_convex_costs_match_oracle_fine(self, seed, delta):
        spec = random_convex_spec(seed, delta)

        pwl = fit_pwl(spec)
        assert verify_corridor(pwl, spec, 5001) <= delta * (1 + 1e-9) + 1e-9
        assert len(pwl) == min_pieces_oracle(spec, 10_000)


class TestEvalPwl:
    """Test class for evaluation and serialization"""

    @pytest.fixture
    def jump_pwl(self):
        return PwlFunction(tolerance=0.1, pieces=(
            AffinePiece(slope=1.0, intercept=0.0, lo=0.0, hi=1.0),
            AffinePiece(slope=1.0, intercept=5.0, lo=1.0, hi=2.0),
        ))

    def test_single_piece(self):
        pwl = PwlFunction(tolerance=0.1, pieces=(AffinePiece(slope=2.0, intercept=0.0, lo=0.0, hi=1.0),))
        assert eval_pwl(pwl, 0.5) == 1.0

    def test_breakpoint_belongs_to_right_piece(self, jump_pwl):
        assert eval_pwl(jump_pwl, 1.0) == 6.0
        assert eval_pwl(jump_pwl, 0.999) == pytest.approx(0.999)

    def test_last_piece_closed(self, jump_pwl):
        assert eval_pwl(jump_pwl, 2.0) == 7.0

    def test_array_evaluation(self, jump_pwl):
        ys = eval_pwl(jump_pwl, np.array([0.0, 0.5, 1.0, 1.5]))
        np.testing.assert_allclose(ys, [0.0, 0.5, 6.0, 6.5])

    @pytest.mark.parametrize("x", [-0.1, 2.5, float("nan")])
    def test_outside_domain(self, jump_pwl, x):
        with pytest.raises(DomainError):
            eval_pwl(jump_pwl, x)

    def test_properties(self, jump_pwl):
        np.testing.assert_array_equal(jump_pwl.breakpoints, [0.0, 1.0])
        np.testing.assert_array_equal(jump_pwl.slopes, [1.0, 1.0])
        assert jump_pwl.max_abs_slope == 1.0
        np.testing.assert_array_equal(jump_pwl.piece_index([0.0, 0.99, 1.0, 2.0]), [0, 0, 1, 1])

    def test_gap_rejected(self):
        with pytest.raises(ValueError):
            PwlFunction(tolerance=0.1, pieces=(
                AffinePiece(slope=1.0, intercept=0.0, lo=0.0, hi=1.0),
                AffinePiece(slope=1.0, intercept=0.0, lo=1.5, hi=2.0),
            ))

    def test_json_round_trip(self):
        pwl = fit_pwl(cubic_spec(0.1))
        text = pwl.to_json()

        assert PwlFunction.from_json(text) == pwl
        assert set(json.loads(text)) == {"tolerance", "pieces"}


class TestVerifyCorridor:
    """Test class for the corridor check"""

    def test_perturbed_piece_exceeds_tolerance(self):
        spec = cubic_spec(0.1)
        pwl = fit_pwl(spec)
        first = pwl.pieces[0]
        shifted = first.model_copy(update={"intercept": first.intercept + 0.2})
        broken = PwlFunction(tolerance=0.1, pieces=(shifted, *pwl.pieces[1:]))

        assert verify_corridor(broken, spec, 2001) > 0.1

    def test_too_few_samples(self):
        spec = cubic_spec(0.1)
        with pytest.raises(ParameterError):
            verify_corridor(fit_pwl(spec), spec, 1)

    def test_oracle_affine_and_cubic(self):
        affine = UnivariateSpec(value=lambda x: 3.0 - np.asarray(x),
                                derivative=lambda x: -np.ones_like(np.asarray(x, dtype=float)),
                                lo=0.0, hi=1.0, tolerance=1e-3)
        assert min_pieces_oracle(affine, 1000) == 1
        assert min_pieces_oracle(cubic_spec(0.1), 10_000) == 3

    def test_oracle_grid_size(self):
        with pytest.raises(ParameterError):
            min_pieces_oracle(cubic_spec(0.1), 2)

    @pytest.mark.slow
    @pytest.mark.parametrize("spec", [cubic_spec(0.1), square_spec(1e-3), neglog_spec(hi=0.99, delta=0.01),
                                      random_convex_spec(3, 1e-3)])
    def test_oracle_agrees_with_lp(self, spec):
        assert min_pieces_oracle(spec, 400) == lp_min_pieces(spec, 400)
