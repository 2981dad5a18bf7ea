﻿# encoding: utf-8-sig

"""
Piecewise-linear functions approximating a univariate function inside an
absolute-error corridor [f - delta, f + delta].

Pieces are left-closed / right-open, the final piece is closed. Each piece
starts on one of the corridor boundaries at the current abscissa and is
extended as far right as a line through that start point stays inside the
corridor.
"""

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.optimize import brentq, linprog

from .errors import DomainError, FitError, ParameterError
from .logutil import get_logger

EXTENT_XTOL = 1e-9
ROOT_XTOL = 1e-13
CURVATURE_STEP = 1e-4
CURVATURE_SAMPLES = 1000
COVERAGE_TOL = 1e-12
VERIFY_SAMPLES = 2001
CORRIDOR_SLACK = 1e-9
ORACLE_SLACK = 1e-10

# ----------------------------------------------------------------------------
def second_difference(value: Callable, xs: np.ndarray, step: float = CURVATURE_STEP) -> np.ndarray:
    """
    Central second difference (f(x+h) - 2 f(x) + f(x-h)) / h^2.

    Args:
        value (Callable): vectorised function.
        xs (np.ndarray): abscissas, at least `step` away from the domain ends.
        step (float): difference step.
    Returns:
        np.ndarray: second differences at `xs`.
    """
    xs = np.asarray(xs, dtype=float)
    return (_evaluate(value, xs + step) - 2.0 * _evaluate(value, xs) + _evaluate(value, xs - step)) / (step * step)

# ----------------------------------------------------------------------------
def _evaluate(value: Callable, xs) -> np.ndarray:
    """Evaluate `value` on an array, falling back to a scalar loop."""
    xs = np.asarray(xs, dtype=float)
    try:
        ys = np.asarray(value(xs), dtype=float)
        if ys.shape == xs.shape:
            return ys
    except (TypeError, ValueError):
        pass
    return np.array([float(value(float(x))) for x in xs.ravel()], dtype=float).reshape(xs.shape)

# ----------------------------------------------------------------------------
def _rounding_noise(ys: np.ndarray, step: float) -> float:
    """Rounding error of a central second difference, about eps * |f| / step^2."""
    return 16.0 * np.finfo(float).eps * float(np.max(np.abs(ys))) / (step * step)

# ----------------------------------------------------------------------------
def find_curvature_breaks(value: Callable,
                          lo: float,
                          hi: float,
                          samples: int = CURVATURE_SAMPLES,
                          step: float = CURVATURE_STEP) -> tuple[float, ...]:
    """
    Locate the interior points where the function switches between convex
    and concave, by bisection on sign changes of the central second difference.

    Args:
        value (Callable): vectorised function.
        lo (float): left end of the domain.
        hi (float): right end of the domain.
        samples (int): number of scan points.
        step (float): second difference step.
    Returns:
        tuple[float, ...]: ascending curvature breaks strictly inside (lo, hi).
    """
    step = min(step, (hi - lo) / 8.0)
    xs = np.linspace(lo + step, hi - step, samples)
    d2 = second_difference(value, xs, step)
    noise = 1e-7 * (1.0 + float(np.max(np.abs(d2)))) + _rounding_noise(_evaluate(value, xs), step)
    signs = np.where(np.abs(d2) <= noise, 0, np.sign(d2))

    breaks = []
    last_idx = None
    for idx, sgn in enumerate(signs):
        if sgn == 0:
            continue
        if last_idx is not None and sgn != signs[last_idx]:
            a, b = float(xs[last_idx]), float(xs[idx])
            sa = signs[last_idx]
            while b - a > 1e-12 * max(1.0, abs(a)) and b - a > 1e-14:
                mid = 0.5 * (a + b)
                smid = np.sign(second_difference(value, np.array([mid]), step)[0])
                if smid == sa:
                    a = mid
                else:
                    b = mid
            breaks.append(0.5 * (a + b))
        last_idx = idx
    get_logger().debug(f"curvature breaks on [{lo}, {hi}]: {breaks}")
    return tuple(breaks)


# ----------------------------------------------------------------------------
@dataclass(frozen=True)
class UnivariateSpec:
    """
    A univariate function with its derivative, domain, curvature breaks and
    the absolute tolerance of the corridor to fit.

    `value` and `derivative` should accept numpy arrays; scalar-only
    callables still work, more slowly.
    """
    value: Callable[[float], float]
    derivative: Callable[[float], float]
    lo: float
    hi: float
    tolerance: float
    curvature_breaks: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not (self.lo < self.hi):
            get_logger().error(f"Invalid domain [{self.lo}, {self.hi}]")
            raise ParameterError(f"Invalid domain [{self.lo}, {self.hi}]: lo must be < hi")
        if not (self.tolerance > 0):
            get_logger().error(f"Invalid tolerance {self.tolerance}")
            raise ParameterError(f"Tolerance must be positive, got {self.tolerance}")
        breaks = tuple(float(b) for b in self.curvature_breaks)
        if any(not (self.lo < b < self.hi) for b in breaks):
            raise ParameterError(f"Curvature breaks {breaks} must lie strictly inside ({self.lo}, {self.hi})")
        if any(b2 <= b1 for b1, b2 in zip(breaks, breaks[1:])):
            raise ParameterError(f"Curvature breaks {breaks} must be strictly ascending")
        object.__setattr__(self, "curvature_breaks", breaks)
        self.validate()

    # ----------------------------------------------------------------------------
    @property
    def delta(self) -> float:
        return self.tolerance

    # ----------------------------------------------------------------------------
    def segments(self) -> list[tuple[float, float]]:
        """
        Curvature-monotone segments of the domain.

        Returns:
            list[tuple[float, float]]: consecutive (a, b) intervals.
        """
        knots = [self.lo, *self.curvature_breaks, self.hi]
        return list(zip(knots[:-1], knots[1:]))

    # ----------------------------------------------------------------------------
    @cached_property
    def segment_signs(self) -> tuple[int, ...]:
        """
        Curvature sign of each segment: +1 convex, -1 concave (affine counts as convex).
        """
        signs = []
        for a, b in self.segments():
            width = b - a
            step = min(CURVATURE_STEP, width / 8.0)
            xs = np.linspace(a + width / 4.0, b - width / 4.0, 5)
            d2 = second_difference(self.value, xs, step)
            total = float(np.sum(d2))
            signs.append(-1 if total < 0 else 1)
        return tuple(signs)

    # ----------------------------------------------------------------------------
    def validate(self, samples: int = CURVATURE_SAMPLES) -> None:
        """
        Check that the function is convex or concave on every segment,
        using second differences at `samples` points. Runs on construction;
        non-finite differences are skipped and left to the fit.

        Raises:
            ParameterError: if a segment changes curvature.
        """
        for (a, b), sign in zip(self.segments(), self.segment_signs):
            width = b - a
            step = min(CURVATURE_STEP, width / 8.0)
            xs = np.linspace(a + step, b - step, samples)
            with np.errstate(all="ignore"):
                d2 = second_difference(self.value, xs, step)
                scale = _evaluate(self.value, xs)
            finite = np.isfinite(d2) & np.isfinite(scale)
            if not np.any(finite):
                continue
            d2, xs = d2[finite], xs[finite]
            noise = 1e-6 * (1.0 + float(np.max(np.abs(d2)))) + _rounding_noise(scale[finite], step)
            if np.any(sign * d2 < -noise):
                bad = float(xs[np.argmax(sign * d2 < -noise)])
                get_logger().error(f"Segment [{a}, {b}] is not curvature-monotone near {bad}")
                raise ParameterError(f"Segment [{a}, {b}] is not convex or concave (near x={bad})")


# ----------------------------------------------------------------------------
class AffinePiece(BaseModel):
    """One affine piece `slope * x + intercept` on [lo, hi)."""
    model_config = ConfigDict(frozen=True)

    slope: float
    intercept: float
    lo: float
    hi: float

    @model_validator(mode="after")
    def _check_interval(self):
        if not (self.lo < self.hi):
            raise ValueError(f"piece interval [{self.lo}, {self.hi}] is empty")
        return self

    def __call__(self, x):
        return self.slope * x + self.intercept


# ----------------------------------------------------------------------------
class PwlFunction(BaseModel):
    """
    Ordered affine pieces tiling a closed interval. Continuity is not required.
    """
    model_config = ConfigDict(frozen=True)

    tolerance: float = Field(gt=0, description="Corridor half-width used at fit time.")
    pieces: tuple[AffinePiece, ...] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_tiling(self):
        for left, right in zip(self.pieces, self.pieces[1:]):
            if abs(left.hi - right.lo) > COVERAGE_TOL * max(1.0, abs(left.hi)):
                raise ValueError(f"pieces leave a gap or overlap at {left.hi} / {right.lo}")
        return self

    # ----------------------------------------------------------------------------
    @property
    def lo(self) -> float:
        return self.pieces[0].lo

    @property
    def hi(self) -> float:
        return self.pieces[-1].hi

    def __len__(self) -> int:
        return len(self.pieces)

    @cached_property
    def breakpoints(self) -> np.ndarray:
        """Left ends of all pieces."""
        return np.array([p.lo for p in self.pieces], dtype=float)

    @cached_property
    def slopes(self) -> np.ndarray:
        return np.array([p.slope for p in self.pieces], dtype=float)

    @cached_property
    def intercepts(self) -> np.ndarray:
        return np.array([p.intercept for p in self.pieces], dtype=float)

    @property
    def max_abs_slope(self) -> float:
        return float(np.max(np.abs(self.slopes)))

    # ----------------------------------------------------------------------------
    def piece_index(self, x) -> np.ndarray:
        """
        Index of the piece owning each abscissa (left-closed convention).
        """
        idx = np.searchsorted(self.breakpoints, np.asarray(x, dtype=float), side="right") - 1
        return np.clip(idx, 0, len(self.pieces) - 1)

    # ----------------------------------------------------------------------------
    def to_json(self) -> str:
        """
        Serialize as {tolerance, pieces:[{slope, intercept, lo, hi}]}.
        """
        return self.model_dump_json(indent=2)

    @classmethod
    def from_json(cls, text: str) -> "PwlFunction":
        return cls.model_validate(json.loads(text))


# ----------------------------------------------------------------------------
def eval_pwl(pwl: PwlFunction, x):
    """
    Evaluate a PWL function at `x` (scalar or array).

    Args:
        pwl (PwlFunction): function to evaluate.
        x (float | array-like): abscissa(s) inside [lo, hi].
    Returns:
        float | np.ndarray: value(s) of the owning piece(s).
    Raises:
        DomainError: if any abscissa lies outside the domain.
    """
    xs = np.asarray(x, dtype=float)
    if np.any(xs < pwl.lo) or np.any(xs > pwl.hi) or np.any(np.isnan(xs)):
        get_logger().error(f"eval_pwl: abscissa outside [{pwl.lo}, {pwl.hi}]")
        raise DomainError(f"Abscissa outside the PWL domain [{pwl.lo}, {pwl.hi}]")
    idx = pwl.piece_index(xs)
    ys = pwl.slopes[idx] * xs + pwl.intercepts[idx]
    if np.ndim(x) == 0:
        return float(ys)
    return ys

# ----------------------------------------------------------------------------
def verify_corridor(pwl: PwlFunction, spec: UnivariateSpec, samples: int) -> float:
    """
    Maximum absolute error between the PWL function and the described function
    on an equispaced grid plus every piece boundary.

    Args:
        pwl (PwlFunction): fitted function.
        spec (UnivariateSpec): reference function.
        samples (int): number of equispaced points, endpoints included.
    Returns:
        float: max |f(x) - pwl(x)|.
    """
    if samples < 2:
        raise ParameterError(f"verify_corridor needs at least 2 samples, got {samples}")
    grid = np.linspace(pwl.lo, pwl.hi, samples)
    xs = np.unique(np.concatenate([grid, pwl.breakpoints]))
    errors = np.abs(_evaluate(spec.value, xs) - eval_pwl(pwl, xs))
    return float(np.max(errors))


# ----------------------------------------------------------------------------
class _CorridorFitter:
    """
    Greedy maximal-extension construction of a delta-corridor PWL function.
    """

    # ----------------------------------------------------------------------------
    def __init__(self, spec: UnivariateSpec):
        self.spec = spec
        self.delta = spec.tolerance
        self.knots = [spec.lo, *spec.curvature_breaks, spec.hi]
        self.signs = spec.segment_signs

    # ----------------------------------------------------------------------------
    def f(self, x: float) -> float:
        y = float(self.spec.value(x))
        if not math.isfinite(y):
            get_logger().error(f"Non-finite function value at x={x}")
            raise FitError(f"Non-finite function value at x={x}", x=x)
        return y

    def df(self, x: float) -> float:
        y = float(self.spec.derivative(x))
        if not math.isfinite(y):
            get_logger().error(f"Non-finite derivative at x={x}")
            raise FitError(f"Non-finite derivative at x={x}", x=x)
        return y

    # ----------------------------------------------------------------------------
    def segment_of(self, x: float) -> int:
        """Index of the curvature segment owning x (left-closed)."""
        idx = int(np.searchsorted(np.asarray(self.knots[1:-1]), x, side="right"))
        return min(idx, len(self.signs) - 1)

    # ----------------------------------------------------------------------------
    def _ratio(self, x0: float, y0: float, c: float, x: float, fx0: float, dfx0: float) -> float:
        """Slope of the line from (x0, y0) to (x, f(x) + c), with its limit at x0."""
        if x <= x0:
            num = fx0 + c - y0
            if abs(num) <= 1e-12 * (1.0 + abs(fx0)):
                return dfx0
            return math.inf if num > 0 else -math.inf
        return (self.f(x) + c - y0) / (x - x0)

    # ----------------------------------------------------------------------------
    def _ratio_extremes(self, x0: float, y0: float, c: float, a: float, b: float, fx0: float, dfx0: float) -> tuple[float, float]:
        """
        Min and max over [a, b] of the slope to the corridor boundary f + c.
        [a, b] lies in one curvature segment, so the slope has at most one
        stationary point (a tangency), found as a root.
        """
        def tangency(t):
            return self.df(t) * (t - x0) - (self.f(t) + c - y0)

        candidates = [self._ratio(x0, y0, c, a, fx0, dfx0), self._ratio(x0, y0, c, b, fx0, dfx0)]
        lo_t = max(a, x0 + 1e-15 * max(1.0, abs(x0)))
        if b > lo_t:
            na, nb = tangency(lo_t), tangency(b)
            if na * nb < 0:
                t = brentq(tangency, lo_t, b, xtol=ROOT_XTOL)
                candidates.append(self._ratio(x0, y0, c, t, fx0, dfx0))
        return min(candidates), max(candidates)

    # ----------------------------------------------------------------------------
    def slope_window(self, x0: float, y0: float, u: float) -> tuple[float, float]:
        """
        Interval [k_lo, k_hi] of slopes of lines through (x0, y0) that stay
        inside the corridor on [x0, u].
        """
        fx0, dfx0 = self.f(x0), self.df(x0)
        k_lo, k_hi = -math.inf, math.inf
        a = x0
        while a < u:
            seg = self.segment_of(a)
            b = min(u, self.knots[seg + 1])
            up_min, _ = self._ratio_extremes(x0, y0, self.delta, a, b, fx0, dfx0)
            _, low_max = self._ratio_extremes(x0, y0, -self.delta, a, b, fx0, dfx0)
            k_hi = min(k_hi, up_min)
            k_lo = max(k_lo, low_max)
            a = b
        return k_lo, k_hi

    # ----------------------------------------------------------------------------
    def feasible(self, x0: float, y0: float, u: float) -> bool:
        k_lo, k_hi = self.slope_window(x0, y0, u)
        return k_lo <= k_hi + 1e-12 * (1.0 + abs(k_hi) if math.isfinite(k_hi) else 1.0)

    # ----------------------------------------------------------------------------
    def _tangent_extent(self, x0: float, y0: float) -> tuple[float, float] | None:
        """
        Fast path on one curvature segment: the tangent from (x0, y0) to the
        opposite corridor boundary and the point where that tangent leaves the
        corridor. Only applies when (x0, y0) lies on the inner boundary
        (lower for convex, upper for concave).

        Returns:
            tuple[float, float] | None: (extent, slope), or None when the
            tangent line reaches the end of the segment.
        """
        seg = self.segment_of(x0)
        sigma = self.signs[seg]
        b = self.knots[seg + 1]
        d = self.delta
        fx0 = self.f(x0)

        # work on F = sigma * f, which is convex on the segment
        def F(x):
            return sigma * self.f(x)

        def dF(x):
            return sigma * self.df(x)

        Y0 = sigma * y0
        if abs(Y0 - (sigma * fx0 - d)) > 1e-12 * (1.0 + abs(fx0)):
            return None

        def tangency(t):
            return dF(t) * (t - x0) - (F(t) + d - Y0)

        if tangency(b) <= 0:
            return None
        t = brentq(tangency, x0, b, xtol=ROOT_XTOL)
        k = dF(t)

        def leave(x):
            return F(x) - d - (Y0 + k * (x - x0))

        if leave(b) <= 0:
            return None
        u = brentq(leave, t, b, xtol=ROOT_XTOL)
        return u, sigma * k

    # ----------------------------------------------------------------------------
    def _bisect_extent(self, x0: float, y0: float, guess: float | None) -> float:
        """
        Largest u in (x0, hi] such that some line through (x0, y0) stays in
        the corridor on [x0, u], by bisection to EXTENT_XTOL.
        """
        hi = self.spec.hi
        if self.feasible(x0, y0, hi):
            return hi
        good, bad = x0, hi
        if guess is not None and x0 < guess < hi:
            if self.feasible(x0, y0, guess):
                good = guess
            else:
                bad = guess
        while bad - good > EXTENT_XTOL:
            mid = 0.5 * (good + bad)
            if self.feasible(x0, y0, mid):
                good = mid
            else:
                bad = mid
        return good

    # ----------------------------------------------------------------------------
    def extend(self, x0: float, y0: float, guess: float | None) -> tuple[float, float]:
        """
        Maximal extent and a slope for the piece starting at (x0, y0).

        Returns:
            tuple[float, float]: (u, slope)
        """
        u = self._bisect_extent(x0, y0, guess)
        k_lo, k_hi = self.slope_window(x0, y0, u)
        if not math.isfinite(k_lo):
            k = k_hi
        elif not math.isfinite(k_hi):
            k = k_lo
        else:
            k = 0.5 * (k_lo + k_hi)
        return u, k

    # ----------------------------------------------------------------------------
    def chebyshev_line(self, a: float, b: float, samples: int = 2001) -> tuple[float, float, float]:
        """
        Minimax line on [a, b] over sampled points.

        Returns:
            tuple[float, float, float]: (slope, intercept, sampled max error)
        """
        xs = np.linspace(a, b, samples)
        ys = _evaluate(self.spec.value, xs)
        xc = xs - a
        # variables: slope, offset, error
        ones = np.ones_like(xs)
        A_ub = np.vstack([
            np.column_stack([xc, ones, -ones]),
            np.column_stack([-xc, -ones, -ones]),
        ])
        b_ub = np.concatenate([ys, -ys])
        res = linprog(c=[0.0, 0.0, 1.0], A_ub=A_ub, b_ub=b_ub,
                      bounds=[(None, None), (None, None), (0, None)], method="highs")
        if not res.success:
            return 0.0, 0.0, math.inf
        k, c0, err = res.x
        return float(k), float(c0 - k * a), float(err)

    # ----------------------------------------------------------------------------
    def fit(self) -> PwlFunction:
        spec = self.spec
        d = self.delta
        pieces: list[AffinePiece] = []
        x0 = spec.lo
        prev_end: float | None = None
        guess_width: float | None = None

        while x0 < spec.hi:
            fx0 = self.f(x0)
            inner_side = -self.signs[self.segment_of(x0)]
            fast = self._tangent_extent(x0, fx0 + inner_side * d)
            if fast is not None:
                # the outer boundary never reaches further on a convex/concave segment
                u, k = fast
                side, y0 = inner_side, fx0 + inner_side * d
            else:
                options = []
                # upper first so that it wins exact ties
                for side in (1, -1):
                    y0 = fx0 + side * d
                    guess = x0 + 2.0 * guess_width if guess_width else None
                    u, k = self.extend(x0, y0, guess)
                    continues = prev_end is not None and abs(prev_end - y0) <= 1e-9 * (1.0 + abs(y0))
                    options.append((u, continues, side, y0, k))
                u, _, side, y0, k = max(options, key=lambda o: (o[0], o[1]))
            if u - x0 <= 0.0:
                get_logger().error(f"PWL fit stalled at x={x0}")
                raise FitError(f"PWL fit could not extend a piece beyond x={x0}", x=x0)
            if spec.hi - u <= EXTENT_XTOL:
                u = spec.hi
            intercept = y0 - k * x0

            if not pieces and u == spec.hi:
                ck, cc, cerr = self.chebyshev_line(spec.lo, spec.hi)
                if cerr <= 0.5 * d:
                    k, intercept = ck, cc

            pieces.append(AffinePiece(slope=k, intercept=intercept, lo=x0, hi=u))
            get_logger().debug(f"piece {len(pieces)}: [{x0:.12g}, {u:.12g}) slope={k:.12g} start={'upper' if side > 0 else 'lower'}")
            prev_end = k * u + intercept
            guess_width = u - x0
            x0 = u

        return PwlFunction(tolerance=d, pieces=tuple(pieces))


# ----------------------------------------------------------------------------
def fit_pwl(spec: UnivariateSpec) -> PwlFunction:
    """
    Fit a PWL delta-absolute approximation of `spec` on its whole domain.

    Args:
        spec (UnivariateSpec): function, derivative, domain, curvature breaks, tolerance.
    Returns:
        PwlFunction: pieces covering [lo, hi].
    Raises:
        FitError: if the function is not finite somewhere on the domain or
            the fitted pieces leave the corridor.
    """
    pwl = _CorridorFitter(spec).fit()
    error = verify_corridor(pwl, spec, VERIFY_SAMPLES)
    if error > spec.tolerance * (1.0 + CORRIDOR_SLACK) + CORRIDOR_SLACK:
        get_logger().error(f"PWL fit leaves the corridor: error {error:.6g} > delta {spec.tolerance:g}")
        raise FitError(f"PWL fit error {error:.6g} exceeds the tolerance {spec.tolerance:g}")
    get_logger().info(f"PWL fit on [{spec.lo:.6g}, {spec.hi:.6g}] with delta={spec.tolerance:g}: {len(pwl)} pieces")
    return pwl

# ----------------------------------------------------------------------------
class _LineCone:
    """
    Lines within delta of a growing set of points, as the convex polygon of
    (slope, value at the first abscissa) pairs. Each point clips the polygon
    by two half-planes.
    """

    def __init__(self, x0: float, y0: float, x1: float, y1: float, delta: float, slack: float):
        self.x0 = x0
        self.delta = delta
        self.slack = slack
        dx = x1 - x0
        c_lo, c_hi = y0 - delta, y0 + delta
        v_lo, v_hi = y1 - delta, y1 + delta
        # parallelogram of the first two points, in cyclic order
        self.vertices = [((v_lo - c_lo) / dx, c_lo), ((v_lo - c_hi) / dx, c_hi),
                         ((v_hi - c_hi) / dx, c_hi), ((v_hi - c_lo) / dx, c_lo)]

    def _clip(self, a: float, b: float, rhs: float) -> None:
        """Keep the part of the polygon with a * slope + b * value <= rhs."""
        out = []
        verts = self.vertices
        for i, p in enumerate(verts):
            q = verts[(i + 1) % len(verts)]
            fp = a * p[0] + b * p[1] - rhs
            fq = a * q[0] + b * q[1] - rhs
            if fp <= 0 and (not out or out[-1] != p):
                out.append(p)
            if (fp <= 0) != (fq <= 0):
                t = fp / (fp - fq)
                cut = (p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]))
                if not out or out[-1] != cut:
                    out.append(cut)
        if len(out) > 1 and out[0] == out[-1]:
            out.pop()
        self.vertices = out

    def add(self, x: float, y: float) -> bool:
        """
        Restrict to lines within delta of (x, y).

        Returns:
            bool: whether some line still fits every point added so far.
        """
        dx = x - self.x0
        self._clip(dx, 1.0, y + self.delta + self.slack)
        if self.vertices:
            self._clip(-dx, -1.0, -(y - self.delta) + self.slack)
        return bool(self.vertices)

# ----------------------------------------------------------------------------
def min_pieces_oracle(spec: UnivariateSpec, grid_size: int) -> int:
    """
    Minimal number of pieces of a PWL function whose breakpoints lie on an
    equispaced grid and whose error at the grid points is at most delta.

    The pieces form a shortest path in the graph of grid intervals; because
    feasibility of an interval is inherited by its sub-intervals, following
    the furthest reachable node from each node is optimal. The furthest node
    is found by clipping the feasible line polygon one grid point at a time.

    Args:
        spec (UnivariateSpec): reference function and tolerance.
        grid_size (int): number of grid points (>= 3).
    Returns:
        int: minimal piece count.
    """
    if grid_size < 3:
        raise ParameterError(f"grid_size must be >= 3, got {grid_size}")
    xs = np.linspace(spec.lo, spec.hi, grid_size)
    ys = _evaluate(spec.value, xs)
    if not np.all(np.isfinite(ys)):
        bad = float(xs[np.argmax(~np.isfinite(ys))])
        raise FitError(f"Non-finite function value at x={bad}", x=bad)

    slack = ORACLE_SLACK * (1.0 + float(np.max(np.abs(ys))))
    count = 0
    start = 0
    while start < grid_size:
        count += 1
        # the piece owns grid points start .. end-1; two points always fit
        if grid_size - start <= 2:
            break
        cone = _LineCone(xs[start], ys[start], xs[start + 1], ys[start + 1], spec.tolerance, slack)
        end = start + 2
        while end < grid_size and cone.add(xs[end], ys[end]):
            end += 1
        start = end
    get_logger().debug(f"min pieces oracle on [{spec.lo:.6g}, {spec.hi:.6g}] with delta={spec.tolerance:g}: {count}")
    return count


__all__ = [
    "UnivariateSpec",
    "AffinePiece",
    "PwlFunction",
    "fit_pwl",
    "eval_pwl",
    "verify_corridor",
    "min_pieces_oracle",
    "find_curvature_breaks",
    "second_difference",
]
