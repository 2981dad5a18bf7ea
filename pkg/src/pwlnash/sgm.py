﻿# encoding: utf-8-sig

"""
Sample generation: alternate between an equilibrium of the game restricted
to the strategies sampled so far and best-response checks in the full game,
adding profitable deviations until none gains more than delta - delta_gap.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from enum import StrEnum
from functools import cached_property
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .bestresponse import OpponentAggregates, best_response, regret
from .errors import ParameterError, SampledSolverExhausted
from .game import GciInstance, MixedProfile, PureStrategy, cost_spec, mixed_expected_payoff
from .logutil import get_logger
from .normalform import (
    MAX_CANDIDATES,
    SampledMixedProfile,
    build_sampled_game,
    profile_from_sampled,
    solve_sampled_ne,
)
from .pwl import PwlFunction, eval_pwl, fit_pwl

DEDUP_TOL = 1e-9
DEFAULT_DELTA_F = 1e-4
DEFAULT_MU = 0.5
DEFAULT_DELTA_0 = 0.05
DEFAULT_TIME_LIMIT = 900.0
DEFAULT_MAX_ITERATIONS = 10_000

# ----------------------------------------------------------------------------
def default_delta_gap(delta_f: float, mu: float = DEFAULT_MU) -> float:
    """Best-response gap (1 - mu) * 4 delta_f / 5."""
    return (1.0 - mu) * 4.0 * delta_f / 5.0

# ----------------------------------------------------------------------------
def _check_mu(mu: float) -> None:
    if not (0.0 < mu < 1.0):
        get_logger().error(f"mu={mu} outside (0, 1)")
        raise ParameterError(f"mu must lie in (0, 1), got {mu}")


# ----------------------------------------------------------------------------
class ApproximatedGame(BaseModel):
    """
    The game with every player's cybersecurity cost replaced by a PWL
    function within `tolerance` of it on [0, s_bar]. All other payoff terms
    and the feasible sets are unchanged.
    """
    model_config = ConfigDict(frozen=True)

    base: GciInstance
    h_hat: tuple[PwlFunction, ...]
    tolerance: float = Field(gt=0)

    @model_validator(mode="after")
    def _check_players(self):
        if len(self.h_hat) != self.base.m:
            raise ValueError(f"need {self.base.m} PWL costs, got {len(self.h_hat)}")
        return self

    @property
    def instance(self) -> GciInstance:
        return self.base

    @property
    def piece_counts(self) -> tuple[int, ...]:
        return tuple(len(h) for h in self.h_hat)

    def cost(self, p: int, s):
        return eval_pwl(self.h_hat[p], s)

    def cost_slope_bound(self, p: int) -> float:
        return self.h_hat[p].max_abs_slope

    @cached_property
    def interior_breaks(self) -> tuple[np.ndarray, ...]:
        return tuple(h.breakpoints[1:] for h in self.h_hat)

    def cost_breaks(self, p: int) -> np.ndarray:
        return self.interior_breaks[p]

    def cost_of_piece(self, p: int, piece, s):
        h = self.h_hat[p]
        piece = np.asarray(piece)
        return h.slopes[piece] * np.asarray(s, dtype=float) + h.intercepts[piece]


# ----------------------------------------------------------------------------
class SgmConfig(BaseModel):
    """
    Attributes:
        delta: target regret of the returned profile.
        delta_gap: best-response oracle gap.
        delta_M: regret accepted in the sampled game.
    """
    model_config = ConfigDict(frozen=True)

    delta: float = Field(gt=0)
    delta_gap: float = Field(gt=0)
    delta_M: float = Field(ge=0)
    max_iterations: int = Field(default=DEFAULT_MAX_ITERATIONS, ge=1)
    time_limit_s: float = Field(default=DEFAULT_TIME_LIMIT, gt=0)
    workers: int = Field(default=1, ge=1)
    max_candidates: int = Field(default=MAX_CANDIDATES, ge=1)

    @model_validator(mode="after")
    def _check_tolerances(self):
        if not self.delta > self.delta_gap:
            raise ValueError(f"delta={self.delta} must exceed delta_gap={self.delta_gap}")
        if self.delta_M > self.delta / 10.0 * (1.0 + 1e-12):
            raise ValueError(f"delta_M={self.delta_M} exceeds delta/10")
        if not self.delta_M < self.delta - self.delta_gap:
            raise ValueError(f"delta_M={self.delta_M} must stay below delta - delta_gap")
        return self

    @property
    def threshold(self) -> float:
        """Deviation gains at or above this value are profitable."""
        return self.delta - self.delta_gap

    @classmethod
    def for_target(cls,
                   delta: float,
                   *,
                   mu: float = DEFAULT_MU,
                   delta_f: float | None = None,
                   delta_gap: float | None = None,
                   delta_M: float | None = None,
                   **kwargs) -> "SgmConfig":
        """
        Configuration for target `delta` with the default tolerances
        delta_gap = (1 - mu) 4 delta_f / 5 and delta_M = delta / 10.

        Raises:
            ParameterError: if the tolerances are inconsistent.
        """
        _check_mu(mu)
        delta_f = delta / (1.0 - mu) if delta_f is None else delta_f
        delta_gap = default_delta_gap(delta_f, mu) if delta_gap is None else delta_gap
        delta_M = delta / 10.0 if delta_M is None else delta_M
        if not (delta > delta_gap > 0) or delta_M < 0 or delta_M > delta / 10.0 or delta_M >= delta - delta_gap:
            get_logger().error(f"inconsistent tolerances delta={delta}, delta_gap={delta_gap}, delta_M={delta_M}")
            raise ParameterError(
                f"Need delta > delta_gap > 0 and 0 <= delta_M <= min(delta/10, delta - delta_gap), "
                f"got delta={delta}, delta_gap={delta_gap}, delta_M={delta_M}"
            )
        return cls(delta=delta, delta_gap=delta_gap, delta_M=delta_M, **kwargs)


# ----------------------------------------------------------------------------
class SgmStatus(StrEnum):
    SOLVED = "Solved"
    TIME_LIMIT = "TimeLimit"
    SOLVER_EXHAUSTED = "SolverExhausted"
    ITERATION_LIMIT = "IterationLimit"


# ----------------------------------------------------------------------------
class SgmOutcome(BaseModel):
    """
    Result of one SGM run. `history` holds the largest deviation gain of
    every iteration and `samples` the final strategy lists. `oracle_evaluations`
    counts the objective evaluations spent in best responses.
    """
    model_config = ConfigDict(frozen=True)

    profile: MixedProfile
    iterations: int
    strategies_added: tuple[int, ...]
    status: SgmStatus
    wall_time_s: float = Field(ge=0)
    history: tuple[float, ...] = ()
    samples: tuple[tuple[PureStrategy, ...], ...] = ()
    oracle_evaluations: int = 0

    @property
    def solved(self) -> bool:
        return self.status is SgmStatus.SOLVED


# ----------------------------------------------------------------------------
def approximate_ipg(inst: GciInstance, delta: float) -> ApproximatedGame:
    """
    PWL approximation of every player's cybersecurity cost on [0, s_bar]
    within absolute tolerance delta.

    Raises:
        ParameterError: if delta is not positive.
        FitError: if a fit fails.
    """
    if not (delta > 0):
        get_logger().error(f"approximate_ipg: non-positive tolerance {delta}")
        raise ParameterError(f"Approximation tolerance must be positive, got {delta}")
    h_hat = tuple(
        fit_pwl(cost_spec(inst.cost_kind, pl.alpha, cap, delta))
        for pl, cap in zip(inst.players, inst.security_caps)
    )
    game = ApproximatedGame(base=inst, h_hat=h_hat, tolerance=delta)
    get_logger().info(f"approximated {inst.instance_id or 'instance'} at delta={delta:g}: pieces {game.piece_counts}")
    return game

# ----------------------------------------------------------------------------
def initialize_samples(view, delta_gap: float) -> list[PureStrategy]:
    """
    Each player's best response to the null environment (opponents at zero
    quantity and zero security).
    """
    n = view.instance.n
    return [best_response(view, p, OpponentAggregates.zeros(n), delta_gap).strategy
            for p in range(view.instance.m)]

# ----------------------------------------------------------------------------
def _add_unique(samples: list[PureStrategy], strategy: PureStrategy) -> bool:
    if any(strategy.close_to(st, DEDUP_TOL) for st in samples):
        return False
    samples.append(strategy)
    return True

# ----------------------------------------------------------------------------
def run_sgm(view,
            config: SgmConfig,
            warm_start: MixedProfile | None = None,
            initial_samples: Sequence[Sequence[PureStrategy]] | None = None) -> SgmOutcome:
    """
    Sample generation method on an exact or approximated game.

    Args:
        view: GciInstance or ApproximatedGame.
        config (SgmConfig): tolerances and limits.
        warm_start (MixedProfile | None): profile whose support strategies
            join the initial samples and which seeds the first sampled solve.
        initial_samples (Sequence | None): starting strategy lists; the
            null-environment best responses when omitted.
    Returns:
        SgmOutcome: on Solved, every player's certified deviation gain is
        below delta - delta_gap, hence the regret is below delta.
    """
    started = time.perf_counter()
    inst = view.instance
    m = inst.m

    if initial_samples is None:
        samples = [[st] for st in initialize_samples(view, config.delta_gap)]
    else:
        samples = [list(lst) for lst in initial_samples]
    if warm_start is not None:
        for p, sigma in enumerate(warm_start.strategies):
            for st in sigma.support:
                _add_unique(samples[p], st)
    initial_sizes = [len(lst) for lst in samples]

    warm = None
    profile = MixedProfile.pure([lst[0] for lst in samples])
    history: list[float] = []
    status = SgmStatus.ITERATION_LIMIT
    evaluations = 0
    iteration = 0

    executor = ThreadPoolExecutor(max_workers=config.workers) if config.workers > 1 else None
    try:
        for iteration in range(1, config.max_iterations + 1):
            if time.perf_counter() - started > config.time_limit_s:
                get_logger().warning(f"SGM: time limit {config.time_limit_s}s reached at iteration {iteration}")
                status = SgmStatus.TIME_LIMIT
                iteration -= 1
                break

            game = build_sampled_game(view, samples)
            if warm is None and warm_start is not None:
                warm = SampledMixedProfile.from_mixed(game, warm_start)
            try:
                sampled = solve_sampled_ne(game, config.delta_M, warm.extend(game.shape) if warm else None,
                                           max_candidates=config.max_candidates)
            except SampledSolverExhausted as e:
                get_logger().warning(f"SGM: sampled solver exhausted at iteration {iteration}: {e}")
                status = SgmStatus.SOLVER_EXHAUSTED
                break
            warm = sampled
            profile = profile_from_sampled(game, sampled)

            def deviation(p):
                br = best_response(view, p, profile, config.delta_gap)
                return br, br.value - mixed_expected_payoff(view, p, profile)

            players = range(m)
            results = list(executor.map(deviation, players)) if executor else [deviation(p) for p in players]
            gains = [g for _, g in results]
            evaluations += sum(br.evaluations for br, _ in results)
            max_gain = max(gains)
            history.append(max_gain)
            get_logger().debug(f"SGM iteration {iteration}: samples {[len(lst) for lst in samples]}, "
                               f"support {profile.support_size()}, gains {[f'{g:.3e}' for g in gains]}")

            if max_gain < config.threshold:
                status = SgmStatus.SOLVED
                break

            added = 0
            for p, (br, gain) in enumerate(results):
                if gain >= config.threshold and _add_unique(samples[p], br.strategy):
                    added += 1
            if added == 0:
                get_logger().warning(f"SGM: profitable deviations already sampled at iteration {iteration}")
                status = SgmStatus.SOLVER_EXHAUSTED
                break
    finally:
        if executor:
            executor.shutdown()

    elapsed = time.perf_counter() - started
    outcome = SgmOutcome(
        profile=profile,
        iterations=iteration,
        strategies_added=tuple(len(lst) - k for lst, k in zip(samples, initial_sizes)),
        status=status,
        wall_time_s=elapsed,
        history=tuple(history),
        samples=tuple(tuple(lst) for lst in samples),
        oracle_evaluations=evaluations,
    )
    get_logger().info(f"SGM {status.value} after {iteration} iterations in {elapsed:.3f}s "
                      f"(added {outcome.strategies_added}, {evaluations} oracle evaluations)")
    return outcome

# ----------------------------------------------------------------------------
def direct_procedure(inst: GciInstance,
                     delta_f: float = DEFAULT_DELTA_F,
                     mu: float = DEFAULT_MU,
                     *,
                     time_limit_s: float = DEFAULT_TIME_LIMIT,
                     workers: int = 1) -> tuple[MixedProfile, SgmOutcome]:
    """
    Single-round approximation at mu delta_f / 2 followed by SGM with target
    (1 - mu) delta_f. The result is a delta_f-equilibrium of the exact game.

    Raises:
        ParameterError: if mu is outside (0, 1) or delta_f is not positive.
    """
    _check_mu(mu)
    if not (delta_f > 0):
        raise ParameterError(f"delta_f must be positive, got {delta_f}")
    started = time.perf_counter()
    approx = approximate_ipg(inst, mu * delta_f / 2.0)
    remaining = max(time_limit_s - (time.perf_counter() - started), 1e-9)
    config = SgmConfig.for_target((1.0 - mu) * delta_f, mu=mu, delta_f=delta_f,
                                  time_limit_s=remaining, workers=workers)
    outcome = run_sgm(approx, config)
    return outcome.profile, outcome

# ----------------------------------------------------------------------------
def two_level_procedure(inst: GciInstance,
                        delta_f: float = DEFAULT_DELTA_F,
                        delta_0: float = DEFAULT_DELTA_0,
                        mu: float = DEFAULT_MU,
                        *,
                        time_limit_s: float = DEFAULT_TIME_LIMIT,
                        workers: int = 1) -> tuple[MixedProfile, tuple[SgmOutcome, SgmOutcome | None]]:
    """
    Solve a coarse approximation at delta_0 first, then the fine one at
    mu delta_f / 2 warm-started from the coarse equilibrium. Stage 2 starts
    from stage 1's support strategies.

    Returns:
        tuple: final profile and (stage 1 outcome, stage 2 outcome or None
        when stage 1 did not solve).
    Raises:
        ParameterError: if mu is outside (0, 1) or delta_0 <= mu delta_f / 2.
    """
    _check_mu(mu)
    fine = mu * delta_f / 2.0
    if not (delta_f > 0) or not (delta_0 > fine):
        get_logger().error(f"two_level_procedure: delta_0={delta_0} must exceed mu*delta_f/2={fine}")
        raise ParameterError(f"delta_0 must exceed mu * delta_f / 2 = {fine}, got {delta_0}")

    started = time.perf_counter()

    def remaining() -> float:
        return max(time_limit_s - (time.perf_counter() - started), 1e-9)

    coarse = approximate_ipg(inst, delta_0)
    config = SgmConfig.for_target((1.0 - mu) * delta_f, mu=mu, delta_f=delta_f,
                                  time_limit_s=remaining(), workers=workers)
    stage1 = run_sgm(coarse, config)
    if not stage1.solved:
        get_logger().warning(f"two-level: stage 1 ended with {stage1.status.value}; stage 2 skipped")
        return stage1.profile, (stage1, None)

    get_logger().info(f"two-level: stage 1 solved in {stage1.iterations} iterations, refining")
    approx = approximate_ipg(inst, fine)
    seeds = [list(sigma.support) for sigma in stage1.profile.strategies]
    config = config.model_copy(update={"time_limit_s": remaining()})
    stage2 = run_sgm(approx, config, warm_start=stage1.profile, initial_samples=seeds)
    return stage2.profile, (stage1, stage2)

# ----------------------------------------------------------------------------
def certify_equilibrium(inst: GciInstance,
                        profile: MixedProfile,
                        delta: float,
                        *,
                        delta_gap: float | None = None,
                        mu: float = DEFAULT_MU) -> float:
    """
    Largest regret of the profile in the exact game, measured with the
    exact-cost best-response oracle.

    Args:
        inst (GciInstance): the exact game.
        profile (MixedProfile): profile to certify.
        delta (float): the equilibrium tolerance being certified; sets the
            default oracle gap (1 - mu) 4 delta / 5.
        delta_gap (float | None): oracle gap override.
    Returns:
        float: max over players of the certified regret.
    """
    gap = default_delta_gap(delta, mu) if delta_gap is None else delta_gap
    regrets = [regret(inst, profile, p, gap) for p in range(inst.m)]
    get_logger().info(f"certified regrets {[f'{r:.3e}' for r in regrets]} (gap {gap:.3e})")
    return float(max(regrets))


__all__ = [
    "ApproximatedGame",
    "SgmConfig",
    "SgmStatus",
    "SgmOutcome",
    "default_delta_gap",
    "approximate_ipg",
    "initialize_samples",
    "run_sgm",
    "direct_procedure",
    "two_level_procedure",
    "certify_equilibrium",
]
