﻿# encoding: utf-8-sig

"""
Finite (sampled) games: payoff tensors over the strategies sampled so far
and a mixed-equilibrium solver that prefers small supports.
"""

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
from scipy.optimize import least_squares, linprog

from .errors import ParameterError, SampledSolverExhausted, StrategyError
from .game import GameView, MixedProfile, MixedStrategy, PureStrategy, check_strategy, payoff_terms
from .logutil import get_logger

PROB_SUM_TOL = 1e-9
PROB_EPS = 1e-12
SMALL_SUPPORT_EXTRA = 4
MAX_CANDIDATES = 200_000
MULTISTARTS = 10

# ----------------------------------------------------------------------------
@dataclass(frozen=True)
class SampledGame:
    """
    Payoff tensors of a finite game.

    Attributes:
        payoffs (tuple[np.ndarray, ...]): payoffs[p][i_0, ..., i_{m-1}] is the
            payoff of player p on the profile of strategies (i_0, ..., i_{m-1}).
        strategies (tuple | None): the pure strategies behind each index, if any.
    """
    payoffs: tuple[np.ndarray, ...]
    strategies: tuple[tuple[PureStrategy, ...], ...] | None = None

    def __post_init__(self):
        payoffs = tuple(np.asarray(t, dtype=float) for t in self.payoffs)
        object.__setattr__(self, "payoffs", payoffs)
        if len(payoffs) < 1:
            raise StrategyError("A sampled game needs at least one player")
        shape = payoffs[0].shape
        if len(shape) != len(payoffs) or any(t.shape != shape for t in payoffs):
            get_logger().error(f"payoff tensor shapes {[t.shape for t in payoffs]} do not match {len(payoffs)} players")
            raise StrategyError("Every payoff tensor needs one axis per player and identical extents")
        if any(k < 1 for k in shape):
            raise StrategyError("Every player needs at least one strategy")
        if not all(np.all(np.isfinite(t)) for t in payoffs):
            get_logger().error("non-finite entry in a payoff tensor")
            raise StrategyError("Payoff tensors must be finite")
        if self.strategies is not None:
            if tuple(len(s) for s in self.strategies) != shape:
                raise StrategyError(f"Strategy lists {[len(s) for s in self.strategies]} do not match tensor extents {shape}")

    @property
    def m(self) -> int:
        return len(self.payoffs)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.payoffs[0].shape

    @classmethod
    def from_matrices(cls, *matrices) -> "SampledGame":
        """Game given directly by its payoff arrays (no strategies attached)."""
        return cls(payoffs=tuple(np.asarray(a, dtype=float) for a in matrices))


# ----------------------------------------------------------------------------
@dataclass(frozen=True)
class SampledMixedProfile:
    """One probability vector per player, over that player's sampled strategies."""
    probs: tuple[np.ndarray, ...]

    def __post_init__(self):
        probs = tuple(np.asarray(x, dtype=float) for x in self.probs)
        object.__setattr__(self, "probs", probs)
        for p, x in enumerate(probs):
            if x.ndim != 1 or x.size == 0:
                raise StrategyError(f"Player {p}: probability vector must be 1-D and nonempty")
            if np.any(x < -PROB_EPS):
                raise StrategyError(f"Player {p}: negative probability in {x}")
            if abs(float(x.sum()) - 1.0) > PROB_SUM_TOL:
                raise StrategyError(f"Player {p}: probabilities sum to {x.sum()}")

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(x.size for x in self.probs)

    @classmethod
    def pure(cls, indices: Sequence[int], shape: Sequence[int]) -> "SampledMixedProfile":
        probs = []
        for i, k in zip(indices, shape):
            x = np.zeros(k)
            x[i] = 1.0
            probs.append(x)
        return cls(tuple(probs))

    @classmethod
    def from_mixed(cls, game: SampledGame, profile: MixedProfile, tol: float = 1e-9) -> "SampledMixedProfile | None":
        """
        Express a MixedProfile over the game's strategy lists; None when a
        support strategy is not among the samples.
        """
        if game.strategies is None or len(profile) != game.m:
            return None
        probs = []
        for p, sigma in enumerate(profile.strategies):
            x = np.zeros(game.shape[p])
            for st, pr in zip(sigma.support, sigma.probs):
                idx = next((i for i, cand in enumerate(game.strategies[p]) if cand.close_to(st, tol)), None)
                if idx is None:
                    return None
                x[idx] += pr
            probs.append(x)
        return cls(tuple(probs))

    def supports(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(int(i) for i in np.flatnonzero(x > PROB_EPS)) for x in self.probs)

    def support_size(self) -> int:
        return sum(len(s) for s in self.supports())

    def extend(self, shape: Sequence[int]) -> "SampledMixedProfile":
        """Pad with zero probabilities for strategies appended since."""
        return SampledMixedProfile(tuple(np.concatenate((x, np.zeros(k - x.size))) for x, k in zip(self.probs, shape)))


# ----------------------------------------------------------------------------
def build_sampled_game(view: GameView, strategies: Sequence[Sequence[PureStrategy]]) -> SampledGame:
    """
    Payoff tensors of the game restricted to the given strategy lists.

    Raises:
        StrategyError: if a list is empty or a strategy is infeasible.
    """
    inst = view.instance
    if len(strategies) != inst.m:
        raise StrategyError(f"Need {inst.m} strategy lists, got {len(strategies)}")
    for p, lst in enumerate(strategies):
        if len(lst) == 0:
            get_logger().error(f"player {p}: empty strategy list")
            raise StrategyError(f"Player {p}: strategy list is empty")
        for st in lst:
            check_strategy(inst, p, st)

    m, n = inst.m, inst.n
    shape = tuple(len(lst) for lst in strategies)
    own_Q, own_b, own_s, own_cost = [], [], [], []
    for p, lst in enumerate(strategies):
        axes = [1] * m
        axes[p] = len(lst)
        Q = np.array([st.Q for st in lst], dtype=float).reshape(axes + [n])
        b = np.array([st.b for st in lst], dtype=float).reshape(axes + [n])
        s = np.array([st.s for st in lst], dtype=float)
        own_Q.append(Q)
        own_b.append(b)
        own_s.append(s.reshape(axes))
        own_cost.append(np.asarray(view.cost(p, s), dtype=float).reshape(axes))

    total_Q = sum(own_Q)
    total_s = sum(own_s)
    payoffs = []
    for p in range(m):
        values = payoff_terms(inst, p, own_Q[p], own_b[p], own_s[p],
                              total_Q - own_Q[p], total_s - own_s[p], own_cost[p])
        payoffs.append(np.broadcast_to(values, shape).copy())

    return SampledGame(payoffs=tuple(payoffs),
                       strategies=tuple(tuple(lst) for lst in strategies))

# ----------------------------------------------------------------------------
def deviation_payoffs(game: SampledGame, probs: Sequence[np.ndarray], p: int) -> np.ndarray:
    """
    Expected payoff of each pure strategy of player p against the others' probabilities.
    """
    out = game.payoffs[p]
    # contracting from the last axis down keeps the lower axes in place
    for axis in range(game.m - 1, -1, -1):
        if axis != p:
            out = np.tensordot(out, probs[axis], axes=([axis], [0]))
    return out

# ----------------------------------------------------------------------------
def sampled_regret(game: SampledGame, profile: SampledMixedProfile, p: int) -> float:
    """
    Best pure deviation payoff of player p minus the profile's expected payoff.
    """
    dev = deviation_payoffs(game, profile.probs, p)
    return float(dev.max() - profile.probs[p] @ dev)

# ----------------------------------------------------------------------------
def max_sampled_regret(game: SampledGame, profile: SampledMixedProfile) -> float:
    return max(sampled_regret(game, profile, p) for p in range(game.m))

# ----------------------------------------------------------------------------
def _pure_equilibrium(game: SampledGame, delta_M: float) -> SampledMixedProfile | None:
    ok = np.ones(game.shape, dtype=bool)
    for p, tensor in enumerate(game.payoffs):
        ok &= tensor >= tensor.max(axis=p, keepdims=True) - delta_M
    hits = np.argwhere(ok)
    if hits.size == 0:
        return None
    return SampledMixedProfile.pure(hits[0], game.shape)

# ----------------------------------------------------------------------------
def _sizes_with_total(shape: Sequence[int], total: int) -> Iterator[tuple[int, ...]]:
    """Vectors sz with 1 <= sz[i] <= shape[i] and sum(sz) == total."""
    if len(shape) == 1:
        if 1 <= total <= shape[0]:
            yield (total,)
        return
    rest = shape[1:]
    for k in range(max(1, total - sum(rest)), min(shape[0], total - len(rest)) + 1):
        for tail in _sizes_with_total(rest, total - k):
            yield (k, *tail)

# ----------------------------------------------------------------------------
def _support_sizes(shape: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """
    Support size vectors by increasing total, then balanced ones first,
    then lexicographic. Totals never decrease along the sequence.
    """
    shape = tuple(shape)
    for total in range(len(shape), sum(shape) + 1):
        yield from sorted(_sizes_with_total(shape, total), key=lambda sz: (max(sz) - min(sz), sz))

# ----------------------------------------------------------------------------
def _restricted(game: SampledGame, p: int, supports: Sequence[Sequence[int] | None]) -> np.ndarray:
    """Player p's tensor restricted to the given supports (None keeps an axis whole)."""
    index = [np.arange(k) if s is None else np.asarray(s) for k, s in zip(game.shape, supports)]
    return game.payoffs[p][np.ix_(*index)]

# ----------------------------------------------------------------------------
def _dominated_actions(game: SampledGame, p: int, supports: Sequence[Sequence[int] | None]) -> np.ndarray:
    """
    Actions of player p strictly dominated by another action of p when the
    others are restricted to `supports`.
    """
    sub = _restricted(game, p, [None if i == p else s for i, s in enumerate(supports)])
    sub = np.moveaxis(sub, p, 0).reshape(game.shape[p], -1)
    beats = np.all(sub[None, :, :] > sub[:, None, :], axis=2)
    return beats.any(axis=1)

# ----------------------------------------------------------------------------
def _support_candidates(game: SampledGame, sizes: tuple[int, ...]) -> Iterator[tuple[tuple[int, ...], ...]]:
    """
    Supports of the given sizes in lexicographic order, without those
    containing a conditionally dominated action.
    """
    m = game.m
    full = [None] * m
    alive = [np.flatnonzero(~_dominated_actions(game, p, full)) for p in range(m)]
    if any(len(a) < sz for a, sz in zip(alive, sizes)):
        return

    if m == 2:
        for s0 in itertools.combinations(alive[0], sizes[0]):
            ok1 = ~_dominated_actions(game, 1, [s0, None])
            candidates1 = [a for a in alive[1] if ok1[a]]
            for s1 in itertools.combinations(candidates1, sizes[1]):
                if not np.any(_dominated_actions(game, 0, [None, s1])[list(s0)]):
                    yield (tuple(int(a) for a in s0), tuple(int(a) for a in s1))
        return

    for combo in itertools.product(*[itertools.combinations(a, sz) for a, sz in zip(alive, sizes)]):
        if all(not np.any(_dominated_actions(game, p, combo)[list(combo[p])]) for p in range(m)):
            yield tuple(tuple(int(a) for a in s) for s in combo)

# ----------------------------------------------------------------------------
def _accept(game: SampledGame, supports, weights, delta_M: float) -> SampledMixedProfile | None:
    probs = []
    for k, s, w in zip(game.shape, supports, weights):
        w = np.asarray(w, dtype=float)
        if np.any(w < -1e-9) or not np.all(np.isfinite(w)):
            return None
        w = np.clip(w, 0.0, None)
        total = w.sum()
        if total <= 0:
            return None
        x = np.zeros(k)
        x[list(s)] = w / total
        probs.append(x)
    profile = SampledMixedProfile(tuple(probs))
    if max_sampled_regret(game, profile) <= delta_M:
        return profile
    return None

# ----------------------------------------------------------------------------
def _indifference_system(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    [ M  -1 ] [w]   [0]
    [ 1   0 ] [v] = [1]   makes every row of M pay the same v.
    """
    rows, cols = matrix.shape
    lhs = np.zeros((rows + 1, cols + 1))
    lhs[:rows, :cols] = matrix
    lhs[:rows, cols] = -1.0
    lhs[rows, :cols] = 1.0
    rhs = np.zeros(rows + 1)
    rhs[rows] = 1.0
    return lhs, rhs

# ----------------------------------------------------------------------------
def _opponent_weights_lp(payoff: np.ndarray, own_support, other_support) -> np.ndarray | None:
    """
    Weights on other_support making every row of own_support a best reply
    among all rows of `payoff` (rows: own actions, columns: opponent actions).
    """
    cols = list(other_support)
    k = len(cols)
    inside = payoff[np.ix_(list(own_support), cols)]
    outside_rows = [a for a in range(payoff.shape[0]) if a not in set(own_support)]
    A_eq = np.zeros((inside.shape[0] + 1, k + 1))
    A_eq[:-1, :k] = inside
    A_eq[:-1, k] = -1.0
    A_eq[-1, :k] = 1.0
    b_eq = np.zeros(inside.shape[0] + 1)
    b_eq[-1] = 1.0
    A_ub = b_ub = None
    if outside_rows:
        outside = payoff[np.ix_(outside_rows, cols)]
        A_ub = np.hstack((outside, -np.ones((len(outside_rows), 1))))
        b_ub = np.zeros(len(outside_rows))
    bounds = [(0, None)] * k + [(None, None)]
    res = linprog(np.zeros(k + 1), A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status != 0:
        return None
    return res.x[:k]

# ----------------------------------------------------------------------------
def _solve_two_player(game: SampledGame, supports, delta_M: float) -> SampledMixedProfile | None:
    A, B = game.payoffs
    s0, s1 = supports
    if len(s0) == len(s1):
        try:
            # player 1's weights make player 0 indifferent and vice versa
            lhs, rhs = _indifference_system(A[np.ix_(s0, s1)])
            y = np.linalg.solve(lhs, rhs)[:-1]
            lhs, rhs = _indifference_system(B[np.ix_(s0, s1)].T)
            x = np.linalg.solve(lhs, rhs)[:-1]
            found = _accept(game, supports, (x, y), delta_M)
            if found is not None:
                return found
        except np.linalg.LinAlgError:
            pass
    y = _opponent_weights_lp(A, s0, s1)
    if y is None:
        return None
    x = _opponent_weights_lp(B.T, s1, s0)
    if x is None:
        return None
    return _accept(game, supports, (x, y), delta_M)

# ----------------------------------------------------------------------------
def _solve_many_player(game: SampledGame, supports, delta_M: float) -> SampledMixedProfile | None:
    """
    Indifference inside the supports and no better reply outside, solved as
    a bounded nonlinear least-squares problem from several starting points.
    """
    m = game.m
    sizes = [len(s) for s in supports]
    splits = np.cumsum(sizes)[:-1]
    scale = max(1.0, max(float(np.max(np.abs(t))) for t in game.payoffs))

    def unpack(z):
        probs = []
        for p, w in enumerate(np.split(z, splits)):
            x = np.zeros(game.shape[p])
            x[list(supports[p])] = w
            probs.append(x)
        return probs

    def residuals(z):
        probs = unpack(z)
        out = []
        for p in range(m):
            dev = deviation_payoffs(game, probs, p)
            inside = dev[list(supports[p])]
            level = inside.mean()
            out.extend((inside - level) / scale)
            out.append(np.maximum(dev - level, 0.0).max() / scale)
            out.append(probs[p].sum() - 1.0)
        return np.asarray(out)

    rng = np.random.default_rng(0)
    for start in range(MULTISTARTS):
        if start == 0:
            z0 = np.concatenate([np.full(k, 1.0 / k) for k in sizes])
        else:
            z0 = np.concatenate([rng.dirichlet(np.ones(k)) for k in sizes])
        res = least_squares(residuals, z0, bounds=(0.0, 1.0), xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200)
        found = _accept(game, supports, np.split(res.x, splits), delta_M)
        if found is not None:
            return found
    return None

# ----------------------------------------------------------------------------
def solve_sampled_ne(game: SampledGame,
                     delta_M: float,
                     warm_start: SampledMixedProfile | None = None,
                     *,
                     max_candidates: int = MAX_CANDIDATES) -> SampledMixedProfile:
    """
    A delta_M-equilibrium of the finite game with a small total support.

    The warm start is returned as is when it already qualifies. Otherwise a
    pure equilibrium is looked up in the tensors, then supports are
    enumerated by increasing total size and each candidate is solved for
    indifference. Any candidate is accepted only after an exhaustive
    pure-deviation check.

    Args:
        game (SampledGame): the finite game.
        delta_M (float): accepted regret.
        warm_start (SampledMixedProfile | None): previous answer.
        max_candidates (int): supports tried before giving up.
    Returns:
        SampledMixedProfile: profile whose regret is <= delta_M for every player.
    Raises:
        ParameterError: if delta_M is negative.
        SampledSolverExhausted: if the bounded search gives up.
    """
    if delta_M < 0:
        get_logger().error(f"solve_sampled_ne: negative delta_M {delta_M}")
        raise ParameterError(f"delta_M must be nonnegative, got {delta_M}")

    if warm_start is not None and warm_start.shape == game.shape:
        if max_sampled_regret(game, warm_start) <= delta_M:
            get_logger().debug("sampled game: warm start accepted")
            return warm_start

    found = _pure_equilibrium(game, delta_M)
    if found is not None:
        get_logger().debug(f"sampled game {game.shape}: pure equilibrium")
        return found

    solve = _solve_two_player if game.m == 2 else _solve_many_player
    tried = 0
    small_total = game.m + SMALL_SUPPORT_EXTRA
    widened = False
    for sizes in _support_sizes(game.shape):
        if max(sizes) == 1:
            continue
        if sum(sizes) > small_total and not widened:
            widened = True
            get_logger().debug(f"sampled game {game.shape}: nothing with total support <= {small_total}, widening")
        for supports in _support_candidates(game, sizes):
            tried += 1
            if tried > max_candidates:
                get_logger().error(f"sampled game {game.shape}: gave up after {max_candidates} supports")
                raise SampledSolverExhausted(f"No equilibrium found within {max_candidates} supports")
            found = solve(game, supports, delta_M)
            if found is not None:
                get_logger().debug(f"sampled game {game.shape}: support sizes {sizes} after {tried} candidates")
                return found

    get_logger().error(f"sampled game {game.shape}: support enumeration exhausted")
    raise SampledSolverExhausted(f"Support enumeration exhausted after {tried} supports")

# ----------------------------------------------------------------------------
def profile_from_sampled(game: SampledGame, profile: SampledMixedProfile) -> MixedProfile:
    """
    The sampled profile as a MixedProfile over the game's pure strategies.
    """
    if game.strategies is None:
        raise StrategyError("The sampled game carries no strategies")
    strategies = []
    for lst, x in zip(game.strategies, profile.probs):
        idx = np.flatnonzero(x > PROB_EPS)
        w = x[idx] / x[idx].sum()
        strategies.append(MixedStrategy(support=tuple(lst[i] for i in idx), probs=tuple(float(v) for v in w)))
    return MixedProfile(strategies=tuple(strategies))


__all__ = [
    "SampledGame",
    "SampledMixedProfile",
    "build_sampled_game",
    "deviation_payoffs",
    "sampled_regret",
    "max_sampled_regret",
    "solve_sampled_ne",
    "profile_from_sampled",
]
