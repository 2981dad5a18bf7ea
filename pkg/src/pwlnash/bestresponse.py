﻿# encoding: utf-8-sig

"""
Best-response oracle of one player against mixed opponents.

For a fixed security level s the problem separates by market into concave
quadratics with a closed-form optimum. What remains is the one-dimensional
value function phi(s), maximised over [0, s_bar] by a Lipschitz-certified
search followed by a bounded scalar refinement.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, ParameterError
from .game import GameView, MixedProfile, PureStrategy, mixed_expected_payoff, opponent_means
from .logutil import get_logger

DOMAIN_TOL = 1e-12
REFINE_XTOL = 1e-12
MAX_SEARCH_ROUNDS = 80

# ----------------------------------------------------------------------------
@dataclass(frozen=True)
class OpponentAggregates:
    """
    Sums over the opponents of expected quantities (per market) and of
    expected security levels.
    """
    mean_quantity: np.ndarray
    mean_security_sum: float

    def __post_init__(self):
        qty = np.asarray(self.mean_quantity, dtype=float)
        if np.any(qty < -DOMAIN_TOL) or self.mean_security_sum < -DOMAIN_TOL:
            get_logger().error(f"negative opponent aggregates: {qty}, {self.mean_security_sum}")
            raise ParameterError("Opponent aggregates must be nonnegative")
        object.__setattr__(self, "mean_quantity", qty)

    @classmethod
    def zeros(cls, n: int) -> "OpponentAggregates":
        """The null environment: opponents produce nothing and do not invest."""
        return cls(np.zeros(n), 0.0)

    @classmethod
    def from_profile(cls, profile: MixedProfile, p: int) -> "OpponentAggregates":
        qty, sec = opponent_means(profile, p)
        return cls(qty, sec)


# ----------------------------------------------------------------------------
@dataclass(frozen=True)
class BestResponseResult:
    strategy: PureStrategy
    value: float
    gap: float
    evaluations: int = field(default=0, compare=False)


# ----------------------------------------------------------------------------
def _market_values(view: GameView, p: int, agg: OpponentAggregates, s):
    """
    Per-market optimum for each security level in `s`.

    Returns:
        tuple: (Q*, v) both shaped (len(s), n), v being the entered-market value.
    """
    inst = view.instance
    a = inst.arrays
    s = np.atleast_1d(np.asarray(s, dtype=float))
    lin = (a["q"] + a["r"] * (s[:, None] + agg.mean_security_sum) / inst.m
           - a["m_slope"] * agg.mean_quantity - a["c_prod"][p] - a["c_lin"][p])
    quad = a["m_slope"] + a["c_quad"][p]
    qty = np.clip(lin / (2.0 * quad), 0.0, a["Q_cap"][p])
    value = lin * qty - quad * qty * qty - a["c_setup"][p]
    return qty, value

# ----------------------------------------------------------------------------
def _check_security(view: GameView, p: int, s) -> None:
    cap = view.instance.security_caps[p]
    arr = np.asarray(s, dtype=float)
    if np.any(arr < -DOMAIN_TOL) or np.any(arr > cap + DOMAIN_TOL):
        get_logger().error(f"player {p}: security level {s} outside [0, {cap}]")
        raise DomainError(f"Security level {s} outside [0, {cap}] for player {p}")

# ----------------------------------------------------------------------------
def optimal_quantities_for_s(view: GameView, p: int, agg: OpponentAggregates, s: float
                             ) -> tuple[tuple[float, ...], tuple[int, ...], float]:
    """
    Optimal quantities and entry decisions of player p at security level s.

    Args:
        view (GameView): exact or approximated game.
        p (int): player.
        agg (OpponentAggregates): opponents' expected aggregates.
        s (float): own security level.
    Returns:
        tuple: (Q, b, partial_value) with partial_value = sum_j max(v_j, 0).
    """
    qty, value = _market_values(view, p, agg, s)
    qty, value = qty[0], value[0]
    # v_j == 0 stays out of the market
    enter = value > 0.0
    Q = tuple(float(x) for x in np.where(enter, qty, 0.0))
    b = tuple(int(x) for x in enter)
    return Q, b, float(np.sum(np.where(enter, value, 0.0)))

# ----------------------------------------------------------------------------
def _phi_pieces(view: GameView, p: int, agg: OpponentAggregates, s, piece) -> np.ndarray:
    inst = view.instance
    s = np.atleast_1d(np.asarray(s, dtype=float))
    _, value = _market_values(view, p, agg, s)
    partial = np.maximum(value, 0.0).sum(axis=1)
    attack = (1.0 - s) * (1.0 - (s + agg.mean_security_sum) / inst.m) * inst.arrays["D"][p]
    return partial - np.asarray(view.cost_of_piece(p, piece, s), dtype=float) - attack

# ----------------------------------------------------------------------------
def phi(view: GameView, p: int, agg: OpponentAggregates, s):
    """
    Value of player p's best quantities at security level s, net of the
    cybersecurity cost and the expected attack damage.

    Raises:
        DomainError: if s is outside [0, s_bar].
    """
    _check_security(view, p, s)
    s_arr = np.clip(np.atleast_1d(np.asarray(s, dtype=float)), 0.0, view.instance.security_caps[p])
    inst = view.instance
    _, value = _market_values(view, p, agg, s_arr)
    partial = np.maximum(value, 0.0).sum(axis=1)
    attack = (1.0 - s_arr) * (1.0 - (s_arr + agg.mean_security_sum) / inst.m) * inst.arrays["D"][p]
    out = partial - np.asarray(view.cost(p, s_arr), dtype=float) - attack
    return float(out[0]) if np.ndim(s) == 0 else out

# ----------------------------------------------------------------------------
def lipschitz_bound(view: GameView, p: int) -> float:
    """
    Upper bound of |d phi / ds| on [0, s_bar].

    L = sum_j (r_j / m) Q_cap_j + D (2/m + 1) + max slope of the cost term.
    """
    inst = view.instance
    a = inst.arrays
    market = float(np.sum(a["r"] / inst.m * a["Q_cap"][p]))
    attack = float(a["D"][p] * (2.0 / inst.m + 1.0))
    return market + attack + float(view.cost_slope_bound(p))

# ----------------------------------------------------------------------------
def _certified_search(view: GameView, p: int, agg: OpponentAggregates, delta_gap: float
                      ) -> tuple[float, float, int, float, float, int]:
    """
    Branch-and-bound over cells of [0, s_bar] split at the cost breakpoints.

    A cell [a, b] of piece k is discarded once its bound
    (phi_k(a) + phi_k(b)) / 2 + L (b - a) / 2 no longer beats the incumbent
    by more than delta_gap. Left ends and midpoints are owned by the cell's
    piece, so only they feed the incumbent; the right end of the last cell is
    s_bar itself. Every cell of width <= delta_gap / L is discarded.

    Returns:
        tuple: (s*, phi(s*), piece of s*, cell lo, cell hi, evaluations)
    """
    cap = float(view.instance.security_caps[p])
    L = lipschitz_bound(view, p)
    breaks = np.asarray(view.cost_breaks(p), dtype=float)
    breaks = breaks[(breaks > 0.0) & (breaks < cap)]
    edges = np.concatenate(([0.0], breaks, [cap]))
    lo, hi = edges[:-1], edges[1:]
    piece = np.arange(lo.size)

    f_lo = _phi_pieces(view, p, agg, lo, piece)
    f_hi = _phi_pieces(view, p, agg, hi, piece)
    evaluations = 2 * lo.size

    best_idx = int(np.argmax(f_lo))
    best_s, best_val, best_piece = float(lo[best_idx]), float(f_lo[best_idx]), int(piece[best_idx])
    best_cell = (float(lo[best_idx]), float(hi[best_idx]))
    if f_hi[-1] > best_val:
        best_s, best_val, best_piece = cap, float(f_hi[-1]), int(piece[-1])
        best_cell = (float(lo[-1]), cap)

    for _ in range(MAX_SEARCH_ROUNDS):
        bound = 0.5 * (f_lo + f_hi) + 0.5 * L * (hi - lo)
        alive = bound > best_val + delta_gap
        if not np.any(alive):
            break
        lo, hi, piece, f_lo, f_hi = lo[alive], hi[alive], piece[alive], f_lo[alive], f_hi[alive]
        mid = 0.5 * (lo + hi)
        f_mid = _phi_pieces(view, p, agg, mid, piece)
        evaluations += mid.size

        k = int(np.argmax(f_mid))
        if f_mid[k] > best_val:
            best_s, best_val, best_piece = float(mid[k]), float(f_mid[k]), int(piece[k])
            best_cell = (float(lo[k]), float(hi[k]))

        lo, hi = np.concatenate((lo, mid)), np.concatenate((mid, hi))
        f_lo, f_hi = np.concatenate((f_lo, f_mid)), np.concatenate((f_mid, f_hi))
        piece = np.concatenate((piece, piece))
    else:
        get_logger().warning(f"player {p}: security search stopped after {MAX_SEARCH_ROUNDS} rounds")

    return best_s, best_val, best_piece, best_cell[0], best_cell[1], evaluations

# ----------------------------------------------------------------------------
def best_response(view: GameView,
                  p: int,
                  opponents: MixedProfile | OpponentAggregates,
                  delta_gap: float) -> BestResponseResult:
    """
    Best response of player p, certified to within delta_gap.

    Args:
        view (GameView): exact game or its PWL approximation.
        p (int): player.
        opponents (MixedProfile | OpponentAggregates): the opponents' mixed
            strategies (entry p of a profile is ignored) or their aggregates.
        delta_gap (float): certified absolute optimality gap.
    Returns:
        BestResponseResult: strategy and its expected payoff.
    Raises:
        ParameterError: if delta_gap is not positive.
    """
    if not (delta_gap > 0):
        get_logger().error(f"best_response: non-positive delta_gap {delta_gap}")
        raise ParameterError(f"delta_gap must be positive, got {delta_gap}")
    agg = opponents if isinstance(opponents, OpponentAggregates) else OpponentAggregates.from_profile(opponents, p)

    s_best, val_best, piece, cell_lo, cell_hi, evaluations = _certified_search(view, p, agg, delta_gap)

    # refinement inside the incumbent's piece only improves the value
    width = cell_hi - cell_lo
    lo = max(cell_lo, s_best - width)
    hi = min(cell_hi, s_best + width)
    if hi - lo > REFINE_XTOL:
        res = minimize_scalar(lambda x: -float(_phi_pieces(view, p, agg, x, piece)[0]),
                              bounds=(lo, hi), method="bounded", options={"xatol": REFINE_XTOL})
        evaluations += int(res.nfev)
        if res.success and lo <= res.x < cell_hi and -res.fun > val_best:
            s_best = float(res.x)

    s_best = min(max(s_best, 0.0), float(view.instance.security_caps[p]))
    Q, b, _ = optimal_quantities_for_s(view, p, agg, s_best)
    value = float(phi(view, p, agg, s_best))
    get_logger().debug(f"player {p}: best response s={s_best:.9g} value={value:.9g} ({evaluations} evaluations)")
    return BestResponseResult(strategy=PureStrategy(Q=Q, b=b, s=s_best), value=value,
                              gap=float(delta_gap), evaluations=evaluations)

# ----------------------------------------------------------------------------
def regret(view: GameView, profile: MixedProfile, p: int, delta_gap: float) -> float:
    """
    Certified deviation gain of player p: best-response value minus the
    expected payoff of p's mixed strategy. Never below -delta_gap.
    """
    br = best_response(view, p, profile, delta_gap)
    return br.value - mixed_expected_payoff(view, p, profile)


__all__ = [
    "OpponentAggregates",
    "BestResponseResult",
    "optimal_quantities_for_s",
    "phi",
    "lipschitz_bound",
    "best_response",
    "regret",
]
