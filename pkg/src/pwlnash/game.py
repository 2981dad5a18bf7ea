﻿# encoding: utf-8-sig

"""
The cybersecurity investment game: retailers choose a quantity and an entry
indicator per market and a security level, facing a linear inverse demand
and an attack probability (1 - s^p)(1 - mean security).
"""

import json
import math
import os
from enum import StrEnum
from functools import cached_property, lru_cache
from importlib import resources
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.optimize import brentq

from .errors import CapResidualError, DomainError, ParameterError, StrategyError
from .logutil import get_logger
from .pwl import UnivariateSpec, find_curvature_breaks

CAP_RESIDUAL_TOL = 1e-10
FEASIBILITY_TOL = 1e-9
PROB_SUM_TOL = 1e-9
SAMPLE_INSTANCE = "sample_m2_n2_log.json"

# ----------------------------------------------------------------------------
class CostKind(StrEnum):
    """Cybersecurity cost function family."""
    ISR = "isr"
    LOG = "log"
    NCF = "ncf"


# ----------------------------------------------------------------------------
def _check_security_domain(s) -> np.ndarray:
    arr = np.asarray(s, dtype=float)
    if np.any(arr >= 1.0) or np.any(arr < 0.0) or np.any(np.isnan(arr)):
        get_logger().error(f"security level outside [0, 1): {s}")
        raise DomainError(f"Security level must lie in [0, 1), got {s}")
    return arr

# ----------------------------------------------------------------------------
def cost_h(kind: CostKind, alpha: float, s):
    """
    Cybersecurity cost h(s).

    ISR: alpha (1/sqrt(1-s) - 1)
    LOG: -alpha ln(1-s)
    NCF: alpha (1/sqrt(1-s) + 2/(1+exp(-20 s)) - 2)

    Args:
        kind (CostKind): cost family.
        alpha (float): positive scale.
        s (float | array-like): security level(s) in [0, 1).
    Returns:
        float | np.ndarray: cost value(s).
    Raises:
        DomainError: if s is outside [0, 1).
    """
    arr = _check_security_domain(s)
    kind = CostKind(kind)
    if kind is CostKind.ISR:
        val = alpha * (1.0 / np.sqrt(1.0 - arr) - 1.0)
    elif kind is CostKind.LOG:
        val = -alpha * np.log1p(-arr)
    else:
        val = alpha * (1.0 / np.sqrt(1.0 - arr) + 2.0 / (1.0 + np.exp(-20.0 * arr)) - 2.0)
    return float(val) if np.ndim(s) == 0 else val

# ----------------------------------------------------------------------------
def cost_dh(kind: CostKind, alpha: float, s):
    """
    Derivative h'(s) of the cybersecurity cost.
    """
    arr = _check_security_domain(s)
    kind = CostKind(kind)
    if kind is CostKind.ISR:
        val = 0.5 * alpha * (1.0 - arr) ** -1.5
    elif kind is CostKind.LOG:
        val = alpha / (1.0 - arr)
    else:
        e = np.exp(-20.0 * arr)
        val = alpha * (0.5 * (1.0 - arr) ** -1.5 + 40.0 * e / (1.0 + e) ** 2)
    return float(val) if np.ndim(s) == 0 else val

# ----------------------------------------------------------------------------
def cost_slope_bound(kind: CostKind, alpha: float, cap: float) -> float:
    """
    Upper bound of h' on [0, cap]. The square-root and log terms are
    increasing so their slope peaks at cap; the sigmoid term's slope peaks
    at 0 with value 10 alpha.
    """
    kind = CostKind(kind)
    if kind is CostKind.ISR:
        return 0.5 * alpha * (1.0 - cap) ** -1.5
    if kind is CostKind.LOG:
        return alpha / (1.0 - cap)
    return alpha * (0.5 * (1.0 - cap) ** -1.5 + 10.0)

# ----------------------------------------------------------------------------
def security_cap(kind: CostKind, alpha: float, B: float) -> float:
    """
    The unique s in (0, 1) with h(s) = B.

    Args:
        kind (CostKind): cost family.
        alpha (float): positive scale.
        B (float): positive budget.
    Returns:
        float: the security cap.
    Raises:
        ParameterError: if B or alpha is not positive.
        CapResidualError: if the inversion misses the tolerance.
    """
    if not (B > 0):
        get_logger().error(f"security_cap: non-positive budget {B}")
        raise ParameterError(f"Budget B must be positive, got {B}")
    if not (alpha > 0):
        get_logger().error(f"security_cap: non-positive alpha {alpha}")
        raise ParameterError(f"Scale alpha must be positive, got {alpha}")

    kind = CostKind(kind)
    if kind is CostKind.ISR:
        cap = 1.0 - 1.0 / (1.0 + B / alpha) ** 2
    elif kind is CostKind.LOG:
        cap = -math.expm1(-B / alpha)
    else:
        cap = brentq(lambda s: cost_h(kind, alpha, s) - B, 0.0, 1.0 - 1e-12,
                     xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)

    # Newton polish keeps the residual below tolerance for steep costs
    for _ in range(3):
        residual = cost_h(kind, alpha, cap) - B
        if abs(residual) <= 0.1 * CAP_RESIDUAL_TOL:
            break
        cap = min(max(cap - residual / cost_dh(kind, alpha, cap), 0.0), 1.0 - 1e-15)

    residual = abs(cost_h(kind, alpha, cap) - B)
    if not (0.0 < cap < 1.0) or residual > CAP_RESIDUAL_TOL:
        get_logger().error(f"security_cap: residual {residual} for kind={kind}, alpha={alpha}, B={B}")
        raise CapResidualError(f"Cannot invert {kind} cost at B={B} (residual {residual})")
    return float(cap)

# ----------------------------------------------------------------------------
@lru_cache(maxsize=256)
def _curvature_breaks(kind: CostKind, cap: float) -> tuple[float, ...]:
    if kind is not CostKind.NCF:
        return ()
    # the breaks of alpha * g(s) do not depend on alpha
    return find_curvature_breaks(lambda s: cost_h(CostKind.NCF, 1.0, s), 0.0, cap)

# ----------------------------------------------------------------------------
def cost_spec(kind: CostKind, alpha: float, cap: float, delta: float) -> UnivariateSpec:
    """
    Univariate spec of a player's cost on [0, cap], ready for fit_pwl.
    """
    kind = CostKind(kind)
    return UnivariateSpec(
        value=lambda s: cost_h(kind, alpha, s),
        derivative=lambda s: cost_dh(kind, alpha, s),
        lo=0.0,
        hi=float(cap),
        tolerance=delta,
        curvature_breaks=_curvature_breaks(kind, float(cap)),
    )


# ----------------------------------------------------------------------------
class MarketParams(BaseModel):
    """Inverse demand q - m * total quantity + r * mean security."""
    model_config = ConfigDict(frozen=True, populate_by_name=True, serialize_by_alias=True)

    q: float = Field(gt=0, description="Demand intercept.")
    m_slope: float = Field(gt=0, alias="m", description="Demand slope.")
    r: float = Field(gt=0, description="Security premium.")


# ----------------------------------------------------------------------------
class PlayerParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    c_prod: float = Field(ge=0)
    c_setup: tuple[float, ...]
    c_lin: tuple[float, ...]
    c_quad: tuple[float, ...]
    alpha: float = Field(gt=0)
    D: float = Field(ge=0)
    B: float = Field(gt=0)
    Q_cap: tuple[float, ...]

    @model_validator(mode="after")
    def _check_vectors(self):
        n = len(self.c_setup)
        if not (len(self.c_lin) == len(self.c_quad) == len(self.Q_cap) == n):
            raise ValueError("per-market player vectors must have equal length")
        if any(v < 0 for v in self.c_setup + self.c_lin):
            raise ValueError("setup and linear costs must be nonnegative")
        if any(v <= 0 for v in self.c_quad + self.Q_cap):
            raise ValueError("quadratic costs and quantity caps must be positive")
        return self


# ----------------------------------------------------------------------------
class PureStrategy(BaseModel):
    """Quantities Q[j], entry indicators b[j] and a security level s."""
    model_config = ConfigDict(frozen=True)

    Q: tuple[float, ...]
    b: tuple[int, ...]
    s: float

    def key(self) -> np.ndarray:
        return np.array([*self.Q, *self.b, self.s], dtype=float)

    def close_to(self, other: "PureStrategy", tol: float = 1e-9) -> bool:
        return bool(np.max(np.abs(self.key() - other.key())) <= tol)


# ----------------------------------------------------------------------------
class MixedStrategy(BaseModel):
    """Finite-support distribution over pure strategies."""
    model_config = ConfigDict(frozen=True)

    support: tuple[PureStrategy, ...] = Field(min_length=1)
    probs: tuple[float, ...] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_simplex(self):
        if len(self.support) != len(self.probs):
            raise ValueError("support and probabilities differ in length")
        if any(p < 0 for p in self.probs):
            raise ValueError("probabilities must be nonnegative")
        if abs(sum(self.probs) - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"probabilities sum to {sum(self.probs)}, not 1")
        return self

    @classmethod
    def pure(cls, strategy: PureStrategy) -> "MixedStrategy":
        return cls(support=(strategy,), probs=(1.0,))

    def mean_quantity(self) -> np.ndarray:
        Q = np.array([st.Q for st in self.support], dtype=float)
        return np.asarray(self.probs, dtype=float) @ Q

    def mean_security(self) -> float:
        return float(np.dot(self.probs, [st.s for st in self.support]))


# ----------------------------------------------------------------------------
class MixedProfile(BaseModel):
    """One mixed strategy per player."""
    model_config = ConfigDict(frozen=True)

    strategies: tuple[MixedStrategy, ...] = Field(min_length=1)

    @classmethod
    def pure(cls, strategies: Sequence[PureStrategy]) -> "MixedProfile":
        return cls(strategies=tuple(MixedStrategy.pure(st) for st in strategies))

    def __len__(self) -> int:
        return len(self.strategies)

    def __getitem__(self, p: int) -> MixedStrategy:
        return self.strategies[p]

    def replace(self, p: int, strategy: MixedStrategy) -> "MixedProfile":
        items = list(self.strategies)
        items[p] = strategy
        return MixedProfile(strategies=tuple(items))

    def support_size(self) -> int:
        return sum(sum(1 for pr in st.probs if pr > 0) for st in self.strategies)


# ----------------------------------------------------------------------------
class GciInstance(BaseModel):
    """
    Market and player parameters of one game, with the security caps
    s_bar^p solving h(s_bar^p) = B^p.
    """
    model_config = ConfigDict(frozen=True)

    cost_kind: CostKind
    markets: tuple[MarketParams, ...] = Field(min_length=1)
    players: tuple[PlayerParams, ...] = Field(min_length=2)
    security_caps: tuple[float, ...]
    seed: int | None = None
    instance_id: str | None = None

    @model_validator(mode="before")
    @classmethod
    def _check_sizes(cls, data):
        if isinstance(data, dict):
            data = dict(data)
            m, n = data.pop("m", None), data.pop("n", None)
            if m is not None and m != len(data.get("players", ())):
                raise ValueError(f"m={m} does not match {len(data.get('players', ()))} players")
            if n is not None and n != len(data.get("markets", ())):
                raise ValueError(f"n={n} does not match {len(data.get('markets', ()))} markets")
            if "security_caps" not in data and "players" in data and "cost_kind" in data:
                data["security_caps"] = tuple(
                    security_cap(data["cost_kind"], _field(pl, "alpha"), _field(pl, "B"))
                    for pl in data["players"]
                )
        return data

    @model_validator(mode="after")
    def _check_shapes(self):
        n = len(self.markets)
        if any(len(pl.c_setup) != n for pl in self.players):
            raise ValueError(f"every player needs {n} per-market parameters")
        if len(self.security_caps) != len(self.players):
            raise ValueError("one security cap per player is required")
        return self

    # ----------------------------------------------------------------------------
    @property
    def m(self) -> int:
        return len(self.players)

    @property
    def n(self) -> int:
        return len(self.markets)

    @property
    def instance(self) -> "GciInstance":
        return self

    # ----------------------------------------------------------------------------
    @cached_property
    def arrays(self) -> dict[str, np.ndarray]:
        """Parameters stacked as numpy arrays (markets: (n,), players: (m,) or (m, n))."""
        return {
            "q": np.array([mk.q for mk in self.markets]),
            "m_slope": np.array([mk.m_slope for mk in self.markets]),
            "r": np.array([mk.r for mk in self.markets]),
            "c_prod": np.array([pl.c_prod for pl in self.players]),
            "c_setup": np.array([pl.c_setup for pl in self.players]),
            "c_lin": np.array([pl.c_lin for pl in self.players]),
            "c_quad": np.array([pl.c_quad for pl in self.players]),
            "alpha": np.array([pl.alpha for pl in self.players]),
            "D": np.array([pl.D for pl in self.players]),
            "B": np.array([pl.B for pl in self.players]),
            "Q_cap": np.array([pl.Q_cap for pl in self.players]),
            "caps": np.array(self.security_caps),
        }

    # ----------------------------------------------------------------------------
    def check_caps(self) -> None:
        """
        Raises:
            CapResidualError: if some |h(s_bar^p) - B^p| exceeds 1e-10.
        """
        for p, (pl, cap) in enumerate(zip(self.players, self.security_caps)):
            if not (0.0 < cap < 1.0):
                get_logger().error(f"player {p}: security cap {cap} outside (0, 1)")
                raise CapResidualError(f"Player {p}: security cap {cap} outside (0, 1)")
            residual = abs(cost_h(self.cost_kind, pl.alpha, cap) - pl.B)
            if residual > CAP_RESIDUAL_TOL:
                get_logger().error(f"player {p}: cap residual {residual}")
                raise CapResidualError(f"Player {p}: |h(cap) - B| = {residual:.3e} exceeds {CAP_RESIDUAL_TOL}")

    # ----------------------------------------------------------------------------
    def cost(self, p: int, s):
        """Exact cybersecurity cost of player p."""
        return cost_h(self.cost_kind, self.players[p].alpha, s)

    def cost_slope_bound(self, p: int) -> float:
        return cost_slope_bound(self.cost_kind, self.players[p].alpha, self.security_caps[p])

    def cost_breaks(self, p: int) -> np.ndarray:
        """Abscissas where the cost may jump; none for the exact cost."""
        return np.empty(0)

    def cost_of_piece(self, p: int, piece, s):
        """Cost of player p continued along one piece; the exact cost has a single piece."""
        return self.cost(p, s)

    # ----------------------------------------------------------------------------
    def to_json(self) -> str:
        data = self.model_dump(mode="json")
        data = {"m": self.m, "n": self.n, **data}
        return json.dumps(data, indent=2)


def _field(obj, name):
    return obj[name] if isinstance(obj, dict) else getattr(obj, name)


# ----------------------------------------------------------------------------
class GameView(Protocol):
    """
    Anything exposing an instance and a per-player cost: the exact game or
    its PWL approximation.
    """

    @property
    def instance(self) -> GciInstance: ...

    def cost(self, p: int, s): ...

    def cost_slope_bound(self, p: int) -> float: ...

    def cost_breaks(self, p: int) -> np.ndarray: ...

    def cost_of_piece(self, p: int, piece, s): ...


# ----------------------------------------------------------------------------
def build_instance(markets: Sequence[MarketParams],
                   players: Sequence[PlayerParams],
                   cost_kind: CostKind,
                   seed: int | None = None,
                   instance_id: str | None = None) -> GciInstance:
    """
    Assemble an instance and compute its security caps.
    """
    kind = CostKind(cost_kind)
    caps = tuple(security_cap(kind, pl.alpha, pl.B) for pl in players)
    inst = GciInstance(cost_kind=kind, markets=tuple(markets), players=tuple(players),
                       security_caps=caps, seed=seed, instance_id=instance_id)
    inst.check_caps()
    return inst

# ----------------------------------------------------------------------------
def check_strategy(inst: GciInstance, p: int, strategy: PureStrategy) -> None:
    """
    Raises:
        StrategyError: if the strategy violates 0 <= Q <= b Q_cap, b binary, 0 <= s <= s_bar.
    """
    n = inst.n
    if len(strategy.Q) != n or len(strategy.b) != n:
        raise StrategyError(f"Player {p}: strategy has {len(strategy.Q)} quantities, expected {n}")
    caps = inst.players[p].Q_cap
    for j, (qty, bj, qcap) in enumerate(zip(strategy.Q, strategy.b, caps)):
        if bj not in (0, 1):
            raise StrategyError(f"Player {p}: entry indicator b[{j}]={bj} is not binary")
        if qty < -FEASIBILITY_TOL or qty > bj * qcap + FEASIBILITY_TOL:
            raise StrategyError(f"Player {p}: Q[{j}]={qty} outside [0, {bj * qcap}]")
    if strategy.s < -FEASIBILITY_TOL or strategy.s > inst.security_caps[p] + FEASIBILITY_TOL:
        raise StrategyError(f"Player {p}: security level {strategy.s} outside [0, {inst.security_caps[p]}]")

# ----------------------------------------------------------------------------
def payoff_terms(inst: GciInstance, p: int, Q, b, s, opp_Q, opp_s, cost_value):
    """
    Vectorised payoff of player p.

    Args:
        inst (GciInstance): the game.
        p (int): player.
        Q, b (array (..., n)): own quantities and entry indicators.
        s (array (...)): own security level.
        opp_Q (array (..., n)): sum of the opponents' quantities per market.
        opp_s (array (...)): sum of the opponents' security levels.
        cost_value (array (...)): cybersecurity cost at s.
    Returns:
        np.ndarray: payoff values with the broadcast leading shape.
    """
    a = inst.arrays
    Q = np.asarray(Q, dtype=float)
    b = np.asarray(b, dtype=float)
    s = np.asarray(s, dtype=float)
    s_avg = (s + np.asarray(opp_s, dtype=float)) / inst.m
    total = Q + np.asarray(opp_Q, dtype=float)
    price = a["q"] + a["r"] * s_avg[..., None] - a["m_slope"] * total
    market = (price - a["c_prod"][p] - a["c_lin"][p] - a["c_quad"][p] * Q) * Q - a["c_setup"][p] * b
    attack = (1.0 - s) * (1.0 - s_avg) * a["D"][p]
    return market.sum(axis=-1) - np.asarray(cost_value, dtype=float) - attack

# ----------------------------------------------------------------------------
def payoff(view: GameView, p: int, profile: Sequence[PureStrategy]) -> float:
    """
    Payoff of player p on a pure profile.

    Raises:
        StrategyError: if a strategy is infeasible.
    """
    inst = view.instance
    if len(profile) != inst.m:
        raise StrategyError(f"Profile has {len(profile)} strategies, expected {inst.m}")
    for i, st in enumerate(profile):
        check_strategy(inst, i, st)
    own = profile[p]
    opp_Q = sum(np.asarray(st.Q, dtype=float) for i, st in enumerate(profile) if i != p)
    opp_s = sum(st.s for i, st in enumerate(profile) if i != p)
    return float(payoff_terms(inst, p, own.Q, own.b, own.s, opp_Q, opp_s, view.cost(p, own.s)))

# ----------------------------------------------------------------------------
def opponent_means(profile: MixedProfile, p: int) -> tuple[np.ndarray, float]:
    """
    Sum over opponents of the expected quantities and of the expected security levels.
    """
    qs = [profile[i].mean_quantity() for i in range(len(profile)) if i != p]
    ss = [profile[i].mean_security() for i in range(len(profile)) if i != p]
    return np.sum(qs, axis=0), float(np.sum(ss))

# ----------------------------------------------------------------------------
def expected_payoff(view: GameView, p: int, own: PureStrategy, profile: MixedProfile) -> float:
    """
    Expected payoff of the pure strategy `own` against the opponents' mixed
    strategies in `profile` (entry p of the profile is ignored).

    The payoff is affine in each opponent's quantities and security level,
    so the expectation is the payoff at the opponents' mean aggregates.

    Raises:
        StrategyError: if a strategy is infeasible or a profile is malformed.
    """
    inst = view.instance
    if len(profile) != inst.m:
        raise StrategyError(f"Profile has {len(profile)} players, expected {inst.m}")
    check_strategy(inst, p, own)
    for i in range(inst.m):
        if i == p:
            continue
        for st in profile[i].support:
            check_strategy(inst, i, st)
    opp_Q, opp_s = opponent_means(profile, p)
    return float(payoff_terms(inst, p, own.Q, own.b, own.s, opp_Q, opp_s, view.cost(p, own.s)))

# ----------------------------------------------------------------------------
def mixed_expected_payoff(view: GameView, p: int, profile: MixedProfile) -> float:
    """Expected payoff of player p under the whole mixed profile."""
    sigma = profile[p]
    return float(sum(pr * expected_payoff(view, p, st, profile)
                     for st, pr in zip(sigma.support, sigma.probs) if pr > 0))


# ----------------------------------------------------------------------------
# Benchmark parameter grids, in draw order: (field, start, stop, step, decimals)
MARKET_GRIDS = (
    ("q", 100.0, 200.0, 1.0, 0),
    ("m", 0.5, 2.0, 0.01, 2),
    ("r", 0.1, 0.5, 0.01, 2),
)
PLAYER_GRIDS = (
    ("c_prod", 1.0, 10.0, 1.0, 0),
    ("c_setup", 500.0, 2000.0, 1.0, 0),
    ("c_lin", 1.0, 4.0, 0.01, 2),
    ("c_quad", 0.25, 1.0, 0.01, 2),
    ("alpha", 1.0, 10.0, 1.0, 0),
    ("D", 50.0, 100.0, 1.0, 0),
    ("Q_cap", 50.0, 200.0, 1.0, 0),
    ("B", 0.5, 5.0, 0.5, 1),
)
PER_MARKET_FIELDS = {"c_setup", "c_lin", "c_quad", "Q_cap"}

# ----------------------------------------------------------------------------
def _draw(rng: np.random.Generator, start: float, stop: float, step: float, decimals: int, size: int) -> list[float]:
    count = int(round((stop - start) / step)) + 1
    k = rng.integers(0, count, size=size)
    return [round(start + int(i) * step, decimals) for i in k]

# ----------------------------------------------------------------------------
def generate_instance(m: int, n: int, kind: CostKind, seed: int) -> GciInstance:
    """
    Random instance with every parameter uniform on its benchmark grid.

    Draw order: for markets q, m, r (each a length-n vector); then for every
    player c_prod, c_setup[n], c_lin[n], c_quad[n], alpha, D, Q_cap[n], B.
    The generator is numpy's PCG64 seeded with `seed`.

    Raises:
        ParameterError: if m < 2 or n < 1.
    """
    if m < 2 or n < 1:
        get_logger().error(f"generate_instance: invalid sizes m={m}, n={n}")
        raise ParameterError(f"Need m >= 2 and n >= 1, got m={m}, n={n}")
    kind = CostKind(kind)
    rng = np.random.default_rng(seed)

    market_cols = {name: _draw(rng, lo, hi, st, dec, n) for name, lo, hi, st, dec in MARKET_GRIDS}
    markets = [MarketParams(q=market_cols["q"][j], m=market_cols["m"][j], r=market_cols["r"][j]) for j in range(n)]

    players = []
    for _ in range(m):
        values = {}
        for name, lo, hi, st, dec in PLAYER_GRIDS:
            draws = _draw(rng, lo, hi, st, dec, n if name in PER_MARKET_FIELDS else 1)
            values[name] = tuple(draws) if name in PER_MARKET_FIELDS else draws[0]
        players.append(PlayerParams(**values))

    inst = build_instance(markets, players, kind, seed=seed, instance_id=f"gci_m{m}_n{n}_{kind.value}_s{seed}")
    get_logger().debug(f"generated instance {inst.instance_id}")
    return inst

# ----------------------------------------------------------------------------
def save_instance(inst: GciInstance, path: str | os.PathLike) -> None:
    """
    Write the instance as JSON {m, n, cost_kind, markets, players, security_caps, seed, instance_id}.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    work_path = path.with_suffix(path.suffix + ".tmp")
    with open(work_path, "w", encoding="utf-8") as file:
        file.write(inst.to_json())
    work_path.replace(path)
    get_logger().info(f"Instance saved to {path}")

# ----------------------------------------------------------------------------
def load_instance(path: str | os.PathLike) -> GciInstance:
    """
    Read an instance JSON file and check its security caps.

    Raises:
        FileNotFoundError: if the file does not exist.
        json.JSONDecodeError: if the file is not JSON.
        pydantic.ValidationError: if the content does not match the schema.
        CapResidualError: if a stored cap does not invert the cost at B.
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as file:
            raw = json.load(file)
    except FileNotFoundError:
        get_logger().error(f"Instance file not found: {path}")
        raise
    except json.JSONDecodeError:
        get_logger().error(f"Error decoding JSON from instance file: {path}")
        raise
    if not isinstance(raw, dict):
        get_logger().error(f"Invalid data format in {path}")
        raise ValueError(f"Invalid data format in instance file {path}")
    inst = GciInstance.model_validate(raw)
    inst.check_caps()
    get_logger().info(f"Instance loaded from {path} (m={inst.m}, n={inst.n}, {inst.cost_kind.value})")
    return inst

# ----------------------------------------------------------------------------
def load_sample_instance() -> GciInstance:
    """The shipped m=2, n=2 LOG instance."""
    with resources.as_file(resources.files("pwlnash") / "data" / SAMPLE_INSTANCE) as path:
        return load_instance(path)


__all__ = [
    "CostKind",
    "cost_h",
    "cost_dh",
    "cost_slope_bound",
    "security_cap",
    "cost_spec",
    "MarketParams",
    "PlayerParams",
    "PureStrategy",
    "MixedStrategy",
    "MixedProfile",
    "GciInstance",
    "GameView",
    "build_instance",
    "check_strategy",
    "payoff_terms",
    "payoff",
    "opponent_means",
    "expected_payoff",
    "mixed_expected_payoff",
    "generate_instance",
    "save_instance",
    "load_instance",
    "load_sample_instance",
]
