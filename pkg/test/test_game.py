# encoding: utf-8-sig

import itertools
import json
import math
import shutil
import tempfile
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from pwlnash.errors import CapResidualError, DomainError, ParameterError, StrategyError
from pwlnash.game import (
    CostKind,
    GciInstance,
    MarketParams,
    MixedProfile,
    MixedStrategy,
    PlayerParams,
    PureStrategy,
    build_instance,
    check_strategy,
    cost_dh,
    cost_h,
    cost_slope_bound,
    expected_payoff,
    generate_instance,
    load_instance,
    load_sample_instance,
    mixed_expected_payoff,
    payoff,
    save_instance,
    security_cap,
)


def random_strategy(rng, inst, p):
    """Random feasible pure strategy of player p."""
    caps = inst.players[p].Q_cap
    b = tuple(int(v) for v in rng.integers(0, 2, size=inst.n))
    Q = tuple(float(bj * rng.uniform(0.0, qc)) for bj, qc in zip(b, caps))
    s = float(rng.uniform(0.0, inst.security_caps[p]))
    return PureStrategy(Q=Q, b=b, s=s)


def random_mixed(rng, inst, p, size):
    support = tuple(random_strategy(rng, inst, p) for _ in range(size))
    w = rng.uniform(0.1, 1.0, size=size)
    w = w / w.sum()
    probs = tuple(float(v) for v in w[:-1]) + (1.0 - float(w[:-1].sum()),)
    return MixedStrategy(support=support, probs=probs)


def idle(n):
    return PureStrategy(Q=(0.0,) * n, b=(0,) * n, s=0.0)


@pytest.fixture
def sample():
    return load_sample_instance()


@pytest.fixture
def temp_dir():
    path = tempfile.mkdtemp()
    yield Path(path)
    shutil.rmtree(path, ignore_errors=True)


class TestCostFunctions:
    """Test class for the cybersecurity costs"""

    @pytest.mark.parametrize("kind, alpha, s, expected", [
        (CostKind.ISR, 1.0, 0.0, 0.0),
        (CostKind.ISR, 1.0, 0.75, 1.0),
        (CostKind.NCF, 1.0, 0.0, 0.0),
        (CostKind.LOG, 2.0, 0.5, 2.0 * math.log(2.0)),
        (CostKind.LOG, 1.0, 0.0, 0.0),
    ])
    def test_cost_values(self, kind, alpha, s, expected):
        assert cost_h(kind, alpha, s) == pytest.approx(expected, abs=1e-15)

    @pytest.mark.parametrize("kind", list(CostKind))
    @pytest.mark.parametrize("s", [1.0, 1.5, -0.1])
    def test_cost_domain(self, kind, s):
        with pytest.raises(DomainError):
            cost_h(kind, 1.0, s)
        with pytest.raises(DomainError):
            cost_dh(kind, 1.0, s)

    @pytest.mark.parametrize("kind", list(CostKind))
    def test_vectorised(self, kind):
        ss = np.linspace(0.0, 0.9, 7)
        values = cost_h(kind, 3.0, ss)

        assert values.shape == ss.shape
        for s, v in zip(ss, values):
            assert v == pytest.approx(cost_h(kind, 3.0, float(s)), rel=1e-14, abs=1e-15)

    @pytest.mark.parametrize("kind", list(CostKind))
    def test_derivative_matches_difference(self, kind):
        ss = np.linspace(0.01, 0.9, 50)
        eps = 1e-6
        numeric = (cost_h(kind, 2.0, ss + eps) - cost_h(kind, 2.0, ss - eps)) / (2 * eps)
        np.testing.assert_allclose(cost_dh(kind, 2.0, ss), numeric, rtol=1e-6)

    @pytest.mark.parametrize("kind", list(CostKind))
    def test_slope_bound(self, kind):
        cap = security_cap(kind, 4.0, 3.0)
        ss = np.linspace(0.0, cap, 2001)
        assert np.max(cost_dh(kind, 4.0, ss)) <= cost_slope_bound(kind, 4.0, cap) + 1e-12

    @pytest.mark.parametrize("kind", list(CostKind))
    def test_increasing(self, kind):
        values = cost_h(kind, 1.0, np.linspace(0.0, 0.99, 500))
        assert np.all(np.diff(values) > 0)


class TestSecurityCap:
    """Test class for the budget inversion"""

    def test_isr(self):
        assert security_cap(CostKind.ISR, 1.0, 1.0) == pytest.approx(0.75, abs=1e-12)

    def test_log(self):
        assert security_cap(CostKind.LOG, 1.0, 1.0) == pytest.approx(1.0 - math.exp(-1.0), abs=1e-12)

    @pytest.mark.parametrize("kind", list(CostKind))
    @pytest.mark.parametrize("alpha, budget", [(1.0, 1.0), (1.0, 5.0), (10.0, 0.5), (7.0, 4.5)])
    def test_residual(self, kind, alpha, budget):
        cap = security_cap(kind, alpha, budget)
        assert 0.0 < cap < 1.0
        assert abs(cost_h(kind, alpha, cap) - budget) <= 1e-10

    @pytest.mark.parametrize("budget", [0.0, -1.0])
    def test_nonpositive_budget(self, budget):
        with pytest.raises(ParameterError):
            security_cap(CostKind.LOG, 1.0, budget)

    def test_nonpositive_alpha(self):
        with pytest.raises(ParameterError):
            security_cap(CostKind.ISR, 0.0, 1.0)


class TestModels:
    """Test class for the parameter and strategy models"""

    def test_market_alias(self):
        mk = MarketParams(q=100.0, m=1.5, r=0.2)
        assert mk.m_slope == 1.5
        assert mk.model_dump() == {"q": 100.0, "m": 1.5, "r": 0.2}

    def test_market_positive(self):
        with pytest.raises(ValidationError):
            MarketParams(q=100.0, m=0.0, r=0.2)

    def test_player_vector_lengths(self):
        with pytest.raises(ValidationError):
            PlayerParams(c_prod=1.0, c_setup=(500.0, 600.0), c_lin=(1.0,), c_quad=(0.5,),
                         alpha=1.0, D=50.0, B=1.0, Q_cap=(50.0,))

    def test_mixed_strategy_simplex(self):
        st = PureStrategy(Q=(0.0,), b=(0,), s=0.0)
        with pytest.raises(ValidationError):
            MixedStrategy(support=(st, st), probs=(0.5, 0.6))
        with pytest.raises(ValidationError):
            MixedStrategy(support=(st,), probs=(1.0, 0.0))
        with pytest.raises(ValidationError):
            MixedStrategy(support=(), probs=())

    def test_mixed_means(self):
        x = PureStrategy(Q=(10.0, 0.0), b=(1, 0), s=0.2)
        y = PureStrategy(Q=(20.0, 5.0), b=(1, 1), s=0.4)
        sigma = MixedStrategy(support=(x, y), probs=(0.25, 0.75))

        np.testing.assert_allclose(sigma.mean_quantity(), [17.5, 3.75])
        assert sigma.mean_security() == pytest.approx(0.35)

    def test_profile_helpers(self):
        x = PureStrategy(Q=(1.0,), b=(1,), s=0.1)
        y = PureStrategy(Q=(2.0,), b=(1,), s=0.2)
        profile = MixedProfile.pure([x, y])

        assert len(profile) == 2
        assert profile.support_size() == 2
        swapped = profile.replace(0, MixedStrategy.pure(y))
        assert swapped[0].support[0] == y
        assert profile[0].support[0] == x
        assert x.close_to(PureStrategy(Q=(1.0 + 1e-12,), b=(1,), s=0.1))
        assert not x.close_to(y)


class TestInstance:
    """Test class for instances, payoffs and expectations"""

    def test_sample(self, sample):
        assert sample.m == 2
        assert sample.n == 2
        assert sample.cost_kind is CostKind.LOG
        assert sample.instance_id == "sample_m2_n2_log"
        assert sample.security_caps[0] == pytest.approx(1.0 - math.exp(-1.0), abs=1e-15)

    def test_idle_profile_pays_damage(self, sample):
        profile = [idle(2), idle(2)]
        for p in range(2):
            assert payoff(sample, p, profile) == pytest.approx(-sample.players[p].D, abs=1e-12)

    def test_hand_built_formula(self):
        market = MarketParams(q=120.0, m=0.8, r=0.3)
        players = [
            PlayerParams(c_prod=4.0, c_setup=(700.0,), c_lin=(2.0,), c_quad=(0.5,),
                         alpha=3.0, D=60.0, B=2.0, Q_cap=(100.0,)),
            PlayerParams(c_prod=6.0, c_setup=(900.0,), c_lin=(1.5,), c_quad=(0.4,),
                         alpha=2.0, D=80.0, B=1.5, Q_cap=(80.0,)),
        ]
        inst = build_instance([market], players, CostKind.ISR)
        x0 = PureStrategy(Q=(35.0,), b=(1,), s=0.3)
        x1 = PureStrategy(Q=(20.0,), b=(1,), s=0.1)

        s_avg = (0.3 + 0.1) / 2
        price = 120.0 + 0.3 * s_avg - 0.8 * (35.0 + 20.0)
        expected = (price * 35.0 - 4.0 * 35.0 - 700.0 - (0.5 * 35.0 ** 2 + 2.0 * 35.0)
                    - 3.0 * (1.0 / math.sqrt(0.7) - 1.0)
                    - (1.0 - 0.3) * (1.0 - s_avg) * 60.0)

        assert payoff(inst, 0, [x0, x1]) == pytest.approx(expected, abs=1e-9)

    def test_symmetric_players(self):
        market = MarketParams(q=150.0, m=1.0, r=0.2)
        player = PlayerParams(c_prod=5.0, c_setup=(800.0,), c_lin=(2.0,), c_quad=(0.5,),
                              alpha=2.0, D=70.0, B=2.0, Q_cap=(100.0,))
        inst = build_instance([market], [player, player], CostKind.NCF)
        x = PureStrategy(Q=(30.0,), b=(1,), s=0.1)

        assert payoff(inst, 0, [x, x]) == payoff(inst, 1, [x, x])

    def test_doubling_damage(self, sample):
        rng = np.random.default_rng(3)
        profile = [random_strategy(rng, sample, p) for p in range(2)]
        data = json.loads(sample.to_json())
        for pl in data["players"]:
            pl["D"] *= 2.0
        doubled = GciInstance.model_validate(data)

        s_avg = sum(st.s for st in profile) / 2
        for p in range(2):
            beta = (1.0 - profile[p].s) * (1.0 - s_avg)
            diff = payoff(sample, p, profile) - payoff(doubled, p, profile)
            assert diff == pytest.approx(beta * sample.players[p].D, abs=1e-9)

    def test_infeasible_strategies(self, sample):
        cases = [
            PureStrategy(Q=(1.0, 0.0), b=(0, 0), s=0.0),
            PureStrategy(Q=(0.0, 0.0), b=(2, 0), s=0.0),
            PureStrategy(Q=(200.0, 0.0), b=(1, 0), s=0.0),
            PureStrategy(Q=(0.0, 0.0), b=(0, 0), s=0.9),
            PureStrategy(Q=(0.0,), b=(0,), s=0.0),
        ]
        for st in cases:
            with pytest.raises(StrategyError):
                check_strategy(sample, 0, st)
            with pytest.raises(StrategyError):
                payoff(sample, 0, [st, idle(2)])

    def test_profile_length(self, sample):
        with pytest.raises(StrategyError):
            payoff(sample, 0, [idle(2)])

    def test_degenerate_opponents(self, sample):
        rng = np.random.default_rng(7)
        own, other = random_strategy(rng, sample, 0), random_strategy(rng, sample, 1)
        profile = MixedProfile.pure([own, other])

        assert expected_payoff(sample, 0, own, profile) == pytest.approx(payoff(sample, 0, [own, other]), abs=1e-9)

    def test_two_point_support(self, sample):
        rng = np.random.default_rng(11)
        own = random_strategy(rng, sample, 0)
        x, y = random_strategy(rng, sample, 1), random_strategy(rng, sample, 1)
        profile = MixedProfile(strategies=(MixedStrategy.pure(own),
                                           MixedStrategy(support=(x, y), probs=(0.3, 0.7))))

        expected = 0.3 * payoff(sample, 0, [own, x]) + 0.7 * payoff(sample, 0, [own, y])
        assert expected_payoff(sample, 0, own, profile) == pytest.approx(expected, abs=1e-9)

    @pytest.mark.parametrize("seed", range(100))
    def test_affine_reduction_matches_enumeration(self, seed):
        rng = np.random.default_rng(seed)
        m = int(rng.integers(2, 4))
        n = int(rng.integers(1, 3))
        inst = generate_instance(m, n, list(CostKind)[seed % 3], seed)
        profile = MixedProfile(strategies=tuple(random_mixed(rng, inst, p, int(rng.integers(1, 4)))
                                                for p in range(m)))
        p = seed % m
        own = random_strategy(rng, inst, p)

        brute = 0.0
        others = [i for i in range(m) if i != p]
        for combo in itertools.product(*(range(len(profile[i].support)) for i in others)):
            weight = 1.0
            pure = [own] * m
            for i, k in zip(others, combo):
                weight *= profile[i].probs[k]
                pure[i] = profile[i].support[k]
            brute += weight * payoff(inst, p, pure)

        assert expected_payoff(inst, p, own, profile) == pytest.approx(brute, abs=1e-9)

    def test_mixed_expected_payoff(self, sample):
        rng = np.random.default_rng(5)
        profile = MixedProfile(strategies=(random_mixed(rng, sample, 0, 2), random_mixed(rng, sample, 1, 3)))
        sigma = profile[0]

        expected = sum(pr * expected_payoff(sample, 0, st, profile) for st, pr in zip(sigma.support, sigma.probs))
        assert mixed_expected_payoff(sample, 0, profile) == pytest.approx(expected, abs=1e-9)


class TestGenerator:
    """Test class for the seeded instance generator"""

    def test_deterministic(self):
        a = generate_instance(3, 2, CostKind.NCF, 42)
        b = generate_instance(3, 2, CostKind.NCF, 42)

        assert a.to_json() == b.to_json()
        assert a.instance_id == "gci_m3_n2_ncf_s42"
        assert a.seed == 42

    def test_seed_changes_instance(self):
        assert generate_instance(2, 2, "log", 1).to_json() != generate_instance(2, 2, "log", 2).to_json()

    @pytest.mark.parametrize("m, n", [(1, 2), (2, 0)])
    def test_invalid_sizes(self, m, n):
        with pytest.raises(ParameterError):
            generate_instance(m, n, CostKind.LOG, 0)

    def test_market_grids(self):
        inst = generate_instance(2, 1000, CostKind.LOG, 9)
        a = inst.arrays

        assert np.all((a["q"] >= 100) & (a["q"] <= 200))
        assert np.all(a["q"] == np.round(a["q"]))
        assert np.all((a["m_slope"] >= 0.5 - 1e-12) & (a["m_slope"] <= 2.0 + 1e-12))
        np.testing.assert_allclose(a["m_slope"] * 100, np.round(a["m_slope"] * 100), atol=1e-9)
        assert np.all((a["r"] >= 0.1 - 1e-12) & (a["r"] <= 0.5 + 1e-12))
        # with 1000 draws both ends of the q grid show up
        assert a["q"].min() == 100 and a["q"].max() == 200

    def test_player_grids(self):
        inst = generate_instance(200, 5, CostKind.ISR, 4)
        a = inst.arrays

        assert set(np.unique(a["B"])) <= {0.5 * k for k in range(1, 11)}
        assert set(np.unique(a["alpha"])) <= set(range(1, 11))
        assert np.all((a["c_setup"] >= 500) & (a["c_setup"] <= 2000))
        assert np.all((a["c_lin"] >= 1.0) & (a["c_lin"] <= 4.0))
        assert np.all((a["c_quad"] >= 0.25) & (a["c_quad"] <= 1.0))
        assert np.all((a["D"] >= 50) & (a["D"] <= 100))
        assert np.all((a["Q_cap"] >= 50) & (a["Q_cap"] <= 200))
        assert np.all((a["c_prod"] >= 1) & (a["c_prod"] <= 10))
        for p in range(inst.m):
            assert abs(cost_h(inst.cost_kind, a["alpha"][p], a["caps"][p]) - a["B"][p]) <= 1e-10


class TestInstanceFiles:
    """Test class for instance JSON files"""

    def test_round_trip(self, temp_dir):
        inst = generate_instance(3, 2, CostKind.NCF, 5)
        path = temp_dir / "inst.json"
        save_instance(inst, path)

        loaded = load_instance(path)
        assert loaded == inst
        raw = json.loads(path.read_text(encoding="utf-8"))
        assert raw["m"] == 3 and raw["n"] == 2
        assert raw["markets"][0].keys() == {"q", "m", "r"}

    def test_tampered_budget(self, temp_dir):
        inst = generate_instance(2, 2, CostKind.LOG, 8)
        raw = json.loads(inst.to_json())
        raw["players"][0]["B"] += 0.5
        path = temp_dir / "tampered.json"
        path.write_text(json.dumps(raw), encoding="utf-8")

        with pytest.raises(CapResidualError):
            load_instance(path)

    def test_missing_caps_are_computed(self, temp_dir):
        raw = json.loads(load_sample_instance().to_json())
        del raw["security_caps"]
        path = temp_dir / "nocaps.json"
        path.write_text(json.dumps(raw), encoding="utf-8")

        loaded = load_instance(path)
        assert loaded.security_caps[1] == pytest.approx(1.0 - math.exp(-0.5), abs=1e-15)

    def test_size_mismatch(self, temp_dir):
        raw = json.loads(load_sample_instance().to_json())
        raw["m"] = 3
        path = temp_dir / "bad.json"
        path.write_text(json.dumps(raw), encoding="utf-8")

        with pytest.raises(ValidationError):
            load_instance(path)

    def test_missing_file(self, temp_dir):
        with pytest.raises(FileNotFoundError):
            load_instance(temp_dir / "absent.json")

    def test_invalid_json(self, temp_dir):
        path = temp_dir / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(json.JSONDecodeError):
            load_instance(path)

    def test_not_an_object(self, temp_dir):
        path = temp_dir / "list.json"
        path.write_text("[1, 2]", encoding="utf-8")
        with pytest.raises(ValueError):
            load_instance(path)
