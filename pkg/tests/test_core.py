import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_game
from msbgame.core import (
    Affine,
    Coalition,
    Indicator,
    LinearCost,
    LogCost,
    MsbGame,
    MultilinearBenefit,
    PowerForm,
    QuadraticCost,
    SqrtCost,
    ZeroCost,
    coalition_contribution,
    eval_contribution,
    eval_cost,
    linearize_in_player,
    member_matrix,
    player_utility,
    principal_share,
    principal_utility,
    shared_benefit,
)
from msbgame.errors import DomainError, InstanceError
from msbgame.instances import complete_graph_edges, running_example, unstable_optimum
from msbgame.search import build_clique_instance

seeds = st.integers(min_value=0, max_value=2**32 - 1)


class TestContribution:
    def test_power_form_effort_only(self):
        assert eval_contribution(PowerForm(1, 0.2, 0.5), 0.25, 0) == pytest.approx(0.5, abs=1e-15)

    def test_power_form_genai_only(self):
        assert eval_contribution(PowerForm(1, 0.2, 0.5), 0.0, 1) == pytest.approx(math.sqrt(0.2), abs=1e-15)

    def test_indicator_fires_only_at_one(self):
        assert eval_contribution(Indicator(), 0.999, 1) == 0
        assert eval_contribution(Indicator(), 1.0, 0) == 1

    def test_affine(self):
        assert eval_contribution(Affine(2, 0.5, 0.1), 0.5, 1) == pytest.approx(1.6)

    def test_general_exponent(self):
        assert eval_contribution(PowerForm(2, 1, 0.3), 0.5, 1) == pytest.approx(2 ** 0.3)

    @pytest.mark.parametrize("e", [-0.1, 1.0001, float("nan")])
    def test_domain_error(self, e):
        with pytest.raises(DomainError):
            eval_contribution(PowerForm(1, 0, 0.5), e, 0)

    def test_rejects_bad_parameters(self):
        with pytest.raises(InstanceError):
            PowerForm(-1, 0, 0.5)
        with pytest.raises(InstanceError):
            PowerForm(1, 0, 0)
        with pytest.raises(InstanceError):
            PowerForm(1, 0, 1.5)
        with pytest.raises(InstanceError):
            Affine(1, -0.2)


class TestCost:
    def test_log_cost(self):
        assert eval_cost(LogCost(3), 0.25) == pytest.approx(3 * math.log(1.25))
        assert eval_cost(LogCost(3), 0.25) == pytest.approx(0.6694, abs=1e-4)

    def test_quadratic_cost(self):
        assert eval_cost(QuadraticCost(0.5), 0.5) == pytest.approx(0.25)

    @pytest.mark.parametrize("spec", [ZeroCost(), LinearCost(0.7), LogCost(2), SqrtCost(1.3), QuadraticCost(0.1)])
    def test_zero_at_zero_and_nondecreasing(self, spec):
        assert eval_cost(spec, 0.0) == 0
        x = np.linspace(0, 1, 501)
        assert np.all(np.diff(spec.value(x)) >= 0)

    def test_domain_error(self):
        with pytest.raises(DomainError):
            eval_cost(LinearCost(1), 2.0)

    def test_quadratic_needs_positive_scale(self):
        with pytest.raises(InstanceError):
            QuadraticCost(0)


class TestCoalition:
    def test_from_players_and_back(self):
        c = Coalition.from_players([0, 2], 3)
        assert c.mask == 5
        assert c.players == (0, 2)
        assert c.labels == (1, 3)
        assert 2 in c and 1 not in c
        assert str(c) == "{1,3}"
        assert len(c) == 2

    def test_without_and_subset(self):
        c = Coalition.full(3)
        assert c.without(1).mask == 5
        assert Coalition.empty(3).issubset(c)
        assert not c.issubset(3)

    def test_out_of_range(self):
        with pytest.raises(InstanceError):
            Coalition.from_players([3], 3)

    def test_member_matrix(self):
        m = member_matrix(np.array([0, 5, 7]), 3)
        assert m.tolist() == [[False, False, False], [True, False, True], [True, True, True]]


class TestBenefitAndGame:
    def test_coalition_contribution_outsider_uses_genai(self):
        g = running_example()
        assert coalition_contribution(g, 1, 0.7, False, Coalition.from_players([0], 2)) == pytest.approx(math.sqrt(0.2))

    def test_coalition_contribution_member(self):
        g = running_example()
        assert coalition_contribution(g, 1, 0.7, True, 3) == pytest.approx(math.sqrt(0.9))

    def test_clique_outsider_contributes_nothing(self):
        g = build_clique_instance(3, complete_graph_edges(3), 3)
        assert coalition_contribution(g, 0, 1.0, True, 0b110) == 0

    def test_shared_benefit_running_example(self):
        assert shared_benefit(running_example(), (1, 0.25), (0, 0), 3) == pytest.approx(4.0, abs=1e-12)

    def test_shared_benefit_triangle(self):
        g = build_clique_instance(3, complete_graph_edges(3), 3)
        assert shared_benefit(g, (1, 1, 1), (1, 1, 1), 7) == pytest.approx(3.0)

    def test_all_indicator_zero_effort_keeps_constant(self):
        b = MultilinearBenefit.from_player_sets([((), 0.7), ((0, 1), 2.0)], 2)
        g = MsbGame(2, (0.1, 0.1), (Indicator(), Indicator()), (ZeroCost(), ZeroCost()), b)
        assert shared_benefit(g, (0, 0), (1, 1), 3) == pytest.approx(0.7)

    def test_player_utilities_running_example(self):
        g = running_example()
        assert player_utility(g, 0, (1, 0), (1, 1), 3) == pytest.approx(0.38, abs=5e-3)
        assert player_utility(g, 1, (1, 0), (1, 1), 3) == pytest.approx(1.07, abs=5e-3)

    def test_outsider_utility_is_minus_cost(self):
        g = running_example()
        assert player_utility(g, 1, (1, 0), (1, 1), 1) == 0
        assert player_utility(g, 1, (1, 0.5), (1, 1), 1) == pytest.approx(-3 * math.log(1.5))

    def test_principal_utility_unstable_optimum(self):
        g = unstable_optimum()
        assert principal_utility(g, (1, 0.108), (1, 1), 3) == pytest.approx(0.555, abs=1e-3)
        assert principal_utility(g, (1, 0.108), (1, 1), 1) == pytest.approx(1.341, abs=1e-3)

    def test_principal_utility_empty(self):
        g = running_example()
        assert principal_utility(g, (0, 0), (1, 1), 0) == pytest.approx(shared_benefit(g, (0, 0), (1, 1), 0))

    def test_principal_may_be_negative(self):
        g = build_clique_instance(5, complete_graph_edges(5), 2)
        assert principal_share(g, 31) < 0
        assert principal_utility(g, (1,) * 5, (1,) * 5, 31) < 0

    def test_linearize_examples(self):
        b = MultilinearBenefit.from_player_sets([((0, 1), 8.0)], 2)
        assert linearize_in_player(b, 1, [1.0]) == pytest.approx((8.0, 0.0))
        path = MultilinearBenefit.from_player_sets([((0, 1), 1.0), ((1, 2), 1.0)], 3)
        assert linearize_in_player(path, 1, [1.0, 1.0]) == pytest.approx((2.0, 0.0))
        absent = MultilinearBenefit.from_player_sets([((0, 1), 2.0), ((), 0.5)], 3)
        a, b0 = linearize_in_player(absent, 2, [0.5, 3.0])
        assert a == 0 and b0 == pytest.approx(2.0 * 0.5 * 3.0 + 0.5)

    def test_benefit_validation(self):
        with pytest.raises(InstanceError):
            MultilinearBenefit(((3, -1.0),), 2)
        with pytest.raises(InstanceError):
            MultilinearBenefit(((3, 1.0), (3, 2.0)), 2)
        with pytest.raises(InstanceError):
            MultilinearBenefit(((4, 1.0),), 2)

    def test_game_validation(self):
        b = MultilinearBenefit.product(2)
        c, k = (Affine(1), Affine(1)), (ZeroCost(), ZeroCost())
        with pytest.raises(InstanceError):
            MsbGame(2, (0.5,), c, k, b)
        with pytest.raises(InstanceError):
            MsbGame(2, (0.5, 1.2), c, k, b)
        with pytest.raises(InstanceError):
            MsbGame(3, (0.1, 0.1, 0.1), c + (Affine(1),), k + (ZeroCost(),), b)
        # shares may sum past 1
        MsbGame(2, (0.8, 0.9), c, k, b)

    def test_game_is_hashable_and_frozen(self):
        g = running_example()
        assert hash(g) == hash(running_example())
        with pytest.raises(Exception):
            g.n = 3


@settings(max_examples=60, deadline=None)
@given(seed=seeds, n=st.integers(1, 6))
def test_benefit_is_monotone(seed, n):
    rng = np.random.default_rng(seed)
    b = random_game(rng, n).benefit
    lo = rng.uniform(0, 2, (20, n))
    hi = lo + rng.uniform(0, 1, (20, n))
    assert np.all(b.evaluate(hi) >= b.evaluate(lo) - 1e-12)


@settings(max_examples=60, deadline=None)
@given(seed=seeds, n=st.integers(1, 6))
def test_linearization_is_exact(seed, n):
    rng = np.random.default_rng(seed)
    b = random_game(rng, n).benefit
    s = rng.uniform(0, 2, n)
    f = b.evaluate(s)
    for i in range(n):
        a, rest = linearize_in_player(b, i, s)
        assert a >= 0 and rest >= 0
        assert abs(f - (a * s[i] + rest)) <= 1e-12 * max(1.0, abs(f))


@settings(max_examples=60, deadline=None)
@given(seed=seeds, n=st.integers(1, 6))
def test_benefit_partition(seed, n):
    rng = np.random.default_rng(seed)
    g = random_game(rng, n)
    mask = int(rng.integers(1 << n))
    e = rng.random(n)
    f = shared_benefit(g, e, np.ones(n), mask)
    members = sum(g.shares[i] for i in range(n) if mask >> i & 1)
    assert members * f + principal_share(g, mask) * f == pytest.approx(f, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(seed=seeds, n=st.integers(2, 6))
def test_increasing_differences(seed, n):
    rng = np.random.default_rng(seed)
    g = random_game(rng, n, allow_indicator=False)
    mask = (1 << n) - 1
    gv = rng.integers(0, 2, n)
    lo = rng.random(n)
    hi = np.minimum(1.0, lo + rng.random(n))
    for i in range(n):
        def f(ei, rest):
            e = rest.copy()
            e[i] = ei
            return shared_benefit(g, e, gv, mask)
        lhs = f(hi[i], hi) - f(lo[i], hi)
        rhs = f(hi[i], lo) - f(lo[i], lo)
        assert lhs >= rhs - 1e-10


@settings(max_examples=40, deadline=None)
@given(seed=seeds)
def test_contribution_monotone_on_grid(seed):
    rng = np.random.default_rng(seed)
    g = random_game(rng, 4)
    x = np.linspace(0, 1, 257)
    for spec in g.contributions:
        for gv in (0.0, 1.0):
            v = spec.value(x, gv)
            assert np.all(v >= 0)
            assert np.all(np.diff(v) >= -1e-15)
        assert np.all(spec.value(x, 1.0) >= spec.value(x, 0.0) - 1e-15)


@settings(max_examples=40, deadline=None)
@given(seed=seeds)
def test_derivatives_match_finite_differences(seed):
    rng = np.random.default_rng(seed)
    g = random_game(rng, 3, allow_indicator=False)
    x = rng.uniform(0.01, 0.99, 16)
    h = 1e-6
    for spec in g.contributions:
        for gv in (0.0, 1.0):
            fd = (spec.value(x + h, gv) - spec.value(x - h, gv)) / (2 * h)
            assert np.allclose(spec.derivative(x, gv), fd, rtol=1e-5, atol=1e-6)
    for cost in g.costs:
        fd = (cost.value(x + h) - cost.value(x - h)) / (2 * h)
        assert np.allclose(cost.derivative(x), fd, rtol=1e-5, atol=1e-6)
