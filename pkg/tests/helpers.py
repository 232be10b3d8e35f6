"""Random game builders shared by the test modules."""
from __future__ import annotations

import itertools

import numpy as np

from msbgame.core import (
    Affine,
    Indicator,
    LinearCost,
    LogCost,
    MsbGame,
    MultilinearBenefit,
    PowerForm,
    QuadraticCost,
    SqrtCost,
    ZeroCost,
)
from msbgame.experiment import game_from_parameters


def random_contribution(rng: np.random.Generator, allow_indicator: bool = True):
    r = rng.random()
    if allow_indicator and r < 0.1:
        return Indicator()
    if r < 0.55:
        p = float(rng.choice([0.5, 1.0, rng.uniform(0.2, 1.0)]))
        return PowerForm(float(rng.uniform(0, 2)), float(rng.uniform(0, 1)), p)
    return Affine(float(rng.uniform(0, 2)), float(rng.uniform(0, 1)), float(rng.uniform(0, 0.5)))


def random_cost(rng: np.random.Generator):
    kind = int(rng.integers(5))
    scale = float(rng.uniform(0, 1.5))
    if kind == 0:
        return ZeroCost()
    if kind == 1:
        return LinearCost(scale)
    if kind == 2:
        return LogCost(scale)
    if kind == 3:
        return SqrtCost(scale)
    return QuadraticCost(float(rng.uniform(0.05, 2)))


def random_benefit(rng: np.random.Generator, n: int, max_terms: int = 6) -> MultilinearBenefit:
    masks = rng.choice(np.arange(1 << n), size=min(max_terms, 1 << n), replace=False)
    return MultilinearBenefit(tuple((int(m), float(rng.uniform(0, 3))) for m in masks), n)


def random_game(rng: np.random.Generator, n: int, allow_indicator: bool = True) -> MsbGame:
    """Mixed families of contribution and cost functions with a random multilinear benefit."""
    return MsbGame(
        n=n,
        shares=tuple(float(x) for x in rng.uniform(0, 0.5, n)),
        contributions=tuple(random_contribution(rng, allow_indicator) for _ in range(n)),
        costs=tuple(random_cost(rng) for _ in range(n)),
        benefit=random_benefit(rng, n),
        name="random",
    )


def product_game(rng: np.random.Generator, n: int, cost_scale: float = 1.0) -> MsbGame:
    """Random product game drawn like the batch experiment's, with marginal costs scaled by ``cost_scale``.

    ``cost_scale=1`` is the experiment's distribution; smaller values give
    instances where members keep positive effort.
    """
    alpha, beta, delta = rng.random(n), rng.random(n), rng.random(n) * cost_scale
    p, t = float(rng.random()), rng.random(n)
    return game_from_parameters(alpha, beta, delta, p, t, name="product")


def linear_game(rng: np.random.Generator, n: int, epsilon: float) -> MsbGame:
    """Linear benefit with shares on the ``epsilon`` grid; total share may exceed 1."""
    units = rng.integers(0, int(round(0.4 / epsilon)) + 1, n)
    gammas = rng.uniform(0, 3, n)
    terms = [(1 << i, float(gammas[i])) for i in range(n)]
    if rng.random() < 0.5:
        terms.append((0, float(rng.uniform(0, 1))))
    return MsbGame(
        n=n,
        shares=tuple(float(k * epsilon) for k in units),
        contributions=tuple(random_contribution(rng) for _ in range(n)),
        costs=tuple(random_cost(rng) for _ in range(n)),
        benefit=MultilinearBenefit(tuple(terms), n),
        name="linear",
    )


def decomposable_game(rng: np.random.Generator, n: int, k: int, epsilon: float) -> tuple[MsbGame, int]:
    """Coupled block on the first ``k`` players plus singleton terms for the rest."""
    nprime = (1 << k) - 1
    terms = []
    if k:
        sub = [m for m in range(1, 1 << k)]
        picked = rng.choice(sub, size=min(len(sub), int(rng.integers(1, 4))), replace=False)
        terms += [(int(m), float(rng.uniform(0.5, 4))) for m in picked]
    terms += [(1 << i, float(rng.uniform(0, 3))) for i in range(k, n)]
    units = rng.integers(0, int(round(0.3 / epsilon)) + 1, n)
    game = MsbGame(
        n=n,
        shares=tuple(float(u * epsilon) for u in units),
        contributions=tuple(random_contribution(rng) for _ in range(n)),
        costs=tuple(random_cost(rng) for _ in range(n)),
        benefit=MultilinearBenefit(tuple(terms), n),
        name="decomposable",
    )
    return game, nprime


def has_clique(n_vertices: int, edges, k: int) -> bool:
    adj = {(min(u, v), max(u, v)) for u, v in edges}
    return any(all((a, b) in adj for a, b in itertools.combinations(c, 2))
               for c in itertools.combinations(range(n_vertices), k))


def random_graph(rng: np.random.Generator, n_vertices: int, p: float) -> list[tuple[int, int]]:
    return [(u, v) for u, v in itertools.combinations(range(n_vertices), 2) if rng.random() < p]
