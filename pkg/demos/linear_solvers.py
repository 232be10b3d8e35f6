"""Pseudo-polynomial solvers against brute force on linear and almost-linear benefits."""
import time

import numpy as np

from msbgame import Affine, LinearCost, MsbGame, MultilinearBenefit, almost_linear_optimal, brute_force_optimal, fcop_optimal

rng = np.random.default_rng(1)
n, eps = 12, 0.05
game = MsbGame(
    n=n,
    shares=tuple(float(x) for x in eps * rng.integers(1, 6, n)),
    contributions=tuple(Affine(float(a), float(b)) for a, b in zip(rng.uniform(0.5, 2, n), rng.uniform(0, 0.5, n))),
    costs=tuple(LinearCost(float(d)) for d in rng.uniform(0, 0.3, n)),
    benefit=MultilinearBenefit.linear(rng.uniform(0.5, 2, n).tolist()),
)

for label, solve in (("brute force", lambda: brute_force_optimal(game)), ("FCOP", lambda: fcop_optimal(game, eps))):
    t0 = time.perf_counter()
    sol = solve()
    print(f"{label:<12} W*={sol.principal_utility:.10f}  mask={sol.coalition:#06x}  {time.perf_counter() - t0:.3f}s")

# couple the first two players through a product term
terms = list(game.benefit.terms) + [(0b11, 1.5)]
coupled = MsbGame(n, game.shares, game.contributions, game.costs, MultilinearBenefit(tuple(terms), n))
a = almost_linear_optimal(coupled, 0b11, eps)
b = brute_force_optimal(coupled)
print(f"almost-linear W*={a.principal_utility:.10f}  brute force W*={b.principal_utility:.10f}")
