"""A weak contributor is still worth keeping: value-to-share ratio as eps shrinks."""
from msbgame import brute_force_optimal, vsr
from msbgame.instances import low_contributor_retention

print(f"{'eps':>6} {'C*':>6} {'W*':>9} {'VSR(2)':>8}")
for eps in (0.5, 0.1, 0.01, 0.001):
    game = low_contributor_retention(eps)
    opt = brute_force_optimal(game)
    players = [i + 1 for i in range(game.n) if opt.coalition >> i & 1]
    print(f"{eps:>6} {str(players):>6} {opt.principal_utility:>9.5f} {vsr(game, 1, opt.coalition):>8.4f}")
