"""Two-player running example: how GenAI access changes the effort equilibrium."""
from msbgame import dominant_equilibrium, price_of_generativity
from msbgame.instances import effort_collapse, running_example

game = running_example()
for g in ("none", "all"):
    eq = dominant_equilibrium(game, 0b11, g)
    utils = ", ".join(f"{u:.4f}" for u in eq.player_utilities)
    print(f"GenAI {g:>4}: efforts {eq.efforts}  F={eq.shared_benefit:.4f}  utilities ({utils})")
print(f"price of generativity: {price_of_generativity(game, 0b11):.4f}")

# The collapse family: one player free-rides once GenAI is available,
# and the ratio grows like 1/sqrt(eps).
for eps in (0.04, 0.01, 0.0025):
    print(f"eps={eps:<7} PoG={price_of_generativity(effort_collapse(eps), 0b11):.6g}")
