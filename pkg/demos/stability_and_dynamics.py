"""An optimal coalition the Principal would myopically break up."""
from msbgame import brute_force_optimal, is_stable, myopic_removal_dynamics
from msbgame.core import Coalition
from msbgame.instances import unstable_optimum

game = unstable_optimum()
opt = brute_force_optimal(game)
print(f"optimal coalition {Coalition(opt.coalition, game.n)}  W*={opt.principal_utility:.4f}")
print(f"equilibrium efforts {tuple(round(e, 4) for e in opt.equilibrium.efforts)}")

rep = is_stable(game, opt.coalition, opt.equilibrium.efforts)
print(f"stable: {rep.stable}  (dropping to {Coalition(rep.witness, game.n)} looks better at frozen efforts)")

print("myopic removal:")
for step in myopic_removal_dynamics(game, opt.coalition).steps:
    print(f"  {str(Coalition(step.coalition, game.n)):<8} W={step.principal_utility:.4f}  efforts {step.equilibrium.efforts}")
