"""Stability of coalitions, Principal's fixed-effort deviations, value-to-share
ratios and the myopic removal dynamics."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import CoalitionLike, MsbGame, as_mask, member_matrix, popcount
from .equilibrium import DEFAULT_CONFIG, EquilibriumResult, SolveConfig, dominant_equilibrium
from .errors import CapExceededError, ZeroShareError

SUBSET_CAP = 20
# Slack on the weak inequality that defines stability.
STABILITY_SLACK = 1e-12


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    witness: int | None
    checked_subsets: int

    def to_dict(self, n: int | None = None) -> dict:
        out = {"stable": self.stable, "witness": self.witness, "checked_subsets": self.checked_subsets}
        if n is not None and self.witness is not None:
            out["witness_players"] = [i + 1 for i in range(n) if self.witness >> i & 1]
        return out


@dataclass(frozen=True)
class DynamicsStep:
    coalition: int
    equilibrium: EquilibriumResult
    principal_utility: float


@dataclass(frozen=True)
class DynamicsTrace:
    steps: tuple[DynamicsStep, ...] = field(default_factory=tuple)
    terminal_stable: bool = True

    @property
    def terminal(self) -> int:
        return self.steps[-1].coalition

    def to_dict(self) -> dict:
        return {
            "terminal_stable": self.terminal_stable,
            "steps": [
                {"coalition": s.coalition,
                 "players": [i + 1 for i in range(len(s.equilibrium.efforts)) if s.coalition >> i & 1],
                 "efforts": list(s.equilibrium.efforts),
                 "principal_utility": s.principal_utility,
                 "converged": s.equilibrium.converged}
                for s in self.steps
            ],
        }


def submasks(mask: int) -> np.ndarray:
    """All submasks of ``mask`` in ascending numeric order."""
    bits = [i for i in range(mask.bit_length()) if mask >> i & 1]
    if len(bits) > SUBSET_CAP:
        raise CapExceededError(f"subset enumeration is capped at {SUBSET_CAP} players, got {len(bits)}")
    idx = np.arange(1 << len(bits), dtype=np.int64)
    out = np.zeros(idx.shape, dtype=np.int64)
    for j, b in enumerate(bits):
        out |= ((idx >> j) & 1) << b
    return out


def fixed_effort_values(game: MsbGame, masks, efforts) -> np.ndarray:
    """Principal utility of each coalition in ``masks`` with efforts held at ``efforts`` (GenAI on)."""
    masks = np.asarray(masks, dtype=np.int64)
    member = member_matrix(masks, game.n)
    e = np.broadcast_to(np.asarray(efforts, dtype=float), member.shape)
    contrib = game.contribution_matrix(e, np.ones(game.n), member)
    f = np.atleast_1d(game.benefit.evaluate(contrib))
    return (1.0 - member.astype(float) @ game.theta) * f


def is_stable(game: MsbGame, c: CoalitionLike, efforts, cfg: SolveConfig = DEFAULT_CONFIG) -> StabilityReport:
    """Check that no strict subset earns Principal more at the given efforts.

    Subsets are scanned in ascending mask order and the first profitable one
    is returned as the witness.
    """
    mask = as_mask(c)
    subs = submasks(mask)
    vals = fixed_effort_values(game, subs, efforts)
    own = vals[-1]
    strict = vals[:-1]
    better = np.flatnonzero(strict > own + STABILITY_SLACK)
    if better.size:
        first = int(better[0])
        return StabilityReport(False, int(subs[first]), first + 1)
    return StabilityReport(True, None, int(strict.size))


def best_deviation(game: MsbGame, c: CoalitionLike, efforts) -> int:
    """Subset of ``c`` (possibly ``c`` itself) maximizing Principal's fixed-effort utility.

    Near-ties favour larger subsets, then the smaller mask, so ``c`` is
    returned whenever it is stable.
    """
    mask = as_mask(c)
    subs = submasks(mask)
    vals = fixed_effort_values(game, subs, efforts)
    top = vals.max()
    near = np.flatnonzero(vals >= top - STABILITY_SLACK)
    return int(min((int(subs[r]) for r in near), key=lambda m: (-popcount(m), m)))


def vsr(game: MsbGame, i: int, c: CoalitionLike, cfg: SolveConfig = DEFAULT_CONFIG,
        equilibrium: EquilibriumResult | None = None) -> float:
    """Value-to-share ratio of member ``i``: the drop in shared benefit when
    ``i`` is replaced by GenAI at unchanged efforts, divided by ``theta_i``."""
    mask = as_mask(c)
    if not 0 <= i < game.n:
        raise IndexError(f"player index {i} out of range for n={game.n}")
    if not mask >> i & 1:
        raise ValueError(f"player {i} is not in the coalition")
    theta = game.shares[i]
    if theta == 0:
        raise ZeroShareError(f"player {i} has zero share")
    eq = equilibrium if equilibrium is not None else dominant_equilibrium(game, mask, "all", cfg)
    member = member_matrix(np.array([mask, mask & ~(1 << i)]), game.n)
    e = np.broadcast_to(np.asarray(eq.efforts), member.shape)
    f = game.benefit.evaluate(game.contribution_matrix(e, np.ones(game.n), member))
    return float((f[0] - f[1]) / theta)


def myopic_removal_dynamics(game: MsbGame, start: CoalitionLike,
                            cfg: SolveConfig = DEFAULT_CONFIG) -> DynamicsTrace:
    """Alternate Principal's best fixed-effort deviation with re-equilibration.

    Stops at the first coalition that is stable at its own dominant
    equilibrium. Each move goes to a strict subset, so there are at most
    ``n + 1`` steps.
    """
    mask = as_mask(start)
    if popcount(mask) > SUBSET_CAP:
        raise CapExceededError(f"dynamics are capped at {SUBSET_CAP} players")
    steps = []
    while True:
        eq = dominant_equilibrium(game, mask, "all", cfg)
        steps.append(DynamicsStep(mask, eq, eq.principal_utility))
        report = is_stable(game, mask, eq.efforts, cfg)
        if report.stable:
            return DynamicsTrace(tuple(steps), True)
        nxt = best_deviation(game, mask, eq.efforts)
        if nxt == mask:
            # unreachable: an unstable coalition always has a strictly better subset
            return DynamicsTrace(tuple(steps), False)
        mask = nxt
