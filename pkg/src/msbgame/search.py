"""Principal's coalition choice: exhaustive search, FCOP for linear benefits,
the almost-linear hybrid, and the clique-reduction instance builder."""
from __future__ import annotations

import dataclasses
import enum
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    CoalitionLike,
    Indicator,
    MsbGame,
    MultilinearBenefit,
    ZeroCost,
    as_mask,
    member_matrix,
    popcount,
)
from .equilibrium import (
    DEFAULT_CONFIG,
    BatchSolution,
    EquilibriumResult,
    SolveConfig,
    best_response_batch,
    result_from_row,
    solve_coalitions,
)
from .errors import CapExceededError, InstanceError, InvalidSharesError, NotDecomposableError, NotLinearError

BRUTE_FORCE_CAP = 24
BRUTE_FORCE_WARN = 16
ALMOST_LINEAR_CAP = 16
CHUNK_ROWS = 1 << 14
# Principal values this close are treated as a tie.
TIE_TOL = 1e-12


class SolverMethod(str, enum.Enum):
    BRUTE_FORCE = "brute"
    FCOP = "fcop"
    ALMOST_LINEAR = "almost-linear"


@dataclass(frozen=True)
class CoalitionSolution:
    coalition: int
    equilibrium: EquilibriumResult
    principal_utility: float
    method: SolverMethod
    unconverged_coalitions: int = 0

    def to_dict(self) -> dict:
        n = len(self.equilibrium.efforts)
        return {
            "coalition": self.coalition,
            "players": [i + 1 for i in range(n) if self.coalition >> i & 1],
            "principal_utility": self.principal_utility,
            "method": self.method.value,
            "unconverged_coalitions": self.unconverged_coalitions,
            "equilibrium": self.equilibrium.to_dict(),
        }


def _pick_best(values: np.ndarray, masks: np.ndarray) -> int:
    """Row index of the largest value; near-ties go to fewer players, then the smaller mask."""
    top = float(values.max())
    tol = TIE_TOL * max(1.0, abs(top))
    near = np.flatnonzero(values >= top - tol)
    return int(min(near, key=lambda r: (popcount(int(masks[r])), int(masks[r]))))


# ---------------------------------------------------------------------------
# Exhaustive search
# ---------------------------------------------------------------------------

def _check_brute_cap(n: int):
    if n > BRUTE_FORCE_CAP:
        raise CapExceededError(f"exhaustive search is capped at n={BRUTE_FORCE_CAP}, got n={n}")
    if n > BRUTE_FORCE_WARN:
        warnings.warn(f"exhaustive search over 2^{n} coalitions may be slow", RuntimeWarning, stacklevel=3)


def coalition_values(game: MsbGame, cfg: SolveConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Principal utility at the dominant equilibrium (GenAI on), indexed by coalition mask."""
    _check_brute_cap(game.n)
    total = 1 << game.n
    values = np.empty(total)
    for start in range(0, total, CHUNK_ROWS):
        masks = np.arange(start, min(total, start + CHUNK_ROWS), dtype=np.int64)
        values[masks] = solve_coalitions(game, masks, "all", cfg).principal_utility(game)
    return values


def brute_force_optimal(game: MsbGame, cfg: SolveConfig = DEFAULT_CONFIG) -> CoalitionSolution:
    """Evaluate every coalition's dominant equilibrium and keep the best for Principal."""
    _check_brute_cap(game.n)
    total = 1 << game.n
    best: tuple | None = None
    unconverged = 0
    for start in range(0, total, CHUNK_ROWS):
        masks = np.arange(start, min(total, start + CHUNK_ROWS), dtype=np.int64)
        sol = solve_coalitions(game, masks, "all", cfg)
        unconverged += int((~sol.converged).sum())
        vals = sol.principal_utility(game)
        r = _pick_best(vals, masks)
        cand = (float(vals[r]), int(masks[r]), sol, r)
        if best is None:
            best = cand
        else:
            pair = np.array([best[0], cand[0]])
            best = (best, cand)[_pick_best(pair, np.array([best[1], cand[1]]))]
    value, mask, sol, r = best
    eq = result_from_row(game, sol, r, cfg)
    return CoalitionSolution(mask, eq, eq.principal_utility, SolverMethod.BRUTE_FORCE, unconverged)


# ---------------------------------------------------------------------------
# Linear benefits: knapsack over share units
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FcopConfig:
    """Share unit ``epsilon`` and each player's share in units, ``share_units[i]*epsilon == theta_i``."""

    epsilon: float
    share_units: tuple[int, ...]
    unit_tol: float = 1e-9

    @classmethod
    def from_game(cls, game: MsbGame, epsilon: float, unit_tol: float = 1e-9) -> "FcopConfig":
        if not epsilon > 0:
            raise InvalidSharesError(f"epsilon must be positive, got {epsilon!r}")
        units = []
        for i, th in enumerate(game.shares):
            k = int(round(th / epsilon))
            if abs(th - k * epsilon) > unit_tol:
                raise InvalidSharesError(f"share of player {i + 1} ({th!r}) is not a multiple of {epsilon!r}")
            units.append(k)
        return cls(float(epsilon), tuple(units), unit_tol)

    @property
    def max_units(self) -> int:
        """``ceil(1/epsilon)``, guarded against 1/epsilon landing just above an integer."""
        return math.ceil(1.0 / self.epsilon - 1e-9)


def knapsack_select(weights: Sequence[int], values: Sequence[float], budget: int) -> int:
    """0/1 knapsack by dynamic programming over integer budget units.

    Returns the bitmask of the chosen items. Among subsets of equal value the
    one with fewer items wins, then the smaller bitmask.
    """
    if len(weights) != len(values):
        raise ValueError("weights and values must have equal length")
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    # best[w] = (value, count, mask) over items seen so far with weight <= w
    val = [0.0] * (budget + 1)
    cnt = [0] * (budget + 1)
    msk = [0] * (budget + 1)
    for i, (w_i, v_i) in enumerate(zip(weights, values)):
        w_i = int(w_i)
        if w_i < 0 or v_i < 0:
            raise ValueError("weights and values must be nonnegative")
        if w_i > budget:
            continue
        bit = 1 << i
        for w in range(budget, w_i - 1, -1):
            cv = val[w - w_i] + v_i
            cc = cnt[w - w_i] + 1
            cm = msk[w - w_i] | bit
            if cv > val[w] or (cv == val[w] and (cc, cm) < (cnt[w], msk[w])):
                val[w], cnt[w], msk[w] = cv, cc, cm
    return msk[budget]


def _require_linear(game: MsbGame):
    if not game.benefit.is_linear():
        raise NotLinearError("the shared benefit has a term with more than one player")


def _standalone(game: MsbGame, i: int, gamma: float, cfg: SolveConfig) -> tuple[float, float]:
    a = game.shares[i] * gamma
    e = float(best_response_batch(game.contributions[i], game.costs[i], 1.0, a, cfg, True)[0])
    return float(game.contributions[i].value(e, 1.0)), e


def standalone_best_contribution(game: MsbGame, i: int, cfg: SolveConfig = DEFAULT_CONFIG) -> tuple[float, float]:
    """``(s_star, e_star)`` for player ``i`` of a linear game, GenAI on."""
    _require_linear(game)
    if not 0 <= i < game.n:
        raise IndexError(f"player index {i} out of range for n={game.n}")
    return _standalone(game, i, float(game.benefit.singleton_coeffs()[i]), cfg)


def _fixed_result(game: MsbGame, mask: int, efforts: np.ndarray, cfg: SolveConfig, sweeps: int = 0) -> EquilibriumResult:
    """Wrap an effort profile known to be an equilibrium as a result."""
    member = member_matrix(np.array([mask]), game.n)
    contrib = game.contribution_matrix(efforts[None, :], np.ones(game.n), member)
    sol = BatchSolution(np.array([mask]), np.ones(game.n), efforts[None, :].copy(), contrib,
                        np.array([sweeps]), np.array([True]), np.atleast_1d(game.benefit.evaluate(contrib)))
    return result_from_row(game, sol, 0, cfg)


def fcop_optimal(game: MsbGame, fcfg: FcopConfig | float, cfg: SolveConfig = DEFAULT_CONFIG) -> CoalitionSolution:
    """Optimal coalition of a linear game: one knapsack per budget ``k*epsilon``."""
    _require_linear(game)
    if not isinstance(fcfg, FcopConfig):
        fcfg = FcopConfig.from_game(game, fcfg)
    gamma = game.benefit.singleton_coeffs()
    base = game.benefit.constant()
    gain = np.zeros(game.n)
    e_star = np.zeros(game.n)
    for i in range(game.n):
        s_star, e_star[i] = _standalone(game, i, float(gamma[i]), cfg)
        s0 = float(game.genai_only[i])
        base += gamma[i] * s0
        gain[i] = gamma[i] * (s_star - s0)

    scores, masks = [], []
    for k in range(fcfg.max_units + 1):
        c_k = knapsack_select(fcfg.share_units, gain, k)
        picked = sum(gain[i] for i in range(game.n) if c_k >> i & 1)
        scores.append((1.0 - k * fcfg.epsilon) * (base + picked))
        masks.append(c_k)
    r = _pick_best(np.array(scores), np.array(masks))
    mask = masks[r]
    efforts = np.where(member_matrix(np.array([mask]), game.n)[0], e_star, 0.0)
    eq = _fixed_result(game, mask, efforts, cfg)
    return CoalitionSolution(mask, eq, eq.principal_utility, SolverMethod.FCOP)


def _split_benefit(game: MsbGame, nprime: int):
    """Split F into terms inside ``nprime`` and singletons outside; raise if impossible."""
    coupled, linear = [], np.zeros(game.n)
    for mask, coeff in game.benefit.terms:
        if mask & ~nprime == 0:
            coupled.append((mask, coeff))
        elif popcount(mask) == 1:
            linear[mask.bit_length() - 1] = coeff
        else:
            raise NotDecomposableError(
                f"benefit term over mask {mask:b} mixes players inside and outside the coupled block")
    return MultilinearBenefit(tuple(coupled), game.n), linear


def almost_linear_optimal(game: MsbGame, nprime: CoalitionLike, fcfg: FcopConfig | float,
                          cfg: SolveConfig = DEFAULT_CONFIG) -> CoalitionSolution:
    """Exhaustive over the coupled block ``nprime``, knapsack over the linear players."""
    nprime = as_mask(nprime)
    if nprime >> game.n:
        raise InstanceError(f"nprime mask {nprime} exceeds n={game.n}")
    if popcount(nprime) > ALMOST_LINEAR_CAP:
        raise CapExceededError(f"coupled block is capped at {ALMOST_LINEAR_CAP} players")
    if not isinstance(fcfg, FcopConfig):
        fcfg = FcopConfig.from_game(game, fcfg)
    coupled, gamma = _split_benefit(game, nprime)

    inner = [i for i in range(game.n) if nprime >> i & 1]
    outer = [i for i in range(game.n) if not nprime >> i & 1]
    base = 0.0
    e_star = np.zeros(game.n)
    gain = []
    for i in outer:
        s_star, e_star[i] = _standalone(game, i, float(gamma[i]), cfg)
        s0 = float(game.genai_only[i])
        base += gamma[i] * s0
        gain.append(gamma[i] * (s_star - s0))
    weights = [fcfg.share_units[i] for i in outer]
    picks = {}

    def linear_pick(budget: int) -> tuple[int, float]:
        if budget not in picks:
            local = knapsack_select(weights, gain, budget)
            mask = sum(1 << outer[j] for j in range(len(outer)) if local >> j & 1)
            picks[budget] = (mask, sum(gain[j] for j in range(len(outer)) if local >> j & 1))
        return picks[budget]

    # every subset of the coupled block, embedded as a full-game mask
    subsets = np.array([sum(1 << inner[j] for j in range(len(inner)) if s >> j & 1)
                        for s in range(1 << len(inner))], dtype=np.int64)
    sol = solve_coalitions(game, subsets, "all", cfg)
    coupled_f = np.atleast_1d(coupled.evaluate(sol.contributions))

    scores, masks, rows = [], [], []
    for r, s_mask in enumerate(subsets):
        s_mask = int(s_mask)
        k_s = sum(fcfg.share_units[i] for i in inner if s_mask >> i & 1)
        for k in range(k_s, fcfg.max_units + 1):
            l_mask, l_gain = linear_pick(k - k_s)
            scores.append((1.0 - k * fcfg.epsilon) * (coupled_f[r] + base + l_gain))
            masks.append(s_mask | l_mask)
            rows.append(r)
    best = _pick_best(np.array(scores), np.array(masks))
    mask, r = masks[best], rows[best]
    efforts = sol.efforts[r].copy()
    for i in outer:
        efforts[i] = e_star[i] if mask >> i & 1 else 0.0
    eq = _fixed_result(game, mask, efforts, cfg, int(sol.sweeps_used[r]))
    eq = dataclasses.replace(eq, converged=bool(sol.converged[r]))
    return CoalitionSolution(mask, eq, eq.principal_utility, SolverMethod.ALMOST_LINEAR,
                             int((~sol.converged).sum()))


# ---------------------------------------------------------------------------
# Clique reduction
# ---------------------------------------------------------------------------

def _check_graph(n_vertices: int, edges) -> list[tuple[int, int]]:
    seen = set()
    out = []
    for e in edges:
        if len(e) != 2:
            raise InstanceError(f"edge {e!r} must have two endpoints")
        u, v = int(e[0]), int(e[1])
        if not (0 <= u < n_vertices and 0 <= v < n_vertices):
            raise InstanceError(f"edge ({u}, {v}) has an endpoint outside 0..{n_vertices - 1}")
        if u == v:
            raise InstanceError(f"self-loop at vertex {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise InstanceError(f"duplicate edge {key}")
        seen.add(key)
        out.append(key)
    return out


def clique_share(k: int) -> float:
    return (2 * k - 1) / (k * (3 * k - 2))


def reduction_value(size: int, k: int) -> float:
    """Principal utility of a clique of ``size`` players in the size-``k`` reduction instance."""
    return (1.0 - size * clique_share(k)) * size * (size - 1) / 2.0


def reduction_target(k: int) -> float:
    """Largest Principal utility attainable in the reduction instance, reached only by a ``k``-clique."""
    return k * (k - 1) ** 2 / (6 * k - 4)


def build_clique_instance(n_vertices: int, edges, k: int) -> MsbGame:
    """Game whose optimal Principal utility equals ``reduction_target(k)`` iff the graph has a ``k``-clique.

    Vertices are 0-based. Every player is costless with an all-or-nothing
    contribution; each edge adds the product of its endpoints' contributions.
    """
    edges = _check_graph(n_vertices, edges)
    if not 2 <= k <= max(n_vertices, 2):
        raise InstanceError(f"k must lie in 2..{n_vertices}, got {k}")
    if n_vertices < 1:
        raise InstanceError("the graph needs at least one vertex")
    theta = clique_share(k)
    benefit = MultilinearBenefit(tuple(((1 << u) | (1 << v), 1.0) for u, v in edges), n_vertices)
    return MsbGame(
        n=n_vertices,
        shares=(theta,) * n_vertices,
        contributions=(Indicator(),) * n_vertices,
        costs=(ZeroCost(),) * n_vertices,
        benefit=benefit,
        name=f"clique_reduction_k{k}",
    )


@dataclass(frozen=True)
class CliqueVerdict:
    has_clique: bool
    w_star: float
    w_max: float
    coalition: int


def clique_reduction(n_vertices: int, edges, k: int, cfg: SolveConfig = DEFAULT_CONFIG) -> CliqueVerdict:
    if n_vertices > BRUTE_FORCE_CAP:
        raise CapExceededError(f"clique decision is capped at {BRUTE_FORCE_CAP} vertices")
    game = build_clique_instance(n_vertices, edges, k)
    sol = brute_force_optimal(game, cfg)
    target = reduction_target(k)
    return CliqueVerdict(abs(sol.principal_utility - target) <= 1e-9, sol.principal_utility, target, sol.coalition)


def clique_decision(n_vertices: int, edges, k: int, cfg: SolveConfig = DEFAULT_CONFIG) -> bool:
    """Decide whether the graph has a clique of size ``k`` by solving the reduction instance."""
    return clique_reduction(n_vertices, edges, k, cfg).has_clique
