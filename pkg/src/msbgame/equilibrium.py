"""Best responses and dominant equilibria of effort subgames.

Every effort subgame is supermodular, so round-robin best responses started
from the top of the lattice (full effort for every member) decrease
monotonically to the greatest pure equilibrium. Starting from the bottom with
least-maximizer tie-breaking gives the least equilibrium instead.

The solver works on a batch of coalitions at once: each row of the effort
matrix is an independent subgame, and all rows are updated with the same
vectorized best-response code. A single-coalition solve is a batch of one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .core import (
    Affine,
    CoalitionLike,
    ContributionSpec,
    CostSpec,
    Indicator,
    LinearCost,
    LogCost,
    MsbGame,
    PowerForm,
    QuadraticCost,
    SqrtCost,
    ZeroCost,
    as_mask,
    member_matrix,
)
from .errors import DomainError, MonotonicityError

# Largest move against the iteration direction tolerated as rounding noise.
MONOTONE_SLACK = 1e-9

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SolveConfig:
    tol: float = 1e-8
    max_sweeps: int = 10_000
    tie_tol: float = 1e-10
    grid_points: int = 1025

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be at least 1")
        if not self.tie_tol > 0:
            raise ValueError("tie_tol must be positive")
        if self.grid_points < 3:
            raise ValueError("grid_points must be at least 3")

    def to_dict(self) -> dict:
        return {"tol": self.tol, "max_sweeps": self.max_sweeps, "tie_tol": self.tie_tol,
                "grid_points": self.grid_points}


DEFAULT_CONFIG = SolveConfig()

GenAiLike = Union[str, Sequence[bool], np.ndarray]


def genai_profile(game: MsbGame, g: GenAiLike) -> np.ndarray:
    """Normalize ``"all"``, ``"none"``, a bit string or a boolean sequence."""
    if isinstance(g, str):
        if g == "all":
            return np.ones(game.n)
        if g == "none":
            return np.zeros(game.n)
        if len(g) == game.n and set(g) <= {"0", "1"}:
            return np.array([float(ch == "1") for ch in g])
        raise DomainError(f"GenAI profile must be 'all', 'none' or a {game.n}-bit string, got {g!r}")
    arr = np.asarray(g, dtype=float)
    if arr.shape != (game.n,) or not np.all((arr == 0) | (arr == 1)):
        raise DomainError(f"GenAI profile must be {game.n} booleans")
    return arr


# ---------------------------------------------------------------------------
# One-dimensional maximization of a*s(e, g) - c(e)
# ---------------------------------------------------------------------------

def _stationary_points(contrib: ContributionSpec, cost: CostSpec, g: float, a: np.ndarray):
    """Closed-form interior critical points, or ``None`` when no closed form is known.

    Returns a list of arrays shaped like ``a``; entries may be NaN or fall
    outside [0, 1] and are filtered by the caller.
    """
    if isinstance(contrib, Indicator) or isinstance(cost, ZeroCost):
        return []
    if isinstance(cost, LinearCost) and cost.delta == 0:
        return []
    if isinstance(cost, (LogCost, SqrtCost)) and cost.scale == 0:
        return []

    if isinstance(contrib, Affine) or (isinstance(contrib, PowerForm) and contrib.exponent == 1):
        slope = contrib.slope if isinstance(contrib, Affine) else contrib.alpha
        if isinstance(cost, QuadraticCost):
            return [a * slope * cost.half_inv_scale]
        # linear contribution minus a linear or concave cost is convex
        return []

    if not isinstance(contrib, PowerForm):
        return None
    alpha, p = contrib.alpha, contrib.exponent
    beta = contrib.beta * g
    if alpha == 0:
        return []
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if isinstance(cost, LinearCost):
            u = np.power(a * p * alpha / cost.delta, 1.0 / (1.0 - p))
            return [(u - beta) / alpha]
        if p == 0.5 and isinstance(cost, LogCost):
            # a*alpha*(1+e) = 2k*sqrt(alpha*e + beta), squared
            k2 = cost.scale ** 2
            q = (a * alpha) ** 2
            b1 = 2.0 * q - 4.0 * k2 * alpha
            b0 = q - 4.0 * k2 * beta
            disc = b1 * b1 - 4.0 * q * b0
            root = np.sqrt(np.where(disc >= 0, disc, np.nan))
            # cancellation-free pair: t/q and b0/t
            t = -0.5 * (b1 + np.copysign(root, b1))
            q = np.where(q > 0, q, np.nan)
            t = np.where(t != 0, t, np.nan)
            return [t / q, b0 / t]
        if p == 0.5 and isinstance(cost, SqrtCost):
            # a*alpha*sqrt(e) = k*sqrt(alpha*e + beta), squared
            k2 = cost.scale ** 2
            denom = (a * alpha) ** 2 - k2 * alpha
            return [np.where(denom > 0, k2 * beta / denom, np.nan)]
    return None


def golden_section_max(f, lo: float, hi: float, xtol: float = 1e-12, max_iter: int = 200) -> float:
    """Maximizer of a unimodal ``f`` on ``[lo, hi]`` by golden-section search."""
    c = hi - GOLDEN * (hi - lo)
    d = lo + GOLDEN * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if hi - lo <= xtol:
            break
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - GOLDEN * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + GOLDEN * (hi - lo)
            fd = f(d)
    return c if fc >= fd else d


BISECT_STEPS = 64


def _bisect_peaks(contrib, cost, g: float, a: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Zeros of ``a*s'(e) - c'(e)`` in ``[lo, hi]``, assuming the sign goes from + to -.

    A fixed number of halvings takes grid-sized brackets far below float
    resolution, so peaks come out accurate to the last bit rather than to the
    square root of machine precision that a value-based search reaches.
    """
    lo0, hi0 = lo, hi
    for _ in range(BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        with np.errstate(invalid="ignore"):
            rising = a * contrib.derivative(mid, g) - cost.derivative(mid) > 0
        lo = np.where(rising, mid, lo)
        hi = np.where(rising, hi, mid)
    # a bracket that never left an end means the slope kept one sign
    return np.where(lo == lo0, lo0, np.where(hi == hi0, hi0, 0.5 * (lo + hi)))


def _grid_candidates(contrib, cost, g: float, a: np.ndarray, cfg: SolveConfig) -> list[np.ndarray]:
    """Candidate columns from a grid scan: every grid-local maximum refined to
    full precision, plus the first and last near-best grid points when the
    forms have no derivative."""
    m = a.shape[0]
    x = np.linspace(0.0, 1.0, cfg.grid_points)
    v = a[:, None] * contrib.value(x, g)[None, :] - cost.value(x)[None, :]
    smooth = hasattr(contrib, "derivative") and hasattr(cost, "derivative")
    cols = []
    if not smooth:
        # without derivatives a flat top is only seen through the grid itself
        near = v >= v.max(axis=1, keepdims=True) - cfg.tie_tol
        cols += [x[np.argmax(near, axis=1)], x[len(x) - 1 - np.argmax(near[:, ::-1], axis=1)]]

    # local maxima, endpoints included: a peak can sit between 0 and the first
    # grid point when s has infinite slope at 0
    up = np.concatenate([np.ones((m, 1), bool), v[:, 1:] > v[:, :-1]], axis=1)
    down = np.concatenate([v[:, :-1] >= v[:, 1:], np.ones((m, 1), bool)], axis=1)
    rows, ks = np.nonzero(up & down)
    if rows.size == 0:
        return cols
    lo = x[np.maximum(ks - 1, 0)]
    hi = x[np.minimum(ks + 1, len(x) - 1)]
    if smooth:
        peaks = _bisect_peaks(contrib, cost, g, a[rows], lo, hi)
    else:
        peaks = np.array([
            golden_section_max(lambda t, ai=float(a[r]): float(ai * contrib.value(t, g) - cost.value(t)), l, h)
            for r, l, h in zip(rows, lo, hi)])
    rank = np.zeros(rows.size, dtype=np.int64)
    for j in range(1, rows.size):
        rank[j] = rank[j - 1] + 1 if rows[j] == rows[j - 1] else 0
    pad = np.full((m, int(rank.max()) + 1), np.nan)
    pad[rows, rank] = peaks
    cols.extend(pad.T)
    return cols


def best_response_batch(contrib: ContributionSpec, cost: CostSpec, g: float, a,
                        cfg: SolveConfig = DEFAULT_CONFIG, greatest: bool = True) -> np.ndarray:
    """Greatest (or least) maximizer of ``a*s(e, g) - c(e)`` on [0, 1] for each entry of ``a``.

    Candidates are the endpoints, closed-form critical points where they are
    known, and otherwise grid local maxima refined by bisection on the
    derivative. Every candidate whose objective is within ``cfg.tie_tol`` of
    the best is a tie; ties resolve to the largest effort (smallest when
    ``greatest`` is false).
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    m = a.shape[0]
    cols = [np.zeros(m), np.ones(m)]
    if not isinstance(contrib, Indicator):
        stat = _stationary_points(contrib, cost, g, a)
        if stat is None:
            cols.extend(_grid_candidates(contrib, cost, g, a, cfg))
        else:
            for col in stat:
                col = np.where(np.isfinite(col), col, np.nan)
                cols.append(np.clip(col, 0.0, 1.0))
    cand = np.stack(cols, axis=1)
    valid = ~np.isnan(cand)
    safe = np.where(valid, cand, 0.0)
    vals = a[:, None] * contrib.value(safe, g) - cost.value(safe)
    vals = np.where(valid, vals, -np.inf)
    best = vals.max(axis=1)
    tied = vals >= best[:, None] - cfg.tie_tol
    if greatest:
        return np.where(tied, safe, -np.inf).max(axis=1)
    return np.where(tied, safe, np.inf).min(axis=1)


def best_response(game: MsbGame, i: int, c: CoalitionLike, g: GenAiLike, s_others,
                  cfg: SolveConfig = DEFAULT_CONFIG, greatest: bool = True) -> float:
    """Best effort of player ``i`` against the other players' contributions.

    ``s_others`` is a length-``n`` contribution vector (entry ``i`` ignored) or
    the ``n - 1`` contributions of the others. Players outside ``c`` earn no
    share, so their best response is 0.
    """
    from .core import linearize_in_player

    if not 0 <= i < game.n:
        raise IndexError(f"player index {i} out of range for n={game.n}")
    if not as_mask(c) >> i & 1:
        return 0.0
    gv = genai_profile(game, g)
    a_coef, _ = linearize_in_player(game.benefit, i, s_others)
    a = game.shares[i] * a_coef
    return float(best_response_batch(game.contributions[i], game.costs[i], gv[i], a, cfg, greatest)[0])


# ---------------------------------------------------------------------------
# Best-response dynamics
# ---------------------------------------------------------------------------

@dataclass
class BatchSolution:
    """Fixed points for many coalitions of one game."""

    masks: np.ndarray
    genai: np.ndarray
    efforts: np.ndarray
    contributions: np.ndarray
    sweeps_used: np.ndarray
    converged: np.ndarray
    shared_benefit: np.ndarray

    def principal_utility(self, game: MsbGame) -> np.ndarray:
        member = member_matrix(self.masks, game.n)
        return (1.0 - member.astype(float) @ game.theta) * self.shared_benefit


def _coefficient_plan(game: MsbGame):
    """For each player, the benefit terms containing them and their co-members."""
    plan = [[] for _ in range(game.n)]
    for players, coeff in game.benefit._members:
        for i in players:
            plan[i].append((coeff, tuple(j for j in players if j != i)))
    return plan


def solve_coalitions(game: MsbGame, masks, g: GenAiLike = "all", cfg: SolveConfig = DEFAULT_CONFIG,
                     greatest: bool = True, history: list | None = None) -> BatchSolution:
    """Run best-response dynamics for every coalition in ``masks``.

    Players are updated in ascending index order (Gauss-Seidel). A row stops
    once a full sweep changes no effort by more than ``cfg.tol``. When
    ``history`` is a list, a copy of the effort matrix is appended after each
    sweep.
    """
    masks = np.atleast_1d(np.asarray(masks, dtype=np.int64))
    n = game.n
    gv = genai_profile(game, g)
    member = member_matrix(masks, n)
    efforts = member.astype(float) if greatest else np.zeros(member.shape)
    contrib = game.contribution_matrix(efforts, gv, member)
    theta = game.theta
    plan = _coefficient_plan(game)

    m = masks.shape[0]
    sweeps = np.zeros(m, dtype=np.int64)
    converged = np.zeros(m, dtype=bool)
    active = np.arange(m)
    for sweep in range(1, cfg.max_sweeps + 1):
        if active.size == 0:
            break
        delta = np.zeros(active.size)
        sub_member = member[active]
        for i in range(n):
            loc = np.flatnonzero(sub_member[:, i])
            if loc.size == 0:
                continue
            rows = active[loc]
            s_rows = contrib[rows]
            coef = np.zeros(rows.size)
            for c_x, others in plan[i]:
                prod = np.full(rows.size, c_x)
                for j in others:
                    prod = prod * s_rows[:, j]
                coef = coef + prod
            new = best_response_batch(game.contributions[i], game.costs[i], gv[i], theta[i] * coef,
                                      cfg, greatest)
            old = efforts[rows, i]
            bad = new > old + MONOTONE_SLACK if greatest else new < old - MONOTONE_SLACK
            if bad.any():
                k = int(np.argmax(bad))
                raise MonotonicityError(
                    f"player {i} moved against the iteration direction in coalition mask {int(masks[rows[k]])} "
                    f"at sweep {sweep}: {float(old[k])!r} -> {float(new[k])!r}")
            # absorb round-off inside the slack so iterates stay monotone
            new = np.minimum(new, old) if greatest else np.maximum(new, old)
            delta[loc] = np.maximum(delta[loc], np.abs(new - old))
            efforts[rows, i] = new
            contrib[rows, i] = game.contributions[i].value(new, gv[i])
        sweeps[active] = sweep
        done = delta <= cfg.tol
        converged[active[done]] = True
        if history is not None:
            history.append(efforts.copy())
        active = active[~done]

    benefit = np.atleast_1d(game.benefit.evaluate(contrib))
    return BatchSolution(masks, gv, efforts, contrib, sweeps, converged, benefit)


# ---------------------------------------------------------------------------
# Single-coalition results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EquilibriumResult:
    efforts: tuple[float, ...]
    genai: tuple[bool, ...]
    coalition: int
    shared_benefit: float
    player_utilities: tuple[float, ...]
    principal_utility: float
    sweeps_used: int
    converged: bool
    max_residual: float

    def to_dict(self) -> dict:
        n = len(self.efforts)
        return {
            "coalition": self.coalition,
            "players": [i + 1 for i in range(n) if self.coalition >> i & 1],
            "efforts": list(self.efforts),
            "genai": [int(x) for x in self.genai],
            "shared_benefit": self.shared_benefit,
            "player_utilities": list(self.player_utilities),
            "principal_utility": self.principal_utility,
            "sweeps_used": self.sweeps_used,
            "converged": self.converged,
            "max_residual": self.max_residual,
        }


def grid_residual(game: MsbGame, mask: int, gv: np.ndarray, efforts: np.ndarray,
                  cfg: SolveConfig = DEFAULT_CONFIG) -> float:
    """Largest utility gain any single player could get by moving to a grid effort."""
    member = member_matrix(np.array([mask]), game.n)[0]
    s = game.contribution_matrix(efforts, gv, member)
    x = np.linspace(0.0, 1.0, cfg.grid_points)
    worst = 0.0
    for i in range(game.n):
        cost = game.costs[i]
        if member[i]:
            a_coef, _ = game.benefit.linearize(i, s)
            a = game.shares[i] * a_coef
            spec = game.contributions[i]
            current = a * s[i] - float(cost.value(efforts[i]))
            best = float(np.max(a * spec.value(x, gv[i]) - cost.value(x)))
        else:
            current = -float(cost.value(efforts[i]))
            best = float(np.max(-cost.value(x)))
        worst = max(worst, best - current)
    return worst


def result_from_row(game: MsbGame, sol: BatchSolution, row: int, cfg: SolveConfig = DEFAULT_CONFIG) -> EquilibriumResult:
    mask = int(sol.masks[row])
    e = sol.efforts[row].copy()
    f = float(sol.shared_benefit[row])
    utils = []
    for i in range(game.n):
        cost = float(game.costs[i].value(e[i]))
        utils.append((game.shares[i] * f if mask >> i & 1 else 0.0) - cost)
    share = 1.0 - sum(game.shares[i] for i in range(game.n) if mask >> i & 1)
    return EquilibriumResult(
        efforts=tuple(float(x) for x in e),
        genai=tuple(bool(x) for x in sol.genai),
        coalition=mask,
        shared_benefit=f,
        player_utilities=tuple(utils),
        principal_utility=share * f,
        sweeps_used=int(sol.sweeps_used[row]),
        converged=bool(sol.converged[row]),
        max_residual=grid_residual(game, mask, sol.genai, e, cfg),
    )


def dominant_equilibrium(game: MsbGame, c: CoalitionLike, g: GenAiLike = "all",
                         cfg: SolveConfig = DEFAULT_CONFIG) -> EquilibriumResult:
    """Greatest pure equilibrium of the effort subgame for coalition ``c``.

    Non-convergence within ``cfg.max_sweeps`` is reported through
    ``converged=False`` rather than raised.
    """
    sol = solve_coalitions(game, [as_mask(c)], g, cfg, greatest=True)
    return result_from_row(game, sol, 0, cfg)


def least_equilibrium(game: MsbGame, c: CoalitionLike, g: GenAiLike = "all",
                      cfg: SolveConfig = DEFAULT_CONFIG) -> EquilibriumResult:
    sol = solve_coalitions(game, [as_mask(c)], g, cfg, greatest=False)
    return result_from_row(game, sol, 0, cfg)


def price_of_generativity(game: MsbGame, c: CoalitionLike, cfg: SolveConfig = DEFAULT_CONFIG) -> float:
    """Ratio of shared benefit without GenAI to shared benefit with GenAI.

    Returns ``math.inf`` when only the denominator vanishes and 1 when both do.
    """
    without = dominant_equilibrium(game, c, "none", cfg).shared_benefit
    with_ai = dominant_equilibrium(game, c, "all", cfg).shared_benefit
    if with_ai == 0:
        return 1.0 if without == 0 else math.inf
    return without / with_ai
