"""Game definitions and pure evaluation of contributions, costs, benefit and utilities.

Players are indexed from 0 inside the Python API. Coalitions are bitmasks in
which bit ``i`` stands for player ``i``; the JSON format and the command line
use 1-based player labels instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DomainError, InstanceError

MAX_PLAYERS = 63


# ---------------------------------------------------------------------------
# Coalitions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Coalition:
    """A subset of the ``n`` players stored as a bitmask."""

    mask: int
    n: int

    def __post_init__(self):
        if not 0 <= self.n <= MAX_PLAYERS:
            raise InstanceError(f"coalitions support at most {MAX_PLAYERS} players, got {self.n}")
        if self.mask < 0 or self.mask >> self.n:
            raise InstanceError(f"mask {self.mask} has bits outside {self.n} players")

    @classmethod
    def from_players(cls, players: Iterable[int], n: int) -> "Coalition":
        mask = 0
        for i in players:
            if not 0 <= i < n:
                raise InstanceError(f"player index {i} out of range for n={n}")
            mask |= 1 << i
        return cls(mask, n)

    @classmethod
    def full(cls, n: int) -> "Coalition":
        return cls((1 << n) - 1, n)

    @classmethod
    def empty(cls, n: int) -> "Coalition":
        return cls(0, n)

    @property
    def players(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n) if self.mask >> i & 1)

    @property
    def labels(self) -> tuple[int, ...]:
        """1-based player labels."""
        return tuple(i + 1 for i in self.players)

    def __contains__(self, i: int) -> bool:
        return bool(self.mask >> i & 1)

    def __iter__(self):
        return iter(self.players)

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def without(self, i: int) -> "Coalition":
        return Coalition(self.mask & ~(1 << i), self.n)

    def issubset(self, other: "Coalition | int") -> bool:
        return self.mask & ~as_mask(other) == 0

    def __str__(self) -> str:
        return "{" + ",".join(map(str, self.labels)) + "}"


CoalitionLike = Union[Coalition, int]


def as_mask(c: CoalitionLike) -> int:
    return c.mask if isinstance(c, Coalition) else int(c)


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def member_matrix(masks: np.ndarray, n: int) -> np.ndarray:
    """Boolean ``(len(masks), n)`` membership table for an array of bitmasks."""
    masks = np.asarray(masks, dtype=np.int64)
    return ((masks[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(bool)


# ---------------------------------------------------------------------------
# Contribution functions
# ---------------------------------------------------------------------------

def _check_nonneg(name: str, value: float):
    if not (math.isfinite(value) and value >= 0):
        raise InstanceError(f"{name} must be a finite nonnegative number, got {value!r}")


@dataclass(frozen=True)
class PowerForm:
    """``s(e, g) = (alpha*e + beta*g) ** exponent``."""

    alpha: float
    beta: float
    exponent: float = 0.5
    kind = "power"

    def __post_init__(self):
        _check_nonneg("alpha", self.alpha)
        _check_nonneg("beta", self.beta)
        if not (0 < self.exponent <= 1):
            raise InstanceError(f"exponent must lie in (0, 1], got {self.exponent!r}")

    def value(self, e, g):
        u = self.alpha * e + self.beta * g
        if self.exponent == 0.5:
            return np.sqrt(u)
        if self.exponent == 1:
            return u
        return np.power(u, self.exponent)

    def derivative(self, e, g):
        """``ds/de``; infinite at ``u = 0`` when the exponent is below 1."""
        if self.exponent == 1:
            return self.alpha + 0.0 * np.asarray(e, dtype=float)
        u = self.alpha * np.asarray(e, dtype=float) + self.beta * g
        with np.errstate(divide="ignore"):
            return self.exponent * self.alpha * np.power(u, self.exponent - 1.0)


@dataclass(frozen=True)
class Affine:
    """``s(e, g) = slope*e + genai_gain*g + offset``."""

    slope: float
    genai_gain: float = 0.0
    offset: float = 0.0
    kind = "affine"

    def __post_init__(self):
        _check_nonneg("slope", self.slope)
        _check_nonneg("genai_gain", self.genai_gain)
        _check_nonneg("offset", self.offset)

    def value(self, e, g):
        return self.slope * e + self.genai_gain * g + self.offset

    def derivative(self, e, g):
        return self.slope + 0.0 * np.asarray(e, dtype=float)


@dataclass(frozen=True)
class Indicator:
    """``s(e, g) = 1`` when ``e == 1`` and ``0`` otherwise."""

    kind = "indicator"

    def value(self, e, g):
        out = np.equal(e, 1.0) * 1.0
        return out + 0.0 * np.asarray(g)


ContributionSpec = Union[PowerForm, Affine, Indicator]


# ---------------------------------------------------------------------------
# Cost functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZeroCost:
    kind = "zero"

    def value(self, e):
        return 0.0 * np.asarray(e, dtype=float)

    def derivative(self, e):
        return 0.0 * np.asarray(e, dtype=float)


@dataclass(frozen=True)
class LinearCost:
    """``c(e) = delta*e``."""

    delta: float
    kind = "linear"

    def __post_init__(self):
        _check_nonneg("delta", self.delta)

    def value(self, e):
        return self.delta * np.asarray(e, dtype=float)

    def derivative(self, e):
        return self.delta + 0.0 * np.asarray(e, dtype=float)


@dataclass(frozen=True)
class LogCost:
    """``c(e) = scale*ln(1 + e)``."""

    scale: float
    kind = "log"

    def __post_init__(self):
        _check_nonneg("scale", self.scale)

    def value(self, e):
        return self.scale * np.log1p(e)

    def derivative(self, e):
        return self.scale / (1.0 + np.asarray(e, dtype=float))


@dataclass(frozen=True)
class SqrtCost:
    """``c(e) = scale*sqrt(e)``."""

    scale: float
    kind = "sqrt"

    def __post_init__(self):
        _check_nonneg("scale", self.scale)

    def value(self, e):
        return self.scale * np.sqrt(e)

    def derivative(self, e):
        with np.errstate(divide="ignore"):
            return self.scale / (2.0 * np.sqrt(np.asarray(e, dtype=float)))


@dataclass(frozen=True)
class QuadraticCost:
    """``c(e) = e**2 / (2*half_inv_scale)``."""

    half_inv_scale: float
    kind = "quadratic"

    def __post_init__(self):
        if not (math.isfinite(self.half_inv_scale) and self.half_inv_scale > 0):
            raise InstanceError(f"half_inv_scale must be positive, got {self.half_inv_scale!r}")

    def value(self, e):
        e = np.asarray(e, dtype=float)
        return e * e / (2.0 * self.half_inv_scale)

    def derivative(self, e):
        return np.asarray(e, dtype=float) / self.half_inv_scale


CostSpec = Union[ZeroCost, LinearCost, LogCost, SqrtCost, QuadraticCost]


def _check_effort(e):
    arr = np.asarray(e, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > 1):
        raise DomainError(f"effort must lie in [0, 1], got {e!r}")


def eval_contribution(spec: ContributionSpec, e: float, g: bool | int) -> float:
    _check_effort(e)
    return float(spec.value(float(e), 1.0 if g else 0.0))


def eval_cost(spec: CostSpec, e: float) -> float:
    _check_effort(e)
    return float(spec.value(float(e)))


# ---------------------------------------------------------------------------
# Shared benefit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MultilinearBenefit:
    """``F(s) = sum_X coeff_X * prod_{j in X} s_j`` with nonnegative coefficients.

    ``terms`` holds ``(mask, coeff)`` pairs; the empty mask is a constant term.
    """

    terms: tuple[tuple[int, float], ...]
    num_players: int

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((int(m), float(c)) for m, c in self.terms))
        seen = set()
        for mask, coeff in self.terms:
            if mask < 0 or mask >> self.num_players:
                raise InstanceError(f"benefit term {mask:b} references players outside 1..{self.num_players}")
            if mask in seen:
                raise InstanceError(f"duplicate benefit term over players {Coalition(mask, self.num_players)}")
            seen.add(mask)
            _check_nonneg("benefit coefficient", coeff)

    @classmethod
    def from_player_sets(cls, terms: Iterable[tuple[Iterable[int], float]], num_players: int):
        out = []
        for players, coeff in terms:
            out.append((Coalition.from_players(players, num_players).mask, coeff))
        return cls(tuple(out), num_players)

    @classmethod
    def product(cls, n: int, coeff: float = 1.0):
        return cls((((1 << n) - 1, coeff),), n)

    @classmethod
    def linear(cls, gammas: Sequence[float]):
        return cls(tuple((1 << i, g) for i, g in enumerate(gammas)), len(gammas))

    @cached_property
    def _members(self) -> tuple[tuple[tuple[int, ...], float], ...]:
        return tuple(
            (tuple(j for j in range(self.num_players) if m >> j & 1), c) for m, c in self.terms
        )

    def evaluate(self, s) -> np.ndarray | float:
        """Evaluate F on contributions ``s`` of shape ``(..., n)``."""
        s = np.asarray(s, dtype=float)
        total = np.zeros(s.shape[:-1])
        for players, coeff in self._members:
            prod = np.full(s.shape[:-1], coeff)
            for j in players:
                prod = prod * s[..., j]
            total = total + prod
        return total if total.ndim else float(total)

    def linearize(self, i: int, s):
        """Return ``(A, B)`` with ``F(s) = A*s_i + B``; entry ``i`` of ``s`` is ignored."""
        s = np.asarray(s, dtype=float)
        a = np.zeros(s.shape[:-1])
        b = np.zeros(s.shape[:-1])
        for players, coeff in self._members:
            prod = np.full(s.shape[:-1], coeff)
            has_i = False
            for j in players:
                if j == i:
                    has_i = True
                else:
                    prod = prod * s[..., j]
            if has_i:
                a = a + prod
            else:
                b = b + prod
        if a.ndim == 0:
            return float(a), float(b)
        return a, b

    def is_linear(self) -> bool:
        return all(popcount(m) <= 1 for m, _ in self.terms)

    def singleton_coeffs(self) -> np.ndarray:
        gam = np.zeros(self.num_players)
        for m, c in self.terms:
            if popcount(m) == 1:
                gam[m.bit_length() - 1] = c
        return gam

    def constant(self) -> float:
        return sum(c for m, c in self.terms if m == 0)


# ---------------------------------------------------------------------------
# Game
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MsbGame:
    n: int
    shares: tuple[float, ...]
    contributions: tuple[ContributionSpec, ...]
    costs: tuple[CostSpec, ...]
    benefit: MultilinearBenefit
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "shares", tuple(float(x) for x in self.shares))
        object.__setattr__(self, "contributions", tuple(self.contributions))
        object.__setattr__(self, "costs", tuple(self.costs))
        if not 1 <= self.n <= MAX_PLAYERS:
            raise InstanceError(f"n must lie in 1..{MAX_PLAYERS}, got {self.n}")
        for label, seq in (("shares", self.shares), ("contributions", self.contributions), ("costs", self.costs)):
            if len(seq) != self.n:
                raise InstanceError(f"{label} has length {len(seq)}, expected n={self.n}")
        if self.benefit.num_players != self.n:
            raise InstanceError(f"benefit.num_players={self.benefit.num_players} differs from n={self.n}")
        for i, th in enumerate(self.shares):
            if not (math.isfinite(th) and 0 <= th <= 1):
                raise InstanceError(f"shares[{i}] must lie in [0, 1], got {th!r}")

    @cached_property
    def theta(self) -> np.ndarray:
        out = np.array(self.shares)
        out.setflags(write=False)
        return out

    @cached_property
    def genai_only(self) -> np.ndarray:
        """Contribution of every player when replaced by GenAI, ``s_i(0, 1)``."""
        out = np.array([float(s.value(0.0, 1.0)) for s in self.contributions])
        out.setflags(write=False)
        return out

    def full(self) -> Coalition:
        return Coalition.full(self.n)

    def coalition(self, players: Iterable[int]) -> Coalition:
        return Coalition.from_players(players, self.n)

    def contribution_matrix(self, efforts: np.ndarray, genai, member: np.ndarray) -> np.ndarray:
        """Coalition-dependent contributions for rows of effort profiles.

        ``efforts`` and ``member`` have shape ``(m, n)``; ``genai`` broadcasts
        against them. Non-members contribute ``s_i(0, 1)``.
        """
        efforts = np.asarray(efforts, dtype=float)
        g = np.broadcast_to(np.asarray(genai, dtype=float), efforts.shape)
        out = np.empty(efforts.shape)
        for i, spec in enumerate(self.contributions):
            own = spec.value(efforts[..., i], g[..., i])
            out[..., i] = np.where(member[..., i], own, self.genai_only[i])
        return out


def _check_player(game: MsbGame, i: int):
    if not 0 <= i < game.n:
        raise IndexError(f"player index {i} out of range for n={game.n}")


def _profiles(game: MsbGame, e, g):
    e = np.asarray(e, dtype=float)
    g = np.asarray(g, dtype=float)
    if e.shape != (game.n,) or g.shape != (game.n,):
        raise DomainError(f"profiles must have length {game.n}")
    _check_effort(e)
    return e, g


def coalition_contribution(game: MsbGame, i: int, e_i: float, g_i: bool, c: CoalitionLike) -> float:
    _check_player(game, i)
    _check_effort(e_i)
    if as_mask(c) >> i & 1:
        return float(game.contributions[i].value(float(e_i), 1.0 if g_i else 0.0))
    return float(game.genai_only[i])


def coalition_contributions(game: MsbGame, e, g, c: CoalitionLike) -> np.ndarray:
    e, g = _profiles(game, e, g)
    member = member_matrix(np.array([as_mask(c)]), game.n)[0]
    return game.contribution_matrix(e, g, member)


def shared_benefit(game: MsbGame, e, g, c: CoalitionLike) -> float:
    return float(game.benefit.evaluate(coalition_contributions(game, e, g, c)))


def player_utility(game: MsbGame, i: int, e, g, c: CoalitionLike) -> float:
    _check_player(game, i)
    e, g = _profiles(game, e, g)
    cost = float(game.costs[i].value(e[i]))
    if as_mask(c) >> i & 1:
        return game.shares[i] * shared_benefit(game, e, g, c) - cost
    return -cost


def principal_share(game: MsbGame, c: CoalitionLike) -> float:
    mask = as_mask(c)
    return 1.0 - sum(th for i, th in enumerate(game.shares) if mask >> i & 1)


def principal_utility(game: MsbGame, e, g, c: CoalitionLike) -> float:
    return principal_share(game, c) * shared_benefit(game, e, g, c)


def linearize_in_player(benefit: MultilinearBenefit, i: int, s_others) -> tuple[float, float]:
    """Coefficients ``(A, B)`` such that ``F = A*s_i + B`` for fixed ``s_others``.

    ``s_others`` is either a full length-``n`` vector (entry ``i`` ignored) or
    the ``n - 1`` contributions of the other players in index order.
    """
    s = np.asarray(s_others, dtype=float)
    if s.shape == (benefit.num_players - 1,):
        s = np.insert(s, i, 0.0)
    if s.shape != (benefit.num_players,):
        raise DomainError(f"expected {benefit.num_players - 1} or {benefit.num_players} contributions")
    return benefit.linearize(i, s)
