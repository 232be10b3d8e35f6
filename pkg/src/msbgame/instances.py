"""Small hand-built games with known equilibria, used as fixtures and demos.

Player indices in the comments are 1-based to match the JSON files.
"""
from __future__ import annotations

from .core import (
    Affine,
    LinearCost,
    LogCost,
    MsbGame,
    MultilinearBenefit,
    PowerForm,
    QuadraticCost,
    SqrtCost,
    ZeroCost,
)


def running_example() -> MsbGame:
    """Two players, ``F = 8*s1*s2``, player 2 gains ``0.2`` from GenAI.

    With GenAI switched on, player 2 stops exerting effort.
    """
    return MsbGame(
        n=2,
        shares=(0.3, 0.3),
        contributions=(PowerForm(1.0, 0.0, 0.5), PowerForm(1.0, 0.2, 0.5)),
        costs=(LogCost(1.0), LogCost(3.0)),
        benefit=MultilinearBenefit.from_player_sets([((0, 1), 8.0)], 2),
        name="running_example",
    )


def effort_collapse(eps: float) -> MsbGame:
    """Player 2's GenAI gain is only ``eps`` yet it drives their effort from 1 to 0.

    The shared benefit ratio between the no-GenAI and all-GenAI equilibria
    of the full coalition is ``1/sqrt(eps)``.
    """
    return MsbGame(
        n=2,
        shares=(0.25, 0.25),
        contributions=(Affine(1.0), PowerForm(1.0, eps, 0.5)),
        costs=(ZeroCost(), SqrtCost(1.0)),
        benefit=MultilinearBenefit.from_player_sets([((0, 1), 4.0)], 2),
        name=f"effort_collapse_eps{eps:g}",
    )


def unstable_optimum() -> MsbGame:
    """The optimal coalition is the full one, but dropping player 2 looks profitable at fixed efforts."""
    return MsbGame(
        n=2,
        shares=(0.4, 0.4),
        contributions=(Affine(2.0), PowerForm(1.0, 0.2, 0.5)),
        costs=(SqrtCost(1.0), LinearCost(1.8)),
        benefit=MultilinearBenefit.from_player_sets([((0, 1), 2.5)], 2),
        name="unstable_optimum",
    )


def low_contributor_retention(eps: float) -> MsbGame:
    """Player 2 adds only ``eps`` over GenAI but keeping them keeps player 1 working.

    ``eps`` is capped at 0.9 as in the construction this mirrors.
    """
    eps = min(eps, 0.9)
    return MsbGame(
        n=2,
        shares=(0.25, 0.25),
        contributions=(Affine(1.0), Affine(1.0, genai_gain=1.0 - eps / 2.0)),
        costs=(LinearCost(1.0), QuadraticCost(eps)),
        benefit=MultilinearBenefit.from_player_sets([((0, 1), 4.0)], 2),
        name=f"retention_eps{eps:g}",
    )


def complete_graph_edges(k: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(k) for j in range(i + 1, k)]
