"""JSON instance files and edge lists.

Players are numbered from 1 in files and from 0 in the Python API.
"""
from __future__ import annotations

import dataclasses
import json
from pathlib import Path

from .core import (
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
from .errors import InstanceError, MsbError

CONTRIBUTION_KINDS = {cls.kind: cls for cls in (PowerForm, Affine, Indicator)}
COST_KINDS = {cls.kind: cls for cls in (ZeroCost, LinearCost, LogCost, SqrtCost, QuadraticCost)}


def _spec_from_dict(obj, kinds: dict, where: str):
    if not isinstance(obj, dict):
        raise InstanceError(f"{where}: expected an object, got {type(obj).__name__}")
    kind = obj.get("kind")
    if kind not in kinds:
        raise InstanceError(f"{where}.kind: unknown kind {kind!r}, expected one of {sorted(kinds)}")
    cls = kinds[kind]
    fields = {f.name: f for f in dataclasses.fields(cls)}
    extra = set(obj) - set(fields) - {"kind"}
    if extra:
        raise InstanceError(f"{where}: unexpected field(s) {sorted(extra)} for kind {kind!r}")
    args = {}
    for name, f in fields.items():
        if name not in obj:
            if f.default is dataclasses.MISSING:
                raise InstanceError(f"{where}.{name}: missing")
            continue
        v = obj[name]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise InstanceError(f"{where}.{name}: expected a number, got {v!r}")
        args[name] = float(v)
    try:
        return cls(**args)
    except MsbError as exc:
        raise InstanceError(f"{where}: {exc}") from None


def _spec_to_dict(spec) -> dict:
    return {"kind": spec.kind, **dataclasses.asdict(spec)}


def _number_list(obj, key: str, n: int) -> list[float]:
    v = obj.get(key)
    if not isinstance(v, list):
        raise InstanceError(f"{key}: expected a list of {n} numbers")
    if len(v) != n:
        raise InstanceError(f"{key}: has length {len(v)}, expected n={n}")
    for i, x in enumerate(v):
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise InstanceError(f"{key}[{i}]: expected a number, got {x!r}")
    return [float(x) for x in v]


def game_from_dict(obj) -> MsbGame:
    if not isinstance(obj, dict):
        raise InstanceError("instance: expected a JSON object at the top level")
    n = obj.get("n")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise InstanceError(f"n: expected a positive integer, got {n!r}")
    shares = _number_list(obj, "shares", n)
    for i, th in enumerate(shares):
        if not 0 <= th <= 1:
            raise InstanceError(f"shares[{i}]: must lie in [0, 1], got {th!r}")
    for key in ("contributions", "costs"):
        if not isinstance(obj.get(key), list) or len(obj[key]) != n:
            raise InstanceError(f"{key}: expected a list of {n} objects")
    contributions = [_spec_from_dict(c, CONTRIBUTION_KINDS, f"contributions[{i}]")
                     for i, c in enumerate(obj["contributions"])]
    costs = [_spec_from_dict(c, COST_KINDS, f"costs[{i}]") for i, c in enumerate(obj["costs"])]

    benefit = obj.get("benefit")
    if not isinstance(benefit, dict) or not isinstance(benefit.get("terms"), list):
        raise InstanceError("benefit.terms: expected a list of {players, coeff} objects")
    terms = []
    seen = {}
    for t, term in enumerate(benefit["terms"]):
        where = f"benefit.terms[{t}]"
        if not isinstance(term, dict):
            raise InstanceError(f"{where}: expected an object")
        players, coeff = term.get("players"), term.get("coeff")
        if not isinstance(players, list) or any(isinstance(p, bool) or not isinstance(p, int) for p in players):
            raise InstanceError(f"{where}.players: expected a list of player numbers")
        bad = [p for p in players if not 1 <= p <= n]
        if bad:
            raise InstanceError(f"{where}.players: {bad} outside 1..{n}")
        if len(set(players)) != len(players):
            raise InstanceError(f"{where}.players: repeated player")
        if isinstance(coeff, bool) or not isinstance(coeff, (int, float)):
            raise InstanceError(f"{where}.coeff: expected a number, got {coeff!r}")
        if coeff < 0:
            raise InstanceError(f"{where}.coeff: must be nonnegative, got {coeff!r}")
        mask = sum(1 << (p - 1) for p in players)
        if mask in seen:
            raise InstanceError(f"{where}.players: duplicates benefit.terms[{seen[mask]}]")
        seen[mask] = t
        terms.append((mask, float(coeff)))
    name = obj.get("name", "")
    try:
        return MsbGame(n, shares, contributions, costs, MultilinearBenefit(tuple(terms), n), name=str(name))
    except MsbError as exc:
        raise InstanceError(f"instance: {exc}") from None


def game_to_dict(game: MsbGame) -> dict:
    out = {}
    if game.name:
        out["name"] = game.name
    out.update({
        "n": game.n,
        "shares": list(game.shares),
        "contributions": [_spec_to_dict(s) for s in game.contributions],
        "costs": [_spec_to_dict(c) for c in game.costs],
        "benefit": {"terms": [
            {"players": [j + 1 for j in range(game.n) if mask >> j & 1], "coeff": coeff}
            for mask, coeff in game.benefit.terms
        ]},
    })
    return out


def loads_game(text: str, source: str = "<string>") -> MsbGame:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    try:
        return game_from_dict(obj)
    except InstanceError as exc:
        raise InstanceError(f"{source}: {exc}") from None


def load_game(path) -> MsbGame:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InstanceError(f"{path}: {exc.strerror}") from None
    return loads_game(text, str(path))


def dump_game(game: MsbGame, path) -> None:
    Path(path).write_text(json.dumps(game_to_dict(game), indent=2) + "\n")


def parse_edge_list(text: str, source: str = "<string>") -> tuple[int, list[tuple[int, int]]]:
    """Parse ``u v`` lines (1-based, ``#`` comments allowed) into a vertex count and 0-based edges.

    The vertex count is the largest label seen; a ``# vertices N`` line can
    raise it to include isolated vertices.
    """
    edges = []
    n_vertices = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line, _, comment = raw.partition("#")
        words = comment.split()
        if len(words) == 2 and words[0] == "vertices":
            try:
                n_vertices = max(n_vertices, int(words[1]))
            except ValueError:
                raise InstanceError(f"{source}:{lineno}: bad vertex count {words[1]!r}") from None
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 2:
            raise InstanceError(f"{source}:{lineno}: expected two vertex numbers, got {line.strip()!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise InstanceError(f"{source}:{lineno}: vertex labels must be integers, got {line.strip()!r}") from None
        if u < 1 or v < 1:
            raise InstanceError(f"{source}:{lineno}: vertex labels start at 1")
        if u == v:
            raise InstanceError(f"{source}:{lineno}: self-loop on vertex {u}")
        edges.append((u - 1, v - 1))
        n_vertices = max(n_vertices, u, v)
    return n_vertices, edges


def load_edge_list(path) -> tuple[int, list[tuple[int, int]]]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InstanceError(f"{path}: {exc.strerror}") from None
    return parse_edge_list(text, str(path))
