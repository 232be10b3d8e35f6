"""Command-line entry point: ``msbgame <command> [options]``.

Exit codes: 0 success, 2 invalid input, 3 solver cap or non-convergence,
64 missing or unknown command.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import warnings
from pathlib import Path

from .analysis import is_stable, myopic_removal_dynamics, vsr
from .core import Coalition, MsbGame
from .equilibrium import SolveConfig, dominant_equilibrium, least_equilibrium, price_of_generativity
from .errors import CapExceededError, MonotonicityError, MsbError
from .experiment import DESK_COUNT, FULL_COUNT, GenConfig, emit_report, generate_instance, run_experiment
from .io import dump_game, load_edge_list, load_game
from .search import SolverMethod, almost_linear_optimal, brute_force_optimal, clique_reduction, fcop_optimal

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_SOLVER = 3
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        if "argument command" in message:
            raise UsageError(message)
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


class InputError(Exception):
    """Bad command-line value that argparse cannot catch on its own."""


def _global_flags(p: argparse.ArgumentParser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--tol", type=float, default=d(1e-8), help="best-response convergence tolerance")
    p.add_argument("--max-sweeps", type=int, default=d(10_000), help="sweep cap for best-response dynamics")
    p.add_argument("--quiet", action="store_true", default=d(False), help="suppress warnings and progress")
    p.add_argument("--json", action="store_true", default=d(False), help="machine-readable output")


def _coalition_flags(p: argparse.ArgumentParser, required: bool = True):
    grp = p.add_mutually_exclusive_group(required=required)
    grp.add_argument("--coalition", metavar="MASK", help="decimal bitmask, player 1 is the least significant bit")
    grp.add_argument("--players", metavar="LIST", help="comma-separated player numbers, e.g. 1,2,5")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="msbgame", description="Solve and analyse managed shared-benefit games.")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)

    p = sub.add_parser("gen", parents=[common], help="write random instances as JSON files")
    p.add_argument("--n", type=int, default=12)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, metavar="DIR")

    p = sub.add_parser("eq", parents=[common], help="dominant equilibrium of one coalition")
    p.add_argument("--instance", required=True, metavar="FILE")
    _coalition_flags(p)
    p.add_argument("--genai", default="all", help="all, none, or one bit per player (player 1 first)")
    p.add_argument("--least", action="store_true", help="least equilibrium instead of the dominant one")

    p = sub.add_parser("pog", parents=[common], help="price of generativity of one coalition")
    p.add_argument("--instance", required=True, metavar="FILE")
    _coalition_flags(p)

    p = sub.add_parser("opt", parents=[common], help="Principal's optimal coalition")
    p.add_argument("--instance", required=True, metavar="FILE")
    p.add_argument("--method", choices=[m.value for m in SolverMethod], default="brute")
    p.add_argument("--epsilon", type=float, help="share unit for fcop and almost-linear")
    p.add_argument("--nprime", metavar="MASK", help="coupled block for almost-linear")

    p = sub.add_parser("stability", parents=[common], help="is a coalition stable at its own equilibrium")
    p.add_argument("--instance", required=True, metavar="FILE")
    _coalition_flags(p)

    p = sub.add_parser("vsr", parents=[common], help="value-to-share ratio of a member")
    p.add_argument("--instance", required=True, metavar="FILE")
    _coalition_flags(p)
    p.add_argument("--player", type=int, required=True, help="player number, starting at 1")

    p = sub.add_parser("dynamics", parents=[common], help="myopic removal dynamics")
    p.add_argument("--instance", required=True, metavar="FILE")
    p.add_argument("--start", default="opt", metavar="MASK|opt",
                   help="starting coalition mask, or 'opt' for the exhaustive optimum")

    p = sub.add_parser("experiment", parents=[common], help="batch run over random instances")
    p.add_argument("--n", type=int, default=12)
    p.add_argument("--count", type=int, default=None, help=f"instances (default {DESK_COUNT})")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--full", action="store_true", help=f"run {FULL_COUNT} instances")

    p = sub.add_parser("clique", parents=[common], help="decide k-clique through the coalition reduction")
    p.add_argument("--graph", required=True, metavar="FILE", help="edge list, one 'u v' pair per line, 1-based")
    p.add_argument("--k", type=int, required=True)
    return parser


# ---------------------------------------------------------------------------
# Argument helpers
# ---------------------------------------------------------------------------

def _parse_mask(text: str, n: int, what: str = "coalition") -> int:
    try:
        mask = int(text)
    except ValueError:
        raise InputError(f"--{what} must be a decimal bitmask, got {text!r}") from None
    if mask < 0 or mask >> n:
        raise InputError(f"--{what} {mask} is outside 0..{(1 << n) - 1} for n={n}")
    return mask


def _coalition(args, game: MsbGame) -> int:
    if args.coalition is not None:
        return _parse_mask(args.coalition, game.n)
    text = args.players.strip()
    if not text:
        return 0
    try:
        labels = [int(x) for x in text.split(",")]
    except ValueError:
        raise InputError(f"--players must be comma-separated integers, got {args.players!r}") from None
    bad = [x for x in labels if not 1 <= x <= game.n]
    if bad:
        raise InputError(f"--players {bad} outside 1..{game.n}")
    return Coalition.from_players([x - 1 for x in labels], game.n).mask


def _players(mask: int, n: int) -> list[int]:
    return [i + 1 for i in range(n) if mask >> i & 1]


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".6g")
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _emit(args, payload: dict, lines: list[tuple[str, object]] | None = None):
    if args.json:
        print(json.dumps(payload, indent=2))
        return
    rows = lines if lines is not None else list(payload.items())
    width = max((len(k) for k, _ in rows), default=0)
    for k, v in rows:
        print(f"{k:<{width}}  {_fmt(v)}")


def _eq_lines(d: dict) -> list[tuple[str, object]]:
    keys = ("players", "efforts", "shared_benefit", "player_utilities", "principal_utility",
            "sweeps_used", "converged", "max_residual")
    return [(k, d[k]) for k in keys]


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_gen(args, cfg: SolveConfig) -> int:
    gcfg = GenConfig(n=args.n, seed=args.seed, count=args.count)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    width = len(str(gcfg.count - 1))
    files = []
    for i in range(gcfg.count):
        path = out / f"instance_{i:0{width}d}.json"
        dump_game(generate_instance(gcfg, i), path)
        files.append(str(path))
    _emit(args, {"n": gcfg.n, "seed": gcfg.seed, "count": gcfg.count, "files": files},
          [("wrote", f"{len(files)} instances to {out}")])
    return EXIT_OK


def cmd_eq(args, cfg: SolveConfig) -> int:
    game = load_game(args.instance)
    mask = _coalition(args, game)
    solver = least_equilibrium if args.least else dominant_equilibrium
    res = solver(game, mask, args.genai, cfg)
    d = res.to_dict()
    _emit(args, d, _eq_lines(d))
    return EXIT_OK if res.converged else EXIT_SOLVER


def cmd_pog(args, cfg: SolveConfig) -> int:
    game = load_game(args.instance)
    mask = _coalition(args, game)
    ratio = price_of_generativity(game, mask, cfg)
    without = dominant_equilibrium(game, mask, "none", cfg)
    with_ai = dominant_equilibrium(game, mask, "all", cfg)
    d = {
        "coalition": mask,
        "players": _players(mask, game.n),
        "pog": None if math.isinf(ratio) else ratio,
        "unbounded": math.isinf(ratio),
        "shared_benefit_without_genai": without.shared_benefit,
        "shared_benefit_with_genai": with_ai.shared_benefit,
        "efforts_without_genai": list(without.efforts),
        "efforts_with_genai": list(with_ai.efforts),
    }
    _emit(args, d, [("players", d["players"]), ("pog", "inf" if d["unbounded"] else ratio),
                    ("f without GenAI", without.shared_benefit), ("f with GenAI", with_ai.shared_benefit)])
    return EXIT_OK if without.converged and with_ai.converged else EXIT_SOLVER


def cmd_opt(args, cfg: SolveConfig) -> int:
    game = load_game(args.instance)
    method = SolverMethod(args.method)
    if method is SolverMethod.BRUTE_FORCE:
        sol = brute_force_optimal(game, cfg)
    else:
        if args.epsilon is None:
            raise InputError(f"--epsilon is required for --method {method.value}")
        if method is SolverMethod.FCOP:
            sol = fcop_optimal(game, args.epsilon, cfg)
        else:
            if args.nprime is None:
                raise InputError("--nprime is required for --method almost-linear")
            sol = almost_linear_optimal(game, _parse_mask(args.nprime, game.n, "nprime"), args.epsilon, cfg)
    d = sol.to_dict()
    _emit(args, d, [("method", method.value), ("players", d["players"]),
                    ("principal_utility", sol.principal_utility)] + _eq_lines(d["equilibrium"])[1:4])
    return EXIT_OK if sol.equilibrium.converged else EXIT_SOLVER


def cmd_stability(args, cfg: SolveConfig) -> int:
    game = load_game(args.instance)
    mask = _coalition(args, game)
    eq = dominant_equilibrium(game, mask, "all", cfg)
    rep = is_stable(game, mask, eq.efforts, cfg)
    d = {"coalition": mask, "players": _players(mask, game.n), "efforts": list(eq.efforts),
         "principal_utility": eq.principal_utility, **rep.to_dict(game.n)}
    lines = [("players", d["players"]), ("efforts", d["efforts"]), ("stable", rep.stable)]
    if rep.witness is not None:
        lines.append(("witness", d["witness_players"]))
    _emit(args, d, lines)
    return EXIT_OK if eq.converged else EXIT_SOLVER


def cmd_vsr(args, cfg: SolveConfig) -> int:
    game = load_game(args.instance)
    mask = _coalition(args, game)
    if not 1 <= args.player <= game.n:
        raise InputError(f"--player {args.player} outside 1..{game.n}")
    eq = dominant_equilibrium(game, mask, "all", cfg)
    value = vsr(game, args.player - 1, mask, cfg, equilibrium=eq)
    d = {"coalition": mask, "players": _players(mask, game.n), "player": args.player,
         "vsr": value, "efforts": list(eq.efforts)}
    _emit(args, d, [("players", d["players"]), ("player", args.player), ("vsr", value)])
    return EXIT_OK if eq.converged else EXIT_SOLVER


def cmd_dynamics(args, cfg: SolveConfig) -> int:
    game = load_game(args.instance)
    if args.start == "opt":
        start = brute_force_optimal(game, cfg).coalition
    else:
        start = _parse_mask(args.start, game.n, "start")
    trace = myopic_removal_dynamics(game, start, cfg)
    d = {"start": start, "terminal": trace.terminal, "terminal_players": _players(trace.terminal, game.n),
         **trace.to_dict()}
    if args.json:
        _emit(args, d)
    else:
        print(f"{'step':>4}  {'players':<24} {'W':>12}  efforts")
        for k, s in enumerate(d["steps"]):
            print(f"{k:>4}  {_fmt(s['players']):<24} {_fmt(s['principal_utility']):>12}  {_fmt(s['efforts'])}")
        print(f"terminal stable: {trace.terminal_stable}")
    converged = all(s.equilibrium.converged for s in trace.steps)
    return EXIT_OK if converged else EXIT_SOLVER


def cmd_experiment(args, cfg: SolveConfig) -> int:
    count = args.count if args.count is not None else (FULL_COUNT if args.full else DESK_COUNT)
    gcfg = GenConfig(n=args.n, seed=args.seed, count=count)
    if args.workers < 1:
        raise InputError("--workers must be at least 1")
    report = run_experiment(gcfg, cfg, args.workers)
    emit_report(report, args.out)
    good = len(report.good_rows)
    opt = report.optimal_histogram.tolist()
    myo = report.myopic_histogram.tolist()
    d = {"out": str(args.out), "count": count, "included": good, "excluded": len(report.failures),
         "optimal_histogram": opt, "stable_histogram": report.stable_histogram.tolist(),
         "myopic_histogram": myo}
    _emit(args, d, [("output", args.out), ("instances", count), ("excluded", len(report.failures)),
                    ("optimal sizes", opt), ("myopic terminal sizes", myo)])
    return EXIT_OK


def cmd_clique(args, cfg: SolveConfig) -> int:
    n_vertices, edges = load_edge_list(args.graph)
    if not 2 <= args.k <= max(n_vertices, 2):
        raise InputError(f"--k must lie in 2..{n_vertices}, got {args.k}")
    verdict = clique_reduction(n_vertices, edges, args.k, cfg)
    d = {"has_clique": verdict.has_clique, "w_star": verdict.w_star, "w_max": verdict.w_max,
         "coalition": verdict.coalition, "players": _players(verdict.coalition, n_vertices)}
    if args.json:
        _emit(args, d)
    else:
        print("true" if verdict.has_clique else "false")
        print(f"W*     {verdict.w_star:.12g}")
        print(f"W_max  {verdict.w_max:.12g}")
    return EXIT_OK


HANDLERS = {
    "gen": cmd_gen, "eq": cmd_eq, "pog": cmd_pog, "opt": cmd_opt, "stability": cmd_stability,
    "vsr": cmd_vsr, "dynamics": cmd_dynamics, "experiment": cmd_experiment, "clique": cmd_clique,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_help(sys.stderr)
        print(f"msbgame: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE

    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = SolveConfig(tol=args.tol, max_sweeps=args.max_sweeps)
    except ValueError as exc:
        print(f"msbgame: {exc}", file=sys.stderr)
        return EXIT_INVALID
    with warnings.catch_warnings():
        if args.quiet:
            warnings.simplefilter("ignore")
        try:
            return HANDLERS[args.command](args, cfg)
        except (CapExceededError, MonotonicityError) as exc:
            print(f"msbgame: {exc}", file=sys.stderr)
            return EXIT_SOLVER
        except (InputError, MsbError, ValueError, IndexError) as exc:
            print(f"msbgame: {exc}", file=sys.stderr)
            return EXIT_INVALID
        except OSError as exc:
            print(f"msbgame: {exc}", file=sys.stderr)
            return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
