"""Random twelve-player product games, batch runs and their summary statistics."""
from __future__ import annotations

import csv
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .analysis import is_stable, myopic_removal_dynamics
from .core import LinearCost, MsbGame, MultilinearBenefit, PowerForm, popcount
from .equilibrium import DEFAULT_CONFIG, SolveConfig
from .search import brute_force_optimal

log = logging.getLogger(__name__)

N_BINS = 10
DESK_COUNT = 1000
FULL_COUNT = 10000

INSTANCE_COLUMNS = (
    "id", "P", "opt_size", "opt_mask", "w_star", "stable",
    "myopic_size", "myopic_mask", "trace_length", "unconverged_coalitions", "error",
)


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class GenConfig:
    n: int = 12
    seed: int = 0
    count: int = DESK_COUNT

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be at least 1, got {self.n}")
        if self.count < 1:
            raise ValueError(f"count must be at least 1, got {self.count}")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


def instance_rng(seed: int, index: int) -> np.random.Generator:
    """Independent Philox stream for instance ``index``; unaffected by the order instances run in."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(index,))))


def draw_parameters(cfg: GenConfig, index: int) -> dict:
    if not 0 <= index < cfg.count:
        raise IndexError(f"instance index {index} outside 0..{cfg.count - 1}")
    rng = instance_rng(cfg.seed, index)
    n = cfg.n
    alpha = rng.random(n)
    beta = rng.random(n)
    delta = rng.random(n)
    p = float(rng.random())
    t = rng.random(n)
    return {"alpha": alpha, "beta": beta, "delta": delta, "P": p, "t": t}


def game_from_parameters(alpha, beta, delta, p: float, t, name: str = "") -> MsbGame:
    n = len(alpha)
    theta = p * np.asarray(t) / np.sum(t)
    return MsbGame(
        n=n,
        shares=tuple(float(x) for x in theta),
        contributions=tuple(PowerForm(float(a), float(b), 0.5) for a, b in zip(alpha, beta)),
        costs=tuple(LinearCost(float(d)) for d in delta),
        benefit=MultilinearBenefit.product(n),
        name=name,
    )


def generate_instance(cfg: GenConfig, index: int) -> MsbGame:
    d = draw_parameters(cfg, index)
    return game_from_parameters(d["alpha"], d["beta"], d["delta"], d["P"], d["t"], name=f"seed{cfg.seed}_{index}")


@dataclass(frozen=True)
class InstanceRow:
    id: int
    P: float
    opt_size: int = -1
    opt_mask: int = -1
    w_star: float = float("nan")
    stable: bool = False
    myopic_size: int = -1
    myopic_mask: int = -1
    trace_length: int = 0
    unconverged_coalitions: int = 0
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error

    def csv_fields(self) -> list[str]:
        out = []
        for name in INSTANCE_COLUMNS:
            v = getattr(self, name)
            if isinstance(v, bool):
                out.append(str(int(v)))
            elif isinstance(v, float):
                out.append(fmt_float(v))
            else:
                out.append(str(v))
        return out


def run_instance(cfg: GenConfig, index: int, solve_cfg: SolveConfig = DEFAULT_CONFIG) -> InstanceRow:
    """Optimal coalition, its stability and the myopic trace from it, for one generated instance."""
    p = draw_parameters(cfg, index)["P"]
    try:
        game = generate_instance(cfg, index)
        opt = brute_force_optimal(game, solve_cfg)
        if not opt.equilibrium.converged:
            return InstanceRow(index, p, unconverged_coalitions=opt.unconverged_coalitions,
                               error="optimal coalition equilibrium did not converge")
        stable = is_stable(game, opt.coalition, opt.equilibrium.efforts, solve_cfg).stable
        trace = myopic_removal_dynamics(game, opt.coalition, solve_cfg)
        return InstanceRow(
            id=index, P=p,
            opt_size=popcount(opt.coalition), opt_mask=opt.coalition,
            w_star=opt.principal_utility, stable=stable,
            myopic_size=popcount(trace.terminal), myopic_mask=trace.terminal,
            trace_length=len(trace.steps),
            unconverged_coalitions=opt.unconverged_coalitions,
        )
    except Exception as exc:  # a bad instance must not take the batch down
        return InstanceRow(index, p, error=f"{type(exc).__name__}: {exc}")


def _run_chunk(args) -> list[InstanceRow]:
    cfg, solve_cfg, indices = args
    return [run_instance(cfg, i, solve_cfg) for i in indices]


@dataclass
class ExperimentReport:
    config: GenConfig
    solve_config: SolveConfig
    rows: list[InstanceRow] = field(default_factory=list)

    @property
    def good_rows(self) -> list[InstanceRow]:
        return [r for r in self.rows if r.ok]

    @property
    def failures(self) -> list[InstanceRow]:
        return [r for r in self.rows if not r.ok]

    def _hist(self, sizes) -> np.ndarray:
        return np.bincount(np.asarray(list(sizes), dtype=np.int64), minlength=self.config.n + 1)

    @property
    def optimal_histogram(self) -> np.ndarray:
        return self._hist(r.opt_size for r in self.good_rows)

    @property
    def stable_histogram(self) -> np.ndarray:
        return self._hist(r.opt_size for r in self.good_rows if r.stable)

    @property
    def myopic_histogram(self) -> np.ndarray:
        return self._hist(r.myopic_size for r in self.good_rows)

    def heatmap(self) -> tuple[np.ndarray, np.ndarray]:
        return heatmap_bins(self.good_rows, self.config.n)


def run_experiment(cfg: GenConfig, solve_cfg: SolveConfig = DEFAULT_CONFIG, workers: int = 1) -> ExperimentReport:
    """Run every instance and fold the rows back in index order.

    Rows depend only on ``(seed, index)``, so the report is the same for any
    ``workers``.
    """
    if workers < 1:
        raise ValueError(f"workers must be at least 1, got {workers}")
    indices = list(range(cfg.count))
    if workers == 1:
        rows = [run_instance(cfg, i, solve_cfg) for i in indices]
    else:
        chunk = max(1, cfg.count // (workers * 8))
        jobs = [(cfg, solve_cfg, indices[k:k + chunk]) for k in range(0, cfg.count, chunk)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = [row for part in pool.map(_run_chunk, jobs) for row in part]
    rows.sort(key=lambda r: r.id)
    for r in rows:
        if not r.ok:
            log.warning("instance %d excluded: %s", r.id, r.error)
    return ExperimentReport(cfg, solve_cfg, rows)


def p_bin(p: float) -> int:
    """Bins ``[0, .1), ..., [.9, 1]``; the last one is closed."""
    return min(int(p * N_BINS), N_BINS - 1)


def heatmap_bins(rows, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-bin distribution over optimal coalition sizes ``0..n`` and per-bin counts.

    Empty bins come back as zero rows with count 0.
    """
    counts = np.zeros((N_BINS, n + 1), dtype=np.int64)
    for r in rows:
        counts[p_bin(r.P), r.opt_size] += 1
    totals = counts.sum(axis=1)
    freq = np.divide(counts, totals[:, None], out=np.zeros(counts.shape), where=totals[:, None] > 0)
    return freq, totals


# ---------------------------------------------------------------------------
# Output files
# ---------------------------------------------------------------------------

def _write_csv(path: Path, header, rows):
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def read_histogram_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {
        "optimal": np.array([int(r["optimal"]) for r in rows], dtype=np.int64),
        "stable": np.array([int(r["stable"]) for r in rows], dtype=np.int64),
    }


def _svg_save(fig, path: Path):
    try:
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def _plot_histogram(report: ExperimentReport, path: Path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "msbgame"
    n = report.config.n
    total = max(1, len(report.good_rows))
    sizes = np.arange(n + 1)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.bar(sizes, report.optimal_histogram / total, color="#4c72b0", label="optimal")
    ax.bar(sizes, report.stable_histogram / total, width=0.4, color="#dd8452", label="stable and optimal")
    ax.set_xticks(sizes)
    ax.set_xlabel("coalition size")
    ax.set_ylabel("frequency")
    ax.set_ylim(0, 1)
    ax.legend(loc="upper center")
    fig.tight_layout()
    _svg_save(fig, path)
    plt.close(fig)


def _plot_heatmap(report: ExperimentReport, path: Path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "msbgame"
    freq, _ = report.heatmap()
    fig, ax = plt.subplots(figsize=(6, 4))
    im = ax.imshow(freq, origin="lower", aspect="auto", cmap="Blues", vmin=0, vmax=1,
                   extent=(-0.5, report.config.n + 0.5, 0, 1))
    ax.set_xlabel("optimal coalition size")
    ax.set_ylabel("total player share P")
    fig.colorbar(im, ax=ax, label="frequency")
    fig.tight_layout()
    _svg_save(fig, path)
    plt.close(fig)


def emit_report(report: ExperimentReport, out_dir) -> list[Path]:
    """Write the CSV tables, ``summary.json`` and the two SVG figures into ``out_dir``."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create {out}: {exc.strerror}") from exc
    n = report.config.n
    paths = {name: out / name for name in
             ("instances.csv", "histogram.csv", "heatmap.csv", "myopic.csv", "summary.json",
              "histogram.svg", "heatmap.svg")}

    _write_csv(paths["instances.csv"], INSTANCE_COLUMNS, (r.csv_fields() for r in report.rows))
    opt, stab, myo = report.optimal_histogram, report.stable_histogram, report.myopic_histogram
    _write_csv(paths["histogram.csv"], ("size", "optimal", "stable"),
               ([k, int(opt[k]), int(stab[k])] for k in range(n + 1)))
    freq, totals = report.heatmap()
    _write_csv(paths["heatmap.csv"],
               ["bin", "p_lo", "p_hi", "count"] + [f"size_{k}" for k in range(n + 1)],
               ([b, fmt_float(b / N_BINS), fmt_float((b + 1) / N_BINS), int(totals[b])]
                + [fmt_float(x) for x in freq[b]] for b in range(N_BINS)))
    _write_csv(paths["myopic.csv"], ("size", "count"), ([k, int(myo[k])] for k in range(n + 1)))

    good = len(report.good_rows)
    summary = {
        "config": asdict(report.config),
        "solver": report.solve_config.to_dict(),
        "instances": len(report.rows),
        "included": good,
        "excluded": len(report.failures),
        "excluded_ids": [r.id for r in report.failures],
        "unconverged_coalitions": int(sum(r.unconverged_coalitions for r in report.rows)),
        "optimal_histogram": opt.tolist(),
        "stable_histogram": stab.tolist(),
        "myopic_histogram": myo.tolist(),
        "myopic_empty_fraction": (int(myo[0]) / good) if good else None,
        "columns": {
            "instances.csv": {
                "id": "instance index; with the seed it fixes every random draw",
                "P": "total player share",
                "opt_size": "size of the optimal coalition (-1 if excluded)",
                "opt_mask": "optimal coalition bitmask, player 1 is the least significant bit",
                "w_star": "Principal utility of the optimal coalition",
                "stable": "1 if the optimal coalition is stable at its own equilibrium",
                "myopic_size": "size of the coalition where myopic removal stops",
                "myopic_mask": "bitmask of that coalition",
                "trace_length": "coalitions visited by the myopic dynamics, start included",
                "unconverged_coalitions": "coalitions whose effort dynamics hit the sweep cap",
                "error": "reason the instance was excluded; empty otherwise",
            },
            "histogram.csv": {"size": "coalition size", "optimal": "instances with that optimal size",
                              "stable": "of those, instances whose optimum is stable"},
            "heatmap.csv": {"bin": "P bin index", "p_lo": "lower edge", "p_hi": "upper edge (closed for the last bin)",
                            "count": "instances in the bin", "size_k": "fraction of the bin with optimal size k"},
            "myopic.csv": {"size": "coalition size", "count": "instances whose myopic dynamics stop at that size"},
        },
        "float_format": "17 significant digits",
    }
    try:
        paths["summary.json"].write_text(json.dumps(summary, indent=2) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {paths['summary.json']}: {exc.strerror}") from exc
    _plot_histogram(report, paths["histogram.svg"])
    _plot_heatmap(report, paths["heatmap.svg"])
    return list(paths.values())


def default_workers() -> int:
    return max(1, os.cpu_count() or 1)
