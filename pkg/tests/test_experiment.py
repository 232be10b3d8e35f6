import csv
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from msbgame.equilibrium import SolveConfig
from msbgame.experiment import (
    INSTANCE_COLUMNS,
    ExperimentReport,
    GenConfig,
    InstanceRow,
    draw_parameters,
    emit_report,
    fmt_float,
    game_from_parameters,
    generate_instance,
    heatmap_bins,
    p_bin,
    read_histogram_csv,
    run_experiment,
    run_instance,
)

seeds = st.integers(min_value=0, max_value=2**64 - 1)


@settings(max_examples=50, deadline=None)
@given(seed=seeds, index=st.integers(0, 999))
def test_shares_sum_to_p(seed, index):
    cfg = GenConfig(seed=seed)
    d = draw_parameters(cfg, index)
    g = generate_instance(cfg, index)
    assert abs(sum(g.shares) - d["P"]) <= 1e-12
    assert all(0 <= x <= 1 for x in d["alpha"]) and 0 <= d["P"] < 1


def test_equal_weights_split_evenly():
    g = game_from_parameters([0.5] * 4, [0.5] * 4, [0.5] * 4, 0.6, [0.3] * 4)
    assert g.shares == pytest.approx((0.15,) * 4, abs=1e-15)


def test_draws_depend_only_on_seed_and_index():
    a = draw_parameters(GenConfig(seed=7, count=50), 13)
    b = draw_parameters(GenConfig(seed=7, count=20), 13)
    for key in a:
        assert np.array_equal(a[key], b[key])
    c = draw_parameters(GenConfig(seed=8, count=50), 13)
    assert not np.array_equal(a["alpha"], c["alpha"])
    assert generate_instance(GenConfig(seed=7), 3) == generate_instance(GenConfig(seed=7), 3)


def test_index_out_of_range():
    with pytest.raises(IndexError):
        draw_parameters(GenConfig(count=5), 5)


@pytest.mark.parametrize("bad", [{"n": 0}, {"count": 0}, {"seed": -1}, {"seed": 1 << 64}])
def test_invalid_config(bad):
    with pytest.raises(ValueError):
        GenConfig(**bad)


def test_fmt_float_round_trips():
    for x in (0.1, 1 / 3, 1e-300, 5.0):
        assert float(fmt_float(x)) == x


class TestBins:
    @pytest.mark.parametrize("p,b", [(0.0, 0), (0.0999, 0), (0.1, 1), (0.95, 9), (1.0, 9)])
    def test_p_bin(self, p, b):
        assert p_bin(p) == b

    def test_heatmap(self):
        rows = [InstanceRow(0, 0.05, opt_size=0), InstanceRow(1, 0.07, opt_size=2), InstanceRow(2, 1.0, opt_size=1)]
        freq, totals = heatmap_bins(rows, 3)
        assert totals.tolist() == [2, 0, 0, 0, 0, 0, 0, 0, 0, 1]
        assert freq[0].tolist() == [0.5, 0, 0.5, 0]
        assert freq[9].tolist() == [0, 1, 0, 0]
        assert not freq[4].any()


def test_single_instance_row():
    row = run_instance(GenConfig(n=3, seed=1, count=1), 0)
    assert row.ok
    assert 0 <= row.opt_size <= 3
    assert row.myopic_mask & ~row.opt_mask == 0
    assert row.trace_length >= 1
    assert len(row.csv_fields()) == len(INSTANCE_COLUMNS)


def test_errors_become_exclusions(monkeypatch):
    from msbgame import experiment

    def boom(*args, **kwargs):
        raise RuntimeError("solver exploded")

    monkeypatch.setattr(experiment, "brute_force_optimal", boom)
    rep = run_experiment(GenConfig(n=2, count=3))
    assert len(rep.failures) == 3 and not rep.good_rows
    assert rep.failures[0].error == "RuntimeError: solver exploded"
    assert rep.optimal_histogram.tolist() == [0, 0, 0]


def test_unconverged_optimum_is_excluded():
    rep = run_experiment(GenConfig(n=3, seed=2, count=4), SolveConfig(max_sweeps=1, tol=1e-300))
    for r in rep.rows:
        assert r.ok or "did not converge" in r.error
    assert rep.optimal_histogram.sum() == len(rep.good_rows)


@pytest.fixture(scope="module")
def small_report():
    return run_experiment(GenConfig(n=4, seed=3, count=40))


def test_histograms_conserve_instances(small_report):
    rep = small_report
    good = len(rep.good_rows)
    assert rep.optimal_histogram.sum() == good
    assert rep.myopic_histogram.sum() == good
    assert np.all(rep.stable_histogram <= rep.optimal_histogram)
    freq, totals = rep.heatmap()
    assert totals.sum() == good
    assert np.allclose(freq[totals > 0].sum(axis=1), 1.0)


def test_parallel_rows_match_serial(small_report):
    par = run_experiment(small_report.config, workers=2)
    assert par.rows == small_report.rows


def test_emit_report(small_report, tmp_path):
    paths = emit_report(small_report, tmp_path / "out")
    assert sorted(p.name for p in paths) == sorted(
        ["instances.csv", "histogram.csv", "heatmap.csv", "myopic.csv", "summary.json", "histogram.svg", "heatmap.svg"])
    hist = read_histogram_csv(tmp_path / "out" / "histogram.csv")
    assert np.array_equal(hist["optimal"], small_report.optimal_histogram)
    assert np.array_equal(hist["stable"], small_report.stable_histogram)
    with open(tmp_path / "out" / "instances.csv") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == INSTANCE_COLUMNS and len(rows) == 41
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["instances"] == 40
    assert summary["included"] + summary["excluded"] == 40
    assert summary["config"] == {"n": 4, "seed": 3, "count": 40}
    assert (tmp_path / "out" / "histogram.svg").read_text().lstrip().startswith("<?xml")


def test_emit_is_byte_identical(small_report, tmp_path):
    emit_report(small_report, tmp_path / "a")
    emit_report(small_report, tmp_path / "b")
    for name in ("instances.csv", "heatmap.csv", "summary.json", "histogram.svg", "heatmap.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_empty_report_writes_headers(tmp_path):
    rep = ExperimentReport(GenConfig(n=2, count=1), SolveConfig(), [InstanceRow(0, 0.5, error="x")])
    emit_report(rep, tmp_path)
    assert read_histogram_csv(tmp_path / "histogram.csv")["optimal"].tolist() == [0, 0, 0]
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["excluded_ids"] == [0] and summary["myopic_empty_fraction"] is None


def test_unwritable_output(small_report, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError, match="cannot create"):
        emit_report(small_report, blocker / "sub")
