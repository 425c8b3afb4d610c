"""Report serialization, comparison metrics, exit codes."""

import json

from gasfuzz.fuzzer import CampaignConfig, run_campaign, run_comparison
from gasfuzz.report import (EXIT_OK, EXIT_VULNERABLE, CampaignReport,
                            comparison_summary, compute_diff, dumps_report,
                            load_report, write_report, write_series_csv)
from gasfuzz.wcfg import INFINITE


def test_compute_diff_reported_rows():
    assert compute_diff(43_517, 21_916) == 21_601
    assert compute_diff(41_921, 49_816) == -7_895
    assert compute_diff(INFINITE, 25_689) == INFINITE


def _campaign(files, **kw):
    bin_path, abi_path = files
    defaults = dict(bin_path=str(bin_path), abi_path=str(abi_path),
                    function="distribute", iteration_budget=5, rng_seed=1,
                    virtual_clock=True)
    defaults.update(kw)
    return run_campaign(CampaignConfig(**defaults))


def test_report_json_roundtrip(distributor_files):
    rep = _campaign(distributor_files)
    back = CampaignReport.from_dict(json.loads(dumps_report(rep)))
    assert back == rep
    assert dumps_report(back) == dumps_report(rep)


def test_infinite_estimate_serialized_distinctly(distributor_files):
    rep = _campaign(distributor_files)
    d = json.loads(dumps_report(rep))
    assert d["static_estimate"] == "infinite"
    assert d["diff_vs_estimate"] == "infinite"
    assert CampaignReport.from_dict(d).static_estimate == INFINITE


def test_write_and_load_report(tmp_path, distributor_files):
    rep = _campaign(distributor_files)
    path = tmp_path / "r.json"
    write_report(rep, path)
    assert load_report(path) == rep


def test_series_csv_format(tmp_path, distributor_files):
    rep = _campaign(distributor_files)
    path = tmp_path / "s.csv"
    write_series_csv(rep, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "elapsed_s,best_gas"
    assert len(lines) == 1 + len(rep.series)
    first_t, first_g = lines[1].split(",")
    assert float(first_t) == rep.series[0][0]
    assert int(first_g) == rep.series[0][1]


def test_series_length_one_for_zero_iterations(distributor_files):
    rep = _campaign(distributor_files, iteration_budget=0)
    assert len(rep.series) == 1


def test_exit_code_signals_out_of_gas(distributor_files):
    calm = _campaign(distributor_files, iteration_budget=2)
    assert calm.exit_code() == EXIT_OK
    hot = _campaign(distributor_files, iteration_budget=12,
                    max_array_len=4096, rng_seed=2)
    assert hot.out_of_gas_observed
    assert hot.exit_code() == EXIT_VULNERABLE


def test_out_of_gas_flag_iff_observed(distributor_files):
    rep = _campaign(distributor_files, iteration_budget=2,
                    max_array_len=16)
    assert not rep.out_of_gas_observed
    assert rep.exit_code() == EXIT_OK


def test_hit_array_cap_flag(distributor_files):
    # a tiny cap forces the winning seed to sit at the cap quickly
    rep = _campaign(distributor_files, iteration_budget=20,
                    max_array_len=4)
    assert rep.hit_array_cap


def test_comparison_summary_shape(straightline_files):
    cfg = CampaignConfig(bin_path=str(straightline_files[0]),
                         abi_path=str(straightline_files[1]),
                         function="sum3", iteration_budget=3, rng_seed=0,
                         virtual_clock=True)
    reports = run_comparison(cfg)
    assert sorted(reports) == ["perffuzz", "random", "slowfuzz", "vgas"]
    summary = comparison_summary(reports)
    assert set(summary["strategies"]) == set(reports)
    for row in summary["strategies"].values():
        assert row["gas_rate"] == row["best_gas"] / max(
            row["time_to_best_s"], 0.001)
