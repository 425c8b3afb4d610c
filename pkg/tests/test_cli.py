"""CLI subcommands, exit codes, config file and env overrides."""

import json

import pytest

from gasfuzz.cli import main
from gasfuzz.report import load_report


def run_cli(*argv):
    return main(list(argv))


def test_help_lists_subcommands(capsys):
    with pytest.raises(SystemExit):
        run_cli("--help")
    out = capsys.readouterr().out
    for cmd in ("fuzz", "compare", "disasm", "cfg", "estimate", "trace"):
        assert cmd in out


def test_fuzz_help_lists_flags(capsys):
    with pytest.raises(SystemExit):
        run_cli("fuzz", "--help")
    out = capsys.readouterr().out
    for flag in ("--bin", "--abi", "--function", "--time", "--iterations",
                 "--rng-seed", "--strategy", "--out", "--persist-storage",
                 "--randomize-sender", "--max-array-len", "--temperature",
                 "--jobs", "--virtual-clock", "--gas-limit"):
        assert flag in out


def test_usage_error_exit_64(capsys):
    assert run_cli("fuzz") == 64                      # no budget/paths
    assert run_cli("fuzz", "--bogus-flag") == 64
    assert run_cli("nonsense") == 64


def test_missing_file_exit_65(tmp_path, capsys):
    assert run_cli("disasm", "--bin", str(tmp_path / "nope.bin")) == 65


def test_unknown_function_exit_65(distributor_files, capsys):
    bin_path, abi_path = map(str, distributor_files)
    rc = run_cli("fuzz", "--bin", bin_path, "--abi", abi_path,
                 "--function", "nope", "--iterations", "1")
    assert rc == 65
    assert "not found" in capsys.readouterr().err


def test_disasm_output(tmp_path, capsys):
    p = tmp_path / "c.bin"
    p.write_text("6001600201")
    assert run_cli("disasm", "--bin", str(p)) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "0x0000: PUSH1 0x01"
    assert out[1] == "0x0002: PUSH1 0x02"
    assert out[2] == "0x0004: ADD"


def test_estimate_infinite_on_loop(distributor_files, capsys):
    assert run_cli("estimate", "--bin", str(distributor_files[0]),
                   "--abi", str(distributor_files[1])) == 0
    assert capsys.readouterr().out.strip() == "infinite"


def test_estimate_finite_on_straightline(straightline_files, capsys):
    assert run_cli("estimate", "--bin", str(straightline_files[0]),
                   "--abi", str(straightline_files[1])) == 0
    value = capsys.readouterr().out.strip()
    assert value.isdigit() and int(value) > 0


def test_cfg_writes_dot_and_json(tmp_path, straightline_files, capsys):
    dot = tmp_path / "g.dot"
    js = tmp_path / "g.json"
    rc = run_cli("cfg", "--bin", str(straightline_files[0]),
                 "--abi", str(straightline_files[1]),
                 "--dot", str(dot), "--json", str(js))
    assert rc == 0
    assert dot.read_text().startswith("digraph wcfg {")
    data = json.loads(js.read_text())
    assert data["blocks"] and data["edges"]


def test_cfg_dot_stable_across_runs(tmp_path, straightline_files):
    paths = [tmp_path / "a.dot", tmp_path / "b.dot"]
    for p in paths:
        run_cli("cfg", "--bin", str(straightline_files[0]), "--dot", str(p))
    assert paths[0].read_text() == paths[1].read_text()


def test_fuzz_writes_report(tmp_path, distributor_files, capsys):
    out = tmp_path / "r.json"
    csv = tmp_path / "r.csv"
    rc = run_cli("fuzz", "--bin", str(distributor_files[0]),
                 "--abi", str(distributor_files[1]),
                 "--function", "distribute", "--iterations", "5",
                 "--rng-seed", "7", "--virtual-clock",
                 "--out", str(out), "--series-csv", str(csv))
    assert rc == 0
    rep = load_report(out)
    assert rep.strategy == "vgas" and rep.rng_seed == 7
    assert csv.read_text().startswith("elapsed_s,best_gas")


def test_fuzz_deterministic_reports(tmp_path, distributor_files):
    args = ("fuzz", "--bin", str(distributor_files[0]),
            "--abi", str(distributor_files[1]), "--function", "distribute",
            "--iterations", "6", "--rng-seed", "3", "--virtual-clock")
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run_cli(*args, "--out", str(a)) == 0
    assert run_cli(*args, "--out", str(b)) == 0
    assert a.read_bytes() == b.read_bytes()


def test_fuzz_exit_2_on_out_of_gas(tmp_path, distributor_files):
    out = tmp_path / "r.json"
    rc = run_cli("fuzz", "--bin", str(distributor_files[0]),
                 "--abi", str(distributor_files[1]),
                 "--function", "distribute", "--iterations", "12",
                 "--rng-seed", "2", "--max-array-len", "4096",
                 "--virtual-clock", "--out", str(out))
    assert rc == 2
    assert load_report(out).out_of_gas_observed


def test_compare_writes_all_strategies(tmp_path, straightline_files):
    out_dir = tmp_path / "cmp"
    rc = run_cli("compare", "--bin", str(straightline_files[0]),
                 "--abi", str(straightline_files[1]), "--function", "sum3",
                 "--iterations", "3", "--virtual-clock",
                 "--out-dir", str(out_dir))
    assert rc == 0
    for name in ("vgas", "random", "slowfuzz", "perffuzz"):
        assert (out_dir / f"report_{name}.json").exists()
        assert (out_dir / f"series_{name}.csv").exists()
    summary = json.loads((out_dir / "summary.json").read_text())
    assert set(summary["strategies"]) == {"vgas", "random", "slowfuzz",
                                          "perffuzz"}


def test_trace_outputs_step_lines(token_files, capsys):
    rc = run_cli("trace", "--bin", str(token_files[0]),
                 "--abi", str(token_files[1]), "--function", "transfer",
                 "--rng-seed", "1")
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    first = json.loads(lines[0])
    assert set(first) == {"pc", "op", "gas", "gasCost", "stack", "depth",
                          "opName"}
    assert first["pc"] == 0 and first["depth"] == 0
    assert first["gas"].startswith("0x")
    summary = json.loads(lines[-1])
    assert summary["status"] in ("success", "revert")
    assert summary["gasUsed"] > 21_000


def test_trace_contains_sstore_step(token_files, capsys):
    run_cli("trace", "--bin", str(token_files[0]),
            "--abi", str(token_files[1]), "--function", "transfer",
            "--rng-seed", "1")
    lines = capsys.readouterr().out.strip().splitlines()
    names = {json.loads(l)["opName"] for l in lines[:-1]}
    assert "CALLDATALOAD" in names
    assert "SHA3" in names


def test_config_file_provides_flags(tmp_path, distributor_files, capsys):
    cfg = tmp_path / "fuzz.cfg"
    cfg.write_text(
        "# campaign config\n"
        f"bin_path = {distributor_files[0]}\n"
        f"abi_path = {distributor_files[1]}\n"
        "function = distribute\n"
        "iteration_budget = 2\n"
        "virtual_clock = true\n")
    out = tmp_path / "r.json"
    rc = run_cli("fuzz", "--config", str(cfg), "--out", str(out))
    assert rc == 0
    assert load_report(out).iteration_budget == 2


def test_cli_flag_beats_config_file(tmp_path, distributor_files):
    cfg = tmp_path / "fuzz.cfg"
    cfg.write_text(f"bin_path = {distributor_files[0]}\n"
                   f"abi_path = {distributor_files[1]}\n"
                   "function = distribute\n"
                   "rng_seed = 1\n"
                   "iteration_budget = 2\n"
                   "virtual_clock = on\n")
    out = tmp_path / "r.json"
    rc = run_cli("fuzz", "--config", str(cfg), "--rng-seed", "9",
                 "--out", str(out))
    assert rc == 0
    assert load_report(out).rng_seed == 9


def test_env_var_override(tmp_path, distributor_files, monkeypatch):
    monkeypatch.setenv("GASFUZZ_ITERATION_BUDGET", "3")
    monkeypatch.setenv("GASFUZZ_VIRTUAL_CLOCK", "1")
    out = tmp_path / "r.json"
    rc = run_cli("fuzz", "--bin", str(distributor_files[0]),
                 "--abi", str(distributor_files[1]),
                 "--function", "distribute", "--out", str(out))
    assert rc == 0
    assert load_report(out).iteration_budget == 3


def test_bad_config_line_is_usage_error(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("this is not a key value line\n")
    assert run_cli("fuzz", "--config", str(cfg)) == 64
