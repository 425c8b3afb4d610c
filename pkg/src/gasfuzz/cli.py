"""Command-line front end.

Subcommands: fuzz (one campaign), compare (all strategies, shared budget
and seed), disasm, cfg (DOT/JSON export), estimate (static baseline),
trace (single execution with per-step JSON lines).

Every flag can also come from a `KEY=VALUE` config file (--config) or an
environment variable prefixed GASFUZZ_ (e.g. GASFUZZ_GAS_LIMIT); explicit
flags win over the config file, which wins over the environment.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from random import Random

from . import harness, report as report_mod
from .abi import AbiError, encode_args, parse_abi, random_gene
from .bytecode import disassemble, load_bin
from .evm import BLOCK_GAS_LIMIT
from .fuzzer import (DEFAULT_MAX_ARRAY_LEN, DEFAULT_POOL_CAP,
                     DEFAULT_RANDOM_ACCEPT, DEFAULT_TEMPERATURE,
                     CampaignConfig, StrategyKind, run_campaign,
                     run_comparison)
from .report import (EXIT_INPUT, EXIT_OK, EXIT_USAGE, INFINITE_JSON,
                     comparison_summary, write_report, write_series_csv)
from .wcfg import INFINITE, build_wcfg, static_estimate, to_dot, to_json_dict

ENV_PREFIX = "GASFUZZ_"


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 64, not argparse's default 2
        raise UsageError(message)


def _read_config_file(path: str) -> dict[str, str]:
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected KEY=VALUE")
        key, value = line.split("=", 1)
        out[key.strip().lower().replace("-", "_")] = value.strip()
    return out


def _collect_overrides(argv: list[str]) -> dict[str, str]:
    """Environment + config-file values, keyed like flag dests."""
    overrides = {
        key[len(ENV_PREFIX):].lower(): value
        for key, value in os.environ.items()
        if key.startswith(ENV_PREFIX) and key != ENV_PREFIX + "PURE"
    }
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        overrides.update(_read_config_file(known.config))
    return overrides


def _apply_overrides(parser: argparse.ArgumentParser,
                     overrides: dict[str, str]) -> None:
    for action in parser._actions:
        if action.dest in overrides:
            raw = overrides[action.dest]
            if action.type is not None:
                value = action.type(raw)
            elif isinstance(action.const, bool) \
                    or isinstance(action.default, bool):
                value = raw.lower() in ("1", "true", "yes", "on")
            else:
                value = raw
            parser.set_defaults(**{action.dest: value})


def _require(args, attr: str, flag: str) -> None:
    if getattr(args, attr, None) in (None, ""):
        raise UsageError(f"{flag} is required")


def _add_contract_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--bin", dest="bin_path",
                   help=".bin (init code) or .bin-runtime artifact")
    p.add_argument("--abi", dest="abi_path", help="ABI JSON file")
    p.add_argument("--config", help="KEY=VALUE config file mirroring flags")


def _add_campaign_args(p: argparse.ArgumentParser) -> None:
    _add_contract_args(p)
    p.add_argument("--function",
                   help="target function name or full signature")
    p.add_argument("--time", dest="time_budget", type=float, default=None,
                   help="time budget in seconds")
    p.add_argument("--iterations", dest="iteration_budget", type=int,
                   default=None, help="iteration budget")
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--gas-limit", type=int, default=BLOCK_GAS_LIMIT)
    p.add_argument("--max-array-len", type=int,
                   default=DEFAULT_MAX_ARRAY_LEN)
    p.add_argument("--temperature", type=float, default=DEFAULT_TEMPERATURE,
                   help="acceptance temperature; 0 disables probabilistic "
                        "acceptance")
    p.add_argument("--random-accept", type=float,
                   default=DEFAULT_RANDOM_ACCEPT,
                   help="acceptance probability of the random strategy")
    p.add_argument("--pool-cap", type=int, default=DEFAULT_POOL_CAP)
    p.add_argument("--persist-storage", action="store_true",
                   help="carry storage across executions")
    p.add_argument("--randomize-sender", action="store_true",
                   help="let mutation touch sender/origin")
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel workers for each mutant batch")
    p.add_argument("--virtual-clock", action="store_true",
                   help="deterministic clock (one tick per execution) for "
                        "byte-reproducible reports")


def _campaign_config(args, strategy: StrategyKind) -> CampaignConfig:
    _require(args, "bin_path", "--bin")
    _require(args, "abi_path", "--abi")
    _require(args, "function", "--function")
    return CampaignConfig(
        bin_path=args.bin_path,
        abi_path=args.abi_path,
        function=args.function,
        strategy=strategy,
        time_budget_s=args.time_budget,
        iteration_budget=args.iteration_budget,
        rng_seed=args.rng_seed,
        gas_limit=args.gas_limit,
        max_array_len=args.max_array_len,
        temperature=args.temperature,
        random_accept=args.random_accept,
        pool_cap=args.pool_cap,
        persist_storage=args.persist_storage,
        randomize_sender=args.randomize_sender,
        jobs=args.jobs,
        virtual_clock=args.virtual_clock,
    )


def _runtime_wcfg(bin_path: str, abi_path: str | None):
    code = load_bin(bin_path)
    if str(bin_path).endswith(".bin-runtime"):
        runtime = code
    else:
        ctor_args = b""
        if abi_path:
            specs = parse_abi(Path(abi_path).read_text())
            ctor = [s for s in specs if s.is_constructor]
            if ctor and ctor[0].inputs:
                g, m = random_gene(ctor, Random(0), max_array=2)
                ctor_args = encode_args(ctor[0], g, m)
        runtime = harness.deploy(code, ctor_args).runtime_code
    return build_wcfg(disassemble(runtime))


def _cmd_fuzz(args) -> int:
    if args.time_budget is None and args.iteration_budget is None:
        raise UsageError("fuzz needs --time and/or --iterations")
    config = _campaign_config(args, StrategyKind(args.strategy))
    rep = run_campaign(config)
    if args.out:
        write_report(rep, args.out)
    else:
        sys.stdout.write(report_mod.dumps_report(rep))
    if args.series_csv:
        write_series_csv(rep, args.series_csv)
    return rep.exit_code()


def _cmd_compare(args) -> int:
    if args.time_budget is None and args.iteration_budget is None:
        raise UsageError("compare needs --time and/or --iterations")
    config = _campaign_config(args, StrategyKind.VGAS)
    reports = run_comparison(config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, rep in reports.items():
        write_report(rep, out_dir / f"report_{name}.json")
        write_series_csv(rep, out_dir / f"series_{name}.csv")
    summary = comparison_summary(reports)
    (out_dir / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(json.dumps(summary, indent=2, sort_keys=True))
    if any(r.out_of_gas_observed for r in reports.values()):
        return report_mod.EXIT_VULNERABLE
    return EXIT_OK


def _cmd_disasm(args) -> int:
    _require(args, "bin_path", "--bin")
    code = load_bin(args.bin_path)
    for ins in disassemble(code):
        if ins.immediate is not None:
            print(f"{ins.offset:#06x}: {ins.name} 0x{ins.immediate.hex()}")
        else:
            print(f"{ins.offset:#06x}: {ins.name}")
    return EXIT_OK


def _cmd_cfg(args) -> int:
    _require(args, "bin_path", "--bin")
    graph = _runtime_wcfg(args.bin_path, args.abi_path)
    dot = to_dot(graph)
    if args.dot:
        Path(args.dot).write_text(dot)
    if args.json:
        Path(args.json).write_text(
            json.dumps(to_json_dict(graph), indent=2) + "\n")
    if not args.dot and not args.json:
        sys.stdout.write(dot)
    return EXIT_OK


def _cmd_estimate(args) -> int:
    _require(args, "bin_path", "--bin")
    graph = _runtime_wcfg(args.bin_path, args.abi_path)
    est = static_estimate(graph)
    print(INFINITE_JSON if est == INFINITE else int(est))
    return EXIT_OK


def _cmd_trace(args) -> int:
    _require(args, "bin_path", "--bin")
    _require(args, "abi_path", "--abi")
    _require(args, "function", "--function")
    rng = Random(args.rng_seed)
    session = harness.FuzzSession.open(args.bin_path, args.abi_path,
                                       args.function, rng,
                                       gas_limit=args.gas_limit)
    gene, gene_map = random_gene(session.specs, rng)
    gene = session.apply_env_defaults(gene, gene_map)
    steps: list[dict] = []
    result = harness.run_function_full(session.instance, session.runner,
                                       gene, gene_map,
                                       gas_limit=args.gas_limit,
                                       trace=steps)
    for step in steps:
        print(json.dumps(step))
    print(json.dumps({"status": result.status.value,
                      "gasUsed": result.gas_used,
                      "gasUsedRaw": result.gas_used_raw,
                      "refund": result.refund,
                      "returnData": "0x" + result.return_data.hex()}))
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(
        prog="gasfuzz",
        description="Generate function inputs that maximize smart-contract "
                    "gas consumption.")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("fuzz", help="run one fuzzing campaign")
    _add_campaign_args(p)
    p.add_argument("--strategy", choices=[s.value for s in StrategyKind],
                   default=StrategyKind.VGAS.value)
    p.add_argument("--out", help="report JSON path (stdout when omitted)")
    p.add_argument("--series-csv", help="also write the best-gas series")
    p.set_defaults(func=_cmd_fuzz)

    p = sub.add_parser("compare",
                       help="run all strategies with a shared budget/seed")
    _add_campaign_args(p)
    p.add_argument("--out-dir", default="compare-out")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("disasm", help="print the instruction stream")
    _add_contract_args(p)
    p.set_defaults(func=_cmd_disasm)

    p = sub.add_parser("cfg", help="export the weighted CFG")
    _add_contract_args(p)
    p.add_argument("--dot", help="DOT output path")
    p.add_argument("--json", help="JSON output path")
    p.set_defaults(func=_cmd_cfg)

    p = sub.add_parser("estimate",
                       help="static worst-path estimate (or 'infinite')")
    _add_contract_args(p)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("trace",
                       help="run once, print per-step JSON trace lines")
    _add_contract_args(p)
    p.add_argument("--function",
                   help="target function name or full signature")
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--gas-limit", type=int, default=BLOCK_GAS_LIMIT)
    p.set_defaults(func=_cmd_trace)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        overrides = _collect_overrides(argv)
        command = next((a for a in argv if not a.startswith("-")), None)
        sub_actions = parser._subparsers._group_actions[0]
        if command in sub_actions.choices:
            _apply_overrides(sub_actions.choices[command], overrides)
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AbiError, harness.DeployError, FileNotFoundError,
            IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
