"""Campaign result reporting: JSON report, gas-over-time CSV, and the
comparison metrics against the static estimate."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path

from .wcfg import INFINITE

# Exit code signalling an out-of-gas observation (vulnerability evidence).
EXIT_OK = 0
EXIT_VULNERABLE = 2
EXIT_USAGE = 64
EXIT_INPUT = 65

# JSON spelling of the INFINITE estimate / diff marker.
INFINITE_JSON = "infinite"

SCHEMA_VERSION = 1


def compute_diff(static_est, observed_gas: int):
    """Static estimate minus observed gas; INFINITE estimates propagate a
    distinct marker instead of a number."""
    if static_est == INFINITE:
        return INFINITE
    return static_est - observed_gas


def estimate_to_json(value):
    return INFINITE_JSON if value == INFINITE else value


def estimate_from_json(value):
    return INFINITE if value == INFINITE_JSON else value


@dataclass
class CampaignReport:
    contract: str
    function: str
    strategy: str
    rng_seed: int
    time_budget_s: float | None
    iteration_budget: int | None
    iterations_run: int
    executions: int
    best_gas: int
    time_to_best_s: float
    gas_rate: float
    best_inputs: list
    best_env: dict
    best_status: str
    series: list[tuple[float, int]]
    edge_profile: list[tuple[str, int, int]]
    hit_array_cap: bool
    out_of_gas_observed: bool
    static_estimate: object | None = None    # int | INFINITE | None
    diff_vs_estimate: object | None = None
    schema_version: int = SCHEMA_VERSION

    def attach_estimate(self, static_est) -> None:
        self.static_estimate = static_est
        self.diff_vs_estimate = compute_diff(static_est, self.best_gas)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["series"] = [[t, g] for t, g in self.series]
        d["edge_profile"] = [[e, g, h] for e, g, h in self.edge_profile]
        if self.static_estimate is not None:
            d["static_estimate"] = estimate_to_json(self.static_estimate)
        if self.diff_vs_estimate is not None:
            d["diff_vs_estimate"] = estimate_to_json(self.diff_vs_estimate)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CampaignReport":
        d = dict(d)
        d["series"] = [(t, g) for t, g in d.get("series", [])]
        d["edge_profile"] = [(e, g, h)
                             for e, g, h in d.get("edge_profile", [])]
        if d.get("static_estimate") is not None:
            d["static_estimate"] = estimate_from_json(d["static_estimate"])
        if d.get("diff_vs_estimate") is not None:
            d["diff_vs_estimate"] = estimate_from_json(d["diff_vs_estimate"])
        return cls(**d)

    def exit_code(self) -> int:
        return EXIT_VULNERABLE if self.out_of_gas_observed else EXIT_OK


def dumps_report(report: CampaignReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"


def write_report(report: CampaignReport, path: str | Path) -> None:
    Path(path).write_text(dumps_report(report))


def load_report(path: str | Path) -> CampaignReport:
    return CampaignReport.from_dict(json.loads(Path(path).read_text()))


def write_series_csv(report: CampaignReport, path: str | Path) -> None:
    """Best-gas-over-time series as `elapsed_s,best_gas` rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["elapsed_s", "best_gas"])
        for elapsed, gas in report.series:
            writer.writerow([repr(elapsed), gas])


def comparison_summary(reports: dict[str, CampaignReport]) -> dict:
    """Strategy-by-strategy result/time/rate table for comparison runs."""
    return {
        "schema_version": SCHEMA_VERSION,
        "contract": next(iter(reports.values())).contract if reports else "",
        "strategies": {
            name: {
                "best_gas": r.best_gas,
                "time_to_best_s": r.time_to_best_s,
                "gas_rate": r.gas_rate,
                "out_of_gas_observed": r.out_of_gas_observed,
            }
            for name, r in sorted(reports.items())
        },
    }
