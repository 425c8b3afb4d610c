"""Feedback-directed search for gas-hungry inputs.

One campaign fuzzes one contract function. Every execution yields total
gas plus per-edge gas/hit counts; a seed is kept when it beats any best so
far, with a Metropolis-style probability of keeping non-improving seeds to
escape local optima. Rival acceptance strategies (pure random, path
length, per-edge hit counts) plug into the same loop for comparison runs.
"""

from __future__ import annotations

import enum
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from random import Random

from . import harness
from .abi import (ENV_VARS, GeneMap, env_key, gene_values, random_gene,
                  random_env_value, random_scalar, read_env)
from .evm import BLOCK_GAS_LIMIT, Feedback, Status
from .report import CampaignReport
from .wcfg import EdgeFeedbackSlot, static_estimate

DEFAULT_MAX_ARRAY_LEN = 1024
DEFAULT_TEMPERATURE = 500.0
DEFAULT_RANDOM_ACCEPT = 0.5
DEFAULT_POOL_CAP = 256
VIRTUAL_TICK_S = 0.001          # virtual-clock seconds per execution
EXPLOIT_PROB = 0.9              # chance to pick the max-priority seed


class StrategyKind(enum.Enum):
    VGAS = "vgas"
    RANDOM = "random"
    SLOWFUZZ = "slowfuzz"
    PERFFUZZ = "perffuzz"


@dataclass
class Seed:
    gene: bytes
    gene_map: GeneMap
    feedback: Feedback
    priority: int
    birth_iteration: int
    order: int = 0

    def __post_init__(self):
        assert self.priority == self.feedback.total_gas


class SeedPool:
    """Priority pool of interesting seeds plus the campaign-wide bests the
    selection formula compares against."""

    def __init__(self, cap: int = DEFAULT_POOL_CAP):
        self.cap = cap
        self.seeds: list[Seed] = []
        self.total_cur = 0                      # best total gas seen
        self.slots: dict[tuple[int, int], EdgeFeedbackSlot] = {}
        self.best_path_len = 0                  # for the path-length strategy
        self._counter = 0

    def __len__(self) -> int:
        return len(self.seeds)

    def cost_cur(self, edge: tuple[int, int]) -> int:
        slot = self.slots.get(edge)
        return slot.max_gas if slot else 0

    def hits_cur(self, edge: tuple[int, int]) -> int:
        slot = self.slots.get(edge)
        return slot.max_hits if slot else 0

    def observe(self, feedback: Feedback) -> None:
        """Fold one execution into the bests (done for every execution,
        kept or not)."""
        if feedback.total_gas > self.total_cur:
            self.total_cur = feedback.total_gas
        for edge, gas in feedback.edge_gas.items():
            slot = self.slots.get(edge)
            if slot is None:
                slot = self.slots[edge] = EdgeFeedbackSlot(edge)
            slot.observe(gas, feedback.edge_hits.get(edge, 0))
        path = feedback.path_length
        if path > self.best_path_len:
            self.best_path_len = path

    def push(self, seed: Seed) -> None:
        seed.order = self._counter
        self._counter += 1
        self.seeds.append(seed)
        if len(self.seeds) > self.cap:
            worst = min(self.seeds, key=lambda s: (s.priority, s.order))
            self.seeds.remove(worst)

    def best(self) -> Seed:
        return max(self.seeds, key=lambda s: (s.priority, -s.order))


def acceptance_probability(total_gas: int, total_cur: int,
                           temperature: float) -> float:
    """Metropolis-style keep probability for a non-improving seed.

    A zero delta is nudged to -1 so matching the best never auto-accepts;
    temperature <= 0 disables probabilistic acceptance entirely.
    """
    if temperature <= 0:
        return 0.0
    delta = total_gas - total_cur
    if delta == 0:
        delta = -1
    return min(1.0, math.exp(delta / temperature))


def is_interesting(feedback: Feedback, pool: SeedPool,
                   strategy: StrategyKind, rng: Random, *,
                   temperature: float = DEFAULT_TEMPERATURE,
                   random_accept: float = DEFAULT_RANDOM_ACCEPT) -> bool:
    """Decide whether an execution's seed enters the pool.

    VGAS keeps seeds that raise the total gas or any edge's gas, plus a
    probabilistic escape hatch; SLOWFUZZ keeps path-length records;
    PERFFUZZ keeps per-edge hit-count records; RANDOM flips a coin.
    """
    if strategy is StrategyKind.VGAS:
        if feedback.total_gas > pool.total_cur:
            return True
        for edge, gas in feedback.edge_gas.items():
            if gas > pool.cost_cur(edge):
                return True
        p = acceptance_probability(feedback.total_gas, pool.total_cur,
                                   temperature)
        return p > 0 and rng.random() < p
    if strategy is StrategyKind.SLOWFUZZ:
        return feedback.path_length > pool.best_path_len
    if strategy is StrategyKind.PERFFUZZ:
        for edge, hits in feedback.edge_hits.items():
            if hits > pool.hits_cur(edge):
                return True
        return False
    return rng.random() < random_accept


def select_seed(pool: SeedPool, rng: Random) -> Seed:
    """Mostly exploit the max-priority seed, sometimes explore uniformly."""
    if not pool.seeds:
        raise ValueError("seed pool is empty; run the initial seed first")
    if rng.random() < EXPLOIT_PROB:
        return pool.best()
    return pool.seeds[rng.randrange(len(pool.seeds))]


# ---------------------------------------------------------------------------
# Mutators
# ---------------------------------------------------------------------------

def _clamp_types(gene: bytearray, gene_map: GeneMap) -> None:
    # byte-level mutators may leave bool bytes outside {0,1}
    for e in gene_map.entries:
        if e.type.kind == "bool":
            for i in range(e.start, e.end):
                gene[i] &= 1


def _mut_bit_flip(gene, gene_map, rng, ctx):
    buf = bytearray(gene)
    bit = rng.randrange(len(buf) * 8)
    buf[bit >> 3] ^= 1 << (bit & 7)
    _clamp_types(buf, gene_map)
    return bytes(buf), gene_map


def _mut_byte_flip(gene, gene_map, rng, ctx):
    buf = bytearray(gene)
    pos = rng.randrange(len(buf))
    buf[pos] ^= 0xFF
    _clamp_types(buf, gene_map)
    return bytes(buf), gene_map


def _integer_entries(gene_map: GeneMap):
    return [e for e in gene_map.entries if e.type.is_integer]


def _mut_arith(gene, gene_map, rng, ctx):
    entries = _integer_entries(gene_map)
    if not entries:
        return _mut_byte_flip(gene, gene_map, rng, ctx)
    e = entries[rng.randrange(len(entries))]
    width = e.end - e.start
    delta = rng.randrange(1, 36)
    if rng.random() < 0.5:
        delta = -delta
    value = (int.from_bytes(gene[e.start:e.end], "big") + delta) \
        % (1 << (8 * width))
    return gene_map.replace(gene, e.key, value.to_bytes(width, "big")), \
        gene_map


def _mut_interesting(gene, gene_map, rng, ctx):
    entries = _integer_entries(gene_map)
    if not entries:
        return _mut_byte_flip(gene, gene_map, rng, ctx)
    e = entries[rng.randrange(len(entries))]
    width = e.end - e.start
    if rng.random() < 0.5:
        value = 0
    elif e.type.kind == "int":
        value = (1 << (8 * width - 1)) - 1
    else:
        value = (1 << (8 * width)) - 1
    return gene_map.replace(gene, e.key, value.to_bytes(width, "big")), \
        gene_map


def _mut_array_resize(gene, gene_map, rng, ctx):
    dyn = [e for e in gene_map.entries if e.length is not None]
    if not dyn:
        return _mut_byte_flip(gene, gene_map, rng, ctx)
    target = dyn[rng.randrange(len(dyn))]
    new_len = rng.randrange(ctx["max_array_len"] + 1)
    if target.type.array == "dyn":
        elem = target.type.elem()
        blob = b"".join(random_scalar(elem, rng) for _ in range(new_len))
    else:  # bytes / string payload
        blob = rng.randbytes(new_len)
    items = []
    for key, tdesc, length, raw in gene_map.items(gene):
        if key == target.key:
            items.append((key, tdesc, new_len, blob))
        else:
            items.append((key, tdesc, length, raw))
    return GeneMap.build(items)


def _mut_env(gene, gene_map, rng, ctx):
    names = [name for name, _ in ENV_VARS]
    if not ctx.get("randomize_sender"):
        names = [n for n in names if n not in ("sender", "origin")]
    name = names[rng.randrange(len(names))]
    tdesc = dict(ENV_VARS)[name]
    blob = random_env_value(name, tdesc, rng)
    return gene_map.replace(gene, env_key(name), blob), gene_map


MUTATORS = (
    ("bit_flip", _mut_bit_flip),
    ("byte_flip", _mut_byte_flip),
    ("arith", _mut_arith),
    ("interesting_value", _mut_interesting),
    ("array_resize", _mut_array_resize),
    ("env_regen", _mut_env),
)


def mutate(gene: bytes, gene_map: GeneMap, rng: Random,
           which: int | None = None, *,
           max_array_len: int = DEFAULT_MAX_ARRAY_LEN,
           randomize_sender: bool = False) -> tuple[bytes, GeneMap]:
    """Apply one mutator (uniformly chosen unless `which` names one) and
    return the new genome. The output is always type-valid."""
    ctx = {"max_array_len": max_array_len,
           "randomize_sender": randomize_sender}
    if which is None:
        which = rng.randrange(len(MUTATORS))
    return MUTATORS[which][1](gene, gene_map, rng, ctx)


def gas_rate(best_gas: int, time_to_best_s: float, *,
             resolution_s: float = VIRTUAL_TICK_S) -> float:
    """Efficiency metric: best gas found divided by the time to find it.
    Times below the clock resolution are floored to it."""
    t = max(time_to_best_s, resolution_s)
    return best_gas / t


# ---------------------------------------------------------------------------
# Campaign
# ---------------------------------------------------------------------------

@dataclass
class CampaignConfig:
    bin_path: str
    abi_path: str
    function: str
    strategy: StrategyKind = StrategyKind.VGAS
    time_budget_s: float | None = None
    iteration_budget: int | None = None
    rng_seed: int = 0
    gas_limit: int = BLOCK_GAS_LIMIT
    max_array_len: int = DEFAULT_MAX_ARRAY_LEN
    temperature: float = DEFAULT_TEMPERATURE
    random_accept: float = DEFAULT_RANDOM_ACCEPT
    pool_cap: int = DEFAULT_POOL_CAP
    persist_storage: bool = False
    randomize_sender: bool = False
    jobs: int = 1
    virtual_clock: bool = False
    contract_id: str = ""

    def resolved_contract_id(self) -> str:
        return self.contract_id or Path(self.bin_path).stem


class _Clock:
    """Wall clock, or a deterministic one tick per execution."""

    def __init__(self, virtual: bool):
        self.virtual = virtual
        self.executions = 0
        self._t0 = time.monotonic()

    def on_execution(self) -> None:
        self.executions += 1

    def elapsed(self) -> float:
        if self.virtual:
            return self.executions * VIRTUAL_TICK_S
        return time.monotonic() - self._t0


def run_campaign(config: CampaignConfig) -> CampaignReport:
    """Algorithm: seed the pool with one random genome, then repeatedly
    pick a seed, derive one mutant per mutator, execute each, and keep the
    interesting ones - until the time and/or iteration budget runs out."""
    rng = Random(config.rng_seed)
    session = harness.FuzzSession.open(
        config.bin_path, config.abi_path, config.function, rng,
        gas_limit=config.gas_limit,
        randomize_sender=config.randomize_sender,
        persist_storage=config.persist_storage)

    clock = _Clock(config.virtual_clock)
    pool = SeedPool(cap=config.pool_cap)

    best_gas = 0
    best_seed: Seed | None = None
    time_to_best = 0.0
    series: list[tuple[float, int]] = []
    out_of_gas_seen = False
    worker_pool = None
    if config.jobs > 1 and not config.persist_storage:
        worker_pool = ProcessPoolExecutor(max_workers=config.jobs)

    def record(gene, gene_map, feedback, iteration) -> Seed:
        nonlocal best_gas, best_seed, time_to_best, out_of_gas_seen
        clock.on_execution()
        session.merge_edges(feedback)
        seed = Seed(gene=gene, gene_map=gene_map, feedback=feedback,
                    priority=feedback.total_gas, birth_iteration=iteration)
        if feedback.status is Status.OUT_OF_GAS:
            out_of_gas_seen = True
        if feedback.total_gas > best_gas:
            best_gas = feedback.total_gas
            best_seed = seed
            time_to_best = clock.elapsed()
            series.append((time_to_best, best_gas))
        return seed

    try:
        gene, gene_map = random_gene(session.specs, rng)
        gene = session.apply_env_defaults(gene, gene_map)
        feedback = session.run(gene, gene_map)
        seed = record(gene, gene_map, feedback, 0)
        pool.observe(feedback)
        pool.push(seed)

        iteration = 0
        while True:
            if config.iteration_budget is not None \
                    and iteration >= config.iteration_budget:
                break
            if config.time_budget_s is not None \
                    and clock.elapsed() >= config.time_budget_s:
                break
            if config.iteration_budget is None \
                    and config.time_budget_s is None:
                break
            iteration += 1

            parent = select_seed(pool, rng)
            mutants = [
                mutate(parent.gene, parent.gene_map, rng, which=mi,
                       max_array_len=config.max_array_len,
                       randomize_sender=config.randomize_sender)
                for mi in range(len(MUTATORS))
            ]
            feedbacks = session.run_batch(mutants, worker_pool)
            stop = False
            for (mgene, mmap), fb in zip(mutants, feedbacks):
                seed = record(mgene, mmap, fb, iteration)
                accept = is_interesting(
                    fb, pool, config.strategy, rng,
                    temperature=config.temperature,
                    random_accept=config.random_accept)
                pool.observe(fb)
                if accept:
                    pool.push(seed)
                if config.time_budget_s is not None \
                        and clock.elapsed() >= config.time_budget_s:
                    stop = True
                    break
            if stop:
                break
    finally:
        if worker_pool is not None:
            worker_pool.shutdown()

    assert best_seed is not None
    hit_cap = any(e.length == config.max_array_len
                  for e in best_seed.gene_map.entries
                  if e.length is not None)
    env = read_env(best_seed.gene, best_seed.gene_map)
    report = CampaignReport(
        contract=config.resolved_contract_id(),
        function=session.target.signature(),
        strategy=config.strategy.value,
        rng_seed=config.rng_seed,
        time_budget_s=config.time_budget_s,
        iteration_budget=config.iteration_budget,
        iterations_run=iteration,
        executions=clock.executions,
        best_gas=best_gas,
        time_to_best_s=time_to_best,
        gas_rate=gas_rate(best_gas, time_to_best),
        best_inputs=gene_values(session.target, best_seed.gene,
                                best_seed.gene_map),
        best_env={k: (hex(v) if dict(ENV_VARS)[k].kind == "address" else v)
                  for k, v in env.items()},
        best_status=best_seed.feedback.status.value,
        series=series,
        edge_profile=[(f"{a}->{b}", slot.max_gas, slot.max_hits)
                      for (a, b), slot in sorted(pool.slots.items())],
        hit_array_cap=hit_cap,
        out_of_gas_observed=out_of_gas_seen,
    )
    report.attach_estimate(static_estimate(session.runner.wcfg))
    return report


def run_comparison(config: CampaignConfig,
                   strategies: tuple[StrategyKind, ...] = tuple(StrategyKind)
                   ) -> dict[str, CampaignReport]:
    """Run every strategy with the same budget and RNG seed (the rivals
    comparison); returns reports keyed by strategy value."""
    out = {}
    for strategy in strategies:
        cfg = replace(config, strategy=strategy)
        out[strategy.value] = run_campaign(cfg)
    return out
