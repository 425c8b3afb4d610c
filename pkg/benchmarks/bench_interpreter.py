#!/usr/bin/env python3
"""Benchmark the compiled interpreter core against the pure-Python one.

Workload: the bundled loop contract paying 512 addresses (~18k
instructions per execution) plus a Keccak-heavy token transfer. Both cores
run the identical byte-for-byte workload; the pure core is loaded from
source next to the extension.

Usage: python benchmarks/bench_interpreter.py [repeats]
"""

import sys
import time
from pathlib import Path
from random import Random

REPO = Path(__file__).resolve().parent.parent

from gasfuzz import evm
from gasfuzz.abi import GeneMap, param_key, random_gene
from gasfuzz import harness


def build_workload(n_addrs: int):
    bin_path = REPO / "corpus" / "distributor.bin"
    abi_path = REPO / "corpus" / "distributor.abi"
    rng = Random(0)
    session = harness.FuzzSession.open(str(bin_path), str(abi_path),
                                       "distribute", rng)
    gene, gmap = random_gene(session.specs, rng)
    gene = session.apply_env_defaults(gene, gmap)
    key = param_key("distribute", 2, "_addrs", session.target.inputs[0][1])
    items = [(k, t, n_addrs if k == key else ln,
              rng.randbytes(20 * n_addrs) if k == key else raw)
             for k, t, ln, raw in gmap.items(gene)]
    gene, gmap = GeneMap.build(items)
    return session, gene, gmap


def run_with_core(core, session, gene, gmap, repeats: int):
    saved = evm._core
    evm._core = core
    try:
        t0 = time.perf_counter()
        steps = 0
        for _ in range(repeats):
            fb = session.run(gene, gmap)
            steps += fb.path_length
        dt = time.perf_counter() - t0
        return dt, fb.total_gas
    finally:
        evm._core = saved


def main() -> None:
    repeats = int(sys.argv[1]) if len(sys.argv) > 1 else 20
    compiled = evm._load_core(force_pure=False)
    pure = evm._load_core(force_pure=True)
    if compiled.__file__.endswith(".py"):
        print("extension not built: comparing pure against itself")

    session, gene, gmap = build_workload(512)
    print(f"workload: distribute() over 512 addresses, {repeats} repeats")
    for label, core in (("compiled", compiled), ("pure", pure)):
        dt, gas = run_with_core(core, session, gene, gmap, repeats)
        rate = repeats / dt
        print(f"  {label:9s} {dt:8.3f} s   {rate:7.2f} exec/s   "
              f"(total gas per exec: {gas:,})")
    dt_c, _ = run_with_core(compiled, session, gene, gmap, repeats)
    dt_p, _ = run_with_core(pure, session, gene, gmap, repeats)
    print(f"speedup: {dt_p / dt_c:.2f}x")


if __name__ == "__main__":
    main()
