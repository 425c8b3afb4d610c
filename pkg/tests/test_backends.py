"""The compiled and pure-Python interpreter cores must agree exactly."""

import random

import pytest

from gasfuzz import evm
from gasfuzz.bytecode import disassemble
from gasfuzz.evm import ExecPlan, ExecutionEnv, WorldState
from gasfuzz.wcfg import build_wcfg


pure = evm._load_core(force_pure=True)
active = evm._core


def test_backend_reported():
    assert evm.BACKEND in ("compiled", "pure")


def test_pure_core_loads_from_source():
    assert pure.__file__.endswith(".py")


@pytest.mark.skipif(active.__file__.endswith(".py"),
                    reason="extension not built; nothing to compare")
def test_cores_agree_on_random_codes():
    rng = random.Random(77)
    for _ in range(300):
        code = rng.randbytes(rng.randrange(0, 120))
        calldata = rng.randbytes(rng.randrange(0, 64))
        plan = ExecPlan(code, build_wcfg(disassemble(code)))
        env = ExecutionEnv(coinbase=1, difficulty=2, block_number=3,
                           timestamp=4, sender=5, origin=6,
                           gas_limit=200_000)
        worlds = [WorldState(storage={0: 7, 5: 1}) for _ in range(2)]
        outs = [core.run(code, calldata, env.as_tuple(), w,
                         plan.as_tuple(), env.gas_limit, 21_000, None)
                for core, w in zip((active, pure), worlds)]
        assert outs[0] == outs[1]
        assert worlds[0].storage == worlds[1].storage
        assert worlds[0].balances == worlds[1].balances


@pytest.mark.skipif(active.__file__.endswith(".py"),
                    reason="extension not built; nothing to compare")
def test_cores_agree_on_corpus_campaign(distributor_files, monkeypatch):
    from gasfuzz.fuzzer import CampaignConfig, run_campaign
    from gasfuzz.report import dumps_report

    cfg = CampaignConfig(bin_path=str(distributor_files[0]),
                         abi_path=str(distributor_files[1]),
                         function="distribute", iteration_budget=6,
                         rng_seed=11, virtual_clock=True)
    baseline = dumps_report(run_campaign(cfg))
    monkeypatch.setattr(evm, "_core", pure)
    try:
        assert dumps_report(run_campaign(cfg)) == baseline
    finally:
        monkeypatch.setattr(evm, "_core", active)


def test_keccak_agrees_between_cores():
    rng = random.Random(3)
    for _ in range(50):
        blob = rng.randbytes(rng.randrange(0, 300))
        assert active.keccak256(blob) == pure.keccak256(blob)
