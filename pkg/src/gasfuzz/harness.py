"""Contract lifecycle: deploy init code, build per-function runners, wire
the environment genome into executions.

The world is a fixed-address sandbox: the contract lives at a constant
address, the deployer is the default transaction sender (so owner-guarded
functions stay reachable), and the deployer's balance is large enough that
value transfers never fail for balance reasons.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from random import Random

from .abi import (FunctionSpec, GeneMap, encode_args, find_function,
                  parse_abi, read_env, selector, write_env)
from .bytecode import disassemble, load_bin
from .evm import (BLOCK_GAS_LIMIT, ExecPlan, ExecutionEnv, ExecutionResult,
                  Feedback, Status, WorldState, execute)
from .wcfg import WCFG, build_wcfg

CONTRACT_ADDRESS = 0x000000000000000000000000000000000000C0DE
DEPLOYER_ADDRESS = 0x00000000000000000000000000000000DEADBEEF
DEPLOYER_BALANCE = 1 << 128


class DeployError(RuntimeError):
    def __init__(self, status: Status):
        super().__init__(f"contract construction failed: {status.value}")
        self.status = status


@dataclass
class ContractInstance:
    runtime_code: bytes
    address: int
    world: WorldState           # state snapshot after construction
    deploy_result: ExecutionResult | None


@dataclass
class Runner:
    """Prepared dispatch for one function: its spec, selector, and the
    runtime code's weighted CFG / execution tables."""

    spec: FunctionSpec
    selector: bytes
    wcfg: WCFG
    plan: ExecPlan


def fresh_world() -> WorldState:
    world = WorldState(address=CONTRACT_ADDRESS)
    world.balances[DEPLOYER_ADDRESS] = DEPLOYER_BALANCE
    world.existing.add(DEPLOYER_ADDRESS)
    return world


def deploy(init_code: bytes, constructor_args: bytes = b"",
           env: ExecutionEnv | None = None,
           world: WorldState | None = None) -> ContractInstance:
    """Execute the init code (argument bytes appended) as a creation
    transaction; the returned data becomes the runtime code."""
    world = world if world is not None else fresh_world()
    if env is None:
        env = ExecutionEnv(sender=DEPLOYER_ADDRESS, origin=DEPLOYER_ADDRESS)
    result = execute(init_code + constructor_args, b"", env, world,
                     is_create=True)
    if result.status is not Status.SUCCESS:
        raise DeployError(result.status)
    return ContractInstance(runtime_code=result.return_data,
                            address=world.address, world=world,
                            deploy_result=result)


def build_runner(instance: ContractInstance, spec: FunctionSpec) -> Runner:
    graph = build_wcfg(disassemble(instance.runtime_code))
    return Runner(spec=spec, selector=selector(spec), wcfg=graph,
                  plan=ExecPlan(instance.runtime_code, graph))


def env_from_gene(gene: bytes, gene_map: GeneMap,
                  gas_limit: int = BLOCK_GAS_LIMIT) -> ExecutionEnv:
    env = read_env(gene, gene_map)
    return ExecutionEnv(coinbase=env["coinbase"],
                        difficulty=env["difficulty"],
                        block_number=env["number"],
                        timestamp=env["timestamp"],
                        sender=env["sender"],
                        origin=env["origin"],
                        call_value=0,
                        gas_limit=gas_limit)


def run_function(instance: ContractInstance, runner: Runner, gene: bytes,
                 gene_map: GeneMap, *, gas_limit: int = BLOCK_GAS_LIMIT,
                 persist_storage: bool = False) -> Feedback:
    """Encode the gene into calldata, run the function, return feedback.
    Execution statuses ride inside the feedback; they never raise."""
    return run_function_full(instance, runner, gene, gene_map,
                             gas_limit=gas_limit,
                             persist_storage=persist_storage).feedback


def run_function_full(instance: ContractInstance, runner: Runner,
                      gene: bytes, gene_map: GeneMap, *,
                      gas_limit: int = BLOCK_GAS_LIMIT,
                      persist_storage: bool = False,
                      trace: list | None = None) -> ExecutionResult:
    calldata = encode_args(runner.spec, gene, gene_map)
    env = env_from_gene(gene, gene_map, gas_limit)
    world = instance.world if persist_storage else instance.world.copy()
    return execute(instance.runtime_code, calldata, env, world,
                   plan=runner.plan, trace=trace)


def _parallel_task(args) -> Feedback:
    """Top-level so ProcessPoolExecutor can pickle it."""
    (code, plan_parts, storage, balances, existing, stub_success,
     stub_return, env_fields, calldata) = args
    plan = ExecPlan.__new__(ExecPlan)
    plan.code = code
    plan.jumpdests, plan.start2block, plan.last_offsets = plan_parts
    world = WorldState(address=env_fields["address"], storage=storage,
                       balances=balances, existing=existing,
                       stub_success=stub_success, stub_return=stub_return)
    env = ExecutionEnv(**{k: v for k, v in env_fields.items()
                          if k != "address"})
    return execute(code, calldata, env, world, plan=plan).feedback


@dataclass
class FuzzSession:
    """Everything a campaign needs to execute genes against one target
    function of one deployed contract."""

    instance: ContractInstance
    runner: Runner
    specs: list[FunctionSpec]
    target: FunctionSpec
    gas_limit: int
    randomize_sender: bool
    persist_storage: bool

    @classmethod
    def open(cls, bin_path: str, abi_path: str, function: str, rng: Random,
             *, gas_limit: int = BLOCK_GAS_LIMIT,
             randomize_sender: bool = False,
             persist_storage: bool = False) -> "FuzzSession":
        from .abi import random_gene  # deferred: only for constructor args

        code = load_bin(bin_path)
        specs = parse_abi(Path(abi_path).read_text())
        target = find_function(specs, function)
        if str(bin_path).endswith(".bin-runtime"):
            world = fresh_world()
            instance = ContractInstance(
                runtime_code=code, address=world.address, world=world,
                deploy_result=None)
        else:
            ctor = [s for s in specs if s.is_constructor]
            ctor_args = b""
            if ctor and ctor[0].inputs:
                g, m = random_gene(ctor, rng, max_array=2)
                ctor_args = encode_args(ctor[0], g, m)
            instance = deploy(code, ctor_args)
        runner = build_runner(instance, target)
        return cls(instance=instance, runner=runner, specs=specs,
                   target=target, gas_limit=gas_limit,
                   randomize_sender=randomize_sender,
                   persist_storage=persist_storage)

    def apply_env_defaults(self, gene: bytes, gene_map: GeneMap) -> bytes:
        """Unless the campaign randomizes the sender, the initial genome
        calls as the deployer so owner guards pass."""
        if self.randomize_sender:
            return gene
        gene = write_env(gene, gene_map, "sender", DEPLOYER_ADDRESS)
        gene = write_env(gene, gene_map, "origin", DEPLOYER_ADDRESS)
        return gene

    def run(self, gene: bytes, gene_map: GeneMap) -> Feedback:
        return run_function(self.instance, self.runner, gene, gene_map,
                            gas_limit=self.gas_limit,
                            persist_storage=self.persist_storage)

    def run_batch(self, mutants, worker_pool) -> list[Feedback]:
        """Execute a mutant batch, optionally on parallel workers; results
        come back in mutant order either way, so parallelism never changes
        a campaign's outcome."""
        if worker_pool is None:
            return [self.run(g, m) for g, m in mutants]
        tasks = []
        base = self.instance.world
        for gene, gene_map in mutants:
            env = env_from_gene(gene, gene_map, self.gas_limit)
            env_fields = {
                "address": base.address,
                "coinbase": env.coinbase, "difficulty": env.difficulty,
                "block_number": env.block_number,
                "timestamp": env.timestamp, "sender": env.sender,
                "origin": env.origin, "call_value": env.call_value,
                "gas_limit": env.gas_limit,
            }
            tasks.append((self.instance.runtime_code,
                          self.runner.plan.as_tuple(),
                          dict(base.storage), dict(base.balances),
                          set(base.existing), base.stub_success,
                          base.stub_return, env_fields,
                          encode_args(self.runner.spec, gene, gene_map)))
        return list(worker_pool.map(_parallel_task, tasks))

    def merge_edges(self, feedback: Feedback) -> None:
        """Fold runtime-discovered edges into the campaign's graph."""
        for edge in feedback.edge_gas:
            if edge not in self.runner.wcfg.edges:
                self.runner.wcfg.add_dynamic_edge(*edge)
