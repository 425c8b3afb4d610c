"""Public interface to the gas-metered interpreter.

Loads the compiled core when the Cython extension was built, otherwise the
identical pure-Python source. `GASFUZZ_PURE=1` forces the pure core, which
is how the benchmark and the backend-parity tests get both in one process.
"""

from __future__ import annotations

import enum
import importlib.util
import os
from dataclasses import dataclass, field
from pathlib import Path

from .bytecode import disassemble, jumpdest_offsets


def _load_core(force_pure: bool):
    if not force_pure:
        from . import _interp
        return _interp
    path = Path(__file__).with_name("_interp.py")
    spec = importlib.util.spec_from_file_location("gasfuzz._interp_pure", path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


_core = _load_core(bool(os.environ.get("GASFUZZ_PURE")))
BACKEND = "compiled" if _core.__file__.endswith((".so", ".pyd")) else "pure"

keccak256 = _core.keccak256
intrinsic_gas = _core.intrinsic_gas
memory_expansion_cost = _core.memory_expansion_cost
sstore_cost = _core.sstore_cost
call_cost = _core.call_cost

CALL_STIPEND = _core.CALL_STIPEND
SSTORE_CLEAR_REFUND = _core.SSTORE_CLEAR_REFUND

# Block gas limit used as the default per-execution allowance.
BLOCK_GAS_LIMIT = 80_039_143

ADDRESS_MASK = (1 << 160) - 1


class Status(enum.Enum):
    SUCCESS = "success"
    REVERT = "revert"
    OUT_OF_GAS = "out_of_gas"
    INVALID_OP = "invalid_op"
    STACK_ERROR = "stack_error"
    BAD_JUMP = "bad_jump"


_STATUS_BY_CODE = {
    _core.ST_SUCCESS: Status.SUCCESS,
    _core.ST_REVERT: Status.REVERT,
    _core.ST_OUT_OF_GAS: Status.OUT_OF_GAS,
    _core.ST_INVALID_OP: Status.INVALID_OP,
    _core.ST_STACK_ERROR: Status.STACK_ERROR,
    _core.ST_BAD_JUMP: Status.BAD_JUMP,
}


@dataclass
class ExecutionEnv:
    """Transaction environment: block context plus caller identity."""

    coinbase: int = 0
    difficulty: int = 0
    block_number: int = 0
    timestamp: int = 0
    sender: int = 0
    origin: int = 0
    call_value: int = 0
    gas_limit: int = BLOCK_GAS_LIMIT

    def as_tuple(self) -> tuple:
        return (self.coinbase & ADDRESS_MASK, self.difficulty,
                self.block_number, self.timestamp,
                self.sender & ADDRESS_MASK, self.origin & ADDRESS_MASK,
                self.call_value)


@dataclass
class WorldState:
    """Single-contract world: one account under test plus bookkeeping for
    everyone it pays.

    Unset storage keys read as 0. Addresses absent from `existing` are
    "new" for CALL pricing and join the set when value reaches them.
    External callees never run; they are priced stubs returning
    `stub_return` with `stub_success`.
    """

    address: int = 0xC0DE
    storage: dict[int, int] = field(default_factory=dict)
    balances: dict[int, int] = field(default_factory=dict)
    existing: set[int] = field(default_factory=set)
    stub_success: int = 1
    stub_return: bytes = b""

    def __post_init__(self):
        self.existing.add(self.address)
        self.balances.setdefault(self.address, 1 << 127)

    def copy(self) -> "WorldState":
        return WorldState(
            address=self.address,
            storage=dict(self.storage),
            balances=dict(self.balances),
            existing=set(self.existing),
            stub_success=self.stub_success,
            stub_return=self.stub_return,
        )


@dataclass
class Feedback:
    """Per-execution search signal: total gas plus per-edge attribution."""

    total_gas: int
    edge_gas: dict[tuple[int, int], int]
    edge_hits: dict[tuple[int, int], int]
    terminal_gas: int
    intrinsic_gas: int
    status: Status

    @property
    def path_length(self) -> int:
        return sum(self.edge_hits.values())


@dataclass
class ExecutionResult:
    status: Status
    gas_used: int            # after refund
    gas_used_raw: int        # before refund
    refund: int              # refund actually applied
    refund_accumulated: int
    return_data: bytes
    feedback: Feedback
    steps: int


class ExecPlan:
    """Pre-derived execution tables for one code blob, reusable across
    executions (jump destinations plus optional block maps for edge
    attribution)."""

    __slots__ = ("code", "jumpdests", "start2block", "last_offsets")

    def __init__(self, code: bytes, wcfg=None):
        self.code = code
        self.jumpdests = jumpdest_offsets(disassemble(code))
        if wcfg is not None and wcfg.blocks:
            self.start2block = {b.start_offset: b.id for b in wcfg.blocks}
            self.last_offsets = {b.instructions[-1].offset
                                 for b in wcfg.blocks if b.instructions}
        else:
            self.start2block = None
            self.last_offsets = None

    def as_tuple(self) -> tuple:
        return (self.jumpdests, self.start2block, self.last_offsets)


def execute(code: bytes, calldata: bytes, env: ExecutionEnv,
            world: WorldState, wcfg=None, *, is_create: bool = False,
            plan: ExecPlan | None = None,
            trace: list | None = None) -> ExecutionResult:
    """Run one transaction against `code` and meter its gas.

    The world is modified in place on success; on revert or an exceptional
    halt its storage/balances are rolled back. Edge feedback is recorded
    when `wcfg` (or a prebuilt `plan` carrying block maps) is supplied.

    Note the intrinsic charge prices the init code itself for creation
    transactions, and the calldata otherwise.
    """
    if plan is None:
        plan = ExecPlan(code, wcfg)
    intrinsic = intrinsic_gas(code if is_create else calldata, is_create)

    snap_storage = dict(world.storage)
    snap_balances = dict(world.balances)
    snap_existing = set(world.existing)

    (code_status, used, raw, applied, accum_refund, ret, edge_gas,
     edge_hits, terminal, steps) = _core.run(
        code, calldata, env.as_tuple(), world, plan.as_tuple(),
        env.gas_limit, intrinsic, trace)

    status = _STATUS_BY_CODE[code_status]
    if status is not Status.SUCCESS:
        world.storage.clear()
        world.storage.update(snap_storage)
        world.balances.clear()
        world.balances.update(snap_balances)
        world.existing.clear()
        world.existing.update(snap_existing)

    feedback = Feedback(total_gas=used, edge_gas=edge_gas,
                        edge_hits=edge_hits, terminal_gas=terminal,
                        intrinsic_gas=intrinsic, status=status)
    return ExecutionResult(status=status, gas_used=used, gas_used_raw=raw,
                           refund=applied, refund_accumulated=accum_refund,
                           return_data=ret, feedback=feedback, steps=steps)
