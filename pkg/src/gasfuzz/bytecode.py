"""EVM bytecode decoding and the static gas schedule.

The fee schedule is pinned to the pre-Istanbul forks (Spurious Dragon
through Petersburg): SLOAD 200, BALANCE 400, CALL 700, calldata 4/68 per
zero/non-zero byte. Later forks would be a new table, not new code.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

# Sentinel returned by static_gas for INVALID/undefined opcodes: executing
# one consumes all remaining gas.
CONSUME_ALL = object()


@dataclass(frozen=True)
class GasScheduleEntry:
    """Static metadata for one opcode."""

    opcode: int
    name: str
    base_cost: int
    pops: int
    pushes: int
    dynamic: bool = False       # operand/state-dependent extra cost exists
    push_width: int = 0         # immediate byte count, PUSH family only


def _schedule() -> dict[int, GasScheduleEntry]:
    # (opcode, name, base, pops, pushes, dynamic)
    rows = [
        (0x00, "STOP", 0, 0, 0, False),
        (0x01, "ADD", 3, 2, 1, False),
        (0x02, "MUL", 5, 2, 1, False),
        (0x03, "SUB", 3, 2, 1, False),
        (0x04, "DIV", 5, 2, 1, False),
        (0x05, "SDIV", 5, 2, 1, False),
        (0x06, "MOD", 5, 2, 1, False),
        (0x07, "SMOD", 5, 2, 1, False),
        (0x08, "ADDMOD", 8, 3, 1, False),
        (0x09, "MULMOD", 8, 3, 1, False),
        (0x0A, "EXP", 10, 2, 1, True),
        (0x0B, "SIGNEXTEND", 5, 2, 1, False),
        (0x10, "LT", 3, 2, 1, False),
        (0x11, "GT", 3, 2, 1, False),
        (0x12, "SLT", 3, 2, 1, False),
        (0x13, "SGT", 3, 2, 1, False),
        (0x14, "EQ", 3, 2, 1, False),
        (0x15, "ISZERO", 3, 1, 1, False),
        (0x16, "AND", 3, 2, 1, False),
        (0x17, "OR", 3, 2, 1, False),
        (0x18, "XOR", 3, 2, 1, False),
        (0x19, "NOT", 3, 1, 1, False),
        (0x1A, "BYTE", 3, 2, 1, False),
        (0x1B, "SHL", 3, 2, 1, False),
        (0x1C, "SHR", 3, 2, 1, False),
        (0x1D, "SAR", 3, 2, 1, False),
        (0x20, "SHA3", 30, 2, 1, True),
        (0x30, "ADDRESS", 2, 0, 1, False),
        (0x31, "BALANCE", 400, 1, 1, False),
        (0x32, "ORIGIN", 2, 0, 1, False),
        (0x33, "CALLER", 2, 0, 1, False),
        (0x34, "CALLVALUE", 2, 0, 1, False),
        (0x35, "CALLDATALOAD", 3, 1, 1, False),
        (0x36, "CALLDATASIZE", 2, 0, 1, False),
        (0x37, "CALLDATACOPY", 3, 3, 0, True),
        (0x38, "CODESIZE", 2, 0, 1, False),
        (0x39, "CODECOPY", 3, 3, 0, True),
        (0x3A, "GASPRICE", 2, 0, 1, False),
        (0x3B, "EXTCODESIZE", 700, 1, 1, False),
        (0x3C, "EXTCODECOPY", 700, 4, 0, True),
        (0x3D, "RETURNDATASIZE", 2, 0, 1, False),
        (0x3E, "RETURNDATACOPY", 3, 3, 0, True),
        (0x3F, "EXTCODEHASH", 400, 1, 1, False),
        (0x40, "BLOCKHASH", 20, 1, 1, False),
        (0x41, "COINBASE", 2, 0, 1, False),
        (0x42, "TIMESTAMP", 2, 0, 1, False),
        (0x43, "NUMBER", 2, 0, 1, False),
        (0x44, "DIFFICULTY", 2, 0, 1, False),
        (0x45, "GASLIMIT", 2, 0, 1, False),
        (0x50, "POP", 2, 1, 0, False),
        (0x51, "MLOAD", 3, 1, 1, True),
        (0x52, "MSTORE", 3, 2, 0, True),
        (0x53, "MSTORE8", 3, 2, 0, True),
        (0x54, "SLOAD", 200, 1, 1, False),
        (0x55, "SSTORE", 0, 2, 0, True),
        (0x56, "JUMP", 8, 1, 0, False),
        (0x57, "JUMPI", 10, 2, 0, False),
        (0x58, "PC", 2, 0, 1, False),
        (0x59, "MSIZE", 2, 0, 1, False),
        (0x5A, "GAS", 2, 0, 1, False),
        (0x5B, "JUMPDEST", 1, 0, 0, False),
        (0xF0, "CREATE", 32000, 3, 1, True),
        (0xF1, "CALL", 700, 7, 1, True),
        (0xF2, "CALLCODE", 700, 7, 1, True),
        (0xF3, "RETURN", 0, 2, 0, True),
        (0xF4, "DELEGATECALL", 700, 6, 1, True),
        (0xF5, "CREATE2", 32000, 4, 1, True),
        (0xFA, "STATICCALL", 700, 6, 1, True),
        (0xFD, "REVERT", 0, 2, 0, True),
        (0xFE, "INVALID", 0, 0, 0, False),
        (0xFF, "SELFDESTRUCT", 5000, 1, 0, True),
    ]
    table = {
        op: GasScheduleEntry(op, name, base, pops, pushes, dyn)
        for op, name, base, pops, pushes, dyn in rows
    }
    for i in range(32):  # PUSH1..PUSH32
        op = 0x60 + i
        table[op] = GasScheduleEntry(op, f"PUSH{i + 1}", 3, 0, 1,
                                     push_width=i + 1)
    for i in range(16):  # DUP1..DUP16
        op = 0x80 + i
        table[op] = GasScheduleEntry(op, f"DUP{i + 1}", 3, i + 1, i + 2)
    for i in range(16):  # SWAP1..SWAP16
        op = 0x90 + i
        table[op] = GasScheduleEntry(op, f"SWAP{i + 1}", 3, i + 2, i + 2)
    for n in range(5):  # LOG0..LOG4
        op = 0xA0 + n
        table[op] = GasScheduleEntry(op, f"LOG{n}", 375 + 375 * n,
                                     2 + n, 0, dynamic=True)
    return table

SCHEDULE: dict[int, GasScheduleEntry] = _schedule()

# Named opcode constants for the handful of opcodes other modules test by id.
STOP, ADD, MUL, SUB = 0x00, 0x01, 0x02, 0x03
SHA3 = 0x20
CALLDATALOAD, CALLDATASIZE, CALLDATACOPY = 0x35, 0x36, 0x37
MLOAD, MSTORE, MSTORE8, SLOAD, SSTORE = 0x51, 0x52, 0x53, 0x54, 0x55
JUMP, JUMPI, PC, MSIZE, GAS, JUMPDEST = 0x56, 0x57, 0x58, 0x59, 0x5A, 0x5B
PUSH1, PUSH32 = 0x60, 0x7F
CALL, RETURN, REVERT, INVALID, SELFDESTRUCT = 0xF1, 0xF3, 0xFD, 0xFE, 0xFF

# Opcodes that can only appear as the last instruction of a basic block.
TERMINATORS = frozenset({STOP, JUMP, JUMPI, RETURN, REVERT, SELFDESTRUCT,
                         INVALID})

# Intrinsic transaction gas: base charge plus creation surcharge plus
# per-byte payload pricing (zero byte / non-zero byte).
TX_BASE_GAS = 21_000
TX_CREATE_GAS = 32_000
TX_ZERO_BYTE_GAS = 4
TX_NONZERO_BYTE_GAS = 68


def opcode_name(opcode: int) -> str:
    entry = SCHEDULE.get(opcode)
    return entry.name if entry is not None else "INVALID"


def is_push(opcode: int) -> bool:
    return PUSH1 <= opcode <= PUSH32


def is_terminator(opcode: int) -> bool:
    """True if the opcode ends a basic block (undefined bytes count)."""
    return opcode in TERMINATORS or opcode not in SCHEDULE


def static_gas(opcode: int):
    """Static (operand-independent) gas charge of an opcode.

    Dynamic opcodes report only their fixed component; INVALID and
    undefined bytes return the CONSUME_ALL sentinel.
    """
    entry = SCHEDULE.get(opcode)
    if entry is None or opcode == INVALID:
        return CONSUME_ALL
    return entry.base_cost


@dataclass(frozen=True)
class Instruction:
    """One decoded instruction.

    `immediate` is present exactly for the PUSH family; when the code ends
    mid-immediate the missing trailing bytes are zero-padded and
    `truncated` is set.
    """

    offset: int
    opcode: int
    immediate: bytes | None = None
    truncated: bool = False

    @property
    def name(self) -> str:
        return opcode_name(self.opcode)

    @property
    def size(self) -> int:
        return 1 + (len(self.immediate) if self.immediate is not None else 0)

    @property
    def push_value(self) -> int:
        if self.immediate is None:
            raise ValueError(f"{self.name} has no immediate")
        return int.from_bytes(self.immediate, "big")

    def __str__(self) -> str:
        if self.immediate is not None:
            return f"{self.name} 0x{self.immediate.hex()}"
        return self.name


def disassemble(code: bytes) -> list[Instruction]:
    """Decode raw bytecode into an instruction stream.

    Never fails: unknown opcodes decode as single-byte instructions with
    INVALID semantics, and a PUSH whose immediate runs off the end of the
    code is zero-padded and flagged truncated.
    """
    out: list[Instruction] = []
    pc = 0
    n = len(code)
    while pc < n:
        op = code[pc]
        entry = SCHEDULE.get(op)
        if entry is not None and entry.push_width:
            w = entry.push_width
            imm = code[pc + 1:pc + 1 + w]
            truncated = len(imm) < w
            if truncated:
                imm = imm + b"\x00" * (w - len(imm))
            out.append(Instruction(pc, op, bytes(imm), truncated))
            pc += 1 + w
        else:
            out.append(Instruction(pc, op))
            pc += 1
    return out


def assemble(instructions: Iterable[Instruction]) -> bytes:
    """Inverse of disassemble (modulo zero-padded truncated tails)."""
    parts = []
    for ins in instructions:
        parts.append(bytes([ins.opcode]))
        if ins.immediate is not None:
            parts.append(ins.immediate)
    return b"".join(parts)


def jumpdest_offsets(instructions: Sequence[Instruction]) -> frozenset[int]:
    """Offsets that are valid JUMP targets."""
    return frozenset(i.offset for i in instructions if i.opcode == JUMPDEST)


def parse_hex(text: str) -> bytes:
    """Parse a .bin-style hex payload: optional 0x prefix and whitespace."""
    cleaned = text.strip()
    if cleaned.startswith(("0x", "0X")):
        cleaned = cleaned[2:]
    cleaned = "".join(cleaned.split())
    if len(cleaned) % 2:
        raise ValueError(f"odd-length hex string ({len(cleaned)} digits)")
    try:
        return bytes.fromhex(cleaned)
    except ValueError as exc:
        raise ValueError(f"invalid hex payload: {exc}") from None


def load_bin(path: str | Path) -> bytes:
    """Read a .bin / .bin-runtime artifact (ASCII hex)."""
    return parse_hex(Path(path).read_text())
