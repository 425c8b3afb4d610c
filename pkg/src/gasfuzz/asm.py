"""A tiny two-pass assembler for hand-writing test and corpus bytecode.

Programs are flat lists mixing mnemonics, immediate values and labels:

    ["label:", PUSH with int auto-width via push(n), "@label", "JUMP", ...]

Label references always assemble as PUSH2 so offsets are stable across
passes.
"""

from __future__ import annotations

from .bytecode import SCHEDULE, opcode_name

_BY_NAME = {e.name: e.opcode for e in SCHEDULE.values()}


def push(value: int, width: int | None = None) -> bytes:
    """PUSHn with the smallest width that fits (or an explicit width)."""
    if width is None:
        width = max(1, (value.bit_length() + 7) // 8)
    if not 1 <= width <= 32:
        raise ValueError(f"push width {width} out of range")
    return bytes([0x60 + width - 1]) + value.to_bytes(width, "big")


def push_bytes(payload: bytes) -> bytes:
    if not 1 <= len(payload) <= 32:
        raise ValueError("PUSH immediate must be 1..32 bytes")
    return bytes([0x60 + len(payload) - 1]) + payload


def assemble(program: list) -> bytes:
    """Assemble a program. Items may be:

    - str mnemonic ("ADD", "JUMPDEST", ...)
    - "name:" to define a label, "@name" to push its offset (PUSH2)
    - bytes: raw code emitted verbatim (e.g. from push())
    - int 0..255: a raw byte
    """
    labels: dict[str, int] = {}
    # pass 1: sizes
    offset = 0
    for item in program:
        if isinstance(item, str) and item.endswith(":"):
            labels[item[:-1]] = offset
        elif isinstance(item, str) and item.startswith("@"):
            offset += 3
        elif isinstance(item, str):
            if item not in _BY_NAME:
                raise ValueError(f"unknown mnemonic {item!r}")
            offset += 1
        elif isinstance(item, bytes):
            offset += len(item)
        elif isinstance(item, int):
            offset += 1
        else:
            raise TypeError(f"bad program item {item!r}")
    # pass 2: emit
    out = bytearray()
    for item in program:
        if isinstance(item, str) and item.endswith(":"):
            continue
        if isinstance(item, str) and item.startswith("@"):
            name = item[1:]
            if name not in labels:
                raise ValueError(f"undefined label {name!r}")
            out += push(labels[name], width=2)
        elif isinstance(item, str):
            out.append(_BY_NAME[item])
        elif isinstance(item, bytes):
            out += item
        else:
            out.append(item)
    return bytes(out)


def mnemonics(code: bytes) -> list[str]:
    """Opcode names of a code blob, for quick assertions."""
    from .bytecode import disassemble

    return [opcode_name(i.opcode) for i in disassemble(code)]
