"""Disassembler and static gas schedule."""

import random

import pytest

from gasfuzz.bytecode import (CONSUME_ALL, SCHEDULE, assemble, disassemble,
                              is_terminator, jumpdest_offsets, load_bin,
                              opcode_name, parse_hex, static_gas)
from gas_oracle import FEE


def test_empty_code():
    assert disassemble(b"") == []


def test_basic_decode():
    # 60 60 60 40 52 : PUSH1 0x60, PUSH1 0x40, MSTORE
    ins = disassemble(bytes.fromhex("6060604052"))
    assert [(i.offset, i.name, i.immediate) for i in ins] == [
        (0, "PUSH1", b"\x60"),
        (2, "PUSH1", b"\x40"),
        (4, "MSTORE", None),
    ]


def test_truncated_push_zero_padded():
    ins = disassemble(b"\x60")
    assert len(ins) == 1
    assert ins[0].name == "PUSH1"
    assert ins[0].immediate == b"\x00"
    assert ins[0].truncated


def test_truncated_push32():
    ins = disassemble(b"\x7f" + b"\xaa" * 5)
    assert ins[0].immediate == b"\xaa" * 5 + b"\x00" * 27
    assert ins[0].truncated


def test_offsets_strictly_increase():
    code = bytes.fromhex("6001600201610aff56fe")
    offs = [i.offset for i in disassemble(code)]
    assert offs == sorted(set(offs))


def test_unknown_opcode_decodes_as_invalid():
    ins = disassemble(b"\x0c")
    assert ins[0].name == "INVALID"
    assert is_terminator(0x0C)


def test_roundtrip_random_codes():
    rng = random.Random(1234)
    for _ in range(500):
        code = rng.randbytes(rng.randrange(0, 200))
        ins = disassemble(code)
        back = assemble(ins)
        if ins and ins[-1].truncated:
            assert back[:len(code)] == code
            assert all(b == 0 for b in back[len(code):])
        else:
            assert back == code


def test_jumpdest_offsets():
    code = bytes.fromhex("5b60015b00")
    assert jumpdest_offsets(disassemble(code)) == {0, 3}


@pytest.mark.parametrize("name,expected", [
    ("ADD", 3), ("CALL", 700), ("JUMPDEST", 1), ("MSTORE", 3),
    ("SLOAD", 200), ("BALANCE", 400), ("EXP", 10), ("SHA3", 30),
    ("JUMP", 8), ("JUMPI", 10), ("SSTORE", 0),
])
def test_static_gas_values(name, expected):
    op = next(e.opcode for e in SCHEDULE.values() if e.name == name)
    assert static_gas(op) == expected


def test_schedule_matches_independent_table():
    # every non-PUSH/DUP/SWAP/LOG entry against the second transcription
    for entry in SCHEDULE.values():
        name = entry.name
        if name.startswith(("PUSH", "DUP", "SWAP")):
            assert entry.base_cost == 3
        elif name.startswith("LOG"):
            n = int(name[3:])
            assert entry.base_cost == FEE["LOG"] + 375 * n
        elif name in FEE:
            assert entry.base_cost == FEE[name], name


def test_invalid_consumes_all_sentinel():
    assert static_gas(0xFE) is CONSUME_ALL
    assert static_gas(0x0C) is CONSUME_ALL   # undefined byte


def test_parse_hex_variants():
    assert parse_hex("6001") == b"\x60\x01"
    assert parse_hex("0x6001\n") == b"\x60\x01"
    assert parse_hex("  6001  ") == b"\x60\x01"


def test_parse_hex_odd_length_rejected():
    with pytest.raises(ValueError, match="odd-length"):
        parse_hex("600")


def test_load_bin(tmp_path):
    p = tmp_path / "c.bin"
    p.write_text("0x60016002\n")
    assert load_bin(p) == bytes.fromhex("60016002")


def test_opcode_name_unknown():
    assert opcode_name(0x0C) == "INVALID"
    assert opcode_name(0x01) == "ADD"
