#!/usr/bin/env python3
"""Regenerate the bundled corpus contracts (.bin init code + .abi JSON).

The corpus is hand-assembled solc-0.4-style bytecode:

  token        ERC-20-style transfer/balanceOf over a keccak-slot balances
               mapping; clearing a balance exercises the SSTORE refund.
  distributor  owner-guarded loop that pays 1 wei to every address of a
               calldata array - the classic unbounded-loop out-of-gas shape.
  straightline selector dispatch plus a pure arithmetic body; its CFG is
               acyclic so the static estimate stays finite.

Run from the repo root:  python corpus/gen_corpus.py
"""

import json
from pathlib import Path

from gasfuzz.asm import assemble, push, push_bytes
from gasfuzz.evm import keccak256

OUT_DIR = Path(__file__).parent

ADDR_MASK = push_bytes(b"\xff" * 20)
WORD_224 = push_bytes(b"\x01" + b"\x00" * 28)   # 2**224 for selector DIV

TOKEN_SUPPLY = 10 ** 24


def sel(sig: str) -> bytes:
    return keccak256(sig.encode())[:4]


def dispatch(entries: list[tuple[str, str]]) -> list:
    """Selector dispatch prologue: [CALLDATALOAD(0) >> 224] then one
    EQ/JUMPI per (signature, label), falling through to a REVERT."""
    prog: list = [push(0), "CALLDATALOAD", WORD_224, "SWAP1", "DIV"]
    for sig, label in entries:
        prog += ["DUP1", push_bytes(sel(sig)), "EQ", f"@{label}", "JUMPI"]
    prog += [push(0), push(0), "REVERT"]
    return prog


def init_wrapper(body: list, runtime: bytes) -> bytes:
    """Constructor: run `body`, then copy the runtime code and return it."""
    prog = list(body)
    prog += [
        push(len(runtime), 2), "@runtime", push(0), "CODECOPY",
        push(len(runtime), 2), push(0), "RETURN",
        "runtime:", runtime,
    ]
    return assemble(prog)


def build_token() -> tuple[bytes, list]:
    # storage: slot 0 = owner, balances[a] at keccak(pad32(a) ++ pad32(1))
    runtime = assemble(
        dispatch([("transfer(address,uint256)", "transfer"),
                  ("balanceOf(address)", "balanceOf")]) + [
        "transfer:", "JUMPDEST", "POP",
        # sender slot
        "CALLER", push(0), "MSTORE",
        push(1), push(0x20), "MSTORE",
        push(0x40), push(0), "SHA3",            # [S]
        "DUP1", "SLOAD",                        # [S, SB]
        push(0x24), "CALLDATALOAD",             # [S, SB, V]
        "DUP1", "DUP3", "LT",                   # [S, SB, V, SB<V]
        "@fail", "JUMPI",
        # balances[sender] = SB - V (clearing a full balance refunds)
        "DUP1", "DUP3", "SUB",                  # [S, SB, V, SB-V]
        "DUP4", "SSTORE",                       # [S, SB, V]
        # recipient slot
        push(4), "CALLDATALOAD", ADDR_MASK, "AND",
        push(0), "MSTORE",
        push(0x40), push(0), "SHA3",            # [S, SB, V, T]
        "DUP1", "SLOAD",                        # [S, SB, V, T, TB]
        "DUP3", "ADD",                          # [S, SB, V, T, TB+V]
        "SWAP1", "SSTORE",                      # [S, SB, V]
        push(1), push(0), "MSTORE",
        push(0x20), push(0), "RETURN",
        "fail:", "JUMPDEST",
        push(0), push(0), "MSTORE",
        push(0x20), push(0), "RETURN",
        "balanceOf:", "JUMPDEST", "POP",
        push(4), "CALLDATALOAD", ADDR_MASK, "AND",
        push(0), "MSTORE",
        push(1), push(0x20), "MSTORE",
        push(0x40), push(0), "SHA3", "SLOAD",
        push(0), "MSTORE",
        push(0x20), push(0), "RETURN",
    ])
    ctor = [
        "CALLER", push(0), "SSTORE",            # owner = deployer
        "CALLER", push(0), "MSTORE",            # balances[deployer] = supply
        push(1), push(0x20), "MSTORE",
        push(0x40), push(0), "SHA3",
        push(TOKEN_SUPPLY), "SWAP1", "SSTORE",
    ]
    abi = [
        {"type": "constructor", "inputs": [], "payable": False},
        {"type": "function", "name": "transfer", "constant": False,
         "payable": False,
         "inputs": [{"name": "_to", "type": "address"},
                    {"name": "_value", "type": "uint256"}],
         "outputs": [{"name": "success", "type": "bool"}]},
        {"type": "function", "name": "balanceOf", "constant": True,
         "payable": False,
         "inputs": [{"name": "_owner", "type": "address"}],
         "outputs": [{"name": "balance", "type": "uint256"}]},
        {"type": "event", "name": "Transfer", "inputs": [], "anonymous": False},
    ]
    return init_wrapper(ctor, runtime), abi


def build_distributor() -> tuple[bytes, list]:
    # storage: slot 0 = owner; pays 1 wei per array element via CALL
    runtime = assemble(
        dispatch([("distribute(address[],uint256)", "distribute")]) + [
        "distribute:", "JUMPDEST", "POP",
        push(0), "SLOAD", "CALLER", "EQ", "@body", "JUMPI",
        push(0), push(0), "REVERT",
        "body:", "JUMPDEST",
        push(4), "CALLDATALOAD", push(4), "ADD",   # [lenpos]
        "DUP1", "CALLDATALOAD",                    # [lenpos, len]
        "SWAP1", push(0x20), "ADD",                # [len, base]
        push(0),                                   # [len, base, i]
        "loop:", "JUMPDEST",
        "DUP3", "DUP2", "LT",                      # [len, base, i, i<len]
        "@iter", "JUMPI",
        "STOP",
        "iter:", "JUMPDEST",
        "DUP1", push(0x20), "MUL",                 # [l, b, i, 32i]
        "DUP3", "ADD", "CALLDATALOAD",             # [l, b, i, word]
        ADDR_MASK, "AND",                          # [l, b, i, addr]
        push(0), push(0), push(0), push(0),        # outSz outOff inSz inOff
        push(1),                                   # value: 1 wei each
        "DUP6",                                    # to
        push(0),                                   # gas forwarded
        "CALL",                                    # [l, b, i, addr, ok]
        "POP", "POP",                              # [l, b, i]
        push(1), "ADD",
        "@loop", "JUMP",
    ])
    ctor = ["CALLER", push(0), "SSTORE"]
    abi = [
        {"type": "constructor", "inputs": [], "payable": False},
        {"type": "function", "name": "distribute", "constant": False,
         "payable": False,
         "inputs": [{"name": "_addrs", "type": "address[]"},
                    {"name": "_amountToEach", "type": "uint256"}],
         "outputs": []},
    ]
    return init_wrapper(ctor, runtime), abi


def build_straightline() -> tuple[bytes, list]:
    runtime = assemble(
        dispatch([("sum3(uint256,uint256,uint256)", "sum3")]) + [
        "sum3:", "JUMPDEST", "POP",
        push(4), "CALLDATALOAD",
        push(0x24), "CALLDATALOAD", "ADD",
        push(0x44), "CALLDATALOAD", "ADD",
        push(0), "MSTORE",
        push(0x20), push(0), "RETURN",
    ])
    abi = [
        {"type": "function", "name": "sum3", "constant": True,
         "payable": False,
         "inputs": [{"name": "a", "type": "uint256"},
                    {"name": "b", "type": "uint256"},
                    {"name": "c", "type": "uint256"}],
         "outputs": [{"name": "total", "type": "uint256"}]},
    ]
    return init_wrapper([], runtime), abi


CONTRACTS = {
    "token": build_token,
    "distributor": build_distributor,
    "straightline": build_straightline,
}


def generate() -> dict[str, bytes]:
    artifacts = {}
    for name, builder in CONTRACTS.items():
        init_code, abi = builder()
        artifacts[f"{name}.bin"] = init_code.hex().encode() + b"\n"
        artifacts[f"{name}.abi"] = (
            json.dumps(abi, indent=1).encode() + b"\n")
    return artifacts


def main() -> None:
    for fname, payload in generate().items():
        (OUT_DIR / fname).write_bytes(payload)
        print(f"wrote corpus/{fname} ({len(payload)} bytes)")


if __name__ == "__main__":
    main()
