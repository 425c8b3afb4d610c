"""Independent fee-schedule oracle.

A second transcription of the published pre-Istanbul fee schedule, kept
deliberately separate from gasfuzz.bytecode so a typo in either table
shows up as a disagreement. Tests compose per-snippet expected gas from
these constants by hand.
"""

# static per-opcode charges
FEE = {
    "STOP": 0, "ADD": 3, "MUL": 5, "SUB": 3, "DIV": 5, "SDIV": 5,
    "MOD": 5, "SMOD": 5, "ADDMOD": 8, "MULMOD": 8, "EXP": 10,
    "SIGNEXTEND": 5,
    "LT": 3, "GT": 3, "SLT": 3, "SGT": 3, "EQ": 3, "ISZERO": 3,
    "AND": 3, "OR": 3, "XOR": 3, "NOT": 3, "BYTE": 3,
    "SHL": 3, "SHR": 3, "SAR": 3,
    "SHA3": 30,
    "ADDRESS": 2, "BALANCE": 400, "ORIGIN": 2, "CALLER": 2,
    "CALLVALUE": 2, "CALLDATALOAD": 3, "CALLDATASIZE": 2,
    "CALLDATACOPY": 3, "CODESIZE": 2, "CODECOPY": 3,
    "RETURNDATASIZE": 2, "RETURNDATACOPY": 3,
    "COINBASE": 2, "TIMESTAMP": 2, "NUMBER": 2, "DIFFICULTY": 2,
    "GASLIMIT": 2,
    "POP": 2, "MLOAD": 3, "MSTORE": 3, "MSTORE8": 3,
    "SLOAD": 200, "SSTORE": 0,
    "JUMP": 8, "JUMPI": 10, "PC": 2, "MSIZE": 2, "GAS": 2, "JUMPDEST": 1,
    "PUSH": 3, "DUP": 3, "SWAP": 3, "LOG": 375,
    "CALL": 700, "RETURN": 0, "REVERT": 0,
}

TX_BASE = 21_000
TX_CREATE = 32_000
TX_ZERO = 4
TX_NONZERO = 68

SSTORE_SET = 20_000
SSTORE_RESET = 5_000
REFUND_CLEAR = 15_000

CALL_VALUE = 9_000
CALL_NEW = 25_000

EXP_PER_BYTE = 50
SHA3_PER_WORD = 6
COPY_PER_WORD = 3
LOG_PER_TOPIC = 375
LOG_PER_BYTE = 8


def words(nbytes: int) -> int:
    return (nbytes + 31) // 32


def mem_cost(nwords: int) -> int:
    return 3 * nwords + nwords * nwords // 512


def mem_growth(old_words: int, new_words: int) -> int:
    if new_words <= old_words:
        return 0
    return mem_cost(new_words) - mem_cost(old_words)


def tx_data_gas(payload: bytes) -> int:
    zeros = payload.count(0)
    return TX_ZERO * zeros + TX_NONZERO * (len(payload) - zeros)


def intrinsic(payload: bytes = b"", create: bool = False) -> int:
    return TX_BASE + (TX_CREATE if create else 0) + tx_data_gas(payload)
