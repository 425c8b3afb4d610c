# cython: language_level=3
"""Gas-metered EVM interpreter core.

This module is the hot kernel: it is compiled with Cython when the
extension built, and runs unchanged as plain Python otherwise (the
`gasfuzz.evm` front end picks whichever is importable). Everything here is
deliberately flat - module-level tables, one dispatch loop, plain tuples
in and out - so both backends behave identically byte for byte.

Word arithmetic is modulo 2**256; division and modulo by zero yield 0.
The fee schedule is the pre-Istanbul one from `gasfuzz.bytecode`.
"""

from .bytecode import SCHEDULE

# ---------------------------------------------------------------------------
# Keccak-256 (the original Keccak padding, not the SHA-3 variant)
# ---------------------------------------------------------------------------

_M64 = (1 << 64) - 1

_KECCAK_RC = [
    0x0000000000000001, 0x0000000000008082, 0x800000000000808A,
    0x8000000080008000, 0x000000000000808B, 0x0000000080000001,
    0x8000000080008081, 0x8000000000008009, 0x000000000000008A,
    0x0000000000000088, 0x0000000080008009, 0x000000008000000A,
    0x000000008000808B, 0x800000000000008B, 0x8000000000008089,
    0x8000000000008003, 0x8000000000008002, 0x8000000000000080,
    0x000000000000800A, 0x800000008000000A, 0x8000000080008081,
    0x8000000000008080, 0x0000000080000001, 0x8000000080008008,
]
_KECCAK_ROTC = [1, 3, 6, 10, 15, 21, 28, 36, 45, 55, 2, 14,
                27, 41, 56, 8, 25, 43, 62, 18, 39, 61, 20, 44]
_KECCAK_PILN = [10, 7, 11, 17, 18, 3, 5, 16, 8, 21, 24, 4,
                15, 23, 19, 13, 12, 2, 20, 14, 22, 9, 6, 1]


def _keccak_f(st):
    rc = _KECCAK_RC
    rotc = _KECCAK_ROTC
    piln = _KECCAK_PILN
    for rnd in range(24):
        # theta
        bc = [st[i] ^ st[i + 5] ^ st[i + 10] ^ st[i + 15] ^ st[i + 20]
              for i in range(5)]
        for i in range(5):
            x = bc[(i + 1) % 5]
            t = bc[(i + 4) % 5] ^ (((x << 1) | (x >> 63)) & _M64)
            for j in range(0, 25, 5):
                st[i + j] ^= t
        # rho + pi
        t = st[1]
        for i in range(24):
            j = piln[i]
            bc0 = st[j]
            r = rotc[i]
            st[j] = ((t << r) | (t >> (64 - r))) & _M64
            t = bc0
        # chi
        for j in range(0, 25, 5):
            row = [st[j + i] for i in range(5)]
            for i in range(5):
                st[j + i] = row[i] ^ ((row[(i + 1) % 5] ^ _M64)
                                      & row[(i + 2) % 5])
        # iota
        st[0] ^= rc[rnd]


def keccak256(data):
    """Keccak-256 digest of `data` as 32 bytes."""
    rate = 136
    size = len(data)
    padded = bytearray(data)
    padded += b"\x00" * (rate - (size % rate))
    padded[size] ^= 0x01
    padded[-1] ^= 0x80
    st = [0] * 25
    for pos in range(0, len(padded), rate):
        block = padded[pos:pos + rate]
        for i in range(17):
            st[i] ^= int.from_bytes(block[8 * i:8 * i + 8], "little")
        _keccak_f(st)
    return b"".join(st[i].to_bytes(8, "little") for i in range(4))


# ---------------------------------------------------------------------------
# Gas rules
# ---------------------------------------------------------------------------

TX_BASE_GAS = 21_000
TX_CREATE_GAS = 32_000
TX_ZERO_BYTE_GAS = 4
TX_NONZERO_BYTE_GAS = 68

SSTORE_SET_GAS = 20_000
SSTORE_RESET_GAS = 5_000
SSTORE_CLEAR_REFUND = 15_000

CALL_BASE_GAS = 700
CALL_VALUE_GAS = 9_000
CALL_NEW_ACCOUNT_GAS = 25_000
CALL_STIPEND = 2_300

EXP_BYTE_GAS = 50
COPY_WORD_GAS = 3
SHA3_WORD_GAS = 6
LOG_TOPIC_GAS = 375
LOG_BYTE_GAS = 8

MEMORY_WORD_GAS = 3
MEMORY_QUAD_DIVISOR = 512

STACK_LIMIT = 1024


def intrinsic_gas(payload, is_create):
    """Fixed transaction charge: base + creation + per-byte payload cost."""
    gas = TX_BASE_GAS
    if is_create:
        gas += TX_CREATE_GAS
    zeros = payload.count(0)
    gas += TX_ZERO_BYTE_GAS * zeros
    gas += TX_NONZERO_BYTE_GAS * (len(payload) - zeros)
    return gas


def _mem_cost(words):
    return MEMORY_WORD_GAS * words + (words * words) // MEMORY_QUAD_DIVISOR


def memory_expansion_cost(old_words, new_words):
    """Charge for growing active memory from old_words to new_words."""
    if new_words <= old_words:
        return 0
    return _mem_cost(new_words) - _mem_cost(old_words)


def sstore_cost(current, new):
    """(gas, refund) for one SSTORE given current and new slot values."""
    if current == 0 and new != 0:
        return SSTORE_SET_GAS, 0
    if current != 0 and new == 0:
        return SSTORE_RESET_GAS, SSTORE_CLEAR_REFUND
    return SSTORE_RESET_GAS, 0


def call_cost(value, dest_exists):
    """Upfront CALL charge (base + value transfer + new-account)."""
    gas = CALL_BASE_GAS
    if value > 0:
        gas += CALL_VALUE_GAS
        if not dest_exists:
            gas += CALL_NEW_ACCOUNT_GAS
    return gas


# ---------------------------------------------------------------------------
# Interpreter
# ---------------------------------------------------------------------------

# Result status codes (gasfuzz.evm maps these onto the public enum).
ST_SUCCESS = 0
ST_REVERT = 1
ST_OUT_OF_GAS = 2
ST_INVALID_OP = 3
ST_STACK_ERROR = 4
ST_BAD_JUMP = 5

_M256 = (1 << 256) - 1
_SIGN = 1 << 255
_M160 = (1 << 160) - 1

# Flat per-opcode tables (index = opcode byte).
_DEFINED = [False] * 256
_BASE = [0] * 256
_POPS = [0] * 256
_PUSHES = [0] * 256
_PUSHW = [0] * 256
for _e in SCHEDULE.values():
    _DEFINED[_e.opcode] = True
    _BASE[_e.opcode] = _e.base_cost
    _POPS[_e.opcode] = _e.pops
    _PUSHES[_e.opcode] = _e.pushes
    _PUSHW[_e.opcode] = _e.push_width
del _e


def _sval(x):
    return x - (1 << 256) if x & _SIGN else x


def run(code, calldata, env, world, plan, gas_limit, intrinsic, trace):
    """Execute `code` and meter gas.

    env:   (coinbase, difficulty, number, timestamp, sender, origin,
            call_value) as ints
    world: object with .address, .storage (dict), .balances (dict),
           .existing (set), .stub_success, .stub_return
    plan:  (jumpdests, start2block, last_offsets) - the block maps may be
           None, which disables edge attribution
    trace: None, or a list that receives one dict per executed instruction

    Returns (status, gas_used, gas_used_raw, refund_applied, refund_accum,
    return_data, edge_gas, edge_hits, terminal_gas, steps).
    """
    coinbase, difficulty, number, timestamp, sender, origin, call_value = env
    jumpdests, start2block, last_offsets = plan
    has_blocks = start2block is not None

    storage = world.storage
    balances = world.balances
    existing = world.existing
    self_addr = world.address

    remaining = gas_limit - intrinsic
    edge_gas = {}
    edge_hits = {}
    cur_block = 0
    accum = 0
    steps = 0

    if remaining < 0:
        return (ST_OUT_OF_GAS, gas_limit, gas_limit, 0, 0, b"",
                edge_gas, edge_hits, 0, 0)

    stack = []
    mem = bytearray()
    mw = 0              # active memory words
    returndata = b""
    refund = 0
    status = ST_SUCCESS
    out = b""
    pc = 0
    n = len(code)
    t_entry = None
    t_before = 0

    while True:
        if pc >= n:      # running off the end is an implicit STOP
            break
        op = code[pc]

        if trace is not None:
            if t_entry is not None:
                t_entry["gasCost"] = hex(t_before - remaining)
            t_entry = {"pc": pc, "op": op, "gas": hex(remaining),
                       "gasCost": "0x0",
                       "stack": [hex(v) for v in stack],
                       "depth": 0, "opName":
                           SCHEDULE[op].name if _DEFINED[op] else "INVALID"}
            trace.append(t_entry)
            t_before = remaining

        if not _DEFINED[op] or op == 0xFE:   # INVALID consumes everything
            status = ST_INVALID_OP
            break

        pops = _POPS[op]
        if len(stack) < pops:
            status = ST_STACK_ERROR
            break
        if len(stack) - pops + _PUSHES[op] > STACK_LIMIT:
            status = ST_STACK_ERROR
            break

        steps += 1
        jumped = False
        next_pc = pc + 1
        cost = _BASE[op]

        # --- PUSH / DUP / SWAP -------------------------------------------
        if 0x60 <= op <= 0x7F:
            w = _PUSHW[op]
            chunk = code[pc + 1:pc + 1 + w]
            if len(chunk) < w:
                chunk = chunk + b"\x00" * (w - len(chunk))
            remaining -= cost
            if remaining < 0:
                status = ST_OUT_OF_GAS
                break
            accum += cost
            stack.append(int.from_bytes(chunk, "big"))
            next_pc = pc + 1 + w
        elif 0x80 <= op <= 0x8F:
            remaining -= cost
            if remaining < 0:
                status = ST_OUT_OF_GAS
                break
            accum += cost
            stack.append(stack[-(op - 0x7F)])
        elif 0x90 <= op <= 0x9F:
            remaining -= cost
            if remaining < 0:
                status = ST_OUT_OF_GAS
                break
            accum += cost
            d = op - 0x8F
            stack[-1], stack[-1 - d] = stack[-1 - d], stack[-1]
        else:
            # --- everything else: compute full cost, charge once ----------
            # Dynamic components are folded into `cost` before charging so
            # OUT_OF_GAS can never leave a partial side effect behind.
            if op == 0x0A:                       # EXP
                e = stack[-2]
                cost += EXP_BYTE_GAS * ((e.bit_length() + 7) >> 3)
            elif op == 0x20:                     # SHA3
                off, sz = stack[-1], stack[-2]
                if sz:
                    cost += SHA3_WORD_GAS * ((sz + 31) >> 5)
                    nmw = (off + sz + 31) >> 5
                    cost += memory_expansion_cost(mw, nmw)
            elif op == 0x37 or op == 0x39 or op == 0x3E:   # *COPY
                dst, sz = stack[-1], stack[-3]
                if sz:
                    cost += COPY_WORD_GAS * ((sz + 31) >> 5)
                    nmw = (dst + sz + 31) >> 5
                    cost += memory_expansion_cost(mw, nmw)
            elif op == 0x51 or op == 0x52:       # MLOAD / MSTORE
                off = stack[-1]
                nmw = (off + 63) >> 5
                cost += memory_expansion_cost(mw, nmw)
            elif op == 0x53:                     # MSTORE8
                off = stack[-1]
                nmw = (off + 32) >> 5
                cost += memory_expansion_cost(mw, nmw)
            elif op == 0x55:                     # SSTORE
                key, val = stack[-1], stack[-2]
                c, r = sstore_cost(storage.get(key, 0), val)
                cost += c
            elif 0xA0 <= op <= 0xA4:             # LOG0..LOG4
                off, sz = stack[-1], stack[-2]
                cost += LOG_BYTE_GAS * sz
                if sz:
                    nmw = (off + sz + 31) >> 5
                    cost += memory_expansion_cost(mw, nmw)
            elif op == 0xF1:                     # CALL
                value = stack[-3]
                dest = stack[-2] & _M160
                cost = call_cost(value, dest in existing)
                ioff, isz = stack[-4], stack[-5]
                ooff, osz = stack[-6], stack[-7]
                nmw = mw
                if isz:
                    nmw = max(nmw, (ioff + isz + 31) >> 5)
                if osz:
                    nmw = max(nmw, (ooff + osz + 31) >> 5)
                cost += memory_expansion_cost(mw, nmw)
            elif op == 0xF3 or op == 0xFD:       # RETURN / REVERT
                off, sz = stack[-1], stack[-2]
                if sz:
                    nmw = (off + sz + 31) >> 5
                    cost += memory_expansion_cost(mw, nmw)
            elif op in (0xF0, 0xF2, 0xF4, 0xF5, 0xFA, 0xFF,
                        0x3A, 0x3B, 0x3C, 0x3F, 0x40):
                # CREATE/CALLCODE/DELEGATECALL/CREATE2/STATICCALL/
                # SELFDESTRUCT and the external-code/blockhash family
                # decode but are not executable in this single-contract VM.
                status = ST_INVALID_OP
                break

            remaining -= cost
            if remaining < 0:
                status = ST_OUT_OF_GAS
                break
            accum += cost

            # --- semantics ------------------------------------------------
            if op == 0x00:                       # STOP
                break
            elif op == 0x01:
                a, b = stack.pop(), stack.pop()
                stack.append((a + b) & _M256)
            elif op == 0x02:
                a, b = stack.pop(), stack.pop()
                stack.append((a * b) & _M256)
            elif op == 0x03:
                a, b = stack.pop(), stack.pop()
                stack.append((a - b) & _M256)
            elif op == 0x04:
                a, b = stack.pop(), stack.pop()
                stack.append(0 if b == 0 else a // b)
            elif op == 0x05:
                a, b = _sval(stack.pop()), _sval(stack.pop())
                if b == 0:
                    stack.append(0)
                else:
                    q = abs(a) // abs(b)
                    stack.append((-q if (a < 0) != (b < 0) else q) & _M256)
            elif op == 0x06:
                a, b = stack.pop(), stack.pop()
                stack.append(0 if b == 0 else a % b)
            elif op == 0x07:
                a, b = _sval(stack.pop()), _sval(stack.pop())
                if b == 0:
                    stack.append(0)
                else:
                    r = abs(a) % abs(b)
                    stack.append((-r if a < 0 else r) & _M256)
            elif op == 0x08:
                a, b, m = stack.pop(), stack.pop(), stack.pop()
                stack.append(0 if m == 0 else (a + b) % m)
            elif op == 0x09:
                a, b, m = stack.pop(), stack.pop(), stack.pop()
                stack.append(0 if m == 0 else (a * b) % m)
            elif op == 0x0A:
                a, e = stack.pop(), stack.pop()
                stack.append(pow(a, e, 1 << 256))
            elif op == 0x0B:
                b, x = stack.pop(), stack.pop()
                if b < 32:
                    bit = b * 8 + 7
                    mask = (1 << (bit + 1)) - 1
                    if x & (1 << bit):
                        x = x | (_M256 ^ mask)
                    else:
                        x = x & mask
                stack.append(x)
            elif op == 0x10:
                a, b = stack.pop(), stack.pop()
                stack.append(1 if a < b else 0)
            elif op == 0x11:
                a, b = stack.pop(), stack.pop()
                stack.append(1 if a > b else 0)
            elif op == 0x12:
                a, b = stack.pop(), stack.pop()
                stack.append(1 if _sval(a) < _sval(b) else 0)
            elif op == 0x13:
                a, b = stack.pop(), stack.pop()
                stack.append(1 if _sval(a) > _sval(b) else 0)
            elif op == 0x14:
                a, b = stack.pop(), stack.pop()
                stack.append(1 if a == b else 0)
            elif op == 0x15:
                stack.append(1 if stack.pop() == 0 else 0)
            elif op == 0x16:
                a, b = stack.pop(), stack.pop()
                stack.append(a & b)
            elif op == 0x17:
                a, b = stack.pop(), stack.pop()
                stack.append(a | b)
            elif op == 0x18:
                a, b = stack.pop(), stack.pop()
                stack.append(a ^ b)
            elif op == 0x19:
                stack.append(stack.pop() ^ _M256)
            elif op == 0x1A:
                i, x = stack.pop(), stack.pop()
                stack.append((x >> (8 * (31 - i))) & 0xFF if i < 32 else 0)
            elif op == 0x1B:
                s, v = stack.pop(), stack.pop()
                stack.append((v << s) & _M256 if s < 256 else 0)
            elif op == 0x1C:
                s, v = stack.pop(), stack.pop()
                stack.append(v >> s if s < 256 else 0)
            elif op == 0x1D:
                s, v = stack.pop(), _sval(stack.pop())
                if s >= 256:
                    stack.append(0 if v >= 0 else _M256)
                else:
                    stack.append((v >> s) & _M256)
            elif op == 0x20:
                off, sz = stack.pop(), stack.pop()
                if sz:
                    if nmw > mw:
                        mem += b"\x00" * ((nmw - mw) * 32)
                        mw = nmw
                    data = bytes(mem[off:off + sz])
                else:
                    data = b""
                stack.append(int.from_bytes(keccak256(data), "big"))
            elif op == 0x30:
                stack.append(self_addr)
            elif op == 0x31:
                stack.append(balances.get(stack.pop() & _M160, 0))
            elif op == 0x32:
                stack.append(origin)
            elif op == 0x33:
                stack.append(sender)
            elif op == 0x34:
                stack.append(call_value)
            elif op == 0x35:
                i = stack.pop()
                chunk = calldata[i:i + 32]
                if len(chunk) < 32:
                    chunk = chunk + b"\x00" * (32 - len(chunk))
                stack.append(int.from_bytes(chunk, "big"))
            elif op == 0x36:
                stack.append(len(calldata))
            elif op == 0x37 or op == 0x39 or op == 0x3E:
                dst, src, sz = stack.pop(), stack.pop(), stack.pop()
                if op == 0x37:
                    blob = calldata
                elif op == 0x39:
                    blob = code
                else:
                    blob = returndata
                    if src + sz > len(blob):
                        status = ST_INVALID_OP
                        break
                if sz:
                    if nmw > mw:
                        mem += b"\x00" * ((nmw - mw) * 32)
                        mw = nmw
                    chunk = blob[src:src + sz]
                    if len(chunk) < sz:
                        chunk = chunk + b"\x00" * (sz - len(chunk))
                    mem[dst:dst + sz] = chunk
            elif op == 0x38:
                stack.append(n)
            elif op == 0x3D:
                stack.append(len(returndata))
            elif op == 0x41:
                stack.append(coinbase)
            elif op == 0x42:
                stack.append(timestamp)
            elif op == 0x43:
                stack.append(number)
            elif op == 0x44:
                stack.append(difficulty)
            elif op == 0x45:
                stack.append(gas_limit)
            elif op == 0x50:
                stack.pop()
            elif op == 0x51:
                off = stack.pop()
                if nmw > mw:
                    mem += b"\x00" * ((nmw - mw) * 32)
                    mw = nmw
                stack.append(int.from_bytes(mem[off:off + 32], "big"))
            elif op == 0x52:
                off, val = stack.pop(), stack.pop()
                if nmw > mw:
                    mem += b"\x00" * ((nmw - mw) * 32)
                    mw = nmw
                mem[off:off + 32] = val.to_bytes(32, "big")
            elif op == 0x53:
                off, val = stack.pop(), stack.pop()
                if nmw > mw:
                    mem += b"\x00" * ((nmw - mw) * 32)
                    mw = nmw
                mem[off] = val & 0xFF
            elif op == 0x54:
                stack.append(storage.get(stack.pop(), 0))
            elif op == 0x55:
                key, val = stack.pop(), stack.pop()
                refund += r           # from this opcode's cost computation
                if val == 0:
                    storage.pop(key, None)
                else:
                    storage[key] = val
            elif op == 0x56:
                dest = stack.pop()
                if dest not in jumpdests:
                    status = ST_BAD_JUMP
                    break
                next_pc = dest
                jumped = True
            elif op == 0x57:
                dest, cond = stack.pop(), stack.pop()
                if cond != 0:
                    if dest not in jumpdests:
                        status = ST_BAD_JUMP
                        break
                    next_pc = dest
                    jumped = True
            elif op == 0x58:
                stack.append(pc)
            elif op == 0x59:
                stack.append(mw * 32)
            elif op == 0x5A:
                stack.append(remaining)
            elif op == 0x5B:
                pass
            elif 0xA0 <= op <= 0xA4:
                off, sz = stack.pop(), stack.pop()
                for _ in range(op - 0xA0):
                    stack.pop()
                if sz and nmw > mw:
                    mem += b"\x00" * ((nmw - mw) * 32)
                    mw = nmw
            elif op == 0xF1:
                stack.pop()                      # requested gas (returned)
                dest = stack.pop() & _M160
                value = stack.pop()
                ioff, isz = stack.pop(), stack.pop()
                ooff, osz = stack.pop(), stack.pop()
                if nmw > mw:
                    mem += b"\x00" * ((nmw - mw) * 32)
                    mw = nmw
                ok = world.stub_success
                if value > 0:
                    if balances.get(self_addr, 0) >= value:
                        balances[self_addr] = balances[self_addr] - value
                        balances[dest] = balances.get(dest, 0) + value
                        existing.add(dest)
                    else:
                        ok = 0
                returndata = world.stub_return if ok else b""
                if osz and returndata:
                    put = returndata[:osz]
                    mem[ooff:ooff + len(put)] = put
                stack.append(1 if ok else 0)
            elif op == 0xF3 or op == 0xFD:
                off, sz = stack.pop(), stack.pop()
                if sz:
                    if nmw > mw:
                        mem += b"\x00" * ((nmw - mw) * 32)
                        mw = nmw
                    out = bytes(mem[off:off + sz])
                if op == 0xFD:
                    status = ST_REVERT
                break
            else:                                # pragma: no cover
                status = ST_INVALID_OP
                break

        # --- basic-block edge attribution --------------------------------
        if has_blocks:
            if jumped:
                nb = start2block.get(next_pc, -1)
                if nb >= 0:
                    key = (cur_block, nb)
                    edge_gas[key] = edge_gas.get(key, 0) + accum
                    edge_hits[key] = edge_hits.get(key, 0) + 1
                    cur_block = nb
                    accum = 0
            elif pc in last_offsets and next_pc < n:
                key = (cur_block, cur_block + 1)
                edge_gas[key] = edge_gas.get(key, 0) + accum
                edge_hits[key] = edge_hits.get(key, 0) + 1
                cur_block = cur_block + 1
                accum = 0
        pc = next_pc

    # --- settle the transaction -------------------------------------------
    if status == ST_SUCCESS or status == ST_REVERT:
        raw = gas_limit - remaining
        terminal = accum
    else:
        # exceptional halts consume the entire gas allowance; the block
        # that died absorbs the unspent remainder so accounting still adds
        # up to the total
        raw = gas_limit
        terminal = gas_limit - intrinsic - sum(edge_gas.values())
        if terminal < 0:
            terminal = 0
        remaining = 0

    if trace is not None and t_entry is not None:
        t_entry["gasCost"] = hex(t_before - remaining)

    if status == ST_SUCCESS and refund:
        applied = min(refund, raw >> 1)
    else:
        applied = 0
    used = raw - applied
    out_data = out if (status == ST_SUCCESS or status == ST_REVERT) else b""
    return (status, used, raw, applied, refund, out_data,
            edge_gas, edge_hits, terminal, steps)
