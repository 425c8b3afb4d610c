"""Independent Keccak-256 oracle for cross-checking selectors.

Deliberately written from the function specification rather than shared
code: the 5x5 state is indexed (x, y), and the round constants and
rotation offsets are *derived* from their defining recurrences instead of
being transcribed tables, so a typo in the package's hardcoded constants
cannot be reproduced here.
"""

_MASK = (1 << 64) - 1


def _rot(v: int, n: int) -> int:
    n %= 64
    return ((v << n) | (v >> (64 - n))) & _MASK


def _round_constants() -> list:
    # bit t of the degree-8 LFSR x^8 + x^6 + x^5 + x^4 + 1
    def bits():
        r = 1
        while True:
            yield r & 1
            r <<= 1
            if r & 0x100:
                r ^= 0x171
            r &= 0xFF

    stream = bits()
    out = []
    for _ in range(24):
        rc = 0
        for j in range(7):
            if next(stream):
                rc |= 1 << ((1 << j) - 1)
        out.append(rc)
    return out


def _rotation_offsets() -> list:
    r = [[0] * 5 for _ in range(5)]
    x, y = 1, 0
    for t in range(24):
        r[x][y] = ((t + 1) * (t + 2) // 2) % 64
        x, y = y, (2 * x + 3 * y) % 5
    return r


_RC = _round_constants()
_R = _rotation_offsets()


def _keccak_f(a: list) -> None:
    for rnd in range(24):
        c = [a[x][0] ^ a[x][1] ^ a[x][2] ^ a[x][3] ^ a[x][4]
             for x in range(5)]
        d = [c[(x - 1) % 5] ^ _rot(c[(x + 1) % 5], 1) for x in range(5)]
        for x in range(5):
            for y in range(5):
                a[x][y] ^= d[x]
        b = [[0] * 5 for _ in range(5)]
        for x in range(5):
            for y in range(5):
                b[y][(2 * x + 3 * y) % 5] = _rot(a[x][y], _R[x][y])
        for x in range(5):
            for y in range(5):
                a[x][y] = b[x][y] ^ ((b[(x + 1) % 5][y] ^ _MASK)
                                     & b[(x + 2) % 5][y])
        a[0][0] ^= _RC[rnd]


def keccak256_oracle(data: bytes) -> bytes:
    rate = 136
    padded = bytearray(data)
    padded.append(0x01)
    while len(padded) % rate:
        padded.append(0x00)
    padded[-1] ^= 0x80
    a = [[0] * 5 for _ in range(5)]
    for pos in range(0, len(padded), rate):
        for i in range(rate // 8):
            lane = int.from_bytes(padded[pos + 8 * i:pos + 8 * i + 8],
                                  "little")
            a[i % 5][i // 5] ^= lane
        _keccak_f(a)
    return b"".join(a[x][0].to_bytes(8, "little") for x in range(4))


def selector_oracle(signature: str) -> bytes:
    return keccak256_oracle(signature.encode("ascii"))[:4]
