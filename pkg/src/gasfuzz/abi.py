"""ABI parsing, function selectors and the byte genome.

A campaign's search state is one flat byte string (the gene) holding a
concrete value for every parameter of every contract function plus six
environment variables, with a map from canonical keys to byte ranges. The
map is what lets byte-level mutators act directly on encodable content.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from random import Random

from .evm import keccak256


class AbiError(ValueError):
    pass


INITIAL_MAX_ARRAY_LEN = 8

_INT_RE = re.compile(r"^(u?int)(\d*)$")
_BYTES_RE = re.compile(r"^bytes(\d+)$")
_ARRAY_RE = re.compile(r"^(.*?)\[(\d*)\]$")


@dataclass(frozen=True)
class TypeDesc:
    """Parsed ABI type. `array` is None for scalars, "dyn" for T[] and
    "fixed" for T[k] (element type is always static)."""

    kind: str              # uint | int | address | bool | bytesN | bytes | string
    bits: int = 0          # uint/int width
    size: int = 0          # bytesN width
    array: str | None = None
    length: int = 0        # fixed-array length

    def canonical(self) -> str:
        if self.kind in ("uint", "int"):
            base = f"{self.kind}{self.bits}"
        elif self.kind == "bytesN":
            base = f"bytes{self.size}"
        else:
            base = self.kind
        if self.array == "dyn":
            return base + "[]"
        if self.array == "fixed":
            return base + f"[{self.length}]"
        return base

    @property
    def is_dynamic(self) -> bool:
        return self.array == "dyn" or self.kind in ("bytes", "string")

    @property
    def is_integer(self) -> bool:
        return self.array is None and self.kind in ("uint", "int")

    def elem(self) -> "TypeDesc":
        if self.array is None:
            raise ValueError("not an array type")
        return TypeDesc(self.kind, self.bits, self.size)

    def scalar_width(self) -> int:
        """Byte width of one value as stored in the gene."""
        if self.kind in ("uint", "int"):
            return self.bits // 8
        if self.kind == "address":
            return 20
        if self.kind == "bool":
            return 1
        if self.kind == "bytesN":
            return self.size
        return 1  # bytes/string payload byte


def parse_type(text: str) -> TypeDesc:
    text = text.strip()
    m = _ARRAY_RE.match(text)
    if m:
        inner, length = m.group(1), m.group(2)
        base = parse_type(inner)
        if base.array is not None or base.is_dynamic:
            raise AbiError(f"unsupported nested/dynamic array type {text!r}")
        if length == "":
            return TypeDesc(base.kind, base.bits, base.size, array="dyn")
        return TypeDesc(base.kind, base.bits, base.size, array="fixed",
                        length=int(length))
    m = _INT_RE.match(text)
    if m:
        bits = int(m.group(2)) if m.group(2) else 256
        if bits % 8 or not 8 <= bits <= 256:
            raise AbiError(f"unsupported integer width in {text!r}")
        return TypeDesc(m.group(1), bits=bits)
    if text == "address":
        return TypeDesc("address")
    if text == "bool":
        return TypeDesc("bool")
    m = _BYTES_RE.match(text)
    if m:
        size = int(m.group(1))
        if not 1 <= size <= 32:
            raise AbiError(f"unsupported fixed bytes width in {text!r}")
        return TypeDesc("bytesN", size=size)
    if text == "bytes":
        return TypeDesc("bytes")
    if text == "string":
        return TypeDesc("string")
    raise AbiError(f"unsupported ABI type {text!r}")


@dataclass(frozen=True)
class FunctionSpec:
    name: str
    inputs: tuple[tuple[str, TypeDesc], ...]
    is_constructor: bool = False
    is_payable: bool = False

    def signature(self) -> str:
        args = ",".join(t.canonical() for _, t in self.inputs)
        return f"{self.name}({args})"


def parse_abi(text: str) -> list[FunctionSpec]:
    """Parse solc-style ABI JSON into function/constructor specs; events
    and fallbacks are ignored."""
    try:
        entries = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AbiError(f"malformed ABI JSON: {exc}") from None
    if not isinstance(entries, list):
        raise AbiError("ABI JSON must be an array of entries")
    specs = []
    for entry in entries:
        etype = entry.get("type", "function")
        if etype not in ("function", "constructor"):
            continue
        name = entry.get("name", "") if etype == "function" else "constructor"
        inputs = []
        for i, par in enumerate(entry.get("inputs", [])):
            pname = par.get("name") or f"arg{i}"
            try:
                desc = parse_type(par["type"])
            except AbiError as exc:
                raise AbiError(f"in ABI entry {name!r}: {exc}") from None
            inputs.append((pname, desc))
        payable = bool(entry.get("payable")) or \
            entry.get("stateMutability") == "payable"
        specs.append(FunctionSpec(name=name, inputs=tuple(inputs),
                                  is_constructor=etype == "constructor",
                                  is_payable=payable))
    return specs


def selector(spec: FunctionSpec) -> bytes:
    """First 4 bytes of the Keccak-256 of the canonical signature."""
    return keccak256(spec.signature().encode("ascii"))[:4]


def find_function(specs: list[FunctionSpec], name_or_sig: str) -> FunctionSpec:
    """Resolve a target function by name, or by full signature when the
    name alone is ambiguous."""
    by_sig = [s for s in specs
              if not s.is_constructor and s.signature() == name_or_sig]
    if by_sig:
        return by_sig[0]
    by_name = [s for s in specs
               if not s.is_constructor and s.name == name_or_sig]
    if not by_name:
        raise AbiError(f"function {name_or_sig!r} not found in ABI")
    if len(by_name) > 1:
        sigs = ", ".join(s.signature() for s in by_name)
        raise AbiError(
            f"function name {name_or_sig!r} is ambiguous; "
            f"use a full signature (one of: {sigs})")
    return by_name[0]


# ---------------------------------------------------------------------------
# Gene + GeneMap
# ---------------------------------------------------------------------------

# The six environment variables carried at the tail of every gene.
ENV_VARS: tuple[tuple[str, TypeDesc], ...] = (
    ("coinbase", TypeDesc("address")),
    ("difficulty", TypeDesc("uint", bits=256)),
    ("number", TypeDesc("uint", bits=256)),
    ("timestamp", TypeDesc("uint", bits=256)),
    ("sender", TypeDesc("address")),
    ("origin", TypeDesc("address")),
)
ENV_KEY_PREFIX = "env"


def param_key(fname: str, ninputs: int, pname: str, tdesc: TypeDesc) -> str:
    """Canonical gene_map key: function name, input count, parameter name
    and parameter type."""
    return f"{fname}|{ninputs}|{pname}|{tdesc.canonical()}"


def env_key(name: str) -> str:
    return f"{ENV_KEY_PREFIX}|{name}"


@dataclass(frozen=True)
class GeneEntry:
    key: str
    type: TypeDesc
    start: int
    end: int
    length: int | None = None   # element count, dynamic entries only

    @property
    def is_env(self) -> bool:
        return self.key.startswith(ENV_KEY_PREFIX + "|")


@dataclass
class GeneMap:
    """Disjoint, sorted ranges tiling the gene exactly."""

    entries: list[GeneEntry] = field(default_factory=list)
    by_key: dict[str, GeneEntry] = field(default_factory=dict)

    @classmethod
    def build(cls, items: list[tuple[str, TypeDesc, int | None, bytes]]
              ) -> tuple[bytes, "GeneMap"]:
        """Lay out (key, type, length, value bytes) tuples into a fresh
        gene and its map."""
        gmap = cls()
        parts = []
        pos = 0
        for key, tdesc, length, blob in items:
            entry = GeneEntry(key, tdesc, pos, pos + len(blob), length)
            gmap.entries.append(entry)
            gmap.by_key[key] = entry
            parts.append(blob)
            pos += len(blob)
        return b"".join(parts), gmap

    def total_length(self) -> int:
        return self.entries[-1].end if self.entries else 0

    def slice(self, gene: bytes, key: str) -> bytes:
        e = self.by_key[key]
        return gene[e.start:e.end]

    def replace(self, gene: bytes, key: str, blob: bytes) -> bytes:
        e = self.by_key[key]
        if len(blob) != e.end - e.start:
            raise ValueError("replacement must preserve the range width")
        return gene[:e.start] + blob + gene[e.end:]

    def items(self, gene: bytes
              ) -> list[tuple[str, TypeDesc, int | None, bytes]]:
        """Decompose a gene back into build() items (for retiling)."""
        return [(e.key, e.type, e.length, gene[e.start:e.end])
                for e in self.entries]


def random_scalar(tdesc: TypeDesc, rng: Random) -> bytes:
    """A type-valid random value at the gene's natural width."""
    w = tdesc.scalar_width()
    if tdesc.kind == "bool":
        return bytes([rng.randrange(2)])
    return rng.randbytes(w)


def random_env_value(name: str, tdesc: TypeDesc, rng: Random) -> bytes:
    if tdesc.kind == "address":
        return rng.randbytes(20)
    # block counters: keep within a plausible 64-bit range
    return rng.randrange(1 << 64).to_bytes(32, "big")


def _random_entry(key: str, tdesc: TypeDesc, rng: Random,
                  max_array: int) -> tuple[str, TypeDesc, int | None, bytes]:
    if tdesc.array == "dyn":
        length = rng.randrange(max_array + 1)
        ew = tdesc.elem().scalar_width()
        blob = b"".join(random_scalar(tdesc.elem(), rng)
                        for _ in range(length))
        assert len(blob) == length * ew
        return (key, tdesc, length, blob)
    if tdesc.kind in ("bytes", "string"):
        length = rng.randrange(max_array + 1)
        return (key, tdesc, length, rng.randbytes(length))
    if tdesc.array == "fixed":
        blob = b"".join(random_scalar(tdesc.elem(), rng)
                        for _ in range(tdesc.length))
        return (key, tdesc, None, blob)
    return (key, tdesc, None, random_scalar(tdesc, rng))


def random_gene(specs: list[FunctionSpec], rng: Random,
                max_array: int = INITIAL_MAX_ARRAY_LEN
                ) -> tuple[bytes, GeneMap]:
    """Fresh genome: a type-valid random value for every parameter of
    every function, then the six environment variables."""
    items = []
    for spec in specs:
        for pname, tdesc in spec.inputs:
            key = param_key(spec.name, len(spec.inputs), pname, tdesc)
            items.append(_random_entry(key, tdesc, rng, max_array))
    for name, tdesc in ENV_VARS:
        items.append((env_key(name), tdesc, None,
                      random_env_value(name, tdesc, rng)))
    return GeneMap.build(items)


# ---------------------------------------------------------------------------
# ABI encoding
# ---------------------------------------------------------------------------

def _word_from_scalar(tdesc: TypeDesc, raw: bytes) -> bytes:
    if tdesc.kind == "uint":
        return raw.rjust(32, b"\x00")
    if tdesc.kind == "int":
        value = int.from_bytes(raw, "big", signed=True)
        return (value & ((1 << 256) - 1)).to_bytes(32, "big")
    if tdesc.kind == "address":
        return raw.rjust(32, b"\x00")
    if tdesc.kind == "bool":
        return (raw[-1] & 1).to_bytes(32, "big")
    if tdesc.kind == "bytesN":
        return raw.ljust(32, b"\x00")
    raise ValueError(f"not a scalar type: {tdesc.canonical()}")


def _pad32(blob: bytes) -> bytes:
    rem = len(blob) % 32
    return blob if rem == 0 else blob + b"\x00" * (32 - rem)


def encode_args(spec: FunctionSpec, gene: bytes, gene_map: GeneMap) -> bytes:
    """Standard ABI calldata for `spec` from the gene's current values:
    4-byte selector (omitted for constructors), 32-byte head slots, then
    dynamic tails as offset + length + padded payload."""
    heads: list[bytes] = []
    tails: list[bytes] = []
    # head width: one word per scalar/offset, k words per fixed array
    head_size = 0
    for _, tdesc in spec.inputs:
        head_size += 32 * (tdesc.length if tdesc.array == "fixed" else 1)

    tail_pos = head_size
    for pname, tdesc in spec.inputs:
        key = param_key(spec.name, len(spec.inputs), pname, tdesc)
        entry = gene_map.by_key.get(key)
        if entry is None:
            raise AbiError(f"gene map is missing {key!r}")
        raw = gene[entry.start:entry.end]
        if tdesc.array == "fixed":
            ew = tdesc.elem().scalar_width()
            for i in range(tdesc.length):
                heads.append(_word_from_scalar(tdesc.elem(),
                                               raw[i * ew:(i + 1) * ew]))
        elif tdesc.array == "dyn":
            ew = tdesc.elem().scalar_width()
            n = entry.length if entry.length is not None else 0
            tail = n.to_bytes(32, "big") + b"".join(
                _word_from_scalar(tdesc.elem(), raw[i * ew:(i + 1) * ew])
                for i in range(n))
            heads.append(tail_pos.to_bytes(32, "big"))
            tails.append(tail)
            tail_pos += len(tail)
        elif tdesc.kind in ("bytes", "string"):
            n = entry.length if entry.length is not None else 0
            tail = n.to_bytes(32, "big") + _pad32(raw[:n])
            heads.append(tail_pos.to_bytes(32, "big"))
            tails.append(tail)
            tail_pos += len(tail)
        else:
            heads.append(_word_from_scalar(tdesc, raw))
    body = b"".join(heads) + b"".join(tails)
    if spec.is_constructor:
        return body
    return selector(spec) + body


def gene_values(spec: FunctionSpec, gene: bytes, gene_map: GeneMap) -> list:
    """Decode the gene's values for `spec` into plain Python values (for
    reports and debugging)."""
    out = []
    for pname, tdesc in spec.inputs:
        key = param_key(spec.name, len(spec.inputs), pname, tdesc)
        entry = gene_map.by_key[key]
        raw = gene[entry.start:entry.end]
        out.append(_decode_entry(tdesc, entry, raw))
    return out


def _decode_scalar(tdesc: TypeDesc, raw: bytes):
    if tdesc.kind == "uint":
        return int.from_bytes(raw, "big")
    if tdesc.kind == "int":
        return int.from_bytes(raw, "big", signed=True)
    if tdesc.kind == "address":
        return "0x" + raw.hex()
    if tdesc.kind == "bool":
        return bool(raw[-1] & 1)
    return "0x" + raw.hex()


def _decode_entry(tdesc: TypeDesc, entry: GeneEntry, raw: bytes):
    if tdesc.array is not None:
        ew = tdesc.elem().scalar_width()
        n = entry.length if tdesc.array == "dyn" else tdesc.length
        return [_decode_scalar(tdesc.elem(), raw[i * ew:(i + 1) * ew])
                for i in range(n)]
    if tdesc.kind in ("bytes", "string"):
        return "0x" + raw.hex()
    return _decode_scalar(tdesc, raw)


def read_env(gene: bytes, gene_map: GeneMap) -> dict[str, int]:
    """Environment variables as ints keyed by name."""
    out = {}
    for name, _ in ENV_VARS:
        e = gene_map.by_key[env_key(name)]
        out[name] = int.from_bytes(gene[e.start:e.end], "big")
    return out


def write_env(gene: bytes, gene_map: GeneMap, name: str, value: int) -> bytes:
    """Return a new gene with one environment variable overwritten."""
    e = gene_map.by_key[env_key(name)]
    return gene_map.replace(gene, env_key(name),
                            value.to_bytes(e.end - e.start, "big"))
