"""Gas-weighted control-flow graph over bytecode basic blocks.

Each node is a maximal non-branching run of instructions weighted by the
sum of its static gas costs (operand-dependent components excluded, so a
node's weight is a lower bound on what any execution pays inside it).
Branches occur at JUMP/JUMPI; jump targets pushed immediately before the
jump are resolved statically, anything else is added as a dynamic edge by
the campaign once an execution traverses it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .bytecode import (CONSUME_ALL, Instruction, is_push, is_terminator,
                       opcode_name, static_gas, JUMP, JUMPI, JUMPDEST)

# Static estimate result for any graph with a reachable cycle.
INFINITE = float("inf")


@dataclass
class BasicBlock:
    id: int
    start_offset: int
    end_offset: int
    instructions: list[Instruction]
    weight: int

    @property
    def terminator(self) -> int:
        return self.instructions[-1].opcode


@dataclass
class EdgeFeedbackSlot:
    """Best-seen feedback for one edge; values only ever grow."""

    edge: tuple[int, int]
    max_gas: int = 0
    max_hits: int = 0

    def observe(self, gas: int, hits: int) -> None:
        if gas > self.max_gas:
            self.max_gas = gas
        if hits > self.max_hits:
            self.max_hits = hits


@dataclass
class WCFG:
    blocks: list[BasicBlock] = field(default_factory=list)
    # edge -> True when discovered at runtime rather than statically
    edges: dict[tuple[int, int], bool] = field(default_factory=dict)
    entry: int = 0

    def add_dynamic_edge(self, src: int, dst: int) -> bool:
        """Record a runtime-discovered edge; returns True if new."""
        if (src, dst) in self.edges:
            return False
        self.edges[(src, dst)] = True
        return True

    def successors(self, block_id: int, include_dynamic: bool = True):
        for (src, dst), dyn in self.edges.items():
            if src == block_id and (include_dynamic or not dyn):
                yield dst


def _block_weight(instructions: list[Instruction]) -> int:
    weight = 0
    for ins in instructions:
        g = static_gas(ins.opcode)
        if g is not CONSUME_ALL:
            weight += g
    return weight


def build_wcfg(instructions: list[Instruction]) -> WCFG:
    """Partition an instruction stream into weighted blocks and connect
    the statically known edges."""
    if not instructions:
        return WCFG()

    # leaders: offset 0, every JUMPDEST, everything following a terminator
    leaders = {instructions[0].offset}
    prev_terminates = False
    for ins in instructions:
        if ins.opcode == JUMPDEST or prev_terminates:
            leaders.add(ins.offset)
        prev_terminates = is_terminator(ins.opcode)

    blocks: list[BasicBlock] = []
    current: list[Instruction] = []
    for ins in instructions:
        if ins.offset in leaders and current:
            blocks.append(_make_block(len(blocks), current))
            current = []
        current.append(ins)
    blocks.append(_make_block(len(blocks), current))

    start2block = {b.start_offset: b.id for b in blocks}
    edges: dict[tuple[int, int], bool] = {}
    for b in blocks:
        last = b.instructions[-1]
        # fall-through: JUMPI branches both ways; a block ended only by a
        # following JUMPDEST simply continues
        falls = last.opcode == JUMPI or not is_terminator(last.opcode)
        if falls and b.id + 1 < len(blocks):
            edges[(b.id, b.id + 1)] = False
        # statically resolvable jump target: the instruction immediately
        # before the jump is a PUSH of the destination
        if last.opcode in (JUMP, JUMPI) and len(b.instructions) >= 2:
            prev = b.instructions[-2]
            if is_push(prev.opcode):
                target = prev.push_value
                dst = start2block.get(target)
                if dst is not None and blocks[dst].instructions[0].opcode \
                        == JUMPDEST:
                    edges[(b.id, dst)] = False
    return WCFG(blocks=blocks, edges=edges)


def _make_block(block_id: int, instructions: list[Instruction]) -> BasicBlock:
    return BasicBlock(
        id=block_id,
        start_offset=instructions[0].offset,
        end_offset=instructions[-1].offset,
        instructions=list(instructions),
        weight=_block_weight(instructions),
    )


def static_estimate(graph: WCFG):
    """Maximum path weight from the entry, or INFINITE when a cycle is
    reachable (the behavior class of compiler-side static estimators:
    input-dependent loops defeat them)."""
    if not graph.blocks:
        return 0
    succ: dict[int, list[int]] = {b.id: [] for b in graph.blocks}
    for (src, dst), dyn in graph.edges.items():
        if not dyn:
            succ[src].append(dst)

    # iterative DFS: detect reachable cycles, collect a reverse postorder
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {b.id: WHITE for b in graph.blocks}
    order: list[int] = []
    stack: list[tuple[int, int]] = [(graph.entry, 0)]
    color[graph.entry] = GRAY
    while stack:
        node, i = stack[-1]
        if i < len(succ[node]):
            stack[-1] = (node, i + 1)
            nxt = succ[node][i]
            c = color[nxt]
            if c == GRAY:
                return INFINITE
            if c == WHITE:
                color[nxt] = GRAY
                stack.append((nxt, 0))
        else:
            stack.pop()
            color[node] = BLACK
            order.append(node)

    weight = {b.id: b.weight for b in graph.blocks}
    best = {node: weight[node] for node in order}
    for node in order:          # reverse postorder visits children first
        if succ[node]:
            best[node] = weight[node] + max(
                best[s] for s in succ[node] if s in best)
    return best[graph.entry]


def to_dot(graph: WCFG) -> str:
    """DOT text: one node per block labeled `id\\nweight`, one arrow per
    edge, deterministically ordered."""
    lines = ["digraph wcfg {"]
    for b in graph.blocks:
        lines.append(f'  {b.id} [label="{b.id}\\n{b.weight}"];')
    for (src, dst) in sorted(graph.edges):
        style = " [style=dashed]" if graph.edges[(src, dst)] else ""
        lines.append(f"  {src} -> {dst}{style};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_json_dict(graph: WCFG) -> dict:
    """JSON-ready description of the graph (schema documented in README)."""
    return {
        "entry": graph.entry,
        "blocks": [
            {
                "id": b.id,
                "start": b.start_offset,
                "end": b.end_offset,
                "weight": b.weight,
                "instructions": [
                    {"offset": i.offset, "op": i.opcode,
                     "name": opcode_name(i.opcode),
                     **({"immediate": "0x" + i.immediate.hex()}
                        if i.immediate is not None else {})}
                    for i in b.instructions
                ],
            }
            for b in graph.blocks
        ],
        "edges": [
            {"src": src, "dst": dst, "dynamic": dyn}
            for (src, dst), dyn in sorted(graph.edges.items())
        ],
    }
