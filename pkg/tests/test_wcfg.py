"""Weighted CFG construction, static estimate, exports."""

import random

from gasfuzz.asm import assemble, push
from gasfuzz.bytecode import disassemble, is_terminator, JUMPDEST
from gasfuzz.wcfg import (INFINITE, BasicBlock, WCFG, build_wcfg,
                          static_estimate, to_dot, to_json_dict)


def _graph(code: bytes) -> WCFG:
    return build_wcfg(disassemble(code))


def test_empty_graph():
    g = build_wcfg([])
    assert g.blocks == [] and g.edges == {}
    assert static_estimate(g) == 0


def test_single_block_weight():
    # PUSH1 0x60, PUSH1 0x40, MSTORE, STOP: 3 + 3 + 3 + 0
    g = _graph(bytes.fromhex("606060405200"))
    assert len(g.blocks) == 1
    assert g.blocks[0].weight == 9
    assert static_estimate(g) == 9


def test_jumpi_makes_three_blocks_two_edges():
    code = assemble([push(1), "@t", "JUMPI", "STOP", "t:", "JUMPDEST",
                     "STOP"])
    g = _graph(code)
    assert len(g.blocks) == 3
    assert set(g.edges) == {(0, 1), (0, 2)}
    assert not any(g.edges.values())     # both static


def test_every_instruction_in_exactly_one_block_on_corpus(corpus_dir):
    from gasfuzz.bytecode import load_bin
    for name in ("token", "distributor", "straightline"):
        ins = disassemble(load_bin(corpus_dir / f"{name}.bin"))
        g = build_wcfg(ins)
        counted = sum(len(b.instructions) for b in g.blocks)
        assert counted == len(ins)


def test_structural_properties_random_codes():
    rng = random.Random(99)
    for _ in range(300):
        ins = disassemble(rng.randbytes(rng.randrange(0, 150)))
        g = build_wcfg(ins)
        # partition
        assert sum(len(b.instructions) for b in g.blocks) == len(ins)
        seen = set()
        for b in g.blocks:
            for i in b.instructions:
                assert i.offset not in seen
                seen.add(i.offset)
        for b in g.blocks:
            # JUMPDEST only at block start
            for i in b.instructions[1:]:
                assert i.opcode != JUMPDEST
            # terminators only at block end
            for i in b.instructions[:-1]:
                assert not is_terminator(i.opcode)


def test_weight_excludes_consume_all_sentinel():
    g = _graph(b"\x01\xfe")        # ADD, INVALID
    assert g.blocks[0].weight == 3


def _diamond() -> WCFG:
    blocks = [BasicBlock(i, 0, 0, [], w) for i, w in
              enumerate([5, 3, 7, 2])]
    edges = {(0, 1): False, (0, 2): False, (1, 3): False, (2, 3): False}
    return WCFG(blocks=blocks, edges=edges)


def test_static_estimate_diamond():
    # paths by hand: 5+3+2 = 10 and 5+7+2 = 14
    assert static_estimate(_diamond()) == 14


def test_static_estimate_cycle_is_infinite():
    g = _diamond()
    g.edges[(3, 0)] = False
    assert static_estimate(g) == INFINITE


def test_dynamic_edges_do_not_affect_estimate():
    g = _diamond()
    assert g.add_dynamic_edge(3, 0)
    assert not g.add_dynamic_edge(3, 0)
    assert static_estimate(g) == 14


def test_unreachable_cycle_is_ignored():
    g = _diamond()
    g.blocks.append(BasicBlock(4, 0, 0, [], 100))
    g.edges[(4, 4)] = False
    assert static_estimate(g) == 14


def test_loop_bytecode_is_infinite():
    code = assemble(["loop:", "JUMPDEST", "@loop", "JUMP"])
    assert static_estimate(_graph(code)) == INFINITE


def test_corpus_estimates(corpus_dir):
    from gasfuzz import harness
    from gasfuzz.bytecode import load_bin
    loop = harness.deploy(load_bin(corpus_dir / "distributor.bin"))
    line = harness.deploy(load_bin(corpus_dir / "straightline.bin"))
    assert static_estimate(_graph(loop.runtime_code)) == INFINITE
    est = static_estimate(_graph(line.runtime_code))
    assert est != INFINITE and est > 0


def test_to_dot_empty():
    assert to_dot(WCFG()) == "digraph wcfg {\n}\n"


def test_to_dot_single_block():
    g = _graph(b"\x00")
    text = to_dot(g)
    assert '0 [label="0\\n0"];' in text
    assert "->" not in text


def test_to_dot_diamond_golden():
    expected = (
        "digraph wcfg {\n"
        '  0 [label="0\\n5"];\n'
        '  1 [label="1\\n3"];\n'
        '  2 [label="2\\n7"];\n'
        '  3 [label="3\\n2"];\n'
        "  0 -> 1;\n"
        "  0 -> 2;\n"
        "  1 -> 3;\n"
        "  2 -> 3;\n"
        "}\n"
    )
    assert to_dot(_diamond()) == expected
    assert to_dot(_diamond()) == expected     # stable across calls


def test_json_export_schema():
    g = _graph(assemble([push(1), "@t", "JUMPI", "STOP", "t:", "JUMPDEST",
                         "STOP"]))
    d = to_json_dict(g)
    assert d["entry"] == 0
    assert [b["id"] for b in d["blocks"]] == [0, 1, 2]
    assert all({"src", "dst", "dynamic"} <= set(e) for e in d["edges"])
    ins0 = d["blocks"][0]["instructions"][0]
    assert ins0["name"].startswith("PUSH")
    assert ins0["immediate"] == "0x01"
