"""Carry-lookahead adder construction as a pure Boolean DAG.

The adder is assembled from 4-bit lookahead blocks composed hierarchically:
bits feed first-level blocks, whose group generate/propagate terms feed the
next level, and so on until a single root remains.  Carries are then
distributed back down the tree.  The carry network uses the OR form of
propagate so it stays monotone; sum bits reuse the XOR form.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum

SUPPORTED_WIDTHS = (8, 16, 32, 64)


class NetworkError(ValueError):
    pass


class GateOp(Enum):
    INPUT = "input"
    AND = "and"
    OR = "or"
    NOT = "not"
    XOR = "xor"
    CONST = "const"


@dataclass(frozen=True)
class GateNode:
    id: int
    op: GateOp
    fanins: tuple[int, ...]
    name: str | None = None  # inputs only
    value: int | None = None  # consts only


@dataclass
class LogicNetwork:
    """Combinational DAG in definition order: every fanin precedes its user."""

    nodes: list[GateNode]
    inputs: dict[str, int]
    outputs: dict[str, int]
    bit_width: int
    lookahead_group_size: int

    def fanout_counts(self) -> dict[int, int]:
        counts = {node.id: 0 for node in self.nodes}
        for node in self.nodes:
            for f in node.fanins:
                counts[f] += 1
        for nid in self.outputs.values():
            counts[nid] += 1
        return counts

    def depth(self) -> int:
        """Longest gate path (inputs count as depth 0) to any output."""
        depths = [0] * len(self.nodes)
        for node in self.nodes:
            if node.op in (GateOp.INPUT, GateOp.CONST):
                depths[node.id] = 0
            else:
                depths[node.id] = 1 + max(depths[f] for f in node.fanins)
        return max(depths[nid] for nid in self.outputs.values())


class _Builder:
    """Gate factory with structural deduplication."""

    def __init__(self):
        self.nodes: list[GateNode] = []
        self._cache: dict[tuple, int] = {}

    def input(self, name: str) -> int:
        nid = len(self.nodes)
        self.nodes.append(GateNode(nid, GateOp.INPUT, (), name=name))
        return nid

    def gate(self, op: GateOp, fanins) -> int:
        fanins = tuple(fanins)
        if op in (GateOp.AND, GateOp.OR) and len(fanins) == 1:
            return fanins[0]
        key = (op, fanins)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        nid = len(self.nodes)
        self.nodes.append(GateNode(nid, op, fanins))
        self._cache[key] = nid
        return nid


def _lookahead_carries(b: _Builder, gps: list[tuple[int, int]], cin: int) -> list[int]:
    """Carry into each child after the first, from child (G, P) pairs and cin.

    carry[k] = G[k-1] + P[k-1]G[k-2] + ... + P[k-1]..P[1]G[0] + P[k-1]..P[0]cin
    """
    carries = []
    for k in range(1, len(gps)):
        terms = []
        for j in range(k - 1, -1, -1):
            ps = [gps[i][1] for i in range(k - 1, j, -1)]
            terms.append(b.gate(GateOp.AND, ps + [gps[j][0]]))
        terms.append(b.gate(GateOp.AND, [gps[i][1] for i in range(k - 1, -1, -1)] + [cin]))
        carries.append(b.gate(GateOp.OR, terms))
    return carries


def _group_gp(b: _Builder, gps: list[tuple[int, int]]) -> tuple[int, int]:
    """Group (G, P) over the children, highest index last in each product."""
    m = len(gps)
    terms = [gps[m - 1][0]]
    for j in range(m - 2, -1, -1):
        ps = [gps[i][1] for i in range(m - 1, j, -1)]
        terms.append(b.gate(GateOp.AND, ps + [gps[j][0]]))
    g = b.gate(GateOp.OR, terms)
    p = b.gate(GateOp.AND, [gps[i][1] for i in range(m - 1, -1, -1)])
    return g, p


class _Block:
    def __init__(self, children, gp):
        self.children = children  # _Block list, or bit indices at the leaves
        self.gp = gp


def build_cla(bit_width: int, group_size: int = 4) -> LogicNetwork:
    """N-bit adder network with hierarchical lookahead over `group_size` units."""
    if bit_width not in SUPPORTED_WIDTHS:
        raise NetworkError(
            f"unsupported bit width {bit_width}; expected one of {SUPPORTED_WIDTHS}"
        )
    if group_size < 2 or group_size & (group_size - 1):
        raise NetworkError(f"group size must be a power of two >= 2, got {group_size}")
    group_size = min(group_size, bit_width)

    b = _Builder()
    a_ids = [b.input(f"a[{i}]") for i in range(bit_width)]
    b_ids = [b.input(f"b[{i}]") for i in range(bit_width)]
    cin = b.input("c_in")

    gen = [b.gate(GateOp.AND, (a_ids[i], b_ids[i])) for i in range(bit_width)]
    prop_or = [b.gate(GateOp.OR, (a_ids[i], b_ids[i])) for i in range(bit_width)]
    prop_xor = [b.gate(GateOp.XOR, (a_ids[i], b_ids[i])) for i in range(bit_width)]

    # Upward pass: chunk units into blocks until a single root remains.
    units: list[_Block] = [_Block(i, (gen[i], prop_or[i])) for i in range(bit_width)]
    while len(units) > 1:
        next_units = []
        for lo in range(0, len(units), group_size):
            chunk = units[lo : lo + group_size]
            if len(chunk) == 1:
                next_units.append(chunk[0])
            else:
                next_units.append(_Block(chunk, _group_gp(b, [u.gp for u in chunk])))
        units = next_units
    root = units[0]

    # Downward pass: lookahead carries into each child, then recurse.
    bit_carry = [None] * bit_width

    def distribute(block: _Block, block_cin: int) -> None:
        if isinstance(block.children, int):
            bit_carry[block.children] = block_cin
            return
        cins = [block_cin] + _lookahead_carries(
            b, [u.gp for u in block.children], block_cin
        )
        for child, child_cin in zip(block.children, cins):
            distribute(child, child_cin)

    distribute(root, cin)

    outputs = {
        f"sum[{i}]": b.gate(GateOp.XOR, (prop_xor[i], bit_carry[i]))
        for i in range(bit_width)
    }
    g_root, p_root = root.gp
    outputs["carry_out"] = b.gate(
        GateOp.OR, (g_root, b.gate(GateOp.AND, (p_root, cin)))
    )

    network = LogicNetwork(
        nodes=b.nodes,
        inputs={f"a[{i}]": a_ids[i] for i in range(bit_width)}
        | {f"b[{i}]": b_ids[i] for i in range(bit_width)}
        | {"c_in": cin},
        outputs=outputs,
        bit_width=bit_width,
        lookahead_group_size=group_size,
    )
    return _prune(network)


def _prune(network: LogicNetwork) -> LogicNetwork:
    """Drop gates unreachable from the outputs, keeping all inputs."""
    live = set(network.inputs.values()) | set(network.outputs.values())
    for node in reversed(network.nodes):
        if node.id in live:
            live.update(node.fanins)
    remap: dict[int, int] = {}
    nodes: list[GateNode] = []
    for node in network.nodes:
        if node.id not in live:
            continue
        nid = len(nodes)
        remap[node.id] = nid
        nodes.append(
            GateNode(
                nid,
                node.op,
                tuple(remap[f] for f in node.fanins),
                name=node.name,
                value=node.value,
            )
        )
    return LogicNetwork(
        nodes=nodes,
        inputs={name: remap[nid] for name, nid in network.inputs.items()},
        outputs={name: remap[nid] for name, nid in network.outputs.items()},
        bit_width=network.bit_width,
        lookahead_group_size=network.lookahead_group_size,
    )


def evaluate(network: LogicNetwork, assignment: dict[str, int], mask: int = 1) -> dict[str, int]:
    """Topological evaluation of the DAG.

    Levels may be multi-bit integers evaluated bitwise in parallel; `mask`
    is the all-ones word of that width (1 for plain single-bit use).
    """
    missing = [name for name in network.inputs if name not in assignment]
    if missing:
        raise NetworkError(f"missing input bit(s): {', '.join(sorted(missing))}")
    levels = [0] * len(network.nodes)
    for node in network.nodes:
        if node.op is GateOp.INPUT:
            levels[node.id] = assignment[node.name] & mask
        elif node.op is GateOp.CONST:
            levels[node.id] = mask if node.value else 0
        elif node.op is GateOp.AND:
            v = mask
            for f in node.fanins:
                v &= levels[f]
            levels[node.id] = v
        elif node.op is GateOp.OR:
            v = 0
            for f in node.fanins:
                v |= levels[f]
            levels[node.id] = v
        elif node.op is GateOp.XOR:
            v = 0
            for f in node.fanins:
                v ^= levels[f]
            levels[node.id] = v
        else:  # NOT
            levels[node.id] = levels[node.fanins[0]] ^ mask
    return {name: levels[nid] for name, nid in network.outputs.items()}


def pack_inputs(bit_width: int, a: int, b: int, c_in: int) -> dict[str, int]:
    """Input assignment for integer operands (or bit-parallel masks)."""
    assignment = {"c_in": c_in}
    for i in range(bit_width):
        assignment[f"a[{i}]"] = (a >> i) & 1
        assignment[f"b[{i}]"] = (b >> i) & 1
    return assignment


def unpack_outputs(bit_width: int, outputs: dict[str, int]) -> tuple[int, int]:
    total = 0
    for i in range(bit_width):
        total |= (outputs[f"sum[{i}]"] & 1) << i
    return total, outputs["carry_out"] & 1


def add_via_network(network: LogicNetwork, a: int, b: int, c_in: int) -> tuple[int, int]:
    outputs = evaluate(network, pack_inputs(network.bit_width, a, b, c_in))
    return unpack_outputs(network.bit_width, outputs)


def critical_vector(bit_width: int) -> tuple[int, int, int]:
    """Full carry-propagate stimulus: a all ones, b one, carry-in zero."""
    if bit_width not in SUPPORTED_WIDTHS:
        raise NetworkError(f"unsupported bit width {bit_width}")
    return (1 << bit_width) - 1, 1, 0


def random_vectors(bit_width: int, count: int, seed: int) -> list[tuple[int, int, int]]:
    rng = random.Random(seed)
    return [
        (rng.getrandbits(bit_width), rng.getrandbits(bit_width), rng.getrandbits(1))
        for _ in range(count)
    ]


def format_network(network: LogicNetwork) -> str:
    """Structural listing, one node per line: id, op, fanins, name/output tags."""
    by_id = {}
    for name, nid in network.outputs.items():
        by_id.setdefault(nid, []).append(name)
    lines = [
        f"# {network.bit_width}-bit adder, lookahead group {network.lookahead_group_size}"
    ]
    for node in network.nodes:
        parts = [str(node.id), node.op.value]
        if node.fanins:
            parts.append(",".join(str(f) for f in node.fanins))
        if node.name:
            parts.append(node.name)
        for out_name in by_id.get(node.id, ()):
            parts.append(f"-> {out_name}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"
