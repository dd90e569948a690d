# Synthesis of planar rounds into fusion graphs over 3-qubit GHZ resource
# states. A degree-n graph node becomes a chain of max(1, n-1) resource
# states whose dangling leaves are handed to neighbors in the node's
# rotation order, which is what keeps the result planar.

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .planarity import PlanarityError, RotationSystem, Round, is_planar

ROOT = "root"
LEAF_A = "leaf_a"
LEAF_B = "leaf_b"
SLOTS = (ROOT, LEAF_A, LEAF_B)


class FusionGraphError(Exception):
    pass


@dataclass
class ResourceNode:
    """One 3-qubit GHZ emission: root entangled with two leaves."""

    rid: int
    group: int | None = None  # original graph-state node this chain synthesizes
    slots: dict[str, tuple] = field(default_factory=lambda: {s: ("free",) for s in SLOTS})

    def free_slots(self) -> list[str]:
        return [s for s in SLOTS if self.slots[s][0] == "free"]

    def fusion_count(self) -> int:
        return sum(1 for s in SLOTS if self.slots[s][0] == "fusion")


@dataclass
class FusionEdge:
    eid: int
    a: tuple[int, str]  # (resource node id, slot)
    b: tuple[int, str]
    kind: str  # "chain" within a group, "edge" realizing a graph edge
    graph_edge: tuple[int, int] | None = None


@dataclass
class FusionGraph:
    nodes: dict[int, ResourceNode] = field(default_factory=dict)
    edges: list[FusionEdge] = field(default_factory=list)
    groups: dict[int, list[int]] = field(default_factory=dict)  # graph node -> chain of rids
    port_map: dict[int, tuple[int, str]] = field(default_factory=dict)  # stub id -> dangling port
    rotation: RotationSystem | None = None
    round_index: int | None = None

    def new_node(self, group: int | None = None) -> ResourceNode:
        rid = len(self.nodes)
        rn = ResourceNode(rid=rid, group=group)
        self.nodes[rid] = rn
        return rn

    def add_fusion(self, a: tuple[int, str], b: tuple[int, str], kind: str,
                   graph_edge: tuple[int, int] | None = None) -> FusionEdge:
        for rid, slot in (a, b):
            use = self.nodes[rid].slots[slot]
            if use[0] not in ("free", "port"):
                raise FusionGraphError(f"slot {slot} of node {rid} already {use[0]}")
        eid = len(self.edges)
        edge = FusionEdge(eid=eid, a=a, b=b, kind=kind, graph_edge=graph_edge)
        self.edges.append(edge)
        self.nodes[a[0]].slots[a[1]] = ("fusion", eid)
        self.nodes[b[0]].slots[b[1]] = ("fusion", eid)
        return edge

    def adjacency(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {rid: [] for rid in self.nodes}
        for e in self.edges:
            adj[e.a[0]].append(e.b[0])
            adj[e.b[0]].append(e.a[0])
        return adj

    def edge_pairs(self) -> list[tuple[int, int]]:
        return [(e.a[0], e.b[0]) for e in self.edges]

    def dangling_ports(self) -> list[tuple[int, str]]:
        return [
            (rid, slot)
            for rid in sorted(self.nodes)
            for slot in SLOTS
            if self.nodes[rid].slots[slot][0] == "port"
        ]

    def to_json(self) -> str:
        doc = {
            "schema_version": 1,
            "round": self.round_index,
            "nodes": [
                {
                    "id": rid,
                    "group": rn.group,
                    "slots": {s: list(rn.slots[s]) for s in SLOTS},
                }
                for rid, rn in sorted(self.nodes.items())
            ],
            "edges": [
                {"id": e.eid, "a": list(e.a), "b": list(e.b), "kind": e.kind,
                 "graph_edge": list(e.graph_edge) if e.graph_edge else None}
                for e in self.edges
            ],
            "groups": {str(k): v for k, v in sorted(self.groups.items())},
            "ports": {str(k): list(v) for k, v in sorted(self.port_map.items())},
        }
        return json.dumps(doc, indent=1, sort_keys=True)


def synthesize_node(fg: FusionGraph, graph_node: int, degree: int,
                    angle_use: tuple = ("measure", 0.0)) -> list[tuple[int, str]]:
    """Chain of max(1, degree-1) resource states exposing `degree` ports.

    The first root carries the node's measurement; later roots are consumed
    by the chain fusions. Returns the ports in chain (= rotation) order.
    """
    if degree < 0:
        raise FusionGraphError("negative degree")
    count = max(1, degree - 1)
    chain = [fg.new_node(group=graph_node) for _ in range(count)]
    fg.groups[graph_node] = [rn.rid for rn in chain]
    chain[0].slots[ROOT] = angle_use
    for prev, nxt in zip(chain, chain[1:]):
        fg.add_fusion((prev.rid, LEAF_B), (nxt.rid, ROOT), kind="chain")
    ports: list[tuple[int, str]] = []
    if degree == 0:
        chain[0].slots[LEAF_A] = ("discard",)
        chain[0].slots[LEAF_B] = ("discard",)
    elif degree == 1:
        ports = [(chain[0].rid, LEAF_A)]
        chain[0].slots[LEAF_B] = ("discard",)
    else:
        ports = [(rn.rid, LEAF_A) for rn in chain] + [(chain[-1].rid, LEAF_B)]
    for rid, slot in ports:
        fg.nodes[rid].slots[slot] = ("port", graph_node)
    return ports


def connect_groups(fg: FusionGraph, a: tuple[int, str], b: tuple[int, str],
                   graph_edge: tuple[int, int] | None = None) -> FusionEdge:
    """Fuse two dangling leaf ports; realizes one graph edge."""
    for rid, slot in (a, b):
        if fg.nodes[rid].slots[slot][0] != "port":
            raise FusionGraphError(f"({rid}, {slot}) is not a dangling port")
    return fg.add_fusion(a, b, kind="edge", graph_edge=graph_edge)


def extend_edge(fg: FusionGraph, port: tuple[int, str], hops: int) -> tuple[int, str]:
    """Lengthen a dangling edge by `hops` leaf-to-leaf resource states.

    Each hop becomes a genuine degree-2 chain node (root measured in X);
    the final port stays a dangling leaf.
    """
    if hops < 0:
        raise FusionGraphError("negative hops")
    cur = port
    owner = fg.nodes[port[0]].slots[port[1]][1] if fg.nodes[port[0]].slots[port[1]][0] == "port" else None
    for _ in range(hops):
        rn = fg.new_node(group=None)
        rn.slots[ROOT] = ("measure", 0.0)
        fg.add_fusion(cur, (rn.rid, LEAF_A), kind="edge")
        rn.slots[LEAF_B] = ("port", owner)
        cur = (rn.rid, LEAF_B)
    return cur


def generate_fusion_graph(rnd: Round, angles: dict[int, float | None],
                          outputs: set[int], require_planar: bool = True) -> FusionGraph:
    """Replace every node of a planar round by its chain, join chains along
    the round's edges following each node's rotation order, and expose one
    dangling port per virtual stub.

    With require_planar (the pipeline default) a non-planar result is an
    internal bug; semantics-only callers may synthesize non-planar graphs.
    """
    fg = FusionGraph(round_index=rnd.index)
    port_of: dict[tuple[int, object], tuple[int, str]] = {}  # (node, neighbor) -> port
    for v in rnd.nodes:
        nbrs = list(rnd.rotation.order.get(v, []))
        degree = len(nbrs)
        if v in outputs:
            use = ("output",)
        else:
            use = ("measure", float(angles[v]))
        ports = synthesize_node(fg, v, degree, angle_use=use)
        for nbr, port in zip(nbrs, ports):
            port_of[(v, nbr)] = port
    for a, b in rnd.edges:
        pa = port_of[(a, b)]
        pb = port_of[(b, a)]
        connect_groups(fg, pa, pb, graph_edge=(a, b))
    for stub in rnd.stubs:
        port = port_of[(stub.inner, stub.stub_id)]
        fg.port_map[stub.stub_id] = port
    result = is_planar(fg.edge_pairs(), nodes=sorted(fg.nodes))
    if result.planar:
        fg.rotation = result.rotation
    elif require_planar:
        raise PlanarityError(f"fusion graph of round {rnd.index} is not planar")
    return fg


def fusion_lower_bound(rnd: Round) -> int:
    """#edges + sum over nodes of max(0, degree - 2) chain fusions."""
    deg: dict[int, int] = {v: 0 for v in rnd.nodes}
    for a, b in rnd.edges:
        deg[a] += 1
        deg[b] += 1
    for stub in rnd.stubs:
        deg[stub.inner] += 1
    return len(rnd.edges) + sum(max(0, d - 2) for d in deg.values())
