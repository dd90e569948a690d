# Planarity testing with rotation systems, maximal planar subgraphs, and
# the partitioner that peels executability strata into planar rounds and
# merges successive strata while the union stays planar.

from __future__ import annotations

import json
from dataclasses import dataclass, field

import networkx as nx

from .graphstate import DependencyLayers, GraphState


class PlanarityError(Exception):
    pass


@dataclass
class RotationSystem:
    """Counter-clockwise cyclic neighbor order per node (a combinatorial
    embedding)."""

    order: dict[object, list[object]] = field(default_factory=dict)

    def face_count(self) -> int:
        """Count faces by half-edge traversal (next edge clockwise after the
        arrival edge)."""
        half_edges = {(u, v) for u, nbrs in self.order.items() for v in nbrs}
        seen: set[tuple[object, object]] = set()
        faces = 0
        for start in sorted(half_edges, key=repr):
            if start in seen:
                continue
            faces += 1
            edge = start
            while edge not in seen:
                seen.add(edge)
                u, v = edge
                nbrs = self.order[v]
                i = nbrs.index(u)
                w = nbrs[(i - 1) % len(nbrs)]
                edge = (v, w)
        return faces

    def euler_ok(self, num_nodes: int, num_edges: int, num_components: int) -> bool:
        # V - E + F = 1 + C (counting one shared outer face per component)
        return num_nodes - num_edges + self.face_count() == 1 + num_components


@dataclass
class KuratowskiWitness:
    kind: str  # "K5" or "K3,3"
    edges: list[tuple[object, object]]


@dataclass
class PlanarityResult:
    planar: bool
    rotation: RotationSystem | None = None
    witness: KuratowskiWitness | None = None

    def __bool__(self) -> bool:
        return self.planar


def _as_nx(edges, nodes=None) -> nx.Graph:
    g = nx.Graph()
    if nodes is not None:
        g.add_nodes_from(nodes)
    g.add_edges_from(edges)
    return g


def is_planar(edges, nodes=None) -> PlanarityResult:
    """Left-right planarity test; returns a rotation system or a K5/K3,3
    subdivision witness."""
    g = edges if isinstance(edges, nx.Graph) else _as_nx(edges, nodes)
    ok, cert = nx.check_planarity(g, counterexample=True)
    if ok:
        rotation = RotationSystem(
            {v: list(reversed(list(cert.neighbors_cw_order(v)))) for v in g.nodes}
        )
        return PlanarityResult(True, rotation=rotation)
    branch = [v for v in cert.nodes if cert.degree(v) >= 3]
    kind = "K5" if sum(1 for v in branch if cert.degree(v) == 4) >= 5 else "K3,3"
    return PlanarityResult(False, witness=KuratowskiWitness(kind, sorted(cert.edges)))


def maximal_planar_subgraph(edges, nodes=None) -> tuple[list[tuple], list[tuple]]:
    """Greedy edge insertion in ascending (min, max) endpoint order.

    Returns (kept edges, removed edges); re-inserting any removed edge
    breaks planarity because supergraphs of non-planar graphs stay
    non-planar.
    """
    g = edges if isinstance(edges, nx.Graph) else _as_nx(edges, nodes)
    ordered = sorted((min(u, v), max(u, v)) for u, v in g.edges)
    acc = nx.Graph()
    acc.add_nodes_from(sorted(g.nodes))
    kept, removed = [], []
    for u, v in ordered:
        acc.add_edge(u, v)
        if nx.check_planarity(acc, counterexample=False)[0]:
            kept.append((u, v))
        else:
            acc.remove_edge(u, v)
            removed.append((u, v))
    return kept, removed


# -- rounds -------------------------------------------------------------------


@dataclass
class VirtualStub:
    """Boundary stand-in for a neighbor scheduled in another round."""

    stub_id: int  # negative, unique within the round
    inner: int  # node of this round the cut edge attaches to
    outer: int  # the far endpoint (lives in another round)
    edge: tuple[int, int]  # original cut edge (min, max)


@dataclass
class Round:
    index: int
    nodes: list[int]
    strata: list[int]  # global stratum ids covered by this round
    edges: list[tuple[int, int]]  # induced edges, sorted
    stubs: list[VirtualStub]
    rotation: RotationSystem
    node_stratum: dict[int, int] = field(default_factory=dict)

    def stub_for_edge(self, edge: tuple[int, int]) -> VirtualStub:
        for stub in self.stubs:
            if stub.edge == edge:
                return stub
        raise PlanarityError(f"round {self.index} has no stub for edge {edge}")

    def to_json_dict(self) -> dict:
        return {
            "index": self.index,
            "nodes": self.nodes,
            "strata": self.strata,
            "edges": [list(e) for e in self.edges],
            "stubs": [
                {"stub_id": s.stub_id, "inner": s.inner, "outer": s.outer, "edge": list(s.edge)}
                for s in self.stubs
            ],
            "rotation": {str(k): [str(x) for x in v] for k, v in self.rotation.order.items()},
        }


def rounds_to_json(rounds: list[Round]) -> str:
    return json.dumps({"schema_version": 1, "rounds": [r.to_json_dict() for r in rounds]},
                      indent=1, sort_keys=True)


def _induced_planar(g: GraphState, node_set: set[int]) -> bool:
    sub = nx.Graph()
    sub.add_nodes_from(node_set)
    sub.add_edges_from((a, b) for a, b in g.edges if a in node_set and b in node_set)
    return nx.check_planarity(sub, counterexample=False)[0]


def _planar_pieces(g: GraphState, stratum: list[int]) -> list[list[int]]:
    """Split one stratum's nodes into induced-planar pieces.

    Greedy node insertion with chunk bisection: a whole chunk is admitted
    when its union with the piece stays planar, otherwise it is halved.
    A node skipped against the current piece can never become insertable
    later (adding nodes only adds edges), so each piece is node-maximal.
    """
    remaining = sorted(stratum)
    pieces: list[list[int]] = []
    while remaining:
        piece: list[int] = []
        skipped: list[int] = []
        queue = list(remaining)
        while queue:
            chunk_len = len(queue)
            added = False
            while chunk_len >= 1:
                chunk = queue[:chunk_len]
                if _induced_planar(g, set(piece) | set(chunk)):
                    piece.extend(chunk)
                    del queue[:chunk_len]
                    added = True
                    break
                chunk_len //= 2
            if not added:
                skipped.append(queue.pop(0))
        pieces.append(sorted(piece))
        remaining = skipped
    return pieces


def build_round(g: GraphState, index: int, node_list: list[int], strata: list[int],
                node_stratum: dict[int, int]) -> Round:
    """Assemble a round: induced edges, one virtual stub per cut edge, and a
    rotation system over nodes plus stubs."""
    node_set = set(node_list)
    induced = sorted(
        (a, b) for a, b in g.edges if a in node_set and b in node_set
    )
    cut = sorted(
        (a, b) for a, b in g.edges if (a in node_set) != (b in node_set)
    )
    stubs = []
    for k, (a, b) in enumerate(cut):
        inner, outer = (a, b) if a in node_set else (b, a)
        stubs.append(VirtualStub(stub_id=-(k + 1), inner=inner, outer=outer, edge=(a, b)))
    emb_graph = nx.Graph()
    emb_graph.add_nodes_from(sorted(node_set))
    emb_graph.add_edges_from(induced)
    for stub in stubs:
        emb_graph.add_edge(stub.inner, stub.stub_id)
    result = is_planar(emb_graph)
    if not result.planar:
        raise PlanarityError(f"round {index} subgraph is not planar")
    return Round(index=index, nodes=sorted(node_list), strata=sorted(strata),
                 edges=induced, stubs=stubs, rotation=result.rotation,
                 node_stratum={v: node_stratum[v] for v in node_list})


def planarize_and_merge(g: GraphState, layers: DependencyLayers,
                        max_strata: int | None = None) -> list[Round]:
    """Peel executability strata, planarize each, and merge successive
    planar pieces until planarity (or the stratum budget) breaks.

    Output nodes join as a final stratum so their entanglement is scheduled
    too; they carry no measurement.
    """
    strata: list[list[int]] = [list(layer) for layer in layers.layers]
    outputs = sorted(g.outputs)
    if outputs:
        strata.append(outputs)
    if not strata:
        return []
    pieces: list[tuple[int, list[int]]] = []  # (stratum id, node list)
    for sid, stratum in enumerate(strata):
        for piece in _planar_pieces(g, stratum):
            pieces.append((sid, piece))
    merged: list[tuple[list[int], set[int]]] = []  # (nodes, stratum ids)
    cur_nodes: list[int] = []
    cur_strata: set[int] = set()
    for sid, piece in pieces:
        if not cur_nodes:
            cur_nodes, cur_strata = list(piece), {sid}
            continue
        new_strata = cur_strata | {sid}
        budget_ok = max_strata is None or len(new_strata) <= max_strata
        if budget_ok and _induced_planar(g, set(cur_nodes) | set(piece)):
            cur_nodes.extend(piece)
            cur_strata = new_strata
        else:
            merged.append((cur_nodes, cur_strata))
            cur_nodes, cur_strata = list(piece), {sid}
    if cur_nodes:
        merged.append((cur_nodes, cur_strata))
    node_stratum: dict[int, int] = {}
    for sid, stratum in enumerate(strata):
        for v in stratum:
            node_stratum[v] = sid
    return [
        build_round(g, idx, nodes, sorted(strata_ids), node_stratum)
        for idx, (nodes, strata_ids) in enumerate(merged)
    ]
