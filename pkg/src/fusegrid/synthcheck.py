# End-to-end check that a synthesized fusion sequence reproduces its target
# graph state (up to local Paulis) in the stabilizer oracle.

from __future__ import annotations

import itertools

import numpy as np

from . import oracle
from .fusiongraph import LEAF_A, LEAF_B, ROOT, FusionGraph, generate_fusion_graph
from .graphstate import GraphState
from .planarity import Round, RotationSystem


def _rotation_from_any_order(nodes, edges) -> RotationSystem:
    """Arbitrary (not necessarily planar) rotation orders: sorted neighbors."""
    order = {v: [] for v in nodes}
    for a, b in edges:
        order[a].append(b)
        order[b].append(a)
    return RotationSystem({v: sorted(nbrs) for v, nbrs in order.items()})


def fusion_graph_for_graph(nodes: list[int], edges: list[tuple[int, int]],
                           planar_rotation: bool = True) -> FusionGraph:
    """Synthesize an arbitrary graph (one round, no stubs). Falls back to
    sorted neighbor order when the graph has no planar embedding."""
    from .planarity import is_planar

    edges = sorted((min(a, b), max(a, b)) for a, b in edges)
    found_planar = False
    rotation = None
    if planar_rotation:
        res = is_planar(edges, nodes=nodes)
        if res.planar:
            rotation = res.rotation
            found_planar = True
    if rotation is None:
        rotation = _rotation_from_any_order(nodes, edges)
    rnd = Round(index=0, nodes=sorted(nodes), strata=[0], edges=edges, stubs=[],
                rotation=rotation)
    angles = {v: 0.0 for v in nodes}
    return generate_fusion_graph(rnd, angles, outputs=set(), require_planar=found_planar)


def run_fusion_sequence(fg: FusionGraph, rng: np.random.Generator | None = None):
    """Execute every fusion in the tableau; returns (state, labels) where
    labels maps tableau columns to (resource node, slot)."""
    state = oracle.StabilizerState(0)
    labels: list[tuple[int, str]] = []
    for rid in sorted(fg.nodes):
        state = oracle.tensor(state, oracle.ghz3())
        labels.extend([(rid, ROOT), (rid, LEAF_A), (rid, LEAF_B)])
    for edge in fg.edges:
        c = labels.index(edge.a)
        d = labels.index(edge.b)
        forced = None if rng is not None else (0, 0)
        state, _ = oracle.fuse(state, c, d, forced=forced, rng=rng)
        for idx in sorted((c, d), reverse=True):
            labels.pop(idx)
    # Z-discard spare slots, then drop them from the register.
    discard_idx = [i for i, lab in enumerate(labels)
                   if fg.nodes[lab[0]].slots[lab[1]][0] == "discard"]
    for i in discard_idx:
        state.measure_pauli(i, "Z", forced=None if rng is not None else 0, rng=rng)
    state = state.discard_qubits(discard_idx)
    labels = [lab for i, lab in enumerate(labels) if i not in set(discard_idx)]
    return state, labels


def synthesis_reproduces_graph(nodes: list[int], edges: list[tuple[int, int]],
                               rng: np.random.Generator | None = None) -> bool:
    """Synthesize, execute, and compare against the target graph state."""
    fg = fusion_graph_for_graph(list(nodes), list(edges))
    state, labels = run_fusion_sequence(fg, rng=rng)
    centers = {fg.groups[v][0]: v for v in fg.groups}
    col_node = []
    for rid, slot in labels:
        if slot != ROOT or rid not in centers:
            return False  # leftover non-center qubit
        col_node.append(centers[rid])
    if sorted(col_node) != sorted(nodes):
        return False
    pos = {v: i for i, v in enumerate(col_node)}
    target_edges = [(pos[a], pos[b]) for a, b in edges]
    target = oracle.graph_to_stabilizer(target_edges, len(nodes))
    return oracle.equivalent_up_to_local_paulis(state, target)


def connected_graphs(max_nodes: int):
    """All connected labeled graphs with 1..max_nodes nodes."""
    for n in range(1, max_nodes + 1):
        all_edges = [(a, b) for a in range(n) for b in range(a + 1, n)]
        for bits in range(2 ** len(all_edges)):
            edges = [e for i, e in enumerate(all_edges) if bits >> i & 1]
            if _connected(n, edges):
                yield n, edges


def _connected(n: int, edges: list[tuple[int, int]]) -> bool:
    if n == 1:
        return True
    adj = {v: set() for v in range(n)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == n


def run_property_suite(max_nodes: int = 4, trials: int = 100, seed: int = 7) -> dict:
    """Oracle property suite: exhaustive synthesis up to max_nodes plus
    randomized fusion checks. Returns a summary dict; raises nothing."""
    rng = np.random.default_rng(seed)
    summary = {"synthesis_total": 0, "synthesis_pass": 0,
               "random_total": 0, "random_pass": 0, "failures": []}
    for n, edges in connected_graphs(max_nodes):
        ok = synthesis_reproduces_graph(list(range(n)), edges)
        summary["synthesis_total"] += 1
        summary["synthesis_pass"] += int(ok)
        if not ok:
            summary["failures"].append({"kind": "synthesis", "n": n, "edges": edges})
    for _ in range(trials):
        n = int(rng.integers(2, 6))
        edges = [(a, b) for a in range(n) for b in range(a + 1, n) if rng.random() < 0.5]
        if not _connected(n, edges):
            continue
        ok = synthesis_reproduces_graph(list(range(n)), edges, rng=rng)
        summary["random_total"] += 1
        summary["random_pass"] += int(ok)
        if not ok:
            summary["failures"].append({"kind": "random", "n": n, "edges": edges})
    summary["ok"] = not summary["failures"]
    return summary
