# Circuit -> graph state translation with measurement angles and X/Z
# outcome-dependency arcs, plus the executability layering used by the
# partitioner: a node is executable once its X-dependency sources and the
# Z-dependency sources of those sources are all measured.

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .circuit import ANGLE_TOL, Circuit, canonical_angle

TWO_PI = 2.0 * math.pi


class GraphStateError(Exception):
    pass


@dataclass
class GraphState:
    """Entanglement graph over measured nodes (with angles) and output nodes."""

    angles: dict[int, float | None] = field(default_factory=dict)  # None = output
    inputs: set[int] = field(default_factory=set)
    outputs: set[int] = field(default_factory=set)
    edges: set[tuple[int, int]] = field(default_factory=set)
    xdeps: set[tuple[int, int]] = field(default_factory=set)  # (prerequisite, dependent)
    zdeps: set[tuple[int, int]] = field(default_factory=set)

    @property
    def nodes(self) -> list[int]:
        return sorted(self.angles)

    def measured_nodes(self) -> list[int]:
        return sorted(v for v in self.angles if v not in self.outputs)

    def neighbors(self, v: int) -> set[int]:
        out = set()
        for a, b in self.edges:
            if a == v:
                out.add(b)
            elif b == v:
                out.add(a)
        return out

    def degree(self, v: int) -> int:
        return sum(1 for a, b in self.edges if v in (a, b))

    def add_edge(self, a: int, b: int) -> None:
        if a == b:
            raise GraphStateError(f"self-loop at {a}")
        self.edges.add((min(a, b), max(a, b)))

    def toggle_edge(self, a: int, b: int) -> None:
        key = (min(a, b), max(a, b))
        if key in self.edges:
            self.edges.discard(key)
        else:
            self.edges.add(key)

    def validate(self) -> None:
        for a, b in self.edges:
            if a == b or a not in self.angles or b not in self.angles:
                raise GraphStateError(f"bad edge ({a}, {b})")
        for v, angle in self.angles.items():
            if v not in self.outputs and angle is None:
                raise GraphStateError(f"non-output node {v} lacks an angle")
        for arcs in (self.xdeps, self.zdeps):
            for u, v in arcs:
                if u not in self.angles or v not in self.angles:
                    raise GraphStateError(f"dangling dependency arc ({u}, {v})")
        # acyclicity of the combined dependency relation
        dependency_layers(self)

    def to_json(self) -> str:
        doc = {
            "schema_version": 1,
            "nodes": [
                {
                    "id": v,
                    "angle": "output" if v in self.outputs else self.angles[v],
                    "input": v in self.inputs,
                    "output": v in self.outputs,
                }
                for v in self.nodes
            ],
            "edges": sorted(list(e) for e in self.edges),
            "xdeps": sorted(list(a) for a in self.xdeps),
            "zdeps": sorted(list(a) for a in self.zdeps),
        }
        return json.dumps(doc, indent=1, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "GraphState":
        doc = json.loads(text)
        g = GraphState()
        for node in doc["nodes"]:
            v = int(node["id"])
            g.angles[v] = None if node["angle"] == "output" else float(node["angle"])
            if node["input"]:
                g.inputs.add(v)
            if node["output"]:
                g.outputs.add(v)
        for a, b in doc["edges"]:
            g.add_edge(int(a), int(b))
        g.xdeps = {(int(u), int(v)) for u, v in doc["xdeps"]}
        g.zdeps = {(int(u), int(v)) for u, v in doc["zdeps"]}
        return g


def adjust_angle(alpha: float, s: int, t: int) -> float:
    """Outcome-adjusted measurement angle ((-1)^s * alpha + t*pi) mod 2pi."""
    return canonical_angle(((-1.0) ** (s & 1)) * alpha + (t & 1) * math.pi)


def _is_multiple_of_pi(angle: float) -> bool:
    a = canonical_angle(angle)
    return min(abs(a - k * math.pi) for k in (0, 1, 2)) <= ANGLE_TOL


def _is_clifford(angle: float) -> bool:
    a = canonical_angle(angle)
    return min(abs(a - k * math.pi / 2) for k in range(5)) <= ANGLE_TOL


def translate(c: Circuit) -> GraphState:
    """Build the graph state of a {J, CZ} circuit.

    Each J appends a fresh node to its qubit's chain and measures the old
    frontier at the J angle; CZ toggles an edge between the two current
    frontiers. Corrections follow the chain flow: measuring v puts an
    X-dependency on its successor and Z-dependencies on the successor's
    other neighbors. Arcs into measured nodes with angle 0 or pi are
    dropped; arcs into angle pi/2 or 3pi/2 degrade to Z-dependencies
    (a sign flip there only re-interprets the outcome).
    """
    if not c.is_jcz:
        raise GraphStateError("translate expects a normalized {J, CZ} circuit")
    g = GraphState()
    frontier: list[int] = []
    successor: dict[int, int] = {}
    next_id = 0
    for q in range(c.num_qubits):
        g.angles[next_id] = None
        g.inputs.add(next_id)
        frontier.append(next_id)
        next_id += 1
    for gate in c.gates:
        if gate.kind == "J":
            q = gate.targets[0]
            v = frontier[q]
            w = next_id
            next_id += 1
            g.angles[w] = None
            g.angles[v] = gate.angle
            g.add_edge(v, w)
            successor[v] = w
            frontier[q] = w
        else:  # CZ
            a, b = gate.targets
            g.toggle_edge(frontier[a], frontier[b])
    g.outputs = set(frontier)
    for v in g.angles:
        if v in g.outputs:
            g.angles[v] = None
    # Flow arcs against the final graph.
    for v, w in successor.items():
        _add_arc(g, v, w, kind="x")
        for k in sorted(g.neighbors(w) - {v}):
            _add_arc(g, v, k, kind="z")
    return g


def _add_arc(g: GraphState, u: int, v: int, kind: str) -> None:
    if v not in g.outputs:
        angle = g.angles[v]
        if kind == "x":
            if _is_multiple_of_pi(angle):
                return  # sign flip is vacuous there
            if _is_clifford(angle):
                kind = "z"  # flip of a pi/2 angle only swaps the outcome labels
        # Z-arcs are kept: they re-interpret v's outcome for downstream use.
    (g.xdeps if kind == "x" else g.zdeps).add((u, v))


@dataclass
class DependencyLayers:
    layers: list[list[int]]

    def layer_of(self) -> dict[int, int]:
        return {v: i for i, layer in enumerate(self.layers) for v in layer}


def dependency_prerequisites(g: GraphState, v: int) -> set[int]:
    """Measured nodes that must be read out before v is executable."""
    xsrc = {u for u, w in g.xdeps if w == v and u not in g.outputs}
    prereqs = set(xsrc)
    for u in xsrc:
        prereqs.update(w for w, y in g.zdeps if y == u and w not in g.outputs)
    return prereqs


def dependency_layers(g: GraphState) -> DependencyLayers:
    """Stratify measured nodes by longest prerequisite chain."""
    measured = g.measured_nodes()
    prereqs = {v: sorted(dependency_prerequisites(g, v)) for v in measured}
    level: dict[int, int] = {}
    for v in measured:
        _resolve_iterative(v, prereqs, level)
    if not measured:
        return DependencyLayers(layers=[])
    depth = max(level.values()) + 1
    layers: list[list[int]] = [[] for _ in range(depth)]
    for v in measured:
        layers[level[v]].append(v)
    return DependencyLayers(layers=[sorted(layer) for layer in layers])


def _resolve_iterative(root: int, prereqs: dict[int, list[int]], level: dict[int, int]) -> None:
    if root in level:
        return
    stack: list[tuple[int, int]] = [(root, 0)]
    on_path = {root}
    while stack:
        v, idx = stack[-1]
        deps = prereqs[v]
        if idx < len(deps):
            stack[-1] = (v, idx + 1)
            u = deps[idx]
            if u in level:
                continue
            if u in on_path:
                raise GraphStateError(f"dependency cycle through node {u}")
            stack.append((u, 0))
            on_path.add(u)
        else:
            lv = 0
            for u in deps:
                lv = max(lv, level[u] + 1)
            level[v] = lv
            stack.pop()
            on_path.discard(v)
