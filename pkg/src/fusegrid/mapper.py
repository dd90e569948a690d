# Embedding of fusion graphs into (extended) physical layers: heuristic
# placement driven by H = -alpha * mapped_edges + beta * routing_length + B,
# candidate cells enumerated around the mapped endpoint, non-crossing BFS
# routing, and a rotation filter that keeps degree-3 nodes consistent with
# the planar embedding.

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import networkx as nx

from .fusiongraph import FusionGraph

# Cyclic direction order around a cell (counter-clockwise with row = -y).
_DIRS = ((0, 1), (-1, 0), (0, -1), (1, 0))  # E, N, W, S
_DIR_INDEX = {d: i for i, d in enumerate(_DIRS)}

CANDIDATE_RADIUS = 5  # lattice steps: adjacent placement up to 4 aux cells
BEAM_WIDTH = 32


class CapacityError(Exception):
    """The round does not fit; grow the extended layer or split the round."""


@dataclass
class Layout:
    rows: int
    fcols: int
    span: int
    placement: dict[int, tuple[int, int]] = field(default_factory=dict)
    routes: dict[int, list[tuple[int, int]]] = field(default_factory=dict)  # eid -> aux cells
    port_cells: dict[int, tuple[int, int]] = field(default_factory=dict)  # stub id -> cell
    fg: FusionGraph | None = None

    def aux_total(self) -> int:
        return sum(len(r) for r in self.routes.values())

    def used_cells(self) -> dict[tuple[int, int], tuple]:
        used: dict[tuple[int, int], tuple] = {}
        for rid, cell in self.placement.items():
            if cell in used:
                raise CapacityError(f"cell {cell} double-booked")
            used[cell] = ("node", rid)
        for eid, cells in self.routes.items():
            for cell in cells:
                if cell in used:
                    raise CapacityError(f"cell {cell} double-booked")
                used[cell] = ("aux", eid)
        return used

    def fusion_pairs(self) -> int:
        """One fusion per realized edge plus one per aux routing cell."""
        assert self.fg is not None
        return len(self.fg.edges) + self.aux_total()


def edge_order(fg: FusionGraph) -> list:
    """Cycle edges in BFS discovery order first, then tree edges in BFS
    order; tree edges of a node follow its cycle edges."""
    g = nx.Graph()
    g.add_nodes_from(sorted(fg.nodes))
    eid_of = {}
    for e in fg.edges:
        g.add_edge(e.a[0], e.b[0])
        eid_of[frozenset((e.a[0], e.b[0]))] = e
    bridges = {frozenset(e) for e in nx.bridges(g)}
    cycle_part: list = []
    tree_part: list = []
    seen_edges: set[frozenset] = set()
    seen_nodes: set[int] = set()
    for root in sorted(g.nodes):
        if root in seen_nodes:
            continue
        queue = deque([root])
        seen_nodes.add(root)
        order_nodes = []
        while queue:
            u = queue.popleft()
            order_nodes.append(u)
            for w in sorted(g[u]):
                if w not in seen_nodes:
                    seen_nodes.add(w)
                    queue.append(w)
        for u in order_nodes:
            for w in sorted(g[u]):
                key = frozenset((u, w))
                if key in seen_edges or key in bridges:
                    continue
                seen_edges.add(key)
                cycle_part.append(eid_of[key])
        for u in order_nodes:
            for w in sorted(g[u]):
                key = frozenset((u, w))
                if key in seen_edges:
                    continue
                seen_edges.add(key)
                tree_part.append(eid_of[key])
    return cycle_part + tree_part


def heuristic_cost(mapped_edges: int, routing_length: int, congestion: float,
                   alpha: float, beta: float) -> float:
    """H = -alpha * mapped_edges + beta * routing_length + B."""
    return -alpha * mapped_edges + beta * routing_length + congestion


class _Search:
    def __init__(self, fg: FusionGraph, rows: int, fcols: int, span: int,
                 alpha: float, beta: float, lookahead: float):
        self.fg = fg
        self.rows = rows
        self.fcols = fcols
        self.span = span
        self.alpha = alpha
        self.beta = beta
        self.lookahead = lookahead
        self.occ: dict[tuple[int, int], tuple] = {}
        self.pos: dict[int, tuple[int, int]] = {}
        self.routes: dict[int, list[tuple[int, int]]] = {}
        self.mapped_edges = 0
        self.aux_total = 0
        adj = fg.adjacency()
        self.unmapped: dict[int, int] = {rid: len(adj[rid]) for rid in fg.nodes}
        self.edge_dir: dict[tuple[int, int], tuple[int, int]] = {}  # (rid, eid) -> dir
        self.rot_pos: dict[int, dict[int, int]] = {}  # rid -> neighbor rid -> rotation index
        if fg.rotation is not None:
            for rid, nbrs in fg.rotation.order.items():
                self.rot_pos[rid] = {n: i for i, n in enumerate(nbrs)}
        self.orientation = 0  # 0 undecided, +1 / -1 once a degree-3 node commits

    # -- geometry helpers --------------------------------------------------

    def in_grid(self, cell) -> bool:
        return 0 <= cell[0] < self.rows and 0 <= cell[1] < self.fcols

    def free(self, cell) -> bool:
        return self.in_grid(cell) and cell not in self.occ

    def free_neighbors(self, cell):
        for d in _DIRS:
            nxt = (cell[0] + d[0], cell[1] + d[1])
            if self.free(nxt):
                yield nxt

    def center_seed(self, degree: int = 0) -> tuple[int, int]:
        """Nearest-to-center free cell that neither strands a neighbor nor
        starts the new component in a pocket too tight for its degree."""
        center = (self.rows // 2, self.fcols // 2)
        ranked = sorted(
            ((abs(r - center[0]) + abs(f - center[1]), r, f)
             for r in range(self.rows) for f in range(self.fcols)
             if (r, f) not in self.occ)
        )
        if not ranked:
            raise CapacityError("no free cell left for seeding")
        for _, r, f in ranked:
            cell = (r, f)
            self.occ[cell] = ("tmp",)
            ok = self._free_count_at(cell) >= min(degree, 4)
            if ok:
                for d in _DIRS:
                    use = self.occ.get((r + d[0], f + d[1]))
                    if use and use[0] == "node":
                        rid = use[1]
                        if self.unmapped[rid] - self._allowed_free_count(rid) > 0:
                            ok = False
                            break
            del self.occ[cell]
            if ok:
                return cell
        _, r, f = ranked[0]
        return (r, f)

    # -- rotation consistency ----------------------------------------------

    def _rotation_ok(self, rid: int, eid: int, direction: tuple[int, int],
                     commit: bool = False) -> bool:
        """Degree-3 nodes must realize their three edges in a cyclic order
        matching the planar embedding (one global orientation)."""
        rot = self.rot_pos.get(rid)
        if rot is None or len(rot) < 3:
            return True
        committed = [(key[1], d) for key, d in self.edge_dir.items() if key[0] == rid]
        if len(committed) < 2:
            return True
        entries = committed + [(eid, direction)]
        if len(entries) > 3:
            return False
        nbr_of = {}
        for e in self.fg.edges:
            if e.a[0] == rid:
                nbr_of[e.eid] = e.b[0]
            elif e.b[0] == rid:
                nbr_of[e.eid] = e.a[0]
        try:
            triples = sorted(entries, key=lambda it: rot[nbr_of[it[0]]])
        except KeyError:
            return True
        dir_idx = [_DIR_INDEX[d] for _, d in triples]
        if len(set(dir_idx)) != 3:
            return False
        sign = _cyclic_sign(dir_idx)
        if self.orientation == 0:
            if commit:
                self.orientation = sign
            return True
        return sign == self.orientation

    # -- congestion look-ahead ----------------------------------------------

    def _allowed_free_count(self, rid: int) -> int:
        cell = self.pos[rid]
        count = 0
        for d in _DIRS:
            nxt = (cell[0] + d[0], cell[1] + d[1])
            if self.free(nxt):
                count += 1
        return count

    def _node_congestion(self, rid: int) -> float:
        if rid not in self.pos:
            return 0.0
        deficit = self.unmapped[rid] - self._allowed_free_count(rid)
        return float(max(0, deficit))

    def _free_count_at(self, cell: tuple[int, int]) -> int:
        return sum(1 for d in _DIRS if self.free((cell[0] + d[0], cell[1] + d[1])))

    def _congestion_delta(self, consumed: list[tuple[int, int]], u: int, v: int | None,
                          v_cell: tuple[int, int] | None) -> tuple[float, bool]:
        """B change if `consumed` cells fill up (v placed on the last one),
        evaluated over the nodes around the consumed cells plus both
        endpoints of the edge under evaluation.

        Any node left with more pending edges than free adjacent cells is a
        guaranteed dead end (each pending edge needs its own free direction
        and free counts never grow), reported as `strands`.
        """
        affected: set[int] = {u}
        for cell in consumed:
            for d in _DIRS:
                nbr = (cell[0] + d[0], cell[1] + d[1])
                use = self.occ.get(nbr)
                if use and use[0] == "node":
                    affected.add(use[1])
        pending_adjust = {u: -1}
        if v is not None:
            pending_adjust[v] = -1
        before = sum(self._node_congestion(rid) for rid in affected if rid in self.pos)
        for cell in consumed:
            self.occ[cell] = ("tmp",)
        after = 0.0
        strands = False
        for rid in affected:
            if rid not in self.pos:
                continue
            pending = self.unmapped[rid] + pending_adjust.get(rid, 0)
            deficit = pending - self._allowed_free_count(rid)
            after += float(max(0, deficit))
            if deficit > 0:
                strands = True
        if v is not None and v_cell is not None:
            pending = self.unmapped[v] - 1
            deficit = pending - self._free_count_at(v_cell)
            after += float(max(0, deficit))
            if deficit > 0:
                strands = True
        for cell in consumed:
            del self.occ[cell]
        return self.lookahead * (after - before), strands

    # -- candidate enumeration ----------------------------------------------

    def _cell_safe(self, cell: tuple[int, int], pending_adjust: dict[int, int]) -> bool:
        """Filling this cell must not push an adjacent placed node into
        deficit (pending edges exceeding its remaining free directions)."""
        for d in _DIRS:
            use = self.occ.get((cell[0] + d[0], cell[1] + d[1]))
            if use and use[0] == "node":
                rid = use[1]
                pending = self.unmapped[rid] + pending_adjust.get(rid, 0)
                if pending > 0 and self._allowed_free_count(rid) - 1 < pending:
                    return False
        return True

    def _bounded_paths(self, src: tuple[int, int], pending_adjust: dict[int, int],
                       safe: bool = True):
        """Free cells reachable from src within CANDIDATE_RADIUS steps through
        free cells, with their shortest path (deterministic direction order)."""
        parents = {src: None}
        depth = {src: 0}
        queue = deque([src])
        found = []
        while queue:
            cur = queue.popleft()
            if depth[cur] >= CANDIDATE_RADIUS:
                continue
            for d in _DIRS:
                nxt = (cur[0] + d[0], cur[1] + d[1])
                if nxt in parents or not self.free(nxt):
                    continue
                if safe and not self._cell_safe(nxt, pending_adjust):
                    continue
                parents[nxt] = cur
                depth[nxt] = depth[cur] + 1
                found.append(nxt)
                queue.append(nxt)
        out = []
        for cell in found:
            path = []
            cur = parents[cell]
            while cur is not None and cur != src:
                path.append(cur)
                cur = parents[cur]
            out.append((cell, list(reversed(path))))
        return out

    def _route(self, src: tuple[int, int], dst: tuple[int, int],
               pending_adjust: dict[int, int] | None = None):
        """Shortest path of free cells strictly between two placed endpoints,
        avoiding cells whose use would strand a neighbor when possible."""
        if abs(src[0] - dst[0]) + abs(src[1] - dst[1]) == 1:
            return []
        for safe in ((True, False) if pending_adjust is not None else (False,)):
            parents = {src: None}
            queue = deque([src])
            while queue:
                cur = queue.popleft()
                for d in _DIRS:
                    nxt = (cur[0] + d[0], cur[1] + d[1])
                    if nxt == dst and cur != src:
                        path = [cur]
                        back = parents[cur]
                        while back is not None and back != src:
                            path.append(back)
                            back = parents[back]
                        return list(reversed(path))
                    if nxt in parents or not self.free(nxt):
                        continue
                    if safe and not self._cell_safe(nxt, pending_adjust):
                        continue
                    parents[nxt] = cur
                    queue.append(nxt)
        return None

    # -- commits -------------------------------------------------------------

    def _commit_edge(self, edge, u: int, v: int, v_cell, route):
        eid = edge.eid
        if v_cell is not None:
            self.occ[v_cell] = ("node", v)
            self.pos[v] = v_cell
        for cell in route:
            self.occ[cell] = ("aux", eid)
        self.routes[eid] = route
        self.aux_total += len(route)
        self.mapped_edges += 1
        self.unmapped[u] -= 1
        self.unmapped[v] -= 1
        du = _step_dir(self.pos[u], route[0] if route else self.pos[v])
        dv = _step_dir(self.pos[v], route[-1] if route else self.pos[u])
        self._rotation_ok(u, eid, du, commit=True)
        self._rotation_ok(v, eid, dv, commit=True)
        self.edge_dir[(u, eid)] = du
        self.edge_dir[(v, eid)] = dv

    def _seed(self, rid: int) -> None:
        cell = self.center_seed(degree=self.unmapped[rid])
        self.occ[cell] = ("node", rid)
        self.pos[rid] = cell

    def _pick_candidate(self, edge, u: int, v: int, candidates,
                        rotation_filter: bool, strand_filter: bool):
        best = None
        considered = 0
        for cell, route in candidates:
            if considered >= BEAM_WIDTH:
                break
            du = _step_dir(self.pos[u], route[0] if route else cell)
            if rotation_filter and not self._rotation_ok(u, edge.eid, du):
                continue
            considered += 1
            congestion, strands = self._congestion_delta(route + [cell], u, v, cell)
            if strand_filter and strands:
                continue
            h = heuristic_cost(self.mapped_edges + 1, self.aux_total + len(route),
                               congestion, self.alpha, self.beta)
            # distance-to-center keeps ties growing a compact disk instead of
            # drifting into a wall
            center_d = abs(cell[0] - self.rows // 2) + abs(cell[1] - self.fcols // 2)
            key = (h, center_d, cell[0], cell[1])
            if best is None or key < best[0]:
                best = (key, cell, route)
        return best

    def run(self) -> Layout:
        for edge in edge_order(self.fg):
            a, b = edge.a[0], edge.b[0]
            if a not in self.pos and b not in self.pos:
                self._seed(min(a, b))
            if a in self.pos and b in self.pos:
                route = self._route(self.pos[a], self.pos[b], {a: -1, b: -1})
                if route is None:
                    raise CapacityError(f"no route for edge {edge.eid}")
                self._commit_edge(edge, a, b, None, route)
                continue
            u, v = (a, b) if a in self.pos else (b, a)
            best = None
            for safe in (True, False):
                candidates = self._bounded_paths(self.pos[u], {u: -1}, safe=safe)
                candidates.sort(key=lambda it: (len(it[1]), it[0][0], it[0][1]))
                for rot_f, strand_f in ((True, True), (False, True), (True, False), (False, False)):
                    best = self._pick_candidate(edge, u, v, candidates,
                                                rotation_filter=rot_f, strand_filter=strand_f)
                    if best is not None:
                        break
                if best is not None:
                    break
            if best is None:
                raise CapacityError(f"no placement for node {v} (edge {edge.eid})")
            _, cell, route = best
            self._commit_edge(edge, u, v, cell, route)
        # isolated resource nodes (degree-0 groups)
        for rid in sorted(self.fg.nodes):
            if rid not in self.pos:
                self._seed(rid)
        layout = Layout(rows=self.rows, fcols=self.fcols, span=self.span,
                        placement=dict(self.pos), routes=dict(self.routes), fg=self.fg)
        for stub_id, (rid, _slot) in sorted(self.fg.port_map.items()):
            layout.port_cells[stub_id] = self.pos[rid]
        return layout


def map_round(fg: FusionGraph, rows: int, cols: int, span: int,
              alpha: float = 1.0, beta: float = 0.5, lookahead: float = 1.0) -> Layout:
    """Map one round's fusion graph onto a rows x (span*cols) flattened
    lattice. Raises CapacityError when it does not fit."""
    search = _Search(fg, rows, cols * span, span, alpha, beta, lookahead)
    return search.run()


def audit_layout(layout: Layout) -> None:
    """Non-crossing and slot-budget audit; raises CapacityError on violation."""
    used = layout.used_cells()
    fg = layout.fg
    assert fg is not None
    # per-cell slot budget
    incident: dict[int, int] = {rid: 0 for rid in fg.nodes}
    for e in fg.edges:
        incident[e.a[0]] += 1
        incident[e.b[0]] += 1
    for rid, count in incident.items():
        ports = sum(1 for s in fg.nodes[rid].slots.values() if s[0] == "port")
        if count + ports > 3:
            raise CapacityError(f"resource node {rid} exceeds 3 couplings")
    # routes are simple free paths between their endpoints
    pos = layout.placement
    for e in fg.edges:
        route = layout.routes.get(e.eid)
        if route is None:
            raise CapacityError(f"edge {e.eid} has no realization")
        chain = [pos[e.a[0]]] + route + [pos[e.b[0]]]
        for x, y in zip(chain, chain[1:]):
            if abs(x[0] - y[0]) + abs(x[1] - y[1]) != 1:
                raise CapacityError(f"edge {e.eid} path not lattice-adjacent")
        if len(set(route)) != len(route):
            raise CapacityError(f"edge {e.eid} revisits a cell")
    for cell, use in used.items():
        if not (0 <= cell[0] < layout.rows and 0 <= cell[1] < layout.fcols):
            raise CapacityError(f"cell {cell} outside the lattice")


def _step_dir(src: tuple[int, int], dst: tuple[int, int]) -> tuple[int, int]:
    return (dst[0] - src[0], dst[1] - src[1])


def _cyclic_sign(indices: list[int]) -> int:
    """+1 when the three direction indices appear in ccw cyclic order."""
    a, b, c = indices
    return 1 if ((b - a) % 4) < ((c - a) % 4) else -1
