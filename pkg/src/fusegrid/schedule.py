# Timeline assembly: rounds become consecutive extended layers, cut edges
# are paired over intermediate shuffle layers, pending ports ride a relay
# conveyor so no photon waits longer than the delay limit, and stratum
# measurements are assigned strictly increasing clock cycles.

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

from .fusiongraph import LEAF_A, LEAF_B, ROOT, FusionGraph
from .graphstate import GraphState, dependency_prerequisites
from .hardware import Cell, ExtendedLayer, HardwareModel
from .mapper import Layout
from .planarity import Round

_DIRS = ((0, 1), (-1, 0), (0, -1), (1, 0))


class ScheduleError(Exception):
    pass


@dataclass
class SlotOp:
    cycle: int
    cell: Cell
    slot: str
    op: str  # measure | readout | discard | fuse | delay
    partner: tuple[Cell, str] | None = None
    angle: float | None = None
    node: int | None = None

    def key(self):
        return (self.cycle, self.cell.t, self.cell.row, self.cell.col, self.slot)

    def to_dict(self) -> dict:
        doc = {"gen": self.cell.t, "row": self.cell.row, "col": self.cell.col,
               "slot": self.slot, "op": self.op}
        if self.partner is not None:
            pc, ps = self.partner
            doc["partner"] = {"gen": pc.t, "row": pc.row, "col": pc.col, "slot": ps}
        if self.angle is not None:
            doc["angle"] = self.angle
        if self.node is not None:
            doc["node"] = self.node
        return doc


@dataclass
class RoundPlan:
    rnd: Round
    fg: FusionGraph
    layout: Layout
    span: int
    t0: int = 0  # assigned during assembly

    def extended(self, model: HardwareModel) -> ExtendedLayer:
        return ExtendedLayer(model=model, t0=self.t0, span=self.span)


@dataclass
class Schedule:
    model: HardwareModel
    ops: list[SlotOp] = field(default_factory=list)
    measure_cycle: dict[int, int] = field(default_factory=dict)  # graph node -> cycle
    num_fusions: int = 0
    physical_depth: int = 0

    def finalize(self) -> None:
        used_layers = {op.cell.t for op in self.ops}
        self.physical_depth = len(used_layers)
        self.num_fusions = sum(1 for op in self.ops if op.op == "fuse") // 2
        self.ops.sort(key=SlotOp.key)

    def to_json(self) -> str:
        by_cycle: dict[int, list[SlotOp]] = {}
        for op in self.ops:
            by_cycle.setdefault(op.cycle, []).append(op)
        doc = {
            "schema_version": 1,
            "hardware": {"rows": self.model.rows, "cols": self.model.cols,
                         "delay_limit": self.model.delay_limit},
            "cycles": [
                {"t": cycle, "ops": [op.to_dict() for op in by_cycle[cycle]]}
                for cycle in sorted(by_cycle)
            ],
            "metrics": {"physical_depth": self.physical_depth,
                        "num_fusions": self.num_fusions},
        }
        return json.dumps(doc, indent=1, sort_keys=True)


class _Assembler:
    """Walks the mapped rounds in order and lays down every slot operation."""

    def __init__(self, plans: list[RoundPlan], g: GraphState, model: HardwareModel):
        self.plans = plans
        self.g = g
        self.model = model
        self.tau = model.delay_limit
        self.schedule = Schedule(model=model)
        self.occupied: dict[int, set[tuple[int, int]]] = {}  # layer -> cells
        self.slot_use: dict[tuple[Cell, str], int] = {}  # fusion cycle or op marker
        # pending cut-edge ports: edge -> side -> carrier (Cell, slot)
        self.carriers: dict[tuple[int, int], dict[int, tuple[Cell, str]]] = {}
        self.home_round: dict[int, int] = {}
        for plan in plans:
            for v in plan.rnd.nodes:
                self.home_round[v] = plan.rnd.index
        self.next_free_layer = 0
        self.last_measure_cycle = -1
        self.paired_edges: set[tuple[int, int]] = set()

    # -- low-level emission --------------------------------------------------

    def _mark(self, layer: int, rc: tuple[int, int]) -> None:
        self.occupied.setdefault(layer, set()).add(rc)

    def _is_free(self, layer: int, rc: tuple[int, int]) -> bool:
        return rc not in self.occupied.get(layer, set())

    def _emit(self, op: SlotOp) -> None:
        self.schedule.ops.append(op)

    def _emit_fuse(self, a: tuple[Cell, str], b: tuple[Cell, str]) -> int:
        cycle = max(a[0].t, b[0].t)
        if abs(a[0].t - b[0].t) > self.tau:
            raise ScheduleError(f"fusion between layers {a[0].t} and {b[0].t} exceeds delay limit")
        self._emit(SlotOp(cycle=cycle, cell=a[0], slot=a[1], op="fuse", partner=b))
        self._emit(SlotOp(cycle=cycle, cell=b[0], slot=b[1], op="fuse", partner=a))
        return cycle

    def _emit_discard(self, cell: Cell, slot: str) -> None:
        self._emit(SlotOp(cycle=cell.t, cell=cell, slot=slot, op="discard"))

    def _passthrough(self, prev: tuple[Cell, str], cell: Cell) -> tuple[Cell, str]:
        """Auxiliary resource state: fuse in at the root, hand the edge on via
        leaf_a, discard leaf_b."""
        self._emit_fuse(prev, (cell, ROOT))
        self._emit_discard(cell, LEAF_B)
        self._mark(cell.t, (cell.row, cell.col))
        return (cell, LEAF_A)

    # -- rounds ----------------------------------------------------------------

    def _cell_of(self, plan: RoundPlan, rid: int) -> Cell:
        row, fcol = plan.layout.placement[rid]
        return plan.extended(self.model).cell_at(row, fcol)

    def _emit_round(self, plan: RoundPlan) -> None:
        el = plan.extended(self.model)
        fg = plan.fg
        layout = plan.layout
        for rid in sorted(fg.nodes):
            cell = self._cell_of(plan, rid)
            self._mark(cell.t, (cell.row, cell.col))
        # intra-round fusion edges through their routes
        for edge in fg.edges:
            cells = [self._cell_of(plan, edge.a[0])]
            for rc in layout.routes.get(edge.eid, []):
                cells.append(el.cell_at(*rc))
            cells.append(self._cell_of(plan, edge.b[0]))
            cursor = (cells[0], edge.a[1])
            for aux in cells[1:-1]:
                cursor = self._passthrough(cursor, aux)
            self._emit_fuse(cursor, (cells[-1], edge.b[1]))
        # leftover slots: discards
        for rid in sorted(fg.nodes):
            cell = self._cell_of(plan, rid)
            for slot, use in fg.nodes[rid].slots.items():
                if use[0] in ("discard", "free"):
                    self._emit_discard(cell, slot)
        # stub ports become live carriers (unless the epoch already paired them)
        for stub in plan.rnd.stubs:
            if stub.edge in self.paired_edges:
                continue
            rid, slot = fg.port_map[stub.stub_id]
            cell = self._cell_of(plan, rid)
            self.carriers.setdefault(stub.edge, {})[plan.rnd.index] = (cell, slot)

    def _emit_measurements(self, plan: RoundPlan) -> None:
        fg = plan.fg
        gen_floor = plan.t0 + plan.span
        strata_order = {g: i for i, g in enumerate(sorted(plan.rnd.strata))}
        node_stratum = self._node_stratum(plan)
        for g_id in sorted(plan.rnd.strata):
            cycle = max(self.last_measure_cycle + 1, gen_floor + strata_order[g_id])
            emitted = False
            for v in sorted(plan.rnd.nodes):
                if node_stratum[v] != g_id:
                    continue
                center = fg.groups[v][0]
                cell = self._cell_of(plan, center)
                if cycle - cell.t > self.tau:
                    raise ScheduleError(
                        f"node {v} measured {cycle - cell.t} cycles after generation (> {self.tau})")
                if v in self.g.outputs:
                    self._emit(SlotOp(cycle=cycle, cell=cell, slot=ROOT, op="readout", node=v))
                else:
                    self._emit(SlotOp(cycle=cycle, cell=cell, slot=ROOT, op="measure",
                                      angle=float(self.g.angles[v]), node=v))
                self.schedule.measure_cycle[v] = cycle
                emitted = True
            if emitted:
                self.last_measure_cycle = cycle

    def _node_stratum(self, plan: RoundPlan) -> dict[int, int]:
        return plan.rnd.node_stratum

    # -- shuffle epochs ----------------------------------------------------------

    def _epoch(self, next_plan: RoundPlan) -> int:
        """Pair due cut edges and push pending carriers forward over
        intermediate layers before `next_plan` begins. Returns the number of
        intermediate layers consumed.

        Measurement spill from earlier rounds can force idle gap layers so
        the next round's photons are not generated before they can be
        measured within the delay limit; carriers ride relays across them.
        """
        j = next_plan.rnd.index
        due: list[tuple[int, int]] = []
        through: list[tuple[int, int]] = []
        for edge, sides in sorted(self.carriers.items()):
            lo = self.home_round[edge[0]]
            hi = self.home_round[edge[1]]
            if max(lo, hi) == j:
                due.append(edge)
            elif max(lo, hi) > j and min(lo, hi) < j:
                through.append(edge)
        base = self.next_free_layer
        s = len(next_plan.rnd.strata)
        required_t0 = max(base, self.last_measure_cycle + s - self.tau)
        min_m = required_t0 - base
        if not due and not through and min_m <= 0:
            return 0
        if due:
            # rough capacity floor: spatial zone must hold the route bodies
            est_cells = 0
            for edge in due:
                sides = self.carriers[edge]
                src = sides[min(sides)][0]
                dst_rid, _ = next_plan.fg.port_map[self._stub_id(next_plan, edge)]
                drow, dfcol = next_plan.layout.placement[dst_rid]
                est_cells += abs(src.row - drow) + 6
            area = self.model.rows * self.model.cols
            min_m = max(min_m, 1 + self.tau + (2 * est_cells) // area)
        for m in range(max(1, min_m), max(1, min_m) + 64):
            try:
                self._run_epoch(next_plan, due, through, m)
                return m
            except _EpochCongestion:
                # nothing was committed; retry with one more layer
                continue
        raise ScheduleError(f"shuffle before round {j} exceeded layer budget")

    def _run_epoch(self, next_plan: RoundPlan, due, through, m: int) -> None:
        base = self.next_free_layer
        layers = list(range(base, base + m))
        next_t0 = base + m
        staged_occ: dict[int, set[tuple[int, int]]] = {}
        staged_ops: list[tuple] = []  # deferred emission

        def free(t, rc):
            return self._is_free(t, rc) and rc not in staged_occ.get(t, set())

        # Spatial moves stay out of the last tau intermediate layers so that
        # the window right below the next round is a vertical-drop corridor;
        # otherwise early routes crossing the dense center block later pairs'
        # destination columns.
        spatial_limit = next_t0 - self.tau - 1

        def route3d(carrier: tuple[Cell, str], accept, target_rc,
                    start_layer_ok: bool, strict_zone: bool = True):
            """BFS through the temporal-spatial coupling graph: spatial steps
            inside a layer, temporal hops (up to tau) at the same generator.
            Route cells live on this epoch's intermediate layers, plus the
            carrier's own layer when start_layer_ok."""
            cell, _slot = carrier
            start = (cell.t, cell.row, cell.col)
            allowed = set(layers)
            if start_layer_ok:
                allowed.add(cell.t)
            lo_r = max(0, min(cell.row, target_rc[0]) - 8)
            hi_r = min(self.model.rows - 1, max(cell.row, target_rc[0]) + 8)
            lo_c = max(0, min(cell.col, target_rc[1]) - 8)
            hi_c = min(self.model.cols - 1, max(cell.col, target_rc[1]) + 8)
            parents: dict[tuple, tuple | None] = {start: None}
            queue = deque([start])
            goal = None
            while queue:
                cur = queue.popleft()
                t, r, c = cur
                neighbors = []
                for dt in range(1, self.tau + 1):
                    neighbors.append((t + dt, r, c))
                    neighbors.append((t - dt, r, c))
                if not strict_zone or t <= spatial_limit or t == cell.t:
                    for dr, dc in _DIRS:
                        neighbors.append((t, r + dr, c + dc))
                for nxt in neighbors:
                    nt, nr, nc = nxt
                    if nxt in parents:
                        continue
                    if not (lo_r <= nr <= hi_r and lo_c <= nc <= hi_c):
                        continue
                    if nt not in allowed or (nt == cell.t and not start_layer_ok):
                        continue
                    if not free(nt, (nr, nc)):
                        continue
                    if nt == cell.t and (nr, nc) == (cell.row, cell.col):
                        continue
                    parents[nxt] = cur
                    if accept(nt, nr, nc):
                        goal = nxt
                        queue.clear()
                        break
                    queue.append(nxt)
            if goal is None:
                raise _EpochCongestion()
            path = []
            cur = goal
            while cur is not None and cur != start:
                path.append(cur)
                cur = parents[cur]
            path.reverse()
            for t, r, c in path:
                staged_occ.setdefault(t, set()).add((r, c))
            return path

        carriers = {edge: dict(sides) for edge, sides in self.carriers.items()}
        el_next = ExtendedLayer(model=self.model, t0=next_t0, span=next_plan.span)

        def dst_cell(edge):
            dst_rid, dst_slot = next_plan.fg.port_map[self._stub_id(next_plan, edge)]
            drow, dfcol = next_plan.layout.placement[dst_rid]
            return el_next.cell_at(drow, dfcol), dst_slot

        # pair the due edges, shortest first
        order = sorted(
            (abs(carriers[e][min(carriers[e])][0].row - dst_cell(e)[0].row)
             + abs(carriers[e][min(carriers[e])][0].col - dst_cell(e)[0].col), e)
            for e in due
        )
        for _, edge in order:
            sides = carriers[edge]
            carrier = sides[min(sides)]
            dcell, dslot = dst_cell(edge)

            def accept(t, r, c, dcell=dcell):
                return (r, c) == (dcell.row, dcell.col) and 0 < dcell.t - t <= self.tau

            target = (dcell.row, dcell.col)
            path = None
            for start_ok, strict in ((False, True), (True, True), (False, False), (True, False)):
                try:
                    path = route3d(carrier, accept, target, start_layer_ok=start_ok,
                                   strict_zone=strict)
                    break
                except _EpochCongestion:
                    continue
            if path is None:
                raise _EpochCongestion()
            staged_ops.append(("pair", carrier, (dcell, dslot), path))
            del carriers[edge]
        # keep through-traffic alive past the next round's span
        horizon = next_t0 + next_plan.span
        for edge in sorted(through):
            sides = carriers[edge]
            side = min(sides)
            carrier = sides[side]
            if horizon - carrier[0].t <= self.tau:
                continue

            def accept(t, r, c, horizon=horizon):
                return horizon - t <= self.tau

            target = (carrier[0].row, carrier[0].col)
            path = None
            for start_ok, strict in ((False, True), (True, True), (False, False), (True, False)):
                try:
                    path = route3d(carrier, accept, target, start_layer_ok=start_ok,
                                   strict_zone=strict)
                    break
                except _EpochCongestion:
                    continue
            if path is None:
                raise _EpochCongestion()
            staged_ops.append(("carry", carrier, path))
            last = path[-1]
            sides[side] = (Cell(last[0], last[1], last[2]), LEAF_A)
        # committed: replay staged operations for real
        for entry in staged_ops:
            if entry[0] == "pair":
                _, a, b, path = entry
                cursor = a
                for t, r, c in path:
                    cursor = self._passthrough(cursor, Cell(t, r, c))
                self._emit_fuse(cursor, b)
            else:
                _, a, path = entry
                cursor = a
                for t, r, c in path:
                    cursor = self._passthrough(cursor, Cell(t, r, c))
        self.paired_edges.update(due)
        self.carriers = carriers
        self.next_free_layer = next_t0

    def _stub_id(self, plan: RoundPlan, edge: tuple[int, int]) -> int:
        return plan.rnd.stub_for_edge(edge).stub_id

    # -- assembly ----------------------------------------------------------------

    def run(self) -> Schedule:
        for plan in self.plans:
            if plan.rnd.index > 0:
                self._epoch(plan)
            plan.t0 = self.next_free_layer
            self.next_free_layer = plan.t0 + plan.span
            self._emit_round(plan)
            self._emit_measurements(plan)
        if self.carriers:
            raise ScheduleError(f"unpaired cut edges remain: {sorted(self.carriers)}")
        self._synthesize_delays()
        self.schedule.finalize()
        return self.schedule

    def _synthesize_delays(self) -> None:
        first_use: dict[tuple[Cell, str], int] = {}
        for op in self.schedule.ops:
            key = (op.cell, op.slot)
            if key not in first_use or op.cycle < first_use[key]:
                first_use[key] = op.cycle
        delays = []
        for (cell, slot), cycle in sorted(first_use.items(),
                                          key=lambda kv: (kv[0][0].t, kv[0][0].row,
                                                          kv[0][0].col, kv[0][1])):
            for t in range(cell.t, cycle):
                delays.append(SlotOp(cycle=t, cell=cell, slot=slot, op="delay"))
        self.schedule.ops.extend(delays)


class _EpochCongestion(Exception):
    pass


def _grid_route(src: tuple[int, int], dst: tuple[int, int], rows: int, cols: int,
                is_free) -> list[tuple[int, int]] | None:
    """Shortest path src..dst (inclusive) over free cells of one layer; src
    and dst cells are consumed by the route."""
    if not is_free(src) or (src != dst and not is_free(dst)):
        return None
    if src == dst:
        return [src]
    parents = {src: None}
    queue = deque([src])
    while queue:
        cur = queue.popleft()
        for d in _DIRS:
            nxt = (cur[0] + d[0], cur[1] + d[1])
            if not (0 <= nxt[0] < rows and 0 <= nxt[1] < cols):
                continue
            if nxt in parents or not is_free(nxt):
                continue
            parents[nxt] = cur
            if nxt == dst:
                path = [nxt]
                while cur is not None:
                    path.append(cur)
                    cur = parents[cur]
                return list(reversed(path))
            queue.append(nxt)
    return None


def emit_schedule(plans: list[RoundPlan], g: GraphState, model: HardwareModel) -> Schedule:
    """Assemble the per-cycle operation stream for mapped rounds."""
    return _Assembler(plans, g, model).run()


# -- scans ---------------------------------------------------------------------


def scan_dependencies(schedule: Schedule, g: GraphState) -> list[str]:
    """Lemma-1 ordering: every node measured strictly after its executability
    prerequisites."""
    problems = []
    for v, cycle in sorted(schedule.measure_cycle.items()):
        if v in g.outputs:
            continue
        for u in sorted(dependency_prerequisites(g, v)):
            cu = schedule.measure_cycle.get(u)
            if cu is None:
                problems.append(f"prerequisite {u} of {v} never measured")
            elif cu >= cycle:
                problems.append(f"node {v} at cycle {cycle} not after prerequisite {u} at {cu}")
    return problems


def scan_delays(schedule: Schedule, tau: int) -> list[str]:
    """No slot may wait more than tau cycles between generation and use."""
    problems = []
    for op in schedule.ops:
        if op.op == "delay":
            continue
        wait = op.cycle - op.cell.t
        if wait > tau:
            problems.append(
                f"slot ({op.cell.t},{op.cell.row},{op.cell.col},{op.slot}) used after {wait} cycles")
        if wait < 0:
            problems.append(f"op before generation at {op.cell}")
    return problems


def recount_fusions(schedule: Schedule) -> int:
    return sum(1 for op in schedule.ops if op.op == "fuse") // 2
