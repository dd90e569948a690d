# End-to-end compile driver: circuit -> graph state -> strata -> planar
# rounds -> fusion graphs -> layouts -> schedule. Rounds that do not fit
# their extended-layer budget are split (at stratum boundaries first) and
# everything downstream of the partition is rebuilt incrementally.

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .circuit import Circuit, normalize_to_jcz, render_circuit
from .fusiongraph import FusionGraph, generate_fusion_graph
from .graphstate import GraphState, dependency_layers, translate
from .hardware import HardwareModel
from .mapper import CapacityError, Layout, audit_layout, map_round
from .planarity import Round, build_round, planarize_and_merge
from .schedule import (RoundPlan, Schedule, emit_schedule, scan_delays,
                       scan_dependencies)


class CompileError(Exception):
    pass


@dataclass
class CompileConfig:
    rows: int
    cols: int
    delay_limit: int = 3
    alpha: float = 1.0
    beta: float = 0.5
    lookahead: float = 1.0
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "rows": self.rows, "cols": self.cols, "delay_limit": self.delay_limit,
            "alpha": self.alpha, "beta": self.beta, "lookahead": self.lookahead,
            "seed": self.seed,
        }


@dataclass
class CompileResult:
    config: CompileConfig
    circuit: Circuit
    graph: GraphState
    rounds: list[Round]
    plans: list[RoundPlan]
    schedule: Schedule
    circuit_hash: str
    split_count: int = 0

    def metrics(self) -> dict:
        return {
            "schema_version": 1,
            "name": self.circuit.name,
            "config": self.config.to_dict(),
            "circuit_sha256": self.circuit_hash,
            "num_qubits": self.circuit.num_qubits,
            "num_gates": len(self.circuit.gates),
            "graph_nodes": len(self.graph.angles),
            "graph_edges": len(self.graph.edges),
            "rounds": len(self.rounds),
            "splits": self.split_count,
            "physical_depth": self.schedule.physical_depth,
            "num_fusions": self.schedule.num_fusions,
        }

    def metrics_json(self) -> str:
        return json.dumps(self.metrics(), indent=1, sort_keys=True)


def _split_entry(nodes: list[int], strata_ids: list[int],
                 node_stratum: dict[int, int]) -> list[tuple[list[int], list[int]]]:
    """Split a round's node set in two, preferring a stratum boundary."""
    if len(nodes) < 2:
        raise CompileError("cannot split a single-node round: grid too small")
    ordered = sorted(nodes, key=lambda v: (node_stratum[v], v))
    if len(strata_ids) > 1:
        half = len(ordered) // 2
        pivot_stratum = node_stratum[ordered[half]]
        cut = next(i for i, v in enumerate(ordered) if node_stratum[v] == pivot_stratum)
        if cut == 0:  # everything up to half is one stratum; cut after it
            cut = next((i for i, v in enumerate(ordered)
                        if node_stratum[v] > pivot_stratum), len(ordered) // 2)
        if cut == 0 or cut == len(ordered):
            cut = len(ordered) // 2
    else:
        cut = len(ordered) // 2
    first, second = ordered[:cut], ordered[cut:]
    return [
        (sorted(first), sorted({node_stratum[v] for v in first})),
        (sorted(second), sorted({node_stratum[v] for v in second})),
    ]


def compile_circuit(circuit: Circuit, config: CompileConfig) -> CompileResult:
    """Run the full pipeline; deterministic for a fixed config."""
    model = HardwareModel(rows=config.rows, cols=config.cols,
                          delay_limit=config.delay_limit)
    normalized = normalize_to_jcz(circuit)
    g = translate(normalized)
    circuit_hash = hashlib.sha256(render_circuit(circuit).encode()).hexdigest()
    layers = dependency_layers(g)
    tau = config.delay_limit
    if not g.edges and not g.measured_nodes():
        # idle program: nothing to synthesize or measure
        schedule = Schedule(model=model)
        schedule.finalize()
        return CompileResult(config=config, circuit=circuit, graph=g, rounds=[],
                             plans=[], schedule=schedule, circuit_hash=circuit_hash)
    base_rounds = planarize_and_merge(g, layers, max_strata=tau)
    node_stratum: dict[int, int] = {}
    for rnd in base_rounds:
        node_stratum.update(rnd.node_stratum)
    partition: list[tuple[list[int], list[int]]] = [
        (list(rnd.nodes), list(rnd.strata)) for rnd in base_rounds
    ]
    plan_cache: dict[tuple, tuple[FusionGraph, Layout, int]] = {}
    split_count = 0
    for _ in range(4 * len(g.angles) + 16):
        rounds = [
            build_round(g, idx, nodes, strata, node_stratum)
            for idx, (nodes, strata) in enumerate(partition)
        ]
        home = {v: rnd.index for rnd in rounds for v in rnd.nodes}
        through = [False] * len(rounds)
        for a, b in g.edges:
            lo, hi = sorted((home[a], home[b]))
            for j in range(lo + 1, hi):
                through[j] = True
        plans: list[RoundPlan] = []
        split_at: int | None = None
        for rnd in rounds:
            key = (tuple(rnd.nodes), through[rnd.index])
            cached = plan_cache.get(key)
            if cached is not None:
                fg, layout, span = cached
                plans.append(RoundPlan(rnd=rnd, fg=fg, layout=layout, span=span))
                continue
            fg = generate_fusion_graph(rnd, g.angles, g.outputs)
            k_cap = tau - len(rnd.strata) + 1
            if through[rnd.index]:
                k_cap = min(k_cap, tau - 1)
            if k_cap < 1:
                raise CompileError(
                    f"round {rnd.index} spans {len(rnd.strata)} strata; delay limit {tau} too tight")
            layout = None
            for k in range(1, k_cap + 1):
                if len(fg.nodes) > config.rows * config.cols * k:
                    continue
                try:
                    layout = map_round(fg, config.rows, config.cols, k,
                                       alpha=config.alpha, beta=config.beta,
                                       lookahead=config.lookahead)
                    span = k
                    break
                except CapacityError:
                    continue
            if layout is None:
                split_at = rnd.index
                break
            audit_layout(layout)
            plan_cache[key] = (fg, layout, span)
            plans.append(RoundPlan(rnd=rnd, fg=fg, layout=layout, span=span))
        if split_at is None:
            schedule = emit_schedule(plans, g, model)
            _assert_safe(schedule, g, tau)
            return CompileResult(config=config, circuit=circuit, graph=g,
                                 rounds=rounds, plans=plans, schedule=schedule,
                                 circuit_hash=circuit_hash, split_count=split_count)
        nodes, strata = partition[split_at]
        replacement = _split_entry(nodes, strata, node_stratum)
        partition = partition[:split_at] + replacement + partition[split_at + 1:]
        split_count += 1
    raise CompileError("round splitting did not converge")


def _assert_safe(schedule: Schedule, g: GraphState, tau: int) -> None:
    problems = scan_dependencies(schedule, g) + scan_delays(schedule, tau)
    if problems:
        raise CompileError("unsafe schedule: " + "; ".join(problems[:5]))
