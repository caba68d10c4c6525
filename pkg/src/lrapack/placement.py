"""Packing state construction and the from-scratch solution verifier.

The incremental state lives in a kernel (compiled or pure Python, selected at
import).  ``verify_solution`` deliberately shares no code with the kernels: it
rebuilds node loads from the assignment alone so that it stays an independent
check on everything the solvers emit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import DEFAULT_BACKEND, available_backends, get_impl
from .model import Instance, NormalizedView, Solution, normalize

__all__ = [
    "CoreInputs",
    "build_core_inputs",
    "make_core",
    "PlacementState",
    "verify_solution",
    "DEFAULT_BACKEND",
    "available_backends",
]


@dataclass
class CoreInputs:
    """Flat arrays feeding a placement kernel; identical for both backends."""

    demands: np.ndarray          # (L, d') int64, raw integer demands
    norm: np.ndarray             # (L, d') float64, demand fractions
    replicas: np.ndarray         # (L,) int64
    capacity: np.ndarray         # (d',) int64
    demand_totals: np.ndarray    # (d',) float64, replica-weighted fractions
    out_indptr: np.ndarray
    out_idx: np.ndarray
    out_lim: np.ndarray
    in_indptr: np.ndarray
    in_idx: np.ndarray
    in_lim: np.ndarray
    self_limit: np.ndarray       # (L,) int64, -1 where no self arc


def build_core_inputs(instance: Instance, view: NormalizedView | None = None) -> CoreInputs:
    if view is None:
        view = normalize(instance)
    apps = instance.applications
    n = len(apps)
    dim = instance.dimensions
    demands = np.array([a.demand for a in apps], dtype=np.int64).reshape(n, dim)
    replicas = np.array([a.replicas for a in apps], dtype=np.int64)
    capacity = np.array(instance.capacity, dtype=np.int64)
    norm = np.ascontiguousarray(view.demand_frac, dtype=np.float64).reshape(n, dim)
    demand_totals = np.array(view.totals, dtype=np.float64)

    # Self-arcs are split out of the adjacency; they follow an activation rule
    # (the first replica already counts against the limit) that the per-arc
    # hosted check cannot express.
    graph = instance.graph
    self_limit = np.full(n, -1, dtype=np.int64)
    out_indptr = [0]
    out_idx: list[int] = []
    out_lim: list[int] = []
    in_indptr = [0]
    in_idx: list[int] = []
    in_lim: list[int] = []
    for i in range(n):
        sl = graph.self_limit(i)
        if sl is not None:
            self_limit[i] = sl
        for j, lim in graph.out_arcs(i):
            if j != i:
                out_idx.append(j)
                out_lim.append(lim)
        out_indptr.append(len(out_idx))
        for j, lim in graph.in_arcs(i):
            if j != i:
                in_idx.append(j)
                in_lim.append(lim)
        in_indptr.append(len(in_idx))

    as_i64 = lambda seq: np.array(seq, dtype=np.int64)
    return CoreInputs(
        demands=demands,
        norm=norm,
        replicas=replicas,
        capacity=capacity,
        demand_totals=demand_totals,
        out_indptr=as_i64(out_indptr),
        out_idx=as_i64(out_idx),
        out_lim=as_i64(out_lim),
        in_indptr=as_i64(in_indptr),
        in_idx=as_i64(in_idx),
        in_lim=as_i64(in_lim),
        self_limit=self_limit,
    )


def make_core(inputs: CoreInputs, n_nodes: int = 0, backend: str | None = None):
    impl = get_impl(backend)
    core = impl.PlacementCore(
        inputs.demands, inputs.norm, inputs.replicas, inputs.capacity,
        inputs.demand_totals,
        inputs.out_indptr, inputs.out_idx, inputs.out_lim,
        inputs.in_indptr, inputs.in_idx, inputs.in_lim,
        inputs.self_limit,
    )
    for _ in range(n_nodes):
        core.activate_node()
    return core


class PlacementState:
    """Convenience wrapper tying an instance to a placement kernel."""

    def __init__(self, instance: Instance, n_nodes: int = 0, backend: str | None = None):
        self.instance = instance
        self.view = normalize(instance)
        self.inputs = build_core_inputs(instance, self.view)
        self.core = make_core(self.inputs, n_nodes=n_nodes, backend=backend)

    def activate_node(self) -> int:
        return self.core.activate_node()

    def can_place(self, app: int, node: int) -> bool:
        return bool(self.core.can_place(app, node))

    def max_placeable(self, app: int, node: int) -> int:
        return int(self.core.max_placeable(app, node))

    def place(self, app: int, node: int, k: int) -> None:
        self.core.place(app, node, k)

    def remaining(self, app: int) -> int:
        return int(self.core.remaining_of(app))

    def node_count(self) -> int:
        return int(self.core.node_count())

    def node_counts(self, node: int) -> dict[int, int]:
        return dict(self.core.node_items(node))

    def node_residual(self, node: int) -> list[int]:
        return list(self.core.node_residual(node))


def extract_solution(core, algorithm: str, failed: bool, wall_time_ms: float) -> Solution:
    """Read the kernel state into a Solution, dropping and renumbering empty nodes."""
    per_node = [core.node_items(node) for node in range(core.node_count())]
    renumber: dict[int, int] = {}
    for node, items in enumerate(per_node):
        if items:
            renumber[node] = len(renumber)
    assignment: dict[int, list[tuple[int, int]]] = {}
    for node, items in enumerate(per_node):
        if not items:
            continue
        new_idx = renumber[node]
        for app, count in items:
            assignment.setdefault(app, []).append((new_idx, count))
    for pairs in assignment.values():
        pairs.sort()
    return Solution(
        algorithm=algorithm,
        nodes_used=len(renumber),
        failed=failed,
        assignment=assignment,
        wall_time_ms=wall_time_ms,
    )


def verify_solution(instance: Instance, solution: Solution) -> list[str]:
    """Re-check a solution from scratch; returns violations (empty = ok).

    Checks replica coverage (skipped for failed partial solutions, where only
    over-placement is an error), node index ranges, per-dimension capacity,
    and every affinity limit including self arcs.
    """
    problems: list[str] = []
    apps = instance.applications
    n_apps = len(apps)
    dim = instance.dimensions
    nodes = solution.nodes_used

    loads: dict[int, list[int]] = {}
    counts: dict[int, dict[int, int]] = {}
    for app_id, pairs in sorted(solution.assignment.items()):
        if not (0 <= app_id < n_apps):
            problems.append(f"assignment references unknown app {app_id}")
            continue
        seen_nodes = set()
        placed = 0
        for node, count in pairs:
            if count < 1:
                problems.append(f"app {app_id}: non-positive replica count {count} on node {node}")
                continue
            if not (0 <= node < nodes):
                problems.append(f"app {app_id}: node index {node} outside 0..{nodes - 1}")
                continue
            if node in seen_nodes:
                problems.append(f"app {app_id}: duplicate entry for node {node}")
                continue
            seen_nodes.add(node)
            placed += count
            node_counts = counts.setdefault(node, {})
            node_counts[app_id] = count
            load = loads.setdefault(node, [0] * dim)
            for h, s in enumerate(apps[app_id].demand):
                load[h] += count * s
        if solution.failed:
            if placed > apps[app_id].replicas:
                problems.append(
                    f"app {app_id}: {placed} replicas placed, more than the {apps[app_id].replicas} requested"
                )
        elif placed != apps[app_id].replicas:
            problems.append(
                f"app {app_id}: {placed} of {apps[app_id].replicas} replicas placed"
            )

    for node in range(nodes):
        if node not in counts:
            problems.append(f"node {node} is counted as used but hosts nothing")

    cap = instance.capacity
    for node, load in sorted(loads.items()):
        for h in range(dim):
            if load[h] > cap[h]:
                problems.append(
                    f"capacity exceeded on node {node} dim {h}: {load[h]} > {cap[h]}"
                )

    graph = instance.graph
    for node, node_counts in sorted(counts.items()):
        for i in sorted(node_counts):
            for j, lim in graph.out_arcs(i):
                c = node_counts.get(j, 0)
                if c > lim:
                    problems.append(
                        f"affinity limit violated on node {node}: arc ({i}, {j}) limit {lim}, count {c}"
                    )
    return problems
