"""Domain model: instances, solutions, validation, normalization, file formats.

An instance describes a set of replicated applications to be packed onto
identical nodes.  Each node has an integer capacity per dimension, where a
dimension is one (resource type, epoch) pair: time-varying demands over T
epochs and d resource types are flattened into d*T packing dimensions.
Affinity arcs (i, j) with limit a bound how many replicas of j may share a
node with application i.

All feasibility arithmetic is integer-exact; floating point appears only in
the normalized view consumed by measures and scores.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np


@dataclass(frozen=True)
class Application:
    """One replicated application; every replica has the same demand vector."""

    id: int
    replicas: int
    demand: tuple[int, ...]


class AffinityGraph:
    """Directed affinity arcs (i, j) -> limit, with adjacency both ways.

    A self-arc (i, i) caps how many replicas of i may share a node once any
    replica of i is present.
    """

    def __init__(self, arcs: Mapping[tuple[int, int], int] | Iterable[tuple[int, int, int]]):
        if isinstance(arcs, Mapping):
            items = [(i, j, lim) for (i, j), lim in arcs.items()]
        else:
            items = [(i, j, lim) for i, j, lim in arcs]
        self.arcs: dict[tuple[int, int], int] = {}
        self._out: dict[int, list[tuple[int, int]]] = {}
        self._in: dict[int, list[tuple[int, int]]] = {}
        for i, j, lim in items:
            key = (int(i), int(j))
            if key in self.arcs:
                raise ValueError(f"duplicate affinity arc {key}")
            self.arcs[key] = int(lim)
        for (i, j), lim in self.arcs.items():
            self._out.setdefault(i, []).append((j, lim))
            self._in.setdefault(j, []).append((i, lim))
        for adj in (self._out, self._in):
            for lst in adj.values():
                lst.sort()

    def out_arcs(self, i: int) -> list[tuple[int, int]]:
        """Arcs (i, j) as sorted (j, limit) pairs."""
        return self._out.get(i, [])

    def in_arcs(self, j: int) -> list[tuple[int, int]]:
        """Arcs (i, j) as sorted (i, limit) pairs."""
        return self._in.get(j, [])

    def self_limit(self, i: int) -> int | None:
        return self.arcs.get((i, i))

    def degree(self, i: int) -> int:
        """Number of distinct other applications linked to i in either direction."""
        linked = {j for j, _ in self._out.get(i, [])}
        linked.update(j for j, _ in self._in.get(i, []))
        linked.discard(i)
        return len(linked)

    def __len__(self) -> int:
        return len(self.arcs)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, AffinityGraph) and self.arcs == other.arcs


@dataclass
class Instance:
    """A packing instance over identical nodes.

    ``capacity`` has one entry per (resource type, epoch) dimension; node
    capacity is constant across epochs, so generators replicate the per-type
    capacities T times.
    """

    name: str
    resource_types: int  # d
    epochs: int  # T
    capacity: tuple[int, ...]
    applications: list[Application]
    graph: AffinityGraph
    seed: int | None = None

    @property
    def dimensions(self) -> int:
        return self.resource_types * self.epochs

    @property
    def num_apps(self) -> int:
        return len(self.applications)

    @property
    def total_replicas(self) -> int:
        return sum(a.replicas for a in self.applications)


@dataclass
class NormalizedView:
    """Demand fractions and aggregate statistics over a valid instance.

    demand_frac[i, h] = demand / capacity in [0, 1]; node capacity becomes the
    all-ones vector.  ``totals`` is the replica-weighted demand per dimension,
    ``averages`` the per-replica mean demand, and ``weights`` the share of each
    dimension in the overall demand (summing to 1 when any demand exists).
    """

    demand_frac: np.ndarray
    replicas: tuple[int, ...]
    totals: tuple[float, ...]
    averages: tuple[float, ...]
    weights: tuple[float, ...]
    total_replicas: int


def validate(instance: Instance) -> list[str]:
    """Return every invariant violation; an empty list means valid."""
    problems: list[str] = []
    d, t = instance.resource_types, instance.epochs
    if d < 1:
        problems.append(f"resource_types must be >= 1, got {d}")
    if t < 1:
        problems.append(f"epochs must be >= 1, got {t}")
    dim = d * t
    cap = instance.capacity
    if len(cap) != dim:
        problems.append(f"capacity has {len(cap)} entries, expected d*T = {dim}")
    for h, c in enumerate(cap):
        if c < 1:
            problems.append(f"capacity must be positive in every dimension, dim {h} is {c}")
    apps = instance.applications
    for pos, app in enumerate(apps):
        if app.id != pos:
            problems.append(f"application ids must be dense 0..{len(apps) - 1}, position {pos} has id {app.id}")
        if app.replicas < 1:
            problems.append(f"app {app.id}: replicas must be >= 1, got {app.replicas}")
        if len(app.demand) != dim:
            problems.append(f"app {app.id}: demand has {len(app.demand)} entries, expected {dim}")
            continue
        for h, s in enumerate(app.demand):
            if s < 0:
                problems.append(f"app {app.id}: demand is negative in dim {h}")
            elif h < len(cap) and s > cap[h]:
                problems.append(f"app {app.id}: demand exceeds node capacity in dim {h} ({s} > {cap[h]})")
    n = len(apps)
    for (i, j), lim in sorted(instance.graph.arcs.items()):
        if not (0 <= i < n) or not (0 <= j < n):
            problems.append(f"affinity arc ({i}, {j}) references an unknown application")
        if lim < 0:
            problems.append(f"affinity arc ({i}, {j}) has negative limit {lim}")
        if i == j and lim == 0:
            problems.append(f"self-affinity 0 on app {i} is globally infeasible")
    return problems


def require_valid(instance: Instance) -> None:
    problems = validate(instance)
    if problems:
        raise ValueError("invalid instance: " + "; ".join(problems))


def normalize(instance: Instance) -> NormalizedView:
    """Compute demand fractions and the per-dimension aggregate statistics.

    The instance's integer demands are untouched; feasibility checks elsewhere
    keep using exact integers.
    """
    dim = instance.dimensions
    apps = instance.applications
    demands = np.array([a.demand for a in apps], dtype=np.int64).reshape(len(apps), dim)
    cap = np.array(instance.capacity, dtype=np.int64)
    frac = demands / cap  # row-wise exact IEEE division per dimension
    total_replicas = sum(a.replicas for a in apps)
    totals = [0.0] * dim
    for i, app in enumerate(apps):
        r = app.replicas
        row = frac[i]
        for h in range(dim):
            totals[h] += r * row[h]
    if total_replicas > 0:
        averages = [w / total_replicas for w in totals]
    else:
        averages = [0.0] * dim
    grand = 0.0
    for w in totals:
        grand += w
    if grand > 0.0:
        weights = [w / grand for w in totals]
    else:
        weights = [0.0] * dim
    return NormalizedView(
        demand_frac=frac,
        replicas=tuple(a.replicas for a in apps),
        totals=tuple(float(w) for w in totals),
        averages=tuple(float(v) for v in averages),
        weights=tuple(float(v) for v in weights),
        total_replicas=total_replicas,
    )


def max_replicas_per_node(instance: Instance, app_id: int) -> int:
    """Max replicas of one application that fit a single empty node.

    Bounded by every capacity dimension, the replica count, and the app's
    self-affinity limit when present.
    """
    app = instance.applications[app_id]
    cap = instance.capacity
    bound = app.replicas
    for h, s in enumerate(app.demand):
        if s > 0:
            bound = min(bound, cap[h] // s)
    self_lim = instance.graph.self_limit(app_id)
    if self_lim is not None:
        bound = min(bound, self_lim)
    return bound


# ---------------------------------------------------------------------------
# Solutions


@dataclass
class Solution:
    """Final assignment: per application, (node, replica count) pairs.

    ``failed`` marks fixed-pool multi-node runs that could not place every
    replica; the partial assignment is retained.
    """

    algorithm: str
    nodes_used: int
    failed: bool
    assignment: dict[int, list[tuple[int, int]]]
    wall_time_ms: float

    def placed_replicas(self, app_id: int) -> int:
        return sum(c for _, c in self.assignment.get(app_id, []))


# ---------------------------------------------------------------------------
# Instance JSON format
#
# { "name", "d", "T", "capacity": [ints],
#   "apps": [{ "id", "replicas", "demand": [ints, length d*T] }],
#   "affinities": [{ "from", "to", "limit" }], "seed" }

_INSTANCE_KEYS = {"name", "d", "T", "capacity", "apps", "affinities", "seed"}
_APP_KEYS = {"id", "replicas", "demand"}
_ARC_KEYS = {"from", "to", "limit"}


def _check_keys(obj: Mapping, expected: set[str], what: str) -> None:
    unknown = set(obj) - expected
    if unknown:
        raise ValueError(f"{what}: unknown keys {sorted(unknown)}")
    missing = expected - set(obj)
    if missing:
        raise ValueError(f"{what}: missing keys {sorted(missing)}")


def instance_to_dict(instance: Instance) -> dict:
    return {
        "name": instance.name,
        "d": instance.resource_types,
        "T": instance.epochs,
        "capacity": list(instance.capacity),
        "apps": [
            {"id": a.id, "replicas": a.replicas, "demand": list(a.demand)}
            for a in instance.applications
        ],
        "affinities": [
            {"from": i, "to": j, "limit": lim}
            for (i, j), lim in sorted(instance.graph.arcs.items())
        ],
        "seed": instance.seed,
    }


def instance_from_dict(data: Mapping) -> Instance:
    _check_keys(data, _INSTANCE_KEYS, "instance")
    apps = []
    for entry in data["apps"]:
        _check_keys(entry, _APP_KEYS, "app entry")
        apps.append(
            Application(
                id=int(entry["id"]),
                replicas=int(entry["replicas"]),
                demand=tuple(int(v) for v in entry["demand"]),
            )
        )
    apps.sort(key=lambda a: a.id)
    arcs = {}
    for entry in data["affinities"]:
        _check_keys(entry, _ARC_KEYS, "affinity entry")
        key = (int(entry["from"]), int(entry["to"]))
        if key in arcs:
            raise ValueError(f"duplicate affinity arc {key}")
        arcs[key] = int(entry["limit"])
    seed = data["seed"]
    return Instance(
        name=str(data["name"]),
        resource_types=int(data["d"]),
        epochs=int(data["T"]),
        capacity=tuple(int(v) for v in data["capacity"]),
        applications=apps,
        graph=AffinityGraph(arcs),
        seed=None if seed is None else int(seed),
    )


def save_instance(instance: Instance, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(instance_to_dict(instance), f, indent=2)
        f.write("\n")


def load_instance(path: str) -> Instance:
    with open(path, "r", encoding="utf-8") as f:
        return instance_from_dict(json.load(f))


# ---------------------------------------------------------------------------
# Solution JSON format
#
# { "algorithm", "nodes_used", "failed",
#   "assignment": [{ "app", "node", "count" }], "wall_time_ms" }

_SOLUTION_KEYS = {"algorithm", "nodes_used", "failed", "assignment", "wall_time_ms"}
_ASSIGN_KEYS = {"app", "node", "count"}


def solution_to_dict(solution: Solution) -> dict:
    entries = []
    for app_id in sorted(solution.assignment):
        for node, count in sorted(solution.assignment[app_id]):
            entries.append({"app": app_id, "node": node, "count": count})
    return {
        "algorithm": solution.algorithm,
        "nodes_used": solution.nodes_used,
        "failed": solution.failed,
        "assignment": entries,
        "wall_time_ms": solution.wall_time_ms,
    }


def solution_from_dict(data: Mapping) -> Solution:
    _check_keys(data, _SOLUTION_KEYS, "solution")
    assignment: dict[int, list[tuple[int, int]]] = {}
    for entry in data["assignment"]:
        _check_keys(entry, _ASSIGN_KEYS, "assignment entry")
        assignment.setdefault(int(entry["app"]), []).append(
            (int(entry["node"]), int(entry["count"]))
        )
    for pairs in assignment.values():
        pairs.sort()
    return Solution(
        algorithm=str(data["algorithm"]),
        nodes_used=int(data["nodes_used"]),
        failed=bool(data["failed"]),
        assignment=assignment,
        wall_time_ms=float(data["wall_time_ms"]),
    )


def save_solution(solution: Solution, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(solution_to_dict(solution), f, indent=2)
        f.write("\n")


def load_solution(path: str) -> Solution:
    with open(path, "r", encoding="utf-8") as f:
        return solution_from_dict(json.load(f))


# ---------------------------------------------------------------------------
# Generic CSV importer
#
# apps.csv:     app_id,replicas,dim_0,...,dim_{d'-1}
# affinity.csv: from,to,limit
# Headers must match exactly; unknown columns are rejected.


def read_csv_instance(
    apps_path: str,
    affinity_path: str,
    capacity: Sequence[int],
    resource_types: int,
    epochs: int,
    name: str = "csv-import",
) -> Instance:
    dim = resource_types * epochs
    if len(capacity) != dim:
        raise ValueError(f"capacity has {len(capacity)} entries, expected d*T = {dim}")
    expected_header = ["app_id", "replicas"] + [f"dim_{h}" for h in range(dim)]
    apps: dict[int, Application] = {}
    with open(apps_path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != expected_header:
            raise ValueError(
                f"{apps_path}: header mismatch, expected {expected_header}, got {header}"
            )
        for row in reader:
            if not row:
                continue
            if len(row) != len(expected_header):
                raise ValueError(f"{apps_path}: row has {len(row)} fields, expected {len(expected_header)}")
            app_id = int(row[0])
            if app_id in apps:
                raise ValueError(f"{apps_path}: duplicate app_id {app_id}")
            apps[app_id] = Application(
                id=app_id,
                replicas=int(row[1]),
                demand=tuple(int(v) for v in row[2:]),
            )
    arcs: dict[tuple[int, int], int] = {}
    with open(affinity_path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["from", "to", "limit"]:
            raise ValueError(f"{affinity_path}: header mismatch, expected ['from', 'to', 'limit'], got {header}")
        for row in reader:
            if not row:
                continue
            if len(row) != 3:
                raise ValueError(f"{affinity_path}: row has {len(row)} fields, expected 3")
            key = (int(row[0]), int(row[1]))
            if key in arcs:
                raise ValueError(f"{affinity_path}: duplicate arc {key}")
            arcs[key] = int(row[2])
    return Instance(
        name=name,
        resource_types=resource_types,
        epochs=epochs,
        capacity=tuple(int(v) for v in capacity),
        applications=[apps[i] for i in sorted(apps)],
        graph=AffinityGraph(arcs),
        seed=None,
    )
