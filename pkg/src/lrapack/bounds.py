"""Lower bound, exhaustive oracle for tiny instances, and ILP model export.

The oracle and the exported-model checker are deliberately independent of the
placement kernels so that they can vouch for the heuristics' output.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

from .model import Instance, Solution, require_valid


@dataclass(frozen=True)
class Bound:
    """Node-count lower bound and the dimension that forces it."""

    value: int
    binding_dimension: int


class OracleLimitError(Exception):
    """Raised when an instance exceeds the exhaustive oracle's replica limit."""


def lower_bound(instance: Instance) -> Bound:
    """max over dimensions of ceil(total demand / node capacity), in raw integers."""
    require_valid(instance)
    dim = instance.dimensions
    best_value = 0
    best_dim = 0
    for h in range(dim):
        total = 0
        for app in instance.applications:
            total += app.replicas * app.demand[h]
        value = -(-total // instance.capacity[h])  # ceil for non-negative ints
        if value > best_value:
            best_value = value
            best_dim = h
    return Bound(value=best_value, binding_dimension=best_dim)


# ---------------------------------------------------------------------------
# Exhaustive oracle


def _replica_fits(instance, node_load, node_counts, app_id) -> bool:
    # Standalone single-replica feasibility check (kept independent of the
    # placement kernels): capacity, then both arc directions, then self arc.
    app = instance.applications[app_id]
    cap = instance.capacity
    for h, s in enumerate(app.demand):
        if node_load[h] + s > cap[h]:
            return False
    graph = instance.graph
    own_after = node_counts.get(app_id, 0) + 1
    for i, lim in graph.in_arcs(app_id):
        if i == app_id:
            if own_after > lim:
                return False
        elif node_counts.get(i, 0) >= 1 and own_after > lim:
            return False
    for k, lim in graph.out_arcs(app_id):
        if k == app_id:
            continue  # handled above via in_arcs
        if node_counts.get(k, 0) > lim:
            return False
    return True


def brute_force_opt(instance: Instance, limit: int = 10) -> Solution:
    """Provably minimum-node assignment by exhaustive search with symmetry breaking.

    Nodes are interchangeable, so a replica may only open node k when node
    k-1 is non-empty, and among currently open nodes only the first of each
    identical (load, counts) state is tried.  Replicas are assigned in
    application order; the first optimum found is therefore the
    lexicographically smallest one.  Instances with more than ``limit`` total
    replicas are rejected up front.
    """
    require_valid(instance)
    total = instance.total_replicas
    if total > limit:
        raise OracleLimitError(
            f"instance has {total} replicas, oracle limit is {limit}"
        )
    start = time.perf_counter()
    replica_apps: list[int] = []
    for app in instance.applications:
        replica_apps.extend([app.id] * app.replicas)
    dim = instance.dimensions

    best_count = total + 1
    best_assign: list[int] | None = None
    node_loads: list[list[int]] = []
    node_counts: list[dict[int, int]] = []
    current: list[int] = []

    def dfs(idx: int) -> None:
        nonlocal best_count, best_assign
        opened = len(node_loads)
        if idx == len(replica_apps):
            if opened < best_count:
                best_count = opened
                best_assign = current.copy()
            return
        if opened >= best_count:
            return
        app_id = replica_apps[idx]
        app = instance.applications[app_id]
        tried: set[tuple] = set()
        for node in range(opened + 1):
            if node == opened:
                node_loads.append([0] * dim)
                node_counts.append({})
            else:
                signature = (
                    tuple(node_loads[node]),
                    tuple(sorted(node_counts[node].items())),
                )
                if signature in tried:
                    continue
                tried.add(signature)
            loads = node_loads[node]
            counts = node_counts[node]
            if _replica_fits(instance, loads, counts, app_id):
                for h, s in enumerate(app.demand):
                    loads[h] += s
                counts[app_id] = counts.get(app_id, 0) + 1
                current.append(node)
                dfs(idx + 1)
                current.pop()
                counts[app_id] -= 1
                if counts[app_id] == 0:
                    del counts[app_id]
                for h, s in enumerate(app.demand):
                    loads[h] -= s
            if node == opened:
                node_loads.pop()
                node_counts.pop()

    dfs(0)
    if best_assign is None:
        # Unreachable for valid instances: each replica fits an empty node.
        raise RuntimeError("exhaustive search found no assignment")
    assignment: dict[int, dict[int, int]] = {}
    for idx, node in enumerate(best_assign):
        app_id = replica_apps[idx]
        per_app = assignment.setdefault(app_id, {})
        per_app[node] = per_app.get(node, 0) + 1
    elapsed = (time.perf_counter() - start) * 1000.0
    return Solution(
        algorithm="oracle",
        nodes_used=best_count,
        failed=False,
        assignment={a: sorted(nodes.items()) for a, nodes in sorted(assignment.items())},
        wall_time_ms=elapsed,
    )


# ---------------------------------------------------------------------------
# ILP model export
#
# Text grammar (one constraint per line, integer coefficients):
#
#   OBJECTIVE
#   min: +1 y_0 +1 y_1 ...
#   SUBJECT TO
#   <row_name>: <+c|-c> <var> ... <=|=|>= <rhs>
#   BINARY
#   <var>          (one per line)
#   END
#
# Variables: x_<app>_<replica>_<node> (replica r of app i on node n),
# y_<node> (node activated), z_<app>_<node> (app present on node).
# Row families: assign (every replica placed), cap (per node and dimension),
# open (replica count on a node at most the per-node cap when present),
# host (presence implied by any replica), aff (pairwise limits).


def _per_node_cap(instance: Instance, app_id: int) -> int:
    # Capacity / replica-count cap used as the big-M in presence rows; it
    # ignores affinity on purpose, self limits are enforced by aff rows.
    app = instance.applications[app_id]
    bound = app.replicas
    for h, s in enumerate(app.demand):
        if s > 0:
            bound = min(bound, instance.capacity[h] // s)
    return bound


def export_ilp(instance: Instance, n_nodes: int) -> str:
    """Emit the node-minimization model over ``n_nodes`` candidate nodes."""
    require_valid(instance)
    if n_nodes < 1:
        raise ValueError("n_nodes must be >= 1")
    apps = instance.applications
    dim = instance.dimensions
    lines: list[str] = ["OBJECTIVE"]
    obj = " ".join(f"+1 y_{n}" for n in range(n_nodes))
    lines.append(f"min: {obj}")
    lines.append("SUBJECT TO")
    for app in apps:
        for r in range(app.replicas):
            terms = " ".join(f"+1 x_{app.id}_{r}_{n}" for n in range(n_nodes))
            lines.append(f"assign_{app.id}_{r}: {terms} = 1")
    for n in range(n_nodes):
        for h in range(dim):
            terms = []
            for app in apps:
                s = app.demand[h]
                if s != 0:
                    terms.extend(f"+{s} x_{app.id}_{r}_{n}" for r in range(app.replicas))
            terms.append(f"-{instance.capacity[h]} y_{n}")
            lines.append(f"cap_{n}_{h}: {' '.join(terms)} <= 0")
    caps = {app.id: _per_node_cap(instance, app.id) for app in apps}
    for app in apps:
        for n in range(n_nodes):
            terms = " ".join(f"+1 x_{app.id}_{r}_{n}" for r in range(app.replicas))
            lines.append(f"open_{app.id}_{n}: {terms} -{caps[app.id]} z_{app.id}_{n} <= 0")
    for app in apps:
        for n in range(n_nodes):
            terms = " ".join(f"-1 x_{app.id}_{r}_{n}" for r in range(app.replicas))
            lines.append(f"host_{app.id}_{n}: +1 z_{app.id}_{n} {terms} <= 0")
    for (i, j), lim in sorted(instance.graph.arcs.items()):
        cap_j = caps[j]
        coeff = cap_j - lim
        for n in range(n_nodes):
            terms = " ".join(f"+1 x_{j}_{r}_{n}" for r in range(apps[j].replicas))
            sign = "+" if coeff >= 0 else "-"
            lines.append(
                f"aff_{i}_{j}_{n}: {terms} {sign}{abs(coeff)} z_{i}_{n} <= {cap_j}"
            )
    lines.append("BINARY")
    for app in apps:
        for r in range(app.replicas):
            for n in range(n_nodes):
                lines.append(f"x_{app.id}_{r}_{n}")
    for n in range(n_nodes):
        lines.append(f"y_{n}")
    for app in apps:
        for n in range(n_nodes):
            lines.append(f"z_{app.id}_{n}")
    lines.append("END")
    return "\n".join(lines) + "\n"


def _parse_model(text: str):
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    try:
        obj_at = lines.index("OBJECTIVE")
        subj_at = lines.index("SUBJECT TO")
        bin_at = lines.index("BINARY")
        end_at = lines.index("END")
    except ValueError as exc:
        raise ValueError(f"malformed model: missing section ({exc})")
    rows = []
    for ln in lines[subj_at + 1:bin_at]:
        name, _, body = ln.partition(":")
        if not body:
            raise ValueError(f"malformed row {ln!r}")
        tokens = body.split()
        sense_at = next((k for k, t in enumerate(tokens) if t in ("<=", "=", ">=")), None)
        if sense_at is None or sense_at != len(tokens) - 2:
            raise ValueError(f"malformed row {ln!r}")
        terms = []
        for k in range(0, sense_at, 2):
            coeff = int(tokens[k])
            var = tokens[k + 1]
            terms.append((coeff, var))
        rows.append((name.strip(), terms, tokens[sense_at], int(tokens[sense_at + 1])))
    variables = set(lines[bin_at + 1:end_at])
    return rows, variables


def check_assignment_against_model(model_text: str, solution: Solution) -> list[str]:
    """Evaluate a solution against an exported model; returns violated rows.

    Replicas of an application are mapped onto its nodes in node order;
    presence and activation variables follow from the counts.  Every row is
    evaluated in exact integer arithmetic.
    """
    rows, variables = _parse_model(model_text)
    values: dict[str, int] = {}
    problems: list[str] = []
    used_nodes: set[int] = set()
    for app_id, pairs in sorted(solution.assignment.items()):
        r = 0
        for node, count in sorted(pairs):
            if count >= 1:
                values[f"z_{app_id}_{node}"] = 1
                used_nodes.add(node)
            for _ in range(count):
                values[f"x_{app_id}_{r}_{node}"] = 1
                r += 1
    for n in used_nodes:
        values[f"y_{n}"] = 1
    empty = [n for n in range(solution.nodes_used) if n not in used_nodes]
    if empty:
        problems.append(f"structural: nodes counted as used but hosting nothing: {empty[:5]}")
    unknown = sorted(v for v in values if v not in variables)
    if unknown:
        return [f"structural: solution uses variables outside the model: {unknown[:5]}"]
    for name, terms, sense, rhs in rows:
        lhs = 0
        for coeff, var in terms:
            lhs += coeff * values.get(var, 0)
        ok = (lhs <= rhs) if sense == "<=" else (lhs == rhs) if sense == "=" else (lhs >= rhs)
        if not ok:
            problems.append(f"row {name} violated: lhs {lhs} {sense} rhs {rhs} fails")
    return problems
