"""Scalar size measures for applications and their node-side mirrors.

A size measure collapses an application's normalized demand vector into one
priority value used to order applications (decreasing variants of the
application-centric algorithms).  Each measure has a node counterpart obtained
by substituting node residual fractions for demand fractions, replica counts
by 1, and the replica total by the number of activated nodes; node measures
order nodes in the best-fit / worst-fit variants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .model import AffinityGraph, NormalizedView

# Codes shared with the placement kernels.
MEASURE_AVG = 0
MEASURE_MAX = 1
MEASURE_AVGEXP = 2
MEASURE_SURROGATE = 3
MEASURE_EXTSUM = 4

_NAMES = {"avg": MEASURE_AVG, "max": MEASURE_MAX, "avgexp": MEASURE_AVGEXP,
          "surrogate": MEASURE_SURROGATE, "extsum": MEASURE_EXTSUM}


@dataclass(frozen=True)
class MeasureKind:
    """One of avg, max, avgexp(eps), surrogate, extsum, or hybrid(base, alpha).

    The hybrid measure mixes a demand measure with the application's affinity
    degree; its base may not itself be hybrid.
    """

    name: str
    eps: float = 1.0
    alpha: float = 0.5
    base: "MeasureKind | None" = None

    def __post_init__(self):
        if self.name == "hybrid":
            if self.base is None or self.base.name == "hybrid":
                raise ValueError("hybrid measure requires a non-hybrid base")
        elif self.name not in _NAMES:
            raise ValueError(f"unknown measure {self.name!r}")
        if self.name == "avgexp" and self.eps <= 0:
            raise ValueError("avgexp weight eps must be positive")
        if self.name == "hybrid" and not (0.0 <= self.alpha <= 1.0):
            raise ValueError("hybrid alpha must lie in [0, 1]")

    def token(self) -> str:
        if self.name == "hybrid":
            return f"hybrid:{self.base.token()}:{self.alpha:g}"
        return self.name


def parse_measure(token: str, eps: float = 1.0) -> MeasureKind:
    """Parse a measure token: avg | max | avgexp | surrogate | extsum | hybrid:<base>:<alpha>."""
    parts = token.split(":")
    return parse_measure_parts(parts, eps=eps)


def parse_measure_parts(parts: Sequence[str], eps: float = 1.0) -> MeasureKind:
    if not parts:
        raise ValueError("empty measure token")
    if parts[0] == "hybrid":
        if len(parts) < 3:
            raise ValueError("hybrid measure token must be hybrid:<base>:<alpha>")
        base = parse_measure_parts(parts[1:-1], eps=eps)
        return MeasureKind(name="hybrid", alpha=float(parts[-1]), base=base, eps=eps)
    if len(parts) != 1:
        raise ValueError(f"malformed measure token {':'.join(parts)!r}")
    return MeasureKind(name=parts[0], eps=eps)


def kernel_code(kind: MeasureKind) -> tuple[int, float]:
    """(code, eps) pair consumed by the placement kernels; hybrid has no node mirror."""
    if kind.name == "hybrid":
        raise ValueError("hybrid has no node-side mirror; use node_order_kind() first")
    return _NAMES[kind.name], kind.eps


def node_order_kind(kind: MeasureKind) -> MeasureKind:
    """Measure used for node ordering: the hybrid's base, otherwise the kind itself.

    The degree term of the hybrid measure has no node analogue.
    """
    return kind.base if kind.name == "hybrid" else kind


def app_size(view: NormalizedView, graph: AffinityGraph, app_id: int, kind: MeasureKind) -> float:
    """Size measure of one application over its normalized demand fractions."""
    if kind.name == "hybrid":
        n = view.demand_frac.shape[0]
        base_vals = [_plain_size(view, i, kind.base) for i in range(n)]
        degrees = [graph.degree(i) for i in range(n)]
        return _hybrid_value(base_vals, degrees, app_id, kind.alpha)
    return _plain_size(view, app_id, kind)


def app_sizes(view: NormalizedView, graph: AffinityGraph, kind: MeasureKind) -> list[float]:
    """Size measures for all applications (the static ordering pass)."""
    n = view.demand_frac.shape[0]
    if kind.name == "hybrid":
        base_vals = [_plain_size(view, i, kind.base) for i in range(n)]
        degrees = [graph.degree(i) for i in range(n)]
        return [_hybrid_value(base_vals, degrees, i, kind.alpha) for i in range(n)]
    return [_plain_size(view, i, kind) for i in range(n)]


def _plain_size(view: NormalizedView, app_id: int, kind: MeasureKind) -> float:
    row = view.demand_frac[app_id]
    dim = len(row)
    if kind.name == "avg":
        acc = 0.0
        for h in range(dim):
            acc += row[h]
        return acc / dim
    if kind.name == "max":
        best = 0.0
        for h in range(dim):
            if row[h] > best:
                best = row[h]
        return best
    if kind.name == "avgexp":
        acc = 0.0
        for h in range(dim):
            acc += math.exp(kind.eps * view.averages[h]) * row[h]
        return acc
    if kind.name == "surrogate":
        acc = 0.0
        for h in range(dim):
            if view.totals[h] != 0.0:
                acc += view.weights[h] * row[h]
        return acc
    if kind.name == "extsum":
        acc = 0.0
        for h in range(dim):
            if view.totals[h] != 0.0:
                acc += (view.replicas[app_id] / view.totals[h]) * row[h]
        return acc
    raise ValueError(f"unknown measure {kind.name!r}")


def _hybrid_value(base_vals: Sequence[float], degrees: Sequence[int], app_id: int, alpha: float) -> float:
    n = len(base_vals)
    mean_size = 0.0
    for v in base_vals:
        mean_size += v
    mean_size /= n
    mean_deg = 0.0
    for g in degrees:
        mean_deg += g
    mean_deg /= n
    demand_term = base_vals[app_id] / mean_size if mean_size != 0.0 else 0.0
    affinity_term = degrees[app_id] / mean_deg if mean_deg != 0.0 else 0.0
    return alpha * demand_term + (1.0 - alpha) * affinity_term


def node_residual_measure(
    pool_residual_frac: Sequence[Sequence[float]],
    node: int,
    kind: MeasureKind,
) -> float:
    """Node-side measure over the residual fractions of the activated pool.

    Aggregates (per-dimension residual totals, their per-node averages, and
    the cross-dimension weights) are recomputed from the pool at every call,
    mirroring how orderings are refreshed at each decision.
    """
    if kind.name == "hybrid":
        raise ValueError("hybrid has no node-side mirror")
    row = pool_residual_frac[node]
    dim = len(row)
    n_nodes = len(pool_residual_frac)
    if kind.name == "avg":
        acc = 0.0
        for h in range(dim):
            acc += row[h]
        return acc / dim
    if kind.name == "max":
        best = 0.0
        for h in range(dim):
            if row[h] > best:
                best = row[h]
        return best
    totals = [0.0] * dim
    for other in pool_residual_frac:
        for h in range(dim):
            totals[h] += other[h]
    if kind.name == "avgexp":
        acc = 0.0
        for h in range(dim):
            acc += math.exp(kind.eps * (totals[h] / n_nodes)) * row[h]
        return acc
    if kind.name == "surrogate":
        grand = 0.0
        for h in range(dim):
            grand += totals[h]
        if grand == 0.0:
            return 0.0
        acc = 0.0
        for h in range(dim):
            acc += (totals[h] / grand) * row[h]
        return acc
    if kind.name == "extsum":
        acc = 0.0
        for h in range(dim):
            if totals[h] != 0.0:
                acc += row[h] / totals[h]
        return acc
    raise ValueError(f"unknown measure {kind.name!r}")
