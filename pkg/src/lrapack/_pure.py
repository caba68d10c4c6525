"""Pure-Python placement kernel.

Behavioral twin of ``_speedups.pyx``; both expose the same PlacementCore API
and must make bit-identical decisions.  Keep every arithmetic expression in
the same shape and evaluation order as the compiled version: residual and
pool sums are exact integers, normalized values are produced by a single
IEEE division at the point of use.
"""

from __future__ import annotations

from math import exp

BACKEND = "python"

MEASURE_AVG = 0
MEASURE_MAX = 1
MEASURE_AVGEXP = 2
MEASURE_SURROGATE = 3
MEASURE_EXTSUM = 4

SCORE_DOTPRODUCT = 0
SCORE_L2NORM = 1
SCORE_FITNESS = 2
SCORE_TIGHTFILL = 3


class PlacementCore:
    """Mutable packing state with exact feasibility checks and scan primitives.

    One replica of app j may sit on a node hosting app i only within the arc
    limit (i, j); a self arc (i, i) caps app i's own count on any node hosting
    it.  Capacity checks run first in every scan since they fail cheapest.
    """

    def __init__(self, demands, norm, replicas, capacity, demand_totals,
                 out_indptr, out_idx, out_lim, in_indptr, in_idx, in_lim,
                 self_limit):
        self._nap = len(replicas)
        self._dim = len(capacity)
        self._demands = [int(v) for row in demands for v in row]
        self._norm = [float(v) for row in norm for v in row]
        self._capacity = [int(v) for v in capacity]
        self._demand_totals = [float(v) for v in demand_totals]
        self._out_indptr = [int(v) for v in out_indptr]
        self._out_idx = [int(v) for v in out_idx]
        self._out_lim = [int(v) for v in out_lim]
        self._in_indptr = [int(v) for v in in_indptr]
        self._in_idx = [int(v) for v in in_idx]
        self._in_lim = [int(v) for v in in_lim]
        self._self_limit = [int(v) for v in self_limit]
        self._remaining = [int(v) for v in replicas]
        self._total_remaining = sum(self._remaining)
        self._residual: list[int] = []
        self._pool = [0] * self._dim
        self._counts: list[dict[int, int]] = []

    # -- state ------------------------------------------------------------

    def node_count(self):
        return len(self._counts)

    def activate_node(self):
        idx = len(self._counts)
        self._counts.append({})
        self._residual.extend(self._capacity)
        pool = self._pool
        cap = self._capacity
        for h in range(self._dim):
            pool[h] += cap[h]
        return idx

    def remaining_of(self, app):
        return self._remaining[app]

    def total_remaining(self):
        return self._total_remaining

    def node_items(self, node):
        return sorted(self._counts[node].items())

    def node_residual(self, node):
        base = node * self._dim
        return self._residual[base:base + self._dim]

    # -- feasibility -------------------------------------------------------

    def can_place(self, app, node):
        if self._remaining[app] <= 0:
            return False
        d = self._dim
        res = self._residual
        dem = self._demands
        base = node * d
        off = app * d
        for h in range(d):
            if res[base + h] < dem[off + h]:
                return False
        counts = self._counts[node]
        own = counts.get(app, 0)
        sl = self._self_limit[app]
        if sl >= 0 and own + 1 > sl:
            return False
        indptr = self._in_indptr
        idx = self._in_idx
        lim = self._in_lim
        for t in range(indptr[app], indptr[app + 1]):
            if counts.get(idx[t], 0) >= 1 and own + 1 > lim[t]:
                return False
        indptr = self._out_indptr
        idx = self._out_idx
        lim = self._out_lim
        for t in range(indptr[app], indptr[app + 1]):
            if counts.get(idx[t], 0) > lim[t]:
                return False
        return True

    def max_placeable(self, app, node):
        bound = self._remaining[app]
        if bound <= 0:
            return 0
        d = self._dim
        res = self._residual
        dem = self._demands
        base = node * d
        off = app * d
        for h in range(d):
            s = dem[off + h]
            if s > 0:
                k = res[base + h] // s
                if k < bound:
                    bound = k
                    if bound == 0:
                        return 0
        counts = self._counts[node]
        own = counts.get(app, 0)
        sl = self._self_limit[app]
        if sl >= 0 and sl - own < bound:
            bound = sl - own
            if bound <= 0:
                return 0
        indptr = self._in_indptr
        idx = self._in_idx
        lim = self._in_lim
        for t in range(indptr[app], indptr[app + 1]):
            if counts.get(idx[t], 0) >= 1 and lim[t] - own < bound:
                bound = lim[t] - own
                if bound <= 0:
                    return 0
        indptr = self._out_indptr
        idx = self._out_idx
        lim = self._out_lim
        for t in range(indptr[app], indptr[app + 1]):
            if counts.get(idx[t], 0) > lim[t]:
                return 0
        return bound

    def place(self, app, node, k):
        if k < 1 or k > self.max_placeable(app, node):
            raise ValueError(
                f"cannot place {k} replicas of app {app} on node {node}"
            )
        d = self._dim
        res = self._residual
        dem = self._demands
        pool = self._pool
        base = node * d
        off = app * d
        for h in range(d):
            used = k * dem[off + h]
            res[base + h] -= used
            pool[h] -= used
        counts = self._counts[node]
        counts[app] = counts.get(app, 0) + k
        self._remaining[app] -= k
        self._total_remaining -= k

    # -- measures and scores ------------------------------------------------

    def node_measure(self, node, kind, eps):
        d = self._dim
        cap = self._capacity
        res = self._residual
        base = node * d
        if kind == MEASURE_AVG:
            acc = 0.0
            for h in range(d):
                acc += res[base + h] / cap[h]
            return acc / d
        if kind == MEASURE_MAX:
            best = 0.0
            for h in range(d):
                v = res[base + h] / cap[h]
                if v > best:
                    best = v
            return best
        pool = self._pool
        if kind == MEASURE_AVGEXP:
            n = len(self._counts)
            acc = 0.0
            for h in range(d):
                mean_free = (pool[h] / cap[h]) / n
                acc += exp(eps * mean_free) * (res[base + h] / cap[h])
            return acc
        if kind == MEASURE_SURROGATE:
            grand = 0.0
            for h in range(d):
                grand += pool[h] / cap[h]
            if grand == 0.0:
                return 0.0
            acc = 0.0
            for h in range(d):
                acc += ((pool[h] / cap[h]) / grand) * (res[base + h] / cap[h])
            return acc
        if kind == MEASURE_EXTSUM:
            acc = 0.0
            for h in range(d):
                if pool[h] != 0:
                    acc += (res[base + h] / cap[h]) / (pool[h] / cap[h])
            return acc
        raise ValueError(f"unknown measure code {kind}")

    def score_of(self, app, node, kind):
        d = self._dim
        cap = self._capacity
        res = self._residual
        norm = self._norm
        base = node * d
        off = app * d
        if kind == SCORE_DOTPRODUCT:
            acc = 0.0
            for h in range(d):
                acc += norm[off + h] * (res[base + h] / cap[h])
            return acc
        if kind == SCORE_L2NORM:
            acc = 0.0
            for h in range(d):
                diff = res[base + h] / cap[h] - norm[off + h]
                acc += diff * diff
            return -acc
        if kind == SCORE_FITNESS:
            pool = self._pool
            totals = self._demand_totals
            acc = 0.0
            for h in range(d):
                if totals[h] != 0.0 and pool[h] != 0:
                    acc += (norm[off + h] / totals[h]) * (
                        (res[base + h] / cap[h]) / (pool[h] / cap[h])
                    )
            return acc
        if kind == SCORE_TIGHTFILL:
            acc = 0.0
            for h in range(d):
                r = res[base + h] / cap[h]
                if r != 0.0:
                    acc += norm[off + h] / r
            return acc
        raise ValueError(f"unknown score code {kind}")

    # -- scans ---------------------------------------------------------------

    def find_first_feasible(self, app):
        for node in range(len(self._counts)):
            if self.can_place(app, node):
                return node
        return -1

    def find_best_node(self, app, kind, eps, want_max):
        # Feasibility (the costly check) runs only when the node's measure
        # improves on the best feasible node found so far; ties keep the
        # lowest index.
        best = -1
        best_m = 0.0
        for node in range(len(self._counts)):
            m = self.node_measure(node, kind, eps)
            if best >= 0:
                if want_max:
                    if m <= best_m:
                        continue
                elif m >= best_m:
                    continue
            if self.can_place(app, node):
                best = node
                best_m = m
        return best

    def find_best_app(self, node, score_kind):
        best = -1
        best_s = 0.0
        remaining = self._remaining
        for app in range(self._nap):
            if remaining[app] > 0 and self.can_place(app, node):
                s = self.score_of(app, node, score_kind)
                if best < 0 or s > best_s:
                    best = app
                    best_s = s
        return best

    def find_best_pair(self, score_kind):
        best_app = -1
        best_node = -1
        best_s = 0.0
        remaining = self._remaining
        n_nodes = len(self._counts)
        for app in range(self._nap):
            if remaining[app] <= 0:
                continue
            for node in range(n_nodes):
                if self.can_place(app, node):
                    s = self.score_of(app, node, score_kind)
                    if best_app < 0 or s > best_s:
                        best_app = app
                        best_node = node
                        best_s = s
        return best_app, best_node

    def count_feasible(self, app):
        total = 0
        for node in range(len(self._counts)):
            if self.can_place(app, node):
                total += 1
        return total
