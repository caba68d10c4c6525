# distutils: language = c++
"""Compiled placement kernel.

Behavioral twin of ``_pure.py``: same API, same decisions, bit for bit.
Residuals and pool sums are exact 64-bit integers; normalized values come
from a single IEEE division at the point of use, matching the pure version's
expression shapes.
"""

from cython.operator cimport dereference as deref, preincrement
from libc.math cimport exp
from libcpp.unordered_map cimport unordered_map
from libcpp.vector cimport vector

ctypedef long long i64

cdef extern from *:
    """
    static inline void lrapack_map_add(std::unordered_map<long long, long long>* m,
                                       long long key, long long v) {
        (*m)[key] += v;
    }
    """
    void lrapack_map_add(unordered_map[i64, i64]* m, i64 key, i64 v) noexcept nogil

BACKEND = "cython"

MEASURE_AVG = 0
MEASURE_MAX = 1
MEASURE_AVGEXP = 2
MEASURE_SURROGATE = 3
MEASURE_EXTSUM = 4

SCORE_DOTPRODUCT = 0
SCORE_L2NORM = 1
SCORE_FITNESS = 2
SCORE_TIGHTFILL = 3

cdef i64 _map_get(unordered_map[i64, i64]* m, i64 key) noexcept nogil:
    it = m.find(key)
    if it == m.end():
        return 0
    return deref(it).second


cdef class PlacementCore:
    """Mutable packing state with exact feasibility checks and scan primitives."""

    cdef Py_ssize_t _nap, _dim
    cdef i64 _total_remaining
    cdef vector[i64] _demands, _capacity, _residual, _pool, _remaining, _self_limit
    cdef vector[double] _norm, _demand_totals
    cdef vector[i64] _out_indptr, _out_idx, _out_lim
    cdef vector[i64] _in_indptr, _in_idx, _in_lim
    cdef vector[unordered_map[i64, i64]] _counts

    def __init__(self, demands, norm, replicas, capacity, demand_totals,
                 out_indptr, out_idx, out_lim, in_indptr, in_idx, in_lim,
                 self_limit):
        cdef const i64[:, ::1] dem = demands
        cdef const double[:, ::1] nrm = norm
        cdef const i64[::1] rep = replicas
        cdef const i64[::1] cap = capacity
        cdef const double[::1] tot = demand_totals
        cdef const i64[::1] optr = out_indptr
        cdef const i64[::1] oidx = out_idx
        cdef const i64[::1] olim = out_lim
        cdef const i64[::1] iptr = in_indptr
        cdef const i64[::1] iidx = in_idx
        cdef const i64[::1] ilim = in_lim
        cdef const i64[::1] slim = self_limit
        cdef Py_ssize_t i, h
        self._nap = rep.shape[0]
        self._dim = cap.shape[0]
        self._demands.resize(self._nap * self._dim)
        self._norm.resize(self._nap * self._dim)
        for i in range(self._nap):
            for h in range(self._dim):
                self._demands[i * self._dim + h] = dem[i, h]
                self._norm[i * self._dim + h] = nrm[i, h]
        self._capacity.resize(self._dim)
        self._demand_totals.resize(self._dim)
        self._pool.resize(self._dim)
        for h in range(self._dim):
            self._capacity[h] = cap[h]
            self._demand_totals[h] = tot[h]
            self._pool[h] = 0
        self._remaining.resize(self._nap)
        self._self_limit.resize(self._nap)
        self._total_remaining = 0
        for i in range(self._nap):
            self._remaining[i] = rep[i]
            self._self_limit[i] = slim[i]
            self._total_remaining += rep[i]
        self._copy(self._out_indptr, optr)
        self._copy(self._out_idx, oidx)
        self._copy(self._out_lim, olim)
        self._copy(self._in_indptr, iptr)
        self._copy(self._in_idx, iidx)
        self._copy(self._in_lim, ilim)

    cdef void _copy(self, vector[i64]& dst, const i64[::1] src):
        cdef Py_ssize_t n = src.shape[0]
        cdef Py_ssize_t t
        dst.resize(n)
        for t in range(n):
            dst[t] = src[t]

    # -- state ------------------------------------------------------------

    def node_count(self):
        return <Py_ssize_t>self._counts.size()

    def activate_node(self):
        cdef Py_ssize_t idx = self._counts.size()
        cdef unordered_map[i64, i64] fresh
        cdef Py_ssize_t h
        self._counts.push_back(fresh)
        for h in range(self._dim):
            self._residual.push_back(self._capacity[h])
            self._pool[h] += self._capacity[h]
        return idx

    def remaining_of(self, Py_ssize_t app):
        return self._remaining[app]

    def total_remaining(self):
        return self._total_remaining

    def node_items(self, Py_ssize_t node):
        cdef unordered_map[i64, i64]* m = &self._counts[node]
        cdef unordered_map[i64, i64].iterator it = m.begin()
        items = []
        while it != m.end():
            items.append((deref(it).first, deref(it).second))
            preincrement(it)
        items.sort()
        return items

    def node_residual(self, Py_ssize_t node):
        cdef Py_ssize_t base = node * self._dim
        cdef Py_ssize_t h
        return [self._residual[base + h] for h in range(self._dim)]

    # -- feasibility -------------------------------------------------------

    cdef bint _can_place(self, Py_ssize_t app, Py_ssize_t node) noexcept:
        if self._remaining[app] <= 0:
            return False
        cdef Py_ssize_t d = self._dim
        cdef Py_ssize_t base = node * d
        cdef Py_ssize_t off = app * d
        cdef Py_ssize_t h, t
        for h in range(d):
            if self._residual[base + h] < self._demands[off + h]:
                return False
        cdef unordered_map[i64, i64]* counts = &self._counts[node]
        cdef i64 own = _map_get(counts, app)
        cdef i64 sl = self._self_limit[app]
        if sl >= 0 and own + 1 > sl:
            return False
        for t in range(self._in_indptr[app], self._in_indptr[app + 1]):
            if _map_get(counts, self._in_idx[t]) >= 1 and own + 1 > self._in_lim[t]:
                return False
        for t in range(self._out_indptr[app], self._out_indptr[app + 1]):
            if _map_get(counts, self._out_idx[t]) > self._out_lim[t]:
                return False
        return True

    cdef i64 _max_placeable(self, Py_ssize_t app, Py_ssize_t node) noexcept:
        cdef i64 bound = self._remaining[app]
        if bound <= 0:
            return 0
        cdef Py_ssize_t d = self._dim
        cdef Py_ssize_t base = node * d
        cdef Py_ssize_t off = app * d
        cdef Py_ssize_t h, t
        cdef i64 s, k
        for h in range(d):
            s = self._demands[off + h]
            if s > 0:
                k = self._residual[base + h] / s
                if k < bound:
                    bound = k
                    if bound == 0:
                        return 0
        cdef unordered_map[i64, i64]* counts = &self._counts[node]
        cdef i64 own = _map_get(counts, app)
        cdef i64 sl = self._self_limit[app]
        if sl >= 0 and sl - own < bound:
            bound = sl - own
            if bound <= 0:
                return 0
        for t in range(self._in_indptr[app], self._in_indptr[app + 1]):
            if _map_get(counts, self._in_idx[t]) >= 1 and self._in_lim[t] - own < bound:
                bound = self._in_lim[t] - own
                if bound <= 0:
                    return 0
        for t in range(self._out_indptr[app], self._out_indptr[app + 1]):
            if _map_get(counts, self._out_idx[t]) > self._out_lim[t]:
                return 0
        return bound

    def can_place(self, Py_ssize_t app, Py_ssize_t node):
        return self._can_place(app, node)

    def max_placeable(self, Py_ssize_t app, Py_ssize_t node):
        return self._max_placeable(app, node)

    def place(self, Py_ssize_t app, Py_ssize_t node, i64 k):
        if k < 1 or k > self._max_placeable(app, node):
            raise ValueError(
                f"cannot place {k} replicas of app {app} on node {node}"
            )
        cdef Py_ssize_t d = self._dim
        cdef Py_ssize_t base = node * d
        cdef Py_ssize_t off = app * d
        cdef Py_ssize_t h
        cdef i64 used
        for h in range(d):
            used = k * self._demands[off + h]
            self._residual[base + h] -= used
            self._pool[h] -= used
        lrapack_map_add(&self._counts[node], app, k)
        self._remaining[app] -= k
        self._total_remaining -= k

    # -- measures and scores ------------------------------------------------

    cdef double _node_measure(self, Py_ssize_t node, int kind, double eps):
        cdef Py_ssize_t d = self._dim
        cdef Py_ssize_t base = node * d
        cdef Py_ssize_t h
        cdef double acc = 0.0
        cdef double v, best, grand, mean_free
        cdef Py_ssize_t n
        if kind == 0:  # MEASURE_AVG
            for h in range(d):
                acc += (<double>self._residual[base + h]) / (<double>self._capacity[h])
            return acc / (<double>d)
        if kind == 1:  # MEASURE_MAX
            best = 0.0
            for h in range(d):
                v = (<double>self._residual[base + h]) / (<double>self._capacity[h])
                if v > best:
                    best = v
            return best
        if kind == 2:  # MEASURE_AVGEXP
            n = self._counts.size()
            for h in range(d):
                mean_free = ((<double>self._pool[h]) / (<double>self._capacity[h])) / (<double>n)
                acc += exp(eps * mean_free) * ((<double>self._residual[base + h]) / (<double>self._capacity[h]))
            return acc
        if kind == 3:  # MEASURE_SURROGATE
            grand = 0.0
            for h in range(d):
                grand += (<double>self._pool[h]) / (<double>self._capacity[h])
            if grand == 0.0:
                return 0.0
            for h in range(d):
                acc += (((<double>self._pool[h]) / (<double>self._capacity[h])) / grand) * (
                    (<double>self._residual[base + h]) / (<double>self._capacity[h]))
            return acc
        if kind == 4:  # MEASURE_EXTSUM
            for h in range(d):
                if self._pool[h] != 0:
                    acc += ((<double>self._residual[base + h]) / (<double>self._capacity[h])) / (
                        (<double>self._pool[h]) / (<double>self._capacity[h]))
            return acc
        raise ValueError(f"unknown measure code {kind}")

    cdef double _score_of(self, Py_ssize_t app, Py_ssize_t node, int kind):
        cdef Py_ssize_t d = self._dim
        cdef Py_ssize_t base = node * d
        cdef Py_ssize_t off = app * d
        cdef Py_ssize_t h
        cdef double acc = 0.0
        cdef double diff, r
        if kind == 0:  # SCORE_DOTPRODUCT
            for h in range(d):
                acc += self._norm[off + h] * ((<double>self._residual[base + h]) / (<double>self._capacity[h]))
            return acc
        if kind == 1:  # SCORE_L2NORM
            for h in range(d):
                diff = (<double>self._residual[base + h]) / (<double>self._capacity[h]) - self._norm[off + h]
                acc += diff * diff
            return -acc
        if kind == 2:  # SCORE_FITNESS
            for h in range(d):
                if self._demand_totals[h] != 0.0 and self._pool[h] != 0:
                    acc += (self._norm[off + h] / self._demand_totals[h]) * (
                        ((<double>self._residual[base + h]) / (<double>self._capacity[h])) / (
                            (<double>self._pool[h]) / (<double>self._capacity[h])))
            return acc
        if kind == 3:  # SCORE_TIGHTFILL
            for h in range(d):
                r = (<double>self._residual[base + h]) / (<double>self._capacity[h])
                if r != 0.0:
                    acc += self._norm[off + h] / r
            return acc
        raise ValueError(f"unknown score code {kind}")

    def node_measure(self, Py_ssize_t node, int kind, double eps):
        return self._node_measure(node, kind, eps)

    def score_of(self, Py_ssize_t app, Py_ssize_t node, int kind):
        return self._score_of(app, node, kind)

    # -- scans ---------------------------------------------------------------

    def find_first_feasible(self, Py_ssize_t app):
        cdef Py_ssize_t node
        for node in range(<Py_ssize_t>self._counts.size()):
            if self._can_place(app, node):
                return node
        return -1

    def find_best_node(self, Py_ssize_t app, int kind, double eps, bint want_max):
        # Feasibility runs only when the measure improves on the best feasible
        # node so far; ties keep the lowest index.
        cdef Py_ssize_t best = -1
        cdef double best_m = 0.0
        cdef double m
        cdef Py_ssize_t node
        for node in range(<Py_ssize_t>self._counts.size()):
            m = self._node_measure(node, kind, eps)
            if best >= 0:
                if want_max:
                    if m <= best_m:
                        continue
                elif m >= best_m:
                    continue
            if self._can_place(app, node):
                best = node
                best_m = m
        return best

    def find_best_app(self, Py_ssize_t node, int score_kind):
        cdef Py_ssize_t best = -1
        cdef double best_s = 0.0
        cdef double s
        cdef Py_ssize_t app
        for app in range(self._nap):
            if self._remaining[app] > 0 and self._can_place(app, node):
                s = self._score_of(app, node, score_kind)
                if best < 0 or s > best_s:
                    best = app
                    best_s = s
        return best

    def find_best_pair(self, int score_kind):
        cdef Py_ssize_t best_app = -1
        cdef Py_ssize_t best_node = -1
        cdef double best_s = 0.0
        cdef double s
        cdef Py_ssize_t app, node
        cdef Py_ssize_t n_nodes = self._counts.size()
        for app in range(self._nap):
            if self._remaining[app] <= 0:
                continue
            for node in range(n_nodes):
                if self._can_place(app, node):
                    s = self._score_of(app, node, score_kind)
                    if best_app < 0 or s > best_s:
                        best_app = app
                        best_node = node
                        best_s = s
        return best_app, best_node

    def count_feasible(self, Py_ssize_t app):
        cdef i64 total = 0
        cdef Py_ssize_t node
        for node in range(<Py_ssize_t>self._counts.size()):
            if self._can_place(app, node):
                total += 1
        return total
