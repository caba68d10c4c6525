"""Packing state feasibility semantics and the from-scratch verifier."""

import random

import pytest

from lrapack.model import Solution
from lrapack.placement import PlacementState, available_backends, verify_solution

from test_model import make_instance

BACKENDS = available_backends()


def ff_trace_instance():
    # capacity (10,10); A: 2 replicas of (6,3); B: (5,5); C: (3,3); arc (A,C)=0
    return make_instance(
        (10, 10),
        [(2, (6, 3)), (1, (5, 5)), (1, (3, 3))],
        arcs={(0, 2): 0},
    )


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


class TestCanPlace:
    def test_empty_node_fits(self, backend):
        state = PlacementState(make_instance((10, 10), [(1, (6, 3))]), n_nodes=1, backend=backend)
        assert state.can_place(0, 0)

    def test_capacity_blocks(self, backend):
        # residual (4, 10) after one replica of (6, 0); demand (6, 7) does not fit
        state = PlacementState(make_instance((10, 10), [(2, (6, 0)), (1, (6, 7))]),
                               n_nodes=1, backend=backend)
        state.place(0, 0, 1)
        assert state.node_residual(0) == [4, 10]
        assert not state.can_place(1, 0)

    def test_zero_limit_conflict(self, backend):
        state = PlacementState(ff_trace_instance(), n_nodes=1, backend=backend)
        state.place(0, 0, 1)
        assert not state.can_place(2, 0)

    def test_limit_reached(self, backend):
        # node hosts i and 2 replicas of j with limit (i, j) = 2
        inst = make_instance((100, 100), [(1, (1, 1)), (3, (1, 1))], arcs={(0, 1): 2})
        state = PlacementState(inst, n_nodes=1, backend=backend)
        state.place(0, 0, 1)
        state.place(1, 0, 2)
        assert not state.can_place(1, 0)

    def test_reverse_arc_blocks_new_host(self, backend):
        # placing app with an out-arc onto a node already crowded with the target
        inst = make_instance((100, 100), [(1, (1, 1)), (3, (1, 1))], arcs={(0, 1): 2})
        state = PlacementState(inst, n_nodes=1, backend=backend)
        state.place(1, 0, 3)
        assert not state.can_place(0, 0)

    def test_no_remaining_replicas(self, backend):
        state = PlacementState(make_instance((10, 10), [(1, (1, 1))]), n_nodes=2, backend=backend)
        state.place(0, 0, 1)
        assert not state.can_place(0, 1)

    def test_self_arc_activation_rule(self, backend):
        inst = make_instance((100, 100), [(5, (1, 1))], arcs={(0, 0): 2})
        state = PlacementState(inst, n_nodes=1, backend=backend)
        assert state.max_placeable(0, 0) == 2
        state.place(0, 0, 2)
        assert not state.can_place(0, 0)


class TestMaxPlaceable:
    def test_capacity_and_remaining(self, backend):
        # residual (10,10), demand (3,2), remaining 4 -> min(3, 5, 4)
        inst = make_instance((10, 10), [(4, (3, 2))])
        state = PlacementState(inst, n_nodes=1, backend=backend)
        assert state.max_placeable(0, 0) == 3

    def test_hosted_in_neighbor_cap(self, backend):
        inst = make_instance((10, 10), [(1, (1, 1)), (4, (3, 2))], arcs={(0, 1): 2})
        state = PlacementState(inst, n_nodes=1, backend=backend)
        state.place(0, 0, 1)
        assert state.max_placeable(1, 0) == 2

    def test_out_arc_already_violated(self, backend):
        # hosted k with count 3 and arc (app, k) limit 2: placing even one
        # replica of app would break the limit
        inst = make_instance((100, 100), [(3, (1, 1)), (1, (1, 1))], arcs={(1, 0): 2})
        state = PlacementState(inst, n_nodes=1, backend=backend)
        state.place(0, 0, 3)
        assert state.max_placeable(1, 0) == 0

    def test_equivalence_with_can_place(self, backend):
        rng = random.Random(11)
        for _ in range(30):
            inst = random_instance(rng)
            state = PlacementState(inst, n_nodes=3, backend=backend)
            random_fill(state, inst, rng)
            for app in range(inst.num_apps):
                for node in range(state.node_count()):
                    assert state.can_place(app, node) == (state.max_placeable(app, node) >= 1)

    def test_place_precondition_enforced(self, backend):
        state = PlacementState(make_instance((10, 10), [(4, (3, 2))]), n_nodes=1, backend=backend)
        with pytest.raises(ValueError):
            state.place(0, 0, 4)
        with pytest.raises(ValueError):
            state.place(0, 0, 0)


def random_instance(rng, n_apps=5, dim=2):
    cap = tuple(rng.randint(5, 15) for _ in range(dim))
    apps = []
    for i in range(n_apps):
        demand = tuple(rng.randint(0, c) for c in cap)
        if all(v == 0 for v in demand):
            demand = tuple(1 for _ in cap)
        apps.append((rng.randint(1, 4), demand))
    arcs = {}
    for _ in range(rng.randint(0, 6)):
        i, j = rng.randrange(n_apps), rng.randrange(n_apps)
        lim = rng.randint(0, 2)
        if i == j and lim == 0:
            lim = 1
        arcs[(i, j)] = lim
    return make_instance(cap, apps, arcs)


def random_fill(state, inst, rng, steps=12):
    placements = []
    for _ in range(steps):
        app = rng.randrange(inst.num_apps)
        node = rng.randrange(state.node_count())
        k = state.max_placeable(app, node)
        if k >= 1:
            take = rng.randint(1, k)
            state.place(app, node, take)
            placements.append((app, node, take))
    return placements


class TestIncrementalMatchesScratch:
    def test_randomized(self, backend):
        rng = random.Random(23)
        for _ in range(40):
            inst = random_instance(rng)
            state = PlacementState(inst, n_nodes=4, backend=backend)
            placements = random_fill(state, inst, rng)
            # rebuild from scratch
            loads = [[0] * inst.dimensions for _ in range(4)]
            counts = [dict() for _ in range(4)]
            remaining = {a.id: a.replicas for a in inst.applications}
            for app, node, k in placements:
                for h, s in enumerate(inst.applications[app].demand):
                    loads[node][h] += k * s
                counts[node][app] = counts[node].get(app, 0) + k
                remaining[app] -= k
            for node in range(4):
                expect_residual = [c - l for c, l in zip(inst.capacity, loads[node])]
                assert state.node_residual(node) == expect_residual
                assert state.node_counts(node) == counts[node]
            for app in range(inst.num_apps):
                assert state.remaining(app) == remaining[app]
                # state invariant: placed + remaining = replicas
                placed = sum(counts[n].get(app, 0) for n in range(4))
                assert placed + state.remaining(app) == inst.applications[app].replicas


class TestVerifySolution:
    def test_ff_trace_solution_ok(self):
        inst = ff_trace_instance()
        sol = Solution("manual", 3, False,
                       {0: [(0, 1), (1, 1)], 1: [(2, 1)], 2: [(2, 1)]}, 0.0)
        assert verify_solution(inst, sol) == []

    def test_dropped_replica(self):
        inst = ff_trace_instance()
        sol = Solution("manual", 3, False,
                       {0: [(0, 1)], 1: [(2, 1)], 2: [(2, 1)]}, 0.0)
        problems = verify_solution(inst, sol)
        assert any("1 of 2 replicas placed" in p for p in problems)

    def test_capacity_violation(self):
        inst = ff_trace_instance()
        sol = Solution("manual", 2, False,
                       {0: [(0, 2)], 1: [(1, 1)], 2: [(1, 1)]}, 0.0)
        problems = verify_solution(inst, sol)
        assert any("capacity exceeded on node 0 dim 0" in p for p in problems)

    def test_affinity_violation(self):
        inst = ff_trace_instance()
        sol = Solution("manual", 2, False,
                       {0: [(0, 1), (1, 1)], 1: [(1, 1)], 2: [(0, 1)]}, 0.0)
        problems = verify_solution(inst, sol)
        assert any("affinity limit violated" in p for p in problems)

    def test_node_index_out_of_range(self):
        inst = ff_trace_instance()
        sol = Solution("manual", 2, False,
                       {0: [(0, 1), (5, 1)], 1: [(1, 1)], 2: [(1, 1)]}, 0.0)
        problems = verify_solution(inst, sol)
        assert any("outside" in p for p in problems)

    def test_empty_counted_node(self):
        inst = make_instance((10, 10), [(1, (1, 1))])
        sol = Solution("manual", 2, False, {0: [(0, 1)]}, 0.0)
        problems = verify_solution(inst, sol)
        assert any("hosts nothing" in p for p in problems)

    def test_failed_partial_accepted(self):
        inst = ff_trace_instance()
        sol = Solution("manual", 1, True, {0: [(0, 1)]}, 0.0)
        assert verify_solution(inst, sol) == []

    def test_failed_overplacement_rejected(self):
        inst = ff_trace_instance()
        sol = Solution("manual", 3, True, {2: [(0, 1), (1, 1), (2, 1)]}, 0.0)
        problems = verify_solution(inst, sol)
        assert any("more than" in p for p in problems)

    def test_self_arc_enforced(self):
        inst = make_instance((100, 100), [(5, (1, 1))], arcs={(0, 0): 2})
        sol = Solution("manual", 2, False, {0: [(0, 3), (1, 2)]}, 0.0)
        problems = verify_solution(inst, sol)
        assert any("affinity limit violated" in p and "(0, 0)" in p for p in problems)
