"""Size measures and their node-side mirrors."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lrapack.measures import (
    MeasureKind,
    app_size,
    app_sizes,
    kernel_code,
    node_order_kind,
    node_residual_measure,
    parse_measure,
)
from lrapack.model import AffinityGraph, Application, Instance, normalize

from test_model import make_instance


def view_for(capacity, apps, arcs=None):
    inst = make_instance(capacity, apps, arcs)
    return inst, normalize(inst)


class TestAppMeasures:
    def test_average(self):
        inst, view = view_for((4, 4), [(1, (1, 3))])  # fractions (0.25, 0.75)
        assert app_size(view, inst.graph, 0, parse_measure("avg")) == 0.5

    def test_max(self):
        inst, view = view_for((4, 4), [(1, (1, 3))])
        assert app_size(view, inst.graph, 0, parse_measure("max")) == 0.75

    def test_surrogate(self):
        # weights (0.6, 0.4) from totals, fractions (0.5, 0.25)
        inst, view = view_for((100, 100), [(1, (50, 25)), (1, (10, 15))])
        assert view.weights == (0.6, 0.4)
        got = app_size(view, inst.graph, 0, parse_measure("surrogate"))
        assert got == pytest.approx(0.6 * 0.5 + 0.4 * 0.25, abs=1e-15)

    def test_avgexp(self):
        # averages D=(0.2, 0.4): app 0 has fractions (0.5, 0.25), app 1 (0.1, 0.45)
        inst, view = view_for((20, 20), [(1, (10, 5)), (3, (2, 9))])
        assert view.averages == pytest.approx((0.2, 0.4), abs=1e-15)
        expected = math.exp(view.averages[0]) * 0.5 + math.exp(view.averages[1]) * 0.25
        got = app_size(view, inst.graph, 0, parse_measure("avgexp"))
        assert got == pytest.approx(expected, rel=1e-14)
        assert got == pytest.approx(0.98365, abs=1e-5)

    def test_avgexp_eps_scaling(self):
        inst, view = view_for((20, 20), [(1, (10, 5)), (3, (2, 9))])
        kind = MeasureKind(name="avgexp", eps=2.5)
        expected = (math.exp(2.5 * view.averages[0]) * 0.5
                    + math.exp(2.5 * view.averages[1]) * 0.25)
        assert app_size(view, inst.graph, 0, kind) == pytest.approx(expected, rel=1e-14)

    def test_extended_sum(self):
        # |R_0|=2, fractions (0.5, 0.25), totals W=(10, 5)
        inst = make_instance((2, 4), [(2, (1, 1)), (18, (1, 1))])
        view = normalize(inst)
        # W = (0.5*2 + 0.5*18, 0.25*2 + 0.25*18) = (10, 5); app 0 fractions (0.5, 0.25)
        assert view.totals == (10.0, 5.0)
        got = app_size(view, inst.graph, 0, parse_measure("extsum"))
        assert got == pytest.approx(2 * (0.5 / 10 + 0.25 / 5), abs=1e-15)
        assert got == pytest.approx(0.2, abs=1e-15)

    def test_extended_sum_zero_total_dimension(self):
        inst, view = view_for((4, 4), [(2, (1, 0))])
        got = app_size(view, inst.graph, 0, parse_measure("extsum"))
        assert got == pytest.approx(2 * (0.25 / 0.5), abs=1e-15)

    def test_hybrid(self):
        # alpha=0.5, s_0=0.4, mean size 0.5, degree_0=3, mean degree 2 -> 1.15
        inst = make_instance(
            (10, 10),
            [(1, (4, 4)), (1, (6, 6)), (1, (1, 1)), (1, (9, 9))],
            arcs={(0, 1): 1, (0, 2): 1, (3, 0): 1, (1, 2): 1},
        )
        view = normalize(inst)
        sizes = app_sizes(view, inst.graph, parse_measure("avg"))
        assert sizes[0] == pytest.approx(0.4)
        assert sum(sizes) / 4 == pytest.approx(0.5)
        degrees = [inst.graph.degree(i) for i in range(4)]
        assert degrees[0] == 3 and sum(degrees) / 4 == 2.0
        got = app_size(view, inst.graph, 0, parse_measure("hybrid:avg:0.5"))
        assert got == pytest.approx(0.5 * (0.4 / 0.5) + 0.5 * (3 / 2.0), abs=1e-12)
        assert got == pytest.approx(1.15, abs=1e-12)

    def test_hybrid_zero_degree_mean(self):
        inst, view = view_for((4,), [(1, (2,)), (1, (2,))])
        got = app_size(view, inst.graph, 0, parse_measure("hybrid:avg:0.25"))
        assert got == pytest.approx(0.25 * 1.0 + 0.75 * 0.0)

    def test_medea_degree_ordering_special_case(self):
        # hybrid with alpha=0 is a pure degree ranking
        inst = make_instance(
            (10,), [(1, (1,)), (1, (1,)), (1, (1,))],
            arcs={(0, 1): 1, (2, 0): 1, (2, 1): 0},
        )
        view = normalize(inst)
        sizes = app_sizes(view, inst.graph, parse_measure("hybrid:avg:0.0"))
        degrees = [inst.graph.degree(i) for i in range(3)]
        assert degrees == [2, 2, 2] or degrees  # degree sanity below
        order = sorted(range(3), key=lambda i: (-sizes[i], i))
        by_degree = sorted(range(3), key=lambda i: (-degrees[i], i))
        assert order == by_degree


class TestNodeMeasures:
    def test_average(self):
        assert node_residual_measure([[0.5, 0.3]], 0, parse_measure("avg")) == pytest.approx(0.4)

    def test_max(self):
        assert node_residual_measure([[0.5, 0.3]], 0, parse_measure("max")) == pytest.approx(0.5)

    def test_surrogate_two_nodes(self):
        pool = [[1.0, 1.0], [0.0, 0.5]]
        # totals (1.0, 1.5), weights (0.4, 0.6); node 1 -> 0*0.4 + 0.5*0.6
        got = node_residual_measure(pool, 1, parse_measure("surrogate"))
        assert got == pytest.approx(0.3, abs=1e-15)

    def test_avgexp_pool_statistics(self):
        pool = [[0.5, 0.25], [0.5, 0.25]]
        kind = parse_measure("avgexp")
        expected = math.exp(0.5) * 0.5 + math.exp(0.25) * 0.25
        assert node_residual_measure(pool, 0, kind) == pytest.approx(expected, rel=1e-12)

    def test_extsum_zero_pool_dimension(self):
        pool = [[0.0, 0.5]]
        got = node_residual_measure(pool, 0, parse_measure("extsum"))
        assert got == pytest.approx(0.5 / 0.5)

    def test_hybrid_has_no_node_mirror(self):
        with pytest.raises(ValueError):
            node_residual_measure([[0.5]], 0, parse_measure("hybrid:avg:0.5"))


class TestKindPlumbing:
    def test_parse_round_trip(self):
        for token in ("avg", "max", "avgexp", "surrogate", "extsum", "hybrid:avg:0.5",
                      "hybrid:avgexp:0.25"):
            assert parse_measure(token).token() == token

    def test_hybrid_base_not_hybrid(self):
        with pytest.raises(ValueError):
            MeasureKind(name="hybrid", base=MeasureKind(name="hybrid", base=MeasureKind(name="avg")))

    def test_unknown_rejected(self):
        with pytest.raises(ValueError):
            parse_measure("median")

    def test_node_order_kind_uses_hybrid_base(self):
        kind = parse_measure("hybrid:surrogate:0.3")
        assert node_order_kind(kind).name == "surrogate"
        assert node_order_kind(parse_measure("max")).name == "max"

    def test_kernel_code_rejects_hybrid(self):
        with pytest.raises(ValueError):
            kernel_code(parse_measure("hybrid:avg:0.5"))


class TestProperties:
    @settings(max_examples=50, deadline=None, derandomize=True)
    @given(
        st.lists(st.tuples(st.integers(1, 4), st.lists(st.integers(0, 20), min_size=2, max_size=2)),
                 min_size=1, max_size=5),
        st.integers(2, 7),
    )
    def test_scale_invariance(self, specs, factor):
        cap = (20, 20)
        apps = [(r, tuple(d)) for r, d in specs]
        inst1 = make_instance(cap, apps)
        inst2 = make_instance(
            tuple(c * factor for c in cap),
            [(r, tuple(v * factor for v in d)) for r, d in apps],
        )
        v1, v2 = normalize(inst1), normalize(inst2)
        assert v1.totals == v2.totals
        assert (v1.demand_frac == v2.demand_frac).all()
        for token in ("avg", "max", "avgexp", "surrogate", "extsum"):
            kind = parse_measure(token)
            for i in range(len(apps)):
                assert app_size(v1, inst1.graph, i, kind) == app_size(v2, inst2.graph, i, kind)

    @settings(max_examples=50, deadline=None, derandomize=True)
    @given(st.lists(st.tuples(st.integers(1, 3), st.integers(0, 9)), min_size=1, max_size=5))
    def test_one_dimension_degeneracies(self, specs):
        inst = make_instance((9,), [(r, (s,)) for r, s in specs])
        view = normalize(inst)
        for i in range(len(specs)):
            frac = view.demand_frac[i][0]
            assert app_size(view, inst.graph, i, parse_measure("avg")) == frac
            assert app_size(view, inst.graph, i, parse_measure("max")) == frac
            if any(s for _, s in specs):
                assert app_size(view, inst.graph, i, parse_measure("surrogate")) == frac

    @settings(max_examples=40, deadline=None, derandomize=True)
    @given(
        st.lists(st.tuples(st.integers(1, 4), st.lists(st.integers(0, 20), min_size=3, max_size=3)),
                 min_size=1, max_size=6))
    def test_finite_non_negative(self, specs):
        inst = make_instance((20, 20, 20), [(r, tuple(d)) for r, d in specs])
        view = normalize(inst)
        for token in ("avg", "max", "avgexp", "surrogate", "extsum"):
            for i in range(len(specs)):
                v = app_size(view, inst.graph, i, parse_measure(token))
                assert math.isfinite(v) and v >= 0.0
