"""Application-node scores."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lrapack.scores import ScoreKind, kernel_code, parse_score, score


class TestScoreValues:
    def test_dot_product(self):
        got = score((0.25, 0.5), (0.5, 0.5), (1.0, 1.0), (1.0, 1.0), parse_score("dotproduct"))
        assert got == pytest.approx(0.375, abs=1e-15)

    def test_l2norm(self):
        got = score((0.25, 0.5), (0.5, 0.5), (1.0, 1.0), (1.0, 1.0), parse_score("l2norm"))
        assert got == pytest.approx(-0.0625, abs=1e-15)

    def test_tightfill(self):
        got = score((0.25, 0.5), (0.5, 0.5), (1.0, 1.0), (1.0, 1.0), parse_score("tightfill"))
        assert got == pytest.approx(1.5, abs=1e-15)

    def test_fitness(self):
        got = score((0.25, 0.5), (0.5, 0.5), (5.0, 10.0), (2.0, 4.0), parse_score("fitness"))
        assert got == pytest.approx(0.01875, abs=1e-15)

    def test_tightfill_zero_residual_dimension(self):
        # zero residual only reachable with zero demand there; contributes 0
        got = score((0.0, 0.5), (0.0, 0.5), (1.0, 1.0), (1.0, 1.0), parse_score("tightfill"))
        assert got == pytest.approx(1.0)

    def test_fitness_zero_denominators(self):
        got = score((0.5, 0.5), (0.5, 0.5), (0.0, 1.0), (1.0, 0.0), parse_score("fitness"))
        assert got == 0.0


class TestProperties:
    @settings(max_examples=60, deadline=None, derandomize=True)
    @given(
        st.lists(st.floats(0.0, 1.0), min_size=2, max_size=4),
        st.lists(st.floats(0.01, 1.0), min_size=4, max_size=4),
    )
    def test_bigger_demand_never_scores_lower(self, base, aux):
        dim = len(base)
        residual = tuple(aux[:dim] if len(aux) >= dim else aux + [0.5] * dim)[:dim]
        residual = tuple(min(1.0, v) for v in residual)
        small = tuple(v * 0.5 for v in base)
        big = tuple(min(1.0, v * 0.5 + 0.25) for v in base)
        totals = tuple(1.0 for _ in range(dim))
        pool = tuple(2.0 for _ in range(dim))
        for token in ("dotproduct", "fitness", "tightfill"):
            kind = parse_score(token)
            lo = score(small, residual, totals, pool, kind)
            hi = score(big, residual, totals, pool, kind)
            assert hi >= lo - 1e-12

    @settings(max_examples=60, deadline=None, derandomize=True)
    @given(
        st.lists(st.floats(0.0, 1.0), min_size=3, max_size=3),
        st.lists(st.floats(0.0, 1.0), min_size=3, max_size=3),
    )
    def test_all_scores_finite(self, demand, residual):
        totals = (0.0, 0.5, 2.0)
        pool = (1.0, 0.0, 3.0)
        demand = tuple(min(d, r) for d, r in zip(demand, residual))  # feasibility
        for token in ("dotproduct", "l2norm", "fitness", "tightfill"):
            v = score(demand, tuple(residual), totals, pool, parse_score(token))
            assert math.isfinite(v)

    def test_l2norm_max_selection_prefers_closest(self):
        residual = (0.5, 0.5)
        near = score((0.5, 0.4), residual, (1, 1), (1, 1), parse_score("l2norm"))
        far = score((0.1, 0.1), residual, (1, 1), (1, 1), parse_score("l2norm"))
        assert near > far


class TestPlumbing:
    def test_tokens(self):
        for token in ("dotproduct", "l2norm", "fitness", "tightfill"):
            assert parse_score(token).token() == token
        assert [kernel_code(parse_score(t)) for t in
                ("dotproduct", "l2norm", "fitness", "tightfill")] == [0, 1, 2, 3]

    def test_unknown_rejected(self):
        with pytest.raises(ValueError):
            ScoreKind("euclid")
