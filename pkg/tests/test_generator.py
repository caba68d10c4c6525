"""Instance generation: graph classes, density targeting, profiles, temporal demands."""

import numpy as np
import pytest

from lrapack.generator import (
    GenProfile,
    ProfileError,
    TemporalShape,
    decay_dist,
    default_profile,
    gen_graph,
    gen_instance,
    load_profile,
    profile_from_dict,
    profile_to_dict,
    save_profile,
    with_overrides,
)
from lrapack.model import instance_to_dict, validate


def tiny_profile(**overrides):
    base = dict(
        num_apps=30,
        density=0.05,
        graph_class="arbitrary",
        capacity=(64, 128),
        replica_dist={2: 1.0},
        resource_dists=({16: 1.0}, {32: 1.0}),
        affinity_value_dist={1: 1.0},
    )
    base.update(overrides)
    return GenProfile(**base)


class TestGraphClasses:
    def rng(self, seed=0):
        return np.random.Generator(np.random.PCG64(seed))

    def test_zero_density_means_zero_arcs(self):
        for cls in ("arbitrary", "threshold", "normal"):
            assert gen_graph(50, 0.0, cls, self.rng()) == []

    def test_arbitrary_expected_count(self):
        # 0.1 * 100 * 99 = 990 expected arcs; mean over 10 seeds within 10%
        counts = [len(gen_graph(100, 0.1, "arbitrary", self.rng(s))) for s in range(10)]
        mean = sum(counts) / len(counts)
        assert abs(mean - 990) <= 99

    def test_no_self_arcs_or_duplicates(self):
        for cls in ("arbitrary", "threshold", "normal"):
            arcs = gen_graph(40, 0.1, cls, self.rng(3))
            assert all(i != j for i, j in arcs)
            assert len(set(arcs)) == len(arcs)

    def test_threshold_nested_neighborhoods(self):
        # order vertices by weight: undirected neighborhoods must be nested
        for seed in range(5):
            arcs = gen_graph(60, 0.08, "threshold", self.rng(seed))
            nbrs = {}
            for i, j in arcs:
                nbrs.setdefault(i, set()).add(j)
                nbrs.setdefault(j, set()).add(i)
            degree = {v: len(s) for v, s in nbrs.items()}
            vertices = sorted(nbrs, key=lambda v: degree[v])
            for a_idx in range(len(vertices)):
                for b_idx in range(a_idx + 1, len(vertices)):
                    u, v = vertices[a_idx], vertices[b_idx]
                    assert nbrs[u] - {v} <= nbrs[v] - {u}, (u, v)

    def test_normal_degree_targeting(self):
        n, density = 400, 0.05
        counts = [len(gen_graph(n, density, "normal", self.rng(s))) for s in range(6)]
        mean = sum(counts) / len(counts)
        assert abs(mean - density * n * n) / (density * n * n) < 0.1

    def test_density_out_of_range(self):
        with pytest.raises(ProfileError):
            gen_graph(10, 0.995, "arbitrary", self.rng())


class TestGenInstance:
    def test_point_mass_profile(self):
        inst = gen_instance(tiny_profile(), seed=1)
        assert validate(inst) == []
        assert all(a.replicas == 2 and a.demand == (16, 32) for a in inst.applications)
        assert all(lim == 1 for lim in inst.graph.arcs.values())

    def test_same_seed_same_bytes(self):
        profile = tiny_profile(graph_class="normal")
        a = instance_to_dict(gen_instance(profile, seed=9))
        b = instance_to_dict(gen_instance(profile, seed=9))
        assert a == b

    def test_different_seed_differs(self):
        profile = tiny_profile()
        a = instance_to_dict(gen_instance(profile, seed=1))
        b = instance_to_dict(gen_instance(profile, seed=2))
        assert a != b

    def test_embedded_seed_and_name(self):
        inst = gen_instance(tiny_profile(), seed=77)
        assert inst.seed == 77
        assert "s77" in inst.name

    def test_oversized_demand_aborts(self):
        profile = tiny_profile(resource_dists=({100: 1.0}, {32: 1.0}))
        with pytest.raises(ProfileError, match="100 tries"):
            gen_instance(profile, seed=0)

    def test_temporal_epochs(self):
        profile = tiny_profile(
            epochs=4, temporal_shape=TemporalShape(kind="sinusoid", peak_to_mean=1.5))
        inst = gen_instance(profile, seed=5)
        assert validate(inst) == []
        assert inst.dimensions == 8
        assert inst.capacity == (64, 128) * 4
        # demands vary across epochs for at least some app
        varying = any(
            len({a.demand[2 * t] for t in range(4)}) > 1 for a in inst.applications
        )
        assert varying

    def test_single_epoch_peak_collapse(self):
        shape = TemporalShape(kind="sinusoid", peak_to_mean=2.0, noise=0.0, samples=16)
        profile = tiny_profile(epochs=1, temporal_shape=shape)
        inst = gen_instance(profile, seed=5)
        assert validate(inst) == []
        # peak scaling rounds up from the base (16, 32), never above capacity
        for a in inst.applications:
            assert 16 <= a.demand[0] <= 64
            assert 32 <= a.demand[1] <= 128

    def test_every_generated_instance_validates(self):
        for cls in ("arbitrary", "threshold", "normal"):
            for seed in range(3):
                profile = tiny_profile(graph_class=cls, density=0.03)
                assert validate(gen_instance(profile, seed=seed)) == []


class TestDensityTargeting:
    @pytest.mark.parametrize("cls", ["arbitrary", "threshold", "normal"])
    def test_realized_density_within_ten_percent(self, cls):
        profile = with_overrides(default_profile(), num_apps=1000, density=0.01,
                                 graph_class=cls)
        realized = []
        for seed in range(10):
            inst = gen_instance(profile, seed=seed)
            realized.append(len(inst.graph) / 1000**2)
        mean = sum(realized) / len(realized)
        assert abs(mean - 0.01) / 0.01 <= 0.10, (cls, mean)


class TestDefaultProfileCalibration:
    def test_reference_scale_totals(self):
        profile = default_profile()
        assert profile.num_apps == 9338
        assert profile.capacity == (64, 128)
        mean_replicas = sum(v * p for v, p in profile.replica_dist.items())
        expected_replicas = profile.num_apps * mean_replicas
        assert abs(expected_replicas - 68224) / 68224 <= 0.15
        expected_arcs = profile.density * profile.num_apps**2
        assert abs(expected_arcs - 24078) / 24078 <= 0.15

    def test_sampled_totals_within_band(self):
        profile = with_overrides(default_profile(), num_apps=2000)
        # scale the aggregate targets to the smaller size
        target_replicas = 68224 * 2000 / 9338
        totals = []
        arcs = []
        for seed in range(3):
            inst = gen_instance(profile, seed=seed)
            totals.append(inst.total_replicas)
            arcs.append(len(inst.graph))
        assert abs(sum(totals) / 3 - target_replicas) / target_replicas <= 0.15
        target_arcs = profile.density * 2000**2
        assert abs(sum(arcs) / 3 - target_arcs) / target_arcs <= 0.25

    def test_affinity_values_include_conflicts(self):
        profile = default_profile()
        assert 0 in profile.affinity_value_dist
        assert profile.affinity_value_dist[0] > 0


class TestProfileIO:
    def test_round_trip(self, tmp_path):
        profile = tiny_profile(epochs=3, temporal_shape=TemporalShape(kind="sinusoid"))
        path = tmp_path / "p.json"
        save_profile(profile, str(path))
        assert load_profile(str(path)) == profile

    def test_default_round_trips(self):
        profile = default_profile()
        assert profile_from_dict(profile_to_dict(profile)) == profile

    def test_bad_probabilities_rejected(self):
        with pytest.raises(ProfileError, match="sum"):
            tiny_profile(replica_dist={1: 0.5, 2: 0.4})

    def test_unknown_key_rejected(self):
        data = profile_to_dict(tiny_profile())
        data["surprise"] = 1
        with pytest.raises(ProfileError, match="unknown"):
            profile_from_dict(data)

    def test_decay_dist_sums_to_one(self):
        d = decay_dist(1, 40, 0.82)
        assert abs(sum(d.values()) - 1.0) < 1e-9
        assert set(d) == set(range(1, 41))
