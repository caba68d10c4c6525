"""Reproducible instance generation: affinity graph classes, demand profiles,
and the temporal extension.

Three graph classes hit a target affinity density (arcs divided by the square
of the application count):

* arbitrary: every ordered pair becomes an arc independently with the target
  probability;
* threshold: vertices get uniform weights, pairs whose weight sum clears a
  calibrated threshold are linked by one arc in a random direction;
* normal: per-vertex out-degrees drawn from a normal distribution around the
  target mean degree.

Demands, replica counts, and affinity values come from user-supplied discrete
distributions.  With more than one epoch, a per-application multiplicative
pattern scales the base demand per epoch; with a single epoch and a temporal
source, the per-dimension maximum over the sampled pattern is used instead.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .model import AffinityGraph, Application, Instance, require_valid

GRAPH_CLASSES = ("arbitrary", "threshold", "normal")


class ProfileError(Exception):
    """Raised for unusable generation profiles."""


@dataclass(frozen=True)
class TemporalShape:
    """Multiplicative per-epoch demand pattern.

    ``sinusoid`` produces 1 + amplitude*sin(phase) plus uniform noise, clamped
    at zero; amplitude = peak_to_mean - 1.  ``none`` keeps demands constant.
    ``samples`` is the pattern length used when collapsing to a single epoch.
    """

    kind: str = "none"  # "none" | "sinusoid"
    peak_to_mean: float = 1.5
    noise: float = 0.1
    samples: int = 12

    def __post_init__(self):
        if self.kind not in ("none", "sinusoid"):
            raise ProfileError(f"unknown temporal shape {self.kind!r}")
        if self.kind == "sinusoid" and self.peak_to_mean < 1.0:
            raise ProfileError("peak_to_mean must be >= 1")


@dataclass(frozen=True)
class GenProfile:
    num_apps: int
    density: float
    graph_class: str
    capacity: tuple[int, ...]  # one entry per resource type
    replica_dist: dict[int, float]
    resource_dists: tuple[dict[int, float], ...]  # one per resource type
    affinity_value_dist: dict[int, float]
    epochs: int = 1
    temporal_shape: TemporalShape = field(default_factory=TemporalShape)

    def __post_init__(self):
        if self.num_apps < 1:
            raise ProfileError("num_apps must be >= 1")
        if not (0.0 <= self.density < 1.0):
            raise ProfileError("density must lie in [0, 1)")
        if self.graph_class not in GRAPH_CLASSES:
            raise ProfileError(f"graph_class must be one of {GRAPH_CLASSES}")
        if len(self.resource_dists) != len(self.capacity):
            raise ProfileError("one resource distribution per capacity entry is required")
        if self.epochs < 1:
            raise ProfileError("epochs must be >= 1")
        for name, dist in [("replica_dist", self.replica_dist),
                           ("affinity_value_dist", self.affinity_value_dist),
                           *((f"resource dist {k}", d) for k, d in enumerate(self.resource_dists))]:
            if not dist:
                raise ProfileError(f"{name} is empty")
            total = sum(dist.values())
            if abs(total - 1.0) > 1e-9:
                raise ProfileError(f"{name} probabilities sum to {total}, expected 1")
            if any(p < 0 for p in dist.values()):
                raise ProfileError(f"{name} has negative probabilities")
            if any(v < 0 for v in dist):
                raise ProfileError(f"{name} has negative support values")
        if any(v < 1 for v in self.replica_dist):
            raise ProfileError("replica counts must be >= 1")


def decay_dist(lo: int, hi: int, rate: float) -> dict[int, float]:
    """Discrete distribution over lo..hi with geometrically decaying weights."""
    values = list(range(lo, hi + 1))
    weights = [rate ** v for v in values]
    total = sum(weights)
    return {v: w / total for v, w in zip(values, weights)}


def default_profile() -> GenProfile:
    """Shipped reference profile: 64-core / 128-unit-memory nodes.

    Calibrated only to three aggregate targets at 9,338 applications: about
    68k replicas in total, about 24k affinity arcs, and demands that are small
    relative to the node; no further distributional fidelity is claimed.
    Demand values are spread over wide supports so that distinct demand
    vectors rarely collide on the combined size measures.
    """
    return GenProfile(
        num_apps=9338,
        density=24078 / 9338**2,
        graph_class="arbitrary",
        capacity=(64, 128),
        replica_dist={1: 0.28, 2: 0.20, 3: 0.10, 5: 0.10, 8: 0.10, 16: 0.10, 24: 0.07, 40: 0.05},
        resource_dists=(
            decay_dist(1, 40, 0.82),
            decay_dist(1, 96, 0.91),
        ),
        affinity_value_dist={0: 0.25, 1: 0.30, 2: 0.20, 3: 0.10, 4: 0.05, 8: 0.05, 16: 0.05},
    )


# ---------------------------------------------------------------------------
# Profile JSON


def profile_to_dict(profile: GenProfile) -> dict:
    return {
        "num_apps": profile.num_apps,
        "density": profile.density,
        "graph_class": profile.graph_class,
        "capacity": list(profile.capacity),
        "replica_dist": {str(k): v for k, v in profile.replica_dist.items()},
        "resource_dists": [{str(k): v for k, v in d.items()} for d in profile.resource_dists],
        "affinity_value_dist": {str(k): v for k, v in profile.affinity_value_dist.items()},
        "epochs": profile.epochs,
        "temporal_shape": {
            "kind": profile.temporal_shape.kind,
            "peak_to_mean": profile.temporal_shape.peak_to_mean,
            "noise": profile.temporal_shape.noise,
            "samples": profile.temporal_shape.samples,
        },
    }


def profile_from_dict(data: Mapping) -> GenProfile:
    known = {"num_apps", "density", "graph_class", "capacity", "replica_dist",
             "resource_dists", "affinity_value_dist", "epochs", "temporal_shape"}
    unknown = set(data) - known
    if unknown:
        raise ProfileError(f"profile: unknown keys {sorted(unknown)}")
    shape_data = data.get("temporal_shape", {})
    shape = TemporalShape(
        kind=shape_data.get("kind", "none"),
        peak_to_mean=float(shape_data.get("peak_to_mean", 1.5)),
        noise=float(shape_data.get("noise", 0.1)),
        samples=int(shape_data.get("samples", 12)),
    )
    def int_dist(d):
        return {int(k): float(v) for k, v in d.items()}
    return GenProfile(
        num_apps=int(data["num_apps"]),
        density=float(data["density"]),
        graph_class=str(data["graph_class"]),
        capacity=tuple(int(v) for v in data["capacity"]),
        replica_dist=int_dist(data["replica_dist"]),
        resource_dists=tuple(int_dist(d) for d in data["resource_dists"]),
        affinity_value_dist=int_dist(data["affinity_value_dist"]),
        epochs=int(data.get("epochs", 1)),
        temporal_shape=shape,
    )


def load_profile(path: str) -> GenProfile:
    with open(path, "r", encoding="utf-8") as f:
        return profile_from_dict(json.load(f))


def save_profile(profile: GenProfile, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(profile_to_dict(profile), f, indent=2)
        f.write("\n")


# ---------------------------------------------------------------------------
# Graph skeletons


def gen_graph(num_apps: int, density: float, graph_class: str,
              rng: np.random.Generator) -> list[tuple[int, int]]:
    """Arc skeleton (ordered pairs, no values) hitting the expected density."""
    if not (0.0 <= density < 1.0):
        raise ProfileError("density must lie in [0, 1)")
    if density * num_apps > num_apps - 1:
        raise ProfileError("density too high: expected degree exceeds the vertex count")
    if graph_class == "arbitrary":
        return _gen_arbitrary(num_apps, density, rng)
    if graph_class == "threshold":
        return _gen_threshold(num_apps, density, rng)
    if graph_class == "normal":
        return _gen_normal(num_apps, density, rng)
    raise ProfileError(f"unknown graph class {graph_class!r}")


def _gen_arbitrary(n: int, density: float, rng: np.random.Generator) -> list[tuple[int, int]]:
    # Independent Bernoulli per ordered pair, realized as a binomial arc count
    # plus a uniform draw of that many distinct pairs (the same distribution,
    # without touching all n^2 pairs).
    n_pairs = n * (n - 1)
    if n_pairs == 0 or density == 0.0:
        return []
    count = int(rng.binomial(n_pairs, density))
    chosen: set[int] = set()
    while len(chosen) < count:
        draws = rng.integers(0, n_pairs, size=count - len(chosen))
        chosen.update(int(v) for v in draws)
    arcs = []
    for code in sorted(chosen):
        i, j = divmod(code, n - 1)
        if j >= i:
            j += 1
        arcs.append((i, j))
    return arcs


def _uniform_sum_tail(t: float) -> float:
    """P(U1 + U2 >= t) for independent U(0,1)."""
    if t <= 0.0:
        return 1.0
    if t <= 1.0:
        return 1.0 - t * t / 2.0
    if t <= 2.0:
        return (2.0 - t) ** 2 / 2.0
    return 0.0


def _gen_threshold(n: int, density: float, rng: np.random.Generator) -> list[tuple[int, int]]:
    # Calibrate t so the expected number of linked pairs is density * n^2,
    # each pair emitting one arc in a uniformly random direction.
    if density == 0.0 or n < 2:
        return []
    n_pairs = n * (n - 1) // 2
    target = density * n * n / n_pairs
    if target > 1.0:
        raise ProfileError("density too high for a threshold graph of this size")
    lo, hi = 0.0, 2.0
    for _ in range(80):
        mid = (lo + hi) / 2.0
        if _uniform_sum_tail(mid) > target:
            lo = mid
        else:
            hi = mid
    t = (lo + hi) / 2.0
    weights = rng.random(n)
    arcs = []
    for i in range(n - 1):
        hits = np.nonzero(weights[i + 1:] >= t - weights[i])[0]
        if hits.size == 0:
            continue
        forward = rng.random(hits.size) < 0.5
        for offset, fwd in zip(hits, forward):
            j = i + 1 + int(offset)
            arcs.append((i, j) if fwd else (j, i))
    return arcs


def _gen_normal(n: int, density: float, rng: np.random.Generator) -> list[tuple[int, int]]:
    # Per-vertex out-degree from Normal(mean, mean/2), clamped to [0, n-1],
    # then that many distinct uniformly chosen targets.
    mean = density * n
    arcs = []
    for i in range(n):
        if mean > 0.0:
            p = rng.normal(mean, mean / 2.0)
        else:
            p = 0.0
        degree = int(round(min(max(p, 0.0), float(n - 1))))
        if degree == 0:
            continue
        targets = rng.choice(n - 1, size=degree, replace=False)
        for t in targets:
            j = int(t)
            if j >= i:
                j += 1
            arcs.append((i, j))
    return arcs


# ---------------------------------------------------------------------------
# Instances


def _sample_dist(dist: dict[int, float], rng: np.random.Generator, size: int) -> np.ndarray:
    values = np.array(sorted(dist), dtype=np.int64)
    probs = np.array([dist[int(v)] for v in values], dtype=np.float64)
    probs = probs / probs.sum()
    return rng.choice(values, size=size, p=probs)


def _temporal_pattern(shape: TemporalShape, length: int, rng: np.random.Generator) -> np.ndarray:
    if shape.kind == "none":
        return np.ones(length)
    amplitude = shape.peak_to_mean - 1.0
    phase = rng.random() * 2.0 * math.pi
    steps = np.arange(length) * (2.0 * math.pi / length) + phase
    noise = rng.uniform(-shape.noise, shape.noise, size=length)
    return np.maximum(1.0 + amplitude * np.sin(steps) + noise, 0.0)


def gen_instance(profile: GenProfile, seed: int) -> Instance:
    """Generate a validated instance; the same profile and seed give identical bytes."""
    rng = np.random.Generator(np.random.PCG64(seed))
    n = profile.num_apps
    d = len(profile.capacity)
    t = profile.epochs

    skeleton = gen_graph(n, profile.density, profile.graph_class, rng)

    replicas = _sample_dist(profile.replica_dist, rng, n)
    base = np.empty((n, d), dtype=np.int64)
    for k, dist in enumerate(profile.resource_dists):
        base[:, k] = _sample_dist(dist, rng, n)
    for i in range(n):
        tries = 0
        while any(base[i, k] > profile.capacity[k] for k in range(d)):
            if tries >= 100:
                raise ProfileError(
                    f"app {i}: could not draw a demand fitting an empty node after 100 tries"
                )
            for k, dist in enumerate(profile.resource_dists):
                base[i, k] = _sample_dist(dist, rng, 1)[0]
            tries += 1

    limits = _sample_dist(profile.affinity_value_dist, rng, len(skeleton)) if skeleton else []
    arcs = {pair: int(lim) for pair, lim in zip(skeleton, limits)}

    shaped = profile.temporal_shape.kind != "none"
    apps = []
    for i in range(n):
        if t > 1:
            pattern = _temporal_pattern(profile.temporal_shape, t, rng)
            demand = []
            for epoch in range(t):
                for k in range(d):
                    v = math.ceil(base[i, k] * pattern[epoch])
                    demand.append(max(0, min(int(v), profile.capacity[k])))
        elif shaped:
            # Single-epoch view of a temporal source: per-dimension peak.
            pattern = _temporal_pattern(profile.temporal_shape, profile.temporal_shape.samples, rng)
            peak = float(pattern.max())
            demand = [
                max(0, min(math.ceil(base[i, k] * peak), profile.capacity[k]))
                for k in range(d)
            ]
        else:
            demand = [int(base[i, k]) for k in range(d)]
        apps.append(Application(id=i, replicas=int(replicas[i]), demand=tuple(demand)))

    capacity = tuple(int(c) for c in profile.capacity) * t
    name = f"{profile.graph_class}-L{n}-D{profile.density:g}-T{t}-s{seed}"
    instance = Instance(
        name=name,
        resource_types=d,
        epochs=t,
        capacity=capacity,
        applications=apps,
        graph=AffinityGraph(arcs),
        seed=seed,
    )
    require_valid(instance)
    return instance


def with_overrides(profile: GenProfile, num_apps: int | None = None,
                   density: float | None = None, graph_class: str | None = None,
                   epochs: int | None = None,
                   temporal_shape: TemporalShape | None = None) -> GenProfile:
    """Profile copy with selected fields replaced."""
    updates = {}
    if num_apps is not None:
        updates["num_apps"] = num_apps
    if density is not None:
        updates["density"] = density
    if graph_class is not None:
        updates["graph_class"] = graph_class
    if epochs is not None:
        updates["epochs"] = epochs
    if temporal_shape is not None:
        updates["temporal_shape"] = temporal_shape
    return replace(profile, **updates) if updates else profile
