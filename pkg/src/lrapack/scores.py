"""Application-node scores for the node-centric and matching algorithms.

A score rates how well one replica of an application uses a node's residual
capacity; higher is better.  Scores are only defined for feasible
(application, node) pairs, and dimensions whose denominator vanishes
contribute zero (the limit of each formula as the numerator vanishes).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

SCORE_DOTPRODUCT = 0
SCORE_L2NORM = 1
SCORE_FITNESS = 2
SCORE_TIGHTFILL = 3

_NAMES = {
    "dotproduct": SCORE_DOTPRODUCT,
    "l2norm": SCORE_L2NORM,
    "fitness": SCORE_FITNESS,
    "tightfill": SCORE_TIGHTFILL,
}


@dataclass(frozen=True)
class ScoreKind:
    name: str

    def __post_init__(self):
        if self.name not in _NAMES:
            raise ValueError(f"unknown score {self.name!r}")

    def token(self) -> str:
        return self.name


def parse_score(token: str) -> ScoreKind:
    return ScoreKind(name=token)


def kernel_code(kind: ScoreKind) -> int:
    return _NAMES[kind.name]


def score(
    demand_frac: Sequence[float],
    residual_frac: Sequence[float],
    demand_totals: Sequence[float],
    pool_residual_frac_sums: Sequence[float],
    kind: ScoreKind,
) -> float:
    """Score one feasible (application, node) pair.

    demand_frac is the app's normalized demand row, residual_frac the node's
    normalized residual, demand_totals the replica-weighted demand per
    dimension over the whole instance, and pool_residual_frac_sums the
    normalized residual summed over all activated nodes.  Callers must have
    established feasibility; a zero residual dimension is then only reachable
    with zero demand in it.
    """
    dim = len(demand_frac)
    if kind.name == "dotproduct":
        acc = 0.0
        for h in range(dim):
            acc += demand_frac[h] * residual_frac[h]
        return acc
    if kind.name == "l2norm":
        acc = 0.0
        for h in range(dim):
            diff = residual_frac[h] - demand_frac[h]
            acc += diff * diff
        return -acc
    if kind.name == "fitness":
        acc = 0.0
        for h in range(dim):
            if demand_totals[h] != 0.0 and pool_residual_frac_sums[h] != 0.0:
                acc += (demand_frac[h] / demand_totals[h]) * (
                    residual_frac[h] / pool_residual_frac_sums[h]
                )
        return acc
    if kind.name == "tightfill":
        acc = 0.0
        for h in range(dim):
            if residual_frac[h] != 0.0:
                acc += demand_frac[h] / residual_frac[h]
        return acc
    raise ValueError(f"unknown score {kind.name!r}")
