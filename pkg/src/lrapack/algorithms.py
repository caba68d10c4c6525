"""Solver families, published baselines, and node-count search strategies.

Three families:

* application-centric: applications in a fixed order, each allocation puts the
  maximum feasible replica chunk on the first / emptiest / fullest feasible
  node (first fit, worst fit, best fit, and their decreasing variants);
* node-centric: nodes filled one at a time with the highest-scoring feasible
  application;
* multi-node: a pool of nodes activated up front, filled one replica at a
  time, either spreading each application over the emptiest feasible nodes or
  picking the globally best (application, node) pair; wrapped in a binary or
  decrementing search over the pool size.

Every tie (equal measure, score, or count) breaks toward the lower id or
index, which makes reruns reproducible.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

from . import measures as _measures
from . import scores as _scores
from .bounds import lower_bound
from .measures import MeasureKind, parse_measure_parts
from .model import Instance, Solution, normalize, require_valid
from .placement import build_core_inputs, extract_solution, make_core
from .scores import ScoreKind

FAMILY_APP_CENTRIC = "app-centric"
FAMILY_NODE_CENTRIC = "node-centric"
FAMILY_SPREAD = "spread"
FAMILY_MATCHING = "matching"
FAMILY_MEDEA_TP = "medea-tp"
FAMILY_MEDEA_NC = "medea-nc"

APP_ORDER_INPUT = "input"
APP_ORDER_DECREASING = "decreasing"

NODE_ORDER_ACTIVATION = "activation"
NODE_ORDER_INCREASING = "increasing"
NODE_ORDER_DECREASING = "decreasing"

_MULTI_NODE = {FAMILY_SPREAD, FAMILY_MATCHING}


@dataclass(frozen=True)
class SearchSpec:
    """Node-count search: binary search or fixed-step decrements."""

    kind: str  # "binsearch" | "decr"
    step_percent: float | None = None

    def __post_init__(self):
        if self.kind not in ("binsearch", "decr"):
            raise ValueError(f"unknown search {self.kind!r}")
        if self.kind == "decr" and (self.step_percent is None or self.step_percent <= 0):
            raise ValueError("decrement search needs a positive step percent")

    def token(self) -> str:
        return "binsearch" if self.kind == "binsearch" else f"decr{self.step_percent:g}"


@dataclass(frozen=True)
class AlgoConfig:
    family: str
    app_order: str = APP_ORDER_INPUT
    node_order: str = NODE_ORDER_ACTIVATION
    measure: MeasureKind | None = None
    score: ScoreKind | None = None
    search: SearchSpec | None = None
    seed: int = 0
    token: str = ""

    def __post_init__(self):
        if (self.search is not None) != (self.family in _MULTI_NODE):
            raise ValueError("a search strategy is required exactly for multi-node families")


def parse_algorithm(token: str, eps: float = 1.0, seed: int = 0) -> AlgoConfig:
    """Parse an algorithm token.

    Grammar: ff | ffd:<measure> | bf:<measure> | bfd:<measure> | wf:<measure>
    | wfd:<measure> | ncd:<score> | spreadwf:<measure>:<search>
    | spreadwfd:<measure>:<search> | match:<score>:<search> | medea-tp
    | medea-nc | lrasched-fitness, where <search> is binsearch or decr<p>.
    """
    parts = token.split(":")
    head = parts[0]
    rest = parts[1:]

    def _measure(p):
        if not p:
            raise ValueError(f"{token!r}: missing measure")
        return parse_measure_parts(p, eps=eps)

    def _search(p: str) -> SearchSpec:
        if p == "binsearch":
            return SearchSpec(kind="binsearch")
        if p.startswith("decr"):
            return SearchSpec(kind="decr", step_percent=float(p[4:]))
        raise ValueError(f"{token!r}: unknown search {p!r}")

    if head == "ff":
        if rest:
            raise ValueError(f"{token!r}: ff takes no parameters")
        return AlgoConfig(family=FAMILY_APP_CENTRIC, token=token, seed=seed)
    if head in ("ffd", "bf", "bfd", "wf", "wfd"):
        m = _measure(rest)
        app_order = APP_ORDER_DECREASING if head.endswith("d") else APP_ORDER_INPUT
        node_order = {
            "ff": NODE_ORDER_ACTIVATION,
            "bf": NODE_ORDER_INCREASING,
            "wf": NODE_ORDER_DECREASING,
        }[head.rstrip("d")]
        return AlgoConfig(
            family=FAMILY_APP_CENTRIC, app_order=app_order, node_order=node_order,
            measure=m, token=token, seed=seed,
        )
    if head == "ncd":
        if len(rest) != 1:
            raise ValueError(f"{token!r}: ncd takes exactly one score")
        return AlgoConfig(
            family=FAMILY_NODE_CENTRIC, score=ScoreKind(rest[0]), token=token, seed=seed,
        )
    if head == "lrasched-fitness":
        if rest:
            raise ValueError(f"{token!r}: lrasched-fitness takes no parameters")
        return AlgoConfig(
            family=FAMILY_NODE_CENTRIC, score=ScoreKind("fitness"), token=token, seed=seed,
        )
    if head in ("spreadwf", "spreadwfd"):
        if len(rest) < 2:
            raise ValueError(f"{token!r}: expected <measure>:<search>")
        m = _measure(rest[:-1])
        return AlgoConfig(
            family=FAMILY_SPREAD,
            app_order=APP_ORDER_DECREASING if head.endswith("d") else APP_ORDER_INPUT,
            node_order=NODE_ORDER_DECREASING,
            measure=m, search=_search(rest[-1]), token=token, seed=seed,
        )
    if head == "match":
        if len(rest) != 2:
            raise ValueError(f"{token!r}: expected <score>:<search>")
        return AlgoConfig(
            family=FAMILY_MATCHING, score=ScoreKind(rest[0]),
            search=_search(rest[1]), token=token, seed=seed,
        )
    if head == "medea-tp":
        if rest:
            raise ValueError(f"{token!r}: medea-tp takes no parameters")
        return AlgoConfig(family=FAMILY_MEDEA_TP, app_order=APP_ORDER_DECREASING, token=token, seed=seed)
    if head == "medea-nc":
        if rest:
            raise ValueError(f"{token!r}: medea-nc takes no parameters")
        return AlgoConfig(family=FAMILY_MEDEA_NC, token=token, seed=seed)
    raise ValueError(f"unknown algorithm token {token!r}")


# ---------------------------------------------------------------------------
# Shared machinery


def _ordered_apps(instance: Instance, view, config: AlgoConfig) -> list[int]:
    ids = list(range(len(instance.applications)))
    if config.app_order == APP_ORDER_DECREASING:
        sizes = _measures.app_sizes(view, instance.graph, config.measure)
        ids.sort(key=lambda i: (-sizes[i], i))
    return ids


def _node_measure_code(config: AlgoConfig) -> tuple[int, float]:
    kind = _measures.node_order_kind(config.measure)
    return _measures.kernel_code(kind)


def _select_node(core, app: int, config: AlgoConfig, mcode: tuple[int, float] | None) -> int:
    if config.node_order == NODE_ORDER_ACTIVATION:
        return core.find_first_feasible(app)
    code, eps = mcode
    want_max = config.node_order == NODE_ORDER_DECREASING
    return core.find_best_node(app, code, eps, want_max)


# ---------------------------------------------------------------------------
# Solver families


def solve_app_centric(instance: Instance, config: AlgoConfig, backend: str | None = None,
                      order: list[int] | None = None) -> Solution:
    """Applications in order; each step packs the maximum chunk on the chosen node."""
    require_valid(instance)
    start = time.perf_counter()
    view = normalize(instance)
    inputs = build_core_inputs(instance, view)
    core = make_core(inputs, backend=backend)
    if order is None:
        order = _ordered_apps(instance, view, config)
    mcode = None
    if config.node_order != NODE_ORDER_ACTIVATION:
        mcode = _node_measure_code(config)
    if instance.num_apps:
        core.activate_node()
    for app in order:
        while core.remaining_of(app) > 0:
            node = _select_node(core, app, config, mcode)
            if node < 0:
                node = core.activate_node()
            core.place(app, node, core.max_placeable(app, node))
    elapsed = (time.perf_counter() - start) * 1000.0
    return extract_solution(core, config.token or config.family, False, elapsed)


def solve_node_centric(instance: Instance, config: AlgoConfig, backend: str | None = None) -> Solution:
    """Nodes filled one at a time with the feasible application of highest score."""
    require_valid(instance)
    start = time.perf_counter()
    inputs = build_core_inputs(instance)
    core = make_core(inputs, backend=backend)
    scode = _scores.kernel_code(config.score)
    node = core.activate_node() if instance.num_apps else -1
    while core.total_remaining() > 0:
        app = core.find_best_app(node, scode)
        if app < 0:
            node = core.activate_node()
            continue
        core.place(app, node, core.max_placeable(app, node))
    elapsed = (time.perf_counter() - start) * 1000.0
    return extract_solution(core, config.token or config.family, False, elapsed)


def solve_spread(instance: Instance, n_target: int, config: AlgoConfig,
                 backend: str | None = None, order: list[int] | None = None) -> Solution:
    """One replica at a time on the feasible node with the largest residual measure.

    All ``n_target`` nodes are activated up front.  Returns a failed solution
    with the partial assignment if some replica has nowhere to go.
    """
    require_valid(instance)
    if n_target < 1:
        raise ValueError("n_target must be >= 1")
    start = time.perf_counter()
    view = normalize(instance)
    inputs = build_core_inputs(instance, view)
    core = make_core(inputs, n_nodes=n_target, backend=backend)
    if order is None:
        order = _ordered_apps(instance, view, config)
    code, eps = _node_measure_code(config)
    failed = False
    for app in order:
        while core.remaining_of(app) > 0:
            node = core.find_best_node(app, code, eps, True)
            if node < 0:
                failed = True
                break
            core.place(app, node, 1)
        if failed:
            break
    elapsed = (time.perf_counter() - start) * 1000.0
    return extract_solution(core, config.token or config.family, failed, elapsed)


def solve_matching(instance: Instance, n_target: int, config: AlgoConfig,
                   backend: str | None = None) -> Solution:
    """Globally best-scoring feasible (application, node) pair, one replica per step.

    Rescans every pair after each placement, so it is only practical at desk
    scale.
    """
    require_valid(instance)
    if n_target < 1:
        raise ValueError("n_target must be >= 1")
    start = time.perf_counter()
    inputs = build_core_inputs(instance)
    core = make_core(inputs, n_nodes=n_target, backend=backend)
    scode = _scores.kernel_code(config.score)
    failed = False
    while core.total_remaining() > 0:
        app, node = core.find_best_pair(scode)
        if app < 0:
            failed = True
            break
        core.place(app, node, 1)
    elapsed = (time.perf_counter() - start) * 1000.0
    return extract_solution(core, config.token or config.family, failed, elapsed)


# ---------------------------------------------------------------------------
# Baselines


def solve_medea_tp(instance: Instance, backend: str | None = None,
                   token: str = "medea-tp") -> Solution:
    """First fit with applications ordered by decreasing affinity degree."""
    require_valid(instance)
    graph = instance.graph
    order = sorted(range(instance.num_apps), key=lambda i: (-graph.degree(i), i))
    config = AlgoConfig(family=FAMILY_APP_CENTRIC, token=token)
    return solve_app_centric(instance, config, backend=backend, order=order)


def _select_most_restricted(core, unallocated: list[int]) -> int:
    """App with the fewest activated nodes that could take one replica; ties by id."""
    best = -1
    best_count = -1
    for app in unallocated:
        c = core.count_feasible(app)
        if best < 0 or c < best_count:
            best = app
            best_count = c
    return best


def solve_medea_nc(instance: Instance, backend: str | None = None,
                   token: str = "medea-nc") -> Solution:
    """Repeatedly allocate the application with the fewest candidate nodes.

    Candidate counts are recomputed over the activated pool after an
    application is fully allocated (first fit, activating nodes as needed).
    An application with zero candidates everywhere is still selectable and
    opens fresh nodes during its pass.
    """
    require_valid(instance)
    start = time.perf_counter()
    inputs = build_core_inputs(instance)
    core = make_core(inputs, backend=backend)
    unallocated = list(range(instance.num_apps))
    while unallocated:
        app = _select_most_restricted(core, unallocated)
        while core.remaining_of(app) > 0:
            node = core.find_first_feasible(app)
            if node < 0:
                node = core.activate_node()
            core.place(app, node, core.max_placeable(app, node))
        unallocated.remove(app)
    elapsed = (time.perf_counter() - start) * 1000.0
    return extract_solution(core, token, False, elapsed)


# ---------------------------------------------------------------------------
# Node-count search strategies for the multi-node families


def _ff_upper_bound(instance: Instance, backend: str | None) -> Solution:
    ff = AlgoConfig(family=FAMILY_APP_CENTRIC, token="ff")
    return solve_app_centric(instance, ff, backend=backend)


def _fixed_pool_solver(instance: Instance, config: AlgoConfig, backend: str | None):
    if config.family == FAMILY_SPREAD:
        view = normalize(instance)
        order = _ordered_apps(instance, view, config)
        return lambda n: solve_spread(instance, n, config, backend=backend, order=order)
    return lambda n: solve_matching(instance, n, config, backend=backend)


def search_binary(instance: Instance, config: AlgoConfig, backend: str | None = None,
                  inner=None) -> Solution:
    """Binary search on the pool size between the lower bound and first fit.

    Feasibility of the fixed pool is assumed monotone in the pool size; the
    best success found (or first fit when none succeeds) bounds the damage
    when it is not.
    """
    require_valid(instance)
    start = time.perf_counter()
    ff_sol = _ff_upper_bound(instance, backend)
    lb = lower_bound(instance).value
    if inner is None:
        inner = _fixed_pool_solver(instance, config, backend)
    best = ff_sol
    lo, hi = lb, ff_sol.nodes_used - 1
    while lo <= hi:
        mid = (lo + hi) // 2
        trial = inner(mid)
        if not trial.failed:
            if trial.nodes_used < best.nodes_used:
                best = trial
            hi = mid - 1
        else:
            lo = mid + 1
    elapsed = (time.perf_counter() - start) * 1000.0
    return replace(best, algorithm=config.token or config.family, wall_time_ms=elapsed)


def search_decrement(instance: Instance, config: AlgoConfig, backend: str | None = None,
                     inner=None) -> Solution:
    """Walk the pool size down from first fit in steps of a lower-bound percentage.

    Step = max(1, round(p% of the lower bound)).  Stops at the first failing
    trial; pool sizes below the lower bound are provably infeasible and are
    not tried.
    """
    require_valid(instance)
    start = time.perf_counter()
    ff_sol = _ff_upper_bound(instance, backend)
    lb = lower_bound(instance).value
    if inner is None:
        inner = _fixed_pool_solver(instance, config, backend)
    step = max(1, int(config.search.step_percent / 100.0 * lb + 0.5))
    best = ff_sol
    n = ff_sol.nodes_used - step
    while n >= lb:
        trial = inner(n)
        if trial.failed:
            break
        if trial.nodes_used < best.nodes_used:
            best = trial
        n -= step
    elapsed = (time.perf_counter() - start) * 1000.0
    return replace(best, algorithm=config.token or config.family, wall_time_ms=elapsed)


# ---------------------------------------------------------------------------
# Dispatch


def solve(instance: Instance, config: AlgoConfig | str, backend: str | None = None,
          eps: float = 1.0) -> Solution:
    """Run the configured algorithm and return its solution."""
    if isinstance(config, str):
        config = parse_algorithm(config, eps=eps)
    if config.family == FAMILY_APP_CENTRIC:
        return solve_app_centric(instance, config, backend=backend)
    if config.family == FAMILY_NODE_CENTRIC:
        return solve_node_centric(instance, config, backend=backend)
    if config.family == FAMILY_MEDEA_TP:
        return solve_medea_tp(instance, backend=backend, token=config.token or "medea-tp")
    if config.family == FAMILY_MEDEA_NC:
        return solve_medea_nc(instance, backend=backend, token=config.token or "medea-nc")
    if config.family in _MULTI_NODE:
        if config.search.kind == "binsearch":
            return search_binary(instance, config, backend=backend)
        return search_decrement(instance, config, backend=backend)
    raise ValueError(f"unknown family {config.family!r}")
