"""Kinematic asymptotically optimal planners and their neighborhood rules.

Implements the batch roadmap planner (radius and k-nearest variants), the
classic tree planner, and the rewiring tree planner, together with the
shrinking connection-radius formulas they rely on.  All planners are pure
functions of (scenario, stream, parameters): same seed, same result.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from heapq import heappush, heappop
from typing import Optional

import numpy as np

from .errors import AuditError, UsageError
from .geometry import (
    CollisionChecker,
    GoalRegion,
    Path,
    Scenario,
    as_config,
)
from .nn import NeighborIndex
from .sampling import sample_free

RADIUS_RULES = ("prm_star", "fmt_star_constant", "rrt_star_revised", "k_prm_star", "fixed")


def unit_ball_volume(d: int) -> float:
    """Volume of the Euclidean unit ball in d dimensions."""
    if d < 1:
        raise UsageError("dimension must be >= 1")
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


@dataclass(frozen=True)
class RadiusRule:
    """Parameterization of the connection-neighborhood formulas.

    mu is an upper bound on the free-space measure (the domain box volume
    is always safe since every formula is a lower bound on the radius).
    """

    rule: str
    d: int
    mu: float
    theta: float = 0.2
    nu: float = 0.5
    eps: float = 0.5
    c_star_estimate: Optional[float] = None
    safety_factor: float = 1.001
    gamma_det: float = 3.0
    fixed_radius: Optional[float] = None

    def __post_init__(self):
        if self.rule not in RADIUS_RULES:
            raise UsageError(f"unknown radius rule {self.rule!r}")
        if self.d < 1:
            raise UsageError("dimension must be >= 1")
        if self.mu <= 0.0:
            raise UsageError("measure upper bound mu must be > 0")
        if not 0.0 < self.theta < 0.25:
            raise UsageError("theta must lie in (0, 1/4)")
        if not 0.0 < self.nu < 1.0:
            raise UsageError("nu must lie in (0, 1)")
        if not 0.0 < self.eps < 1.0:
            raise UsageError("eps must lie in (0, 1)")
        if self.safety_factor < 1.0:
            raise UsageError("safety_factor must be >= 1")
        if self.gamma_det <= 2.0:
            raise UsageError("gamma_det must be > 2")
        if self.c_star_estimate is not None and self.c_star_estimate <= 0.0:
            raise UsageError("c_star_estimate must be > 0")
        if self.rule == "fixed" and (self.fixed_radius is None or self.fixed_radius <= 0.0):
            raise UsageError("fixed rule needs fixed_radius > 0")


def default_rule(kind: str, scenario: Scenario, **kwargs) -> RadiusRule:
    return RadiusRule(rule=kind, d=scenario.dimension, mu=scenario.measure_upper, **kwargs)


def _radius_coefficient(rule: RadiusRule) -> float:
    """The n-independent factor of the radius formula (safety included)."""
    d = rule.d
    zeta = unit_ball_volume(d)
    if rule.rule == "prm_star":
        coef = 2.0 * (1.0 + 1.0 / d) ** (1.0 / d) * (rule.mu / zeta) ** (1.0 / d)
    elif rule.rule == "fmt_star_constant":
        coef = 2.0 * (1.0 / d) ** (1.0 / d) * (rule.mu / zeta) ** (1.0 / d)
    elif rule.rule == "rrt_star_revised":
        if rule.c_star_estimate is None:
            raise UsageError("rrt_star_revised needs a c_star_estimate")
        inner = ((1.0 + rule.eps / 4.0) * rule.c_star_estimate) / (
            (d + 1.0) * rule.theta * (1.0 - rule.nu)
        )
        coef = (2.0 + rule.theta) * inner ** (1.0 / (d + 1.0)) * (rule.mu / zeta) ** (
            1.0 / (d + 1.0)
        )
    else:
        raise UsageError(f"rule {rule.rule!r} does not define a radius")
    return rule.safety_factor * coef


def connection_radius(rule: RadiusRule, n: int) -> float:
    """Connection radius at sample count n for the configured rule."""
    if n < 2:
        raise UsageError("n must be >= 2 (log 1 degenerates the bound)")
    if rule.rule == "fixed":
        return rule.safety_factor * float(rule.fixed_radius)
    if rule.rule == "k_prm_star":
        raise UsageError("k_prm_star is a neighbor-count rule; use k_connection")
    exponent = 1.0 / (rule.d + 1.0) if rule.rule == "rrt_star_revised" else 1.0 / rule.d
    return _radius_coefficient(rule) * (math.log(n) / n) ** exponent


def k_connection(d: int, n: int) -> int:
    """Smallest integer strictly greater than e (1 + 1/d) ln n."""
    if d < 1:
        raise UsageError("dimension must be >= 1")
    if n < 2:
        raise UsageError("n must be >= 2")
    return int(math.floor(math.e * (1.0 + 1.0 / d) * math.log(n))) + 1


def rgg_connectivity_radius(d: int, n: int) -> float:
    """Radius above which the uniform random geometric graph is surely connected."""
    if d < 1:
        raise UsageError("dimension must be >= 1")
    if n < 2:
        raise UsageError("n must be >= 2")
    zeta = unit_ball_volume(d)
    return (1.0 / zeta) ** (1.0 / d) * (math.log(n) / n) ** (1.0 / d)


def steer(from_, toward, eta: float) -> np.ndarray:
    """Move from `from_` toward `toward`, at most eta away."""
    if eta <= 0.0:
        raise UsageError("eta must be > 0")
    a = as_config(from_)
    b = as_config(toward, a.shape[0], "steer target")
    diff = b - a
    dist = float(np.linalg.norm(diff))
    if dist <= eta:
        return b.copy()
    return a + (eta / dist) * diff


# ---------------------------------------------------------------------------
# graph structures


@dataclass
class Roadmap:
    """Undirected roadmap with Euclidean edge weights."""

    vertices: dict
    adjacency: dict
    start_id: int
    goal_ids: list
    goal: Optional[GoalRegion] = None

    @property
    def num_edges(self) -> int:
        return sum(len(nbrs) for nbrs in self.adjacency.values()) // 2

    def add_vertex(self, vid: int, config: np.ndarray) -> None:
        self.vertices[vid] = config
        self.adjacency.setdefault(vid, {})

    def add_edge(self, u: int, v: int, weight: float) -> None:
        self.adjacency[u][v] = weight
        self.adjacency[v][u] = weight


class SearchTree:
    """Rooted tree over configurations with cached cost-from-start.

    Costs are maintained incrementally: every node stores the length of the
    edge to its parent, and reparenting recomputes the whole affected
    subtree so stored costs always equal the parent-chain sum.
    """

    def __init__(self, root_config: np.ndarray, capacity: int = 256):
        d = root_config.shape[0]
        self._configs = np.empty((capacity, d), dtype=float)
        self.parent = np.full(capacity, -1, dtype=np.int64)
        self.edge_len = np.zeros(capacity, dtype=float)
        self.cost = np.zeros(capacity, dtype=float)
        self.children = [[] for _ in range(capacity)]
        self.size = 0
        self._append(root_config, -1, 0.0)

    def _append(self, config, parent, edge_len) -> int:
        if self.size == self._configs.shape[0]:
            grow = self._configs.shape[0]
            self._configs = np.vstack([self._configs, np.empty_like(self._configs)])
            self.parent = np.concatenate([self.parent, np.full(grow, -1, dtype=np.int64)])
            self.edge_len = np.concatenate([self.edge_len, np.zeros(grow)])
            self.cost = np.concatenate([self.cost, np.zeros(grow)])
            self.children.extend([] for _ in range(grow))
        nid = self.size
        self._configs[nid] = config
        self.parent[nid] = parent
        self.edge_len[nid] = edge_len
        self.cost[nid] = edge_len if parent < 0 else self.cost[parent] + edge_len
        if parent >= 0:
            self.children[parent].append(nid)
        self.size += 1
        return nid

    def add(self, config: np.ndarray, parent: int, edge_len: float) -> int:
        return self._append(config, parent, edge_len)

    def config(self, nid: int) -> np.ndarray:
        return self._configs[nid]

    @property
    def configs(self) -> np.ndarray:
        return self._configs[: self.size]

    def reparent(self, nid: int, new_parent: int, new_edge_len: float) -> None:
        old = self.parent[nid]
        if old >= 0:
            self.children[old].remove(nid)
        self.parent[nid] = new_parent
        self.edge_len[nid] = new_edge_len
        self.children[new_parent].append(nid)
        # propagate immediately so cost coherence holds at any point
        stack = [nid]
        while stack:
            w = stack.pop()
            p = self.parent[w]
            self.cost[w] = self.cost[p] + self.edge_len[w] if p >= 0 else 0.0
            stack.extend(self.children[w])

    def trace(self, nid: int) -> list:
        out = []
        while nid >= 0:
            out.append(self._configs[nid].copy())
            nid = self.parent[nid]
        out.reverse()
        return out

    def audit_costs(self, tol: float = 1e-9) -> None:
        """Raise AuditError unless stored costs equal the parent-chain sums."""
        seen = 0
        stack = [0]
        while stack:
            w = stack.pop()
            seen += 1
            p = self.parent[w]
            want = 0.0 if p < 0 else self.cost[p] + self.edge_len[w]
            if abs(self.cost[w] - want) > tol:
                raise AuditError(
                    f"cost mismatch at node {w}: stored {self.cost[w]}, chain {want}"
                )
            stack.extend(self.children[w])
        if seen != self.size:
            raise AuditError("tree contains unreachable or cyclic nodes")


@dataclass
class PlanResult:
    """Outcome of one planner run.

    checkpoints holds (n, best_cost_or_None) pairs; checkpoint_stats holds
    the per-checkpoint counter snapshots the benchmark harness persists.
    """

    path: Optional[object]
    best_cost: Optional[float]
    checkpoints: list
    counters: dict
    elapsed_ms: float
    checkpoint_stats: list = field(default_factory=list)
    roadmap: Optional[Roadmap] = None
    roadmaps: Optional[list] = None
    bounds: Optional[list] = None


class _Run:
    """Shared bookkeeping for one planner execution."""

    def __init__(self, scenario, checker, t0):
        self.scenario = scenario
        self.checker = checker
        self.t0 = t0
        self.samples = 0
        self.nn_queries = 0
        self.rewires = 0

    def counters(self) -> dict:
        return {
            "samples": self.samples,
            "collision_checks": self.checker.checks,
            "nn_queries": self.nn_queries,
            "rewires": self.rewires,
        }

    def work(self) -> int:
        return self.samples + self.checker.checks + self.nn_queries + self.rewires

    def stat(self, n, cost, nodes, edges) -> dict:
        return {
            "n": n,
            "cost": cost,
            "nodes": nodes,
            "edges": edges,
            "collision_checks": self.checker.checks,
            "work": self.work(),
        }

    def result(self, path, best, checkpoints, stats, **extra) -> PlanResult:
        return PlanResult(
            path=path,
            best_cost=best,
            checkpoints=checkpoints,
            counters=self.counters(),
            elapsed_ms=(time.perf_counter() - self.t0) * 1e3,
            checkpoint_stats=stats,
            **extra,
        )


def _normalize_checkpoints(checkpoints, n: int) -> list:
    if checkpoints is None:
        return [n]
    cps = [int(c) for c in checkpoints]
    if not cps or any(c <= 0 for c in cps) or sorted(cps) != cps:
        raise UsageError("checkpoints must be ascending positive integers")
    if cps[-1] > n:
        raise UsageError("checkpoints cannot exceed n")
    return cps


def _draw_free(stream, run, max_attempts: int, margin: float = 0.0):
    q = sample_free(stream, run.scenario, max_attempts, margin)
    return q


def _trivial_result(run, start, checkpoints):
    path = Path(waypoints=(start.copy(),), cost=0.0)
    cps = [(c, 0.0) for c in checkpoints]
    stats = [run.stat(c, 0.0, 1, 0) for c in checkpoints]
    return run.result(path, 0.0, cps, stats)


# ---------------------------------------------------------------------------
# shortest path


def shortest_path(roadmap: Roadmap) -> Optional[Path]:
    """Minimum-cost start-to-goal-set path by A*.

    The heuristic is the Euclidean distance to the goal-ball center minus
    the goal radius, clamped at zero (admissible and consistent); without
    a goal region it degrades to Dijkstra.
    """
    goals = set(roadmap.goal_ids)
    if not goals:
        return None
    start = roadmap.start_id

    if roadmap.goal is not None:
        center = roadmap.goal.center
        radius = roadmap.goal.radius

        def heur(vid):
            return max(0.0, float(np.linalg.norm(roadmap.vertices[vid] - center)) - radius)
    else:
        def heur(vid):
            return 0.0

    dist = {start: 0.0}
    parent = {start: -1}
    closed = set()
    heap = [(heur(start), start)]
    found = None
    while heap:
        f, v = heappop(heap)
        if v in closed:
            continue
        closed.add(v)
        if v in goals:
            found = v
            break
        dv = dist[v]
        for u, w in roadmap.adjacency.get(v, {}).items():
            nd = dv + w
            if nd < dist.get(u, math.inf):
                dist[u] = nd
                parent[u] = v
                heappush(heap, (nd + heur(u), u))
    if found is None:
        return None
    ids = []
    v = found
    while v != -1:
        ids.append(v)
        v = parent[v]
    ids.reverse()
    waypoints = tuple(roadmap.vertices[i].copy() for i in ids)
    return Path(waypoints=waypoints, cost=dist[found])


# ---------------------------------------------------------------------------
# roadmap planner


def _connect_prefix(run, configs, nv, rule, goal_region):
    """Build the roadmap over the first nv stored configurations."""
    scenario = run.scenario
    d = scenario.dimension
    pts = configs[:nv]
    roadmap = Roadmap(vertices={}, adjacency={}, start_id=0, goal_ids=[], goal=goal_region)
    for vid in range(nv):
        roadmap.add_vertex(vid, pts[vid])

    # the index covers exactly this prefix so neighborhoods never see
    # samples from a later checkpoint
    index = NeighborIndex(d)
    for vid in range(nv):
        index.insert(vid, pts[vid])

    n_for_rule = max(nv, 2)
    use_k = rule.rule == "k_prm_star"
    if use_k:
        k = k_connection(d, n_for_rule)
    else:
        r = connection_radius(rule, n_for_rule)

    pair_a = []
    pair_b = []
    for vid in range(nv):
        run.nn_queries += 1
        if use_k:
            nbrs = [u for u, _ in index.k_nearest(pts[vid], k + 1) if u != vid]
            nbrs = nbrs[:k]
            for u in nbrs:
                # canonical (min, max) orientation; duplicates dropped below
                pair_a.append(min(vid, u))
                pair_b.append(max(vid, u))
        else:
            ids, _ = index.within_radius_arrays(pts[vid], r)
            ids = ids[ids > vid]
            pair_a.extend([vid] * len(ids))
            pair_b.extend(int(u) for u in ids)

    if pair_a:
        pa = np.asarray(pair_a, dtype=np.int64)
        pb = np.asarray(pair_b, dtype=np.int64)
        if use_k:
            # directed k-lists may repeat a pair from both sides
            keys = pa * np.int64(nv) + pb
            _, uniq = np.unique(keys, return_index=True)
            pa, pb = pa[np.sort(uniq)], pb[np.sort(uniq)]
        chunk = 200_000
        for lo in range(0, pa.shape[0], chunk):
            sa, sb = pa[lo:lo + chunk], pb[lo:lo + chunk]
            valid = run.checker.edges_valid(pts[sa], pts[sb])
            weights = np.linalg.norm(pts[sa] - pts[sb], axis=1)
            for u, v, ok, w in zip(sa, sb, valid, weights):
                if ok:
                    roadmap.add_edge(int(u), int(v), float(w))

    ball = np.linalg.norm(pts - goal_region.center, axis=1) <= goal_region.radius
    goal_ids = sorted({1} | set(np.nonzero(ball)[0].tolist()))
    roadmap.goal_ids = [int(g) for g in goal_ids]
    return roadmap


def prm_star(
    scenario: Scenario,
    stream,
    n: int,
    rule: Optional[RadiusRule] = None,
    *,
    resolution: Optional[float] = None,
    checkpoints=None,
    max_attempts: int = 10_000,
    start=None,
    goal: Optional[GoalRegion] = None,
    margin: float = 0.0,
) -> PlanResult:
    """Batch roadmap planner over n free samples, solved by A*.

    The vertex set is {start, goal center} plus n free-space samples; each
    vertex connects to its shrinking neighborhood (radius rule, or k rule
    for k_prm_star) through validated edges.  Returns the best path at
    each checkpoint prefix; no path is a result, not an error.
    """
    t0 = time.perf_counter()
    if n < 2:
        raise UsageError("n must be >= 2")
    start = as_config(start if start is not None else scenario.start, scenario.dimension)
    goal = goal if goal is not None else scenario.goal
    if goal is None:
        raise UsageError("scenario has no goal region")
    rule = rule if rule is not None else default_rule("prm_star", scenario)
    checker = CollisionChecker(scenario, resolution, margin)
    run = _Run(scenario, checker, t0)
    if not checker.point_valid(start):
        raise UsageError("start configuration is invalid")
    cps = _normalize_checkpoints(checkpoints, n)
    if goal.contains(start):
        return _trivial_result(run, start, cps)

    d = scenario.dimension
    configs = np.empty((n + 2, d), dtype=float)
    configs[0] = start
    configs[1] = goal.center
    for i in range(n):
        run.samples += 1
        configs[2 + i] = _draw_free(stream, run, max_attempts, margin)

    if stream.kind == "halton" and rule.rule not in ("k_prm_star",):
        # deterministic-sampling guard: the radius must dominate the
        # dispersion bound n^(-1/d) by the configured factor; the ratio
        # grows with n, so the first checkpoint prefix is the binding one
        nv = cps[0] + 2
        r_first = connection_radius(rule, nv)
        bound = rule.gamma_det * nv ** (-1.0 / d)
        if r_first < bound:
            raise UsageError(
                f"halton run fails the dispersion guard: r_n={r_first:.6g} < "
                f"{rule.gamma_det} * n^(-1/d)={bound:.6g}; increase n"
            )

    records = []
    stats = []
    roadmap = None
    path = None
    for c in cps:
        roadmap = _connect_prefix(run, configs, c + 2, rule, goal)
        path = shortest_path(roadmap)
        cost = path.cost if path is not None else None
        records.append((c, cost))
        stats.append(run.stat(c, cost, c + 2, roadmap.num_edges))

    best = records[-1][1]
    return run.result(path if best is not None else None, best, records, stats,
                      roadmap=roadmap)


# ---------------------------------------------------------------------------
# tree planners


def rrt(
    scenario: Scenario,
    stream,
    n: int,
    eta: float,
    goal_bias: float = 0.05,
    *,
    resolution: Optional[float] = None,
    checkpoints=None,
    max_attempts: int = 10_000,
) -> PlanResult:
    """Classic tree planner: the first goal-ball connection fixes the path."""
    t0 = time.perf_counter()
    if n < 2:
        raise UsageError("n must be >= 2")
    if eta <= 0.0:
        raise UsageError("eta must be > 0")
    if not 0.0 <= goal_bias <= 1.0:
        raise UsageError("goal_bias must lie in [0, 1]")
    start = as_config(scenario.start, scenario.dimension)
    goal = scenario.goal
    if goal is None:
        raise UsageError("scenario has no goal region")
    checker = CollisionChecker(scenario, resolution)
    run = _Run(scenario, checker, t0)
    if not checker.point_valid(start):
        raise UsageError("start configuration is invalid")
    cps = _normalize_checkpoints(checkpoints, n)
    if goal.contains(start):
        return _trivial_result(run, start, cps)

    tree = SearchTree(start)
    index = NeighborIndex(scenario.dimension)
    index.insert(0, start)
    solution = -1
    records = []
    stats = []
    cp = set(cps)
    for it in range(1, n + 1):
        run.samples += 1
        if stream.next_uniform01() < goal_bias:
            target = goal.center
        else:
            target = _draw_free(stream, run, max_attempts)
        run.nn_queries += 1
        near = index.nearest_id(target)
        v = steer(tree.config(near), target, eta)
        if not np.array_equal(v, tree.config(near)):
            if checker.edge_valid(tree.config(near), v):
                vid = tree.add(v, near, float(np.linalg.norm(v - tree.config(near))))
                index.insert(vid, v)
                if solution < 0 and goal.contains(v):
                    solution = vid
        if it in cp:
            cost = float(tree.cost[solution]) if solution >= 0 else None
            records.append((it, cost))
            stats.append(run.stat(it, cost, tree.size, tree.size - 1))

    path = None
    best = None
    if solution >= 0:
        waypoints = tuple(tree.trace(solution))
        best = float(tree.cost[solution])
        path = Path(waypoints=waypoints, cost=best)
    return run.result(path, best, records, stats)


def rrt_star(
    scenario: Scenario,
    stream,
    n: int,
    eta: float,
    rule: Optional[RadiusRule] = None,
    goal_bias: float = 0.05,
    *,
    eta_max: Optional[float] = None,
    resolution: Optional[float] = None,
    checkpoints=None,
    max_attempts: int = 10_000,
    audit_every: Optional[int] = None,
) -> PlanResult:
    """Rewiring tree planner.

    Per iteration: sample, steer from the nearest node, collect the
    valid-edge neighborhood within min(rule radius, eta_max), connect to
    the cheapest parent, then rewire any neighbor the new node improves,
    propagating cost updates immediately.  Until a first solution exists
    the radius rule runs on a conservative optimal-cost estimate (domain
    diagonal times dimension); after that, on the first solution's cost.
    """
    t0 = time.perf_counter()
    if n < 2:
        raise UsageError("n must be >= 2")
    if eta <= 0.0:
        raise UsageError("eta must be > 0")
    if not 0.0 <= goal_bias <= 1.0:
        raise UsageError("goal_bias must lie in [0, 1]")
    start = as_config(scenario.start, scenario.dimension)
    goal = scenario.goal
    if goal is None:
        raise UsageError("scenario has no goal region")
    rule = rule if rule is not None else default_rule("rrt_star_revised", scenario)
    if rule.rule == "k_prm_star":
        raise UsageError("rrt_star needs a radius rule, not the k rule")
    eta_max = 2.0 * eta if eta_max is None else float(eta_max)
    if eta_max <= 0.0:
        raise UsageError("eta_max must be > 0")
    checker = CollisionChecker(scenario, resolution)
    run = _Run(scenario, checker, t0)
    if not checker.point_valid(start):
        raise UsageError("start configuration is invalid")
    cps = _normalize_checkpoints(checkpoints, n)
    if goal.contains(start):
        return _trivial_result(run, start, cps)

    if rule.rule == "rrt_star_revised" and rule.c_star_estimate is None:
        rule = replace(rule, c_star_estimate=scenario.diagonal * scenario.dimension)
    coef = None if rule.rule == "fixed" else _radius_coefficient(rule)
    exponent = 1.0 / (rule.d + 1.0) if rule.rule == "rrt_star_revised" else 1.0 / rule.d

    tree = SearchTree(start)
    index = NeighborIndex(scenario.dimension)
    index.insert(0, start)
    goal_nodes = []
    first_cost = None
    records = []
    stats = []
    cp = set(cps)

    def current_best():
        if not goal_nodes:
            return None
        return float(min(tree.cost[g] for g in goal_nodes))

    for it in range(1, n + 1):
        run.samples += 1
        if stream.next_uniform01() < goal_bias:
            target = goal.center
        else:
            target = _draw_free(stream, run, max_attempts)
        run.nn_queries += 1
        near = index.nearest_id(target)
        v = steer(tree.config(near), target, eta)
        if not np.array_equal(v, tree.config(near)):
            if rule.rule == "fixed":
                r = rule.safety_factor * rule.fixed_radius
            else:
                nv = max(tree.size, 2)
                r = coef * (math.log(nv) / nv) ** exponent
            r = min(r, eta_max)
            run.nn_queries += 1
            ids, dists = index.within_radius_arrays(v, r)
            if ids.shape[0]:
                valid = checker.edges_valid(
                    np.broadcast_to(v, (ids.shape[0], v.shape[0])), tree.configs[ids]
                )
                nbrs = ids[valid]
                ndists = dists[valid]
                if nbrs.shape[0]:
                    cand = tree.cost[nbrs] + ndists
                    pick = int(np.argmin(cand))
                    vid = tree.add(v, int(nbrs[pick]), float(ndists[pick]))
                    index.insert(vid, v)
                    if goal.contains(v):
                        goal_nodes.append(vid)
                        if first_cost is None:
                            first_cost = float(tree.cost[vid])
                            if rule.rule == "rrt_star_revised":
                                rule = replace(rule, c_star_estimate=first_cost)
                                coef = _radius_coefficient(rule)
                    # rewire: neighbors already passed the symmetric edge check
                    base = tree.cost[vid]
                    maybe = np.nonzero(base + ndists < tree.cost[nbrs])[0]
                    for j in maybe:
                        u = int(nbrs[j])
                        nd = base + float(ndists[j])
                        if nd < tree.cost[u]:
                            tree.reparent(u, vid, float(ndists[j]))
                            run.rewires += 1
        if audit_every and it % audit_every == 0:
            tree.audit_costs()
        if it in cp:
            cost = current_best()
            records.append((it, cost))
            stats.append(run.stat(it, cost, tree.size, tree.size - 1))

    best = current_best()
    path = None
    if best is not None:
        node = min(goal_nodes, key=lambda g: (tree.cost[g], g))
        path = Path(waypoints=tuple(tree.trace(node)), cost=float(tree.cost[node]))
    return run.result(path, best, records, stats)
