"""Steering-function-free planners for systems with dynamics.

Local connections come from Monte Carlo propagation (random control and
random duration) instead of a steering function.  Three planners: the
sparse witness-pruned tree, the tree in state-cost space with a shrinking
cost bound, and the meta loop that repeatedly calls a cost-bounded
planner with lowering bounds.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import AuditError, UsageError
from .geometry import CollisionChecker, Scenario
from .geometric import PlanResult, _Run, _normalize_checkpoints


@dataclass(frozen=True)
class DynamicalSystem:
    """Forward-propagatable system; propagation is deterministic.

    propagate_fn(state, control, steps) returns the (steps+1, state_dim)
    Euler trajectory at fixed step h including the input state; durations
    are quantized to whole integration steps.
    """

    name: str
    state_dim: int
    control_dim: int
    control_lo: np.ndarray
    control_hi: np.ndarray
    duration_bounds: tuple
    step: float
    propagate_fn: Callable
    position_fn: Callable
    sample_state_fn: Callable
    distance_fn: Callable
    control_filter: Optional[Callable] = None

    def __post_init__(self):
        t_min, t_max = self.duration_bounds
        if not 0.0 < t_min <= t_max:
            raise UsageError("duration bounds must satisfy 0 < t_min <= t_max")
        if self.step <= 0.0:
            raise UsageError("integration step must be > 0")

    def propagate(self, state, control, duration: float):
        """Trajectory of Euler states over round(duration / h) steps."""
        steps = max(1, int(round(duration / self.step)))
        return self.propagate_fn(np.asarray(state, dtype=float),
                                 np.asarray(control, dtype=float), steps)

    def positions(self, states: np.ndarray) -> np.ndarray:
        return self.position_fn(np.atleast_2d(states))

    def sample_state(self, stream, scenario: Scenario) -> np.ndarray:
        return self.sample_state_fn(stream, scenario)

    def distances(self, states: np.ndarray, state: np.ndarray) -> np.ndarray:
        return self.distance_fn(np.atleast_2d(states), np.asarray(state, dtype=float))


def _euclidean(states, state):
    diff = states - state
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def single_integrator_2d(step: float = 0.02,
                         duration_bounds: tuple = (0.05, 0.3)) -> DynamicalSystem:
    """Velocity-controlled point with speed capped at 1.

    Controls are drawn uniformly from the unit disc, so the time-optimal
    cost between two free points equals their Euclidean distance.
    """

    def propagate(state, control, steps):
        out = np.empty((steps + 1, 2))
        out[0] = state
        out[1:] = state + np.arange(1, steps + 1)[:, None] * (step * control)
        return out

    def positions(states):
        return states

    def sample(stream, scenario):
        return stream.next_point(scenario.domain)

    def in_disc(control):
        return float(control @ control) <= 1.0

    return DynamicalSystem(
        name="integrator2d",
        state_dim=2,
        control_dim=2,
        control_lo=np.array([-1.0, -1.0]),
        control_hi=np.array([1.0, 1.0]),
        duration_bounds=duration_bounds,
        step=step,
        propagate_fn=propagate,
        position_fn=positions,
        sample_state_fn=sample,
        distance_fn=_euclidean,
        control_filter=in_disc,
    )


def kinematic_car(step: float = 0.02,
                  duration_bounds: tuple = (0.05, 0.3),
                  heading_weight: float = 0.5) -> DynamicalSystem:
    """Kinematic car (x, y, heading) with |v| <= 1 and |omega| <= 1."""

    def propagate(state, control, steps):
        v, omega = control
        x0, y0, psi0 = state
        k = np.arange(steps)
        psi = psi0 + step * omega * k
        out = np.empty((steps + 1, 3))
        out[0] = state
        out[1:, 0] = x0 + step * v * np.cumsum(np.cos(psi))
        out[1:, 1] = y0 + step * v * np.cumsum(np.sin(psi))
        out[1:, 2] = psi0 + step * omega * (k + 1)
        return out

    def positions(states):
        return states[:, :2]

    def sample(stream, scenario):
        xy = stream.next_point(scenario.domain)
        psi = (stream.next_uniform01() * 2.0 - 1.0) * math.pi
        return np.array([xy[0], xy[1], psi])

    def distance(states, state):
        diff = states[:, :2] - state[:2]
        pos = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        dpsi = np.abs(states[:, 2] - state[2]) % (2.0 * math.pi)
        dpsi = np.minimum(dpsi, 2.0 * math.pi - dpsi)
        return pos + heading_weight * dpsi

    return DynamicalSystem(
        name="car",
        state_dim=3,
        control_dim=2,
        control_lo=np.array([-1.0, -1.0]),
        control_hi=np.array([1.0, 1.0]),
        duration_bounds=duration_bounds,
        step=step,
        propagate_fn=propagate,
        position_fn=positions,
        sample_state_fn=sample,
        distance_fn=distance,
    )


SYSTEMS = {"integrator2d": single_integrator_2d, "car": kinematic_car}


def monte_carlo_propagate(system: DynamicalSystem, from_state, stream):
    """Random control and random duration, then deterministic propagation.

    Returns (trajectory, control, effective_duration); the duration is the
    uniform draw from the system's duration bounds quantized to whole
    integration steps.  Validity of the trajectory is the caller's job.
    """
    from_state = np.asarray(from_state, dtype=float)
    span = system.control_hi - system.control_lo
    for _ in range(10_000):
        u = np.array([stream.next_uniform01() for _ in range(system.control_dim)])
        control = system.control_lo + u * span
        if system.control_filter is None or system.control_filter(control):
            break
    else:
        raise UsageError("control_filter rejected 10000 consecutive draws")
    t_min, t_max = system.duration_bounds
    duration = t_min + stream.next_uniform01() * (t_max - t_min)
    steps = max(1, int(round(duration / system.step)))
    traj = system.propagate_fn(from_state, control, steps)
    return traj, control, steps * system.step


@dataclass(frozen=True)
class Trajectory:
    """Control-annotated solution: states with per-segment control/duration."""

    states: tuple
    controls: tuple
    durations: tuple
    cost: float

    @property
    def waypoints(self) -> tuple:
        return self.states


class _KinoTree:
    """Array-backed forward tree; node cost is accumulated duration."""

    def __init__(self, root_state: np.ndarray, control_dim: int, capacity: int = 512):
        s = root_state.shape[0]
        self.states = np.empty((capacity, s))
        self.controls = np.zeros((capacity, control_dim))
        self.durations = np.zeros(capacity)
        self.cost = np.zeros(capacity)
        self.parent = np.full(capacity, -1, dtype=np.int64)
        self.child_count = np.zeros(capacity, dtype=np.int64)
        self.active = np.zeros(capacity, dtype=bool)
        self.removed = np.zeros(capacity, dtype=bool)
        self.size = 0
        self.alive = 0
        self._add(root_state, -1, None, 0.0)

    def _grow(self):
        grow = self.states.shape[0]
        self.states = np.vstack([self.states, np.empty_like(self.states)])
        self.controls = np.vstack([self.controls, np.zeros_like(self.controls)])
        self.durations = np.concatenate([self.durations, np.zeros(grow)])
        self.cost = np.concatenate([self.cost, np.zeros(grow)])
        self.parent = np.concatenate([self.parent, np.full(grow, -1, dtype=np.int64)])
        self.child_count = np.concatenate([self.child_count, np.zeros(grow, dtype=np.int64)])
        self.active = np.concatenate([self.active, np.zeros(grow, dtype=bool)])
        self.removed = np.concatenate([self.removed, np.zeros(grow, dtype=bool)])

    def _add(self, state, parent, control, duration):
        if self.size == self.states.shape[0]:
            self._grow()
        nid = self.size
        self.states[nid] = state
        self.parent[nid] = parent
        if control is not None:
            self.controls[nid] = control
        self.durations[nid] = duration
        self.cost[nid] = duration if parent < 0 else self.cost[parent] + duration
        self.active[nid] = True
        if parent >= 0:
            self.child_count[parent] += 1
        self.size += 1
        self.alive += 1
        return nid

    def add(self, state, parent, control, duration):
        return self._add(state, parent, control, duration)

    def deactivate_and_prune(self, nid: int):
        """Deactivate nid, then drop any resulting chain of dead leaves."""
        self.active[nid] = False
        w = nid
        while w > 0 and not self.active[w] and self.child_count[w] == 0 and not self.removed[w]:
            self.removed[w] = True
            self.alive -= 1
            p = self.parent[w]
            self.child_count[p] -= 1
            w = p

    def trace(self, nid: int) -> Trajectory:
        states, controls, durations = [], [], []
        w = nid
        while w >= 0:
            states.append(self.states[w].copy())
            if self.parent[w] >= 0:
                controls.append(self.controls[w].copy())
                durations.append(float(self.durations[w]))
            w = self.parent[w]
        states.reverse()
        controls.reverse()
        durations.reverse()
        return Trajectory(
            states=tuple(states),
            controls=tuple(controls),
            durations=tuple(durations),
            cost=float(self.cost[nid]),
        )

    def audit_costs(self, tol: float = 1e-9):
        for w in range(self.size):
            if self.removed[w]:
                continue
            p = self.parent[w]
            want = 0.0 if p < 0 else self.cost[p] + self.durations[w]
            if abs(self.cost[w] - want) > tol:
                raise AuditError(f"kinodynamic cost mismatch at node {w}")


def _goal_hit(system, goal, state) -> bool:
    pos = system.positions(state[None, :])[0]
    return float(np.linalg.norm(pos - goal.center)) <= goal.radius


def _start_state(system, scenario) -> np.ndarray:
    start = np.asarray(scenario.start, dtype=float)
    if system.state_dim == start.shape[0]:
        return start.copy()
    out = np.zeros(system.state_dim)
    out[: start.shape[0]] = start
    return out


def _trivial_kino(run, state, checkpoints):
    traj = Trajectory(states=(state.copy(),), controls=(), durations=(), cost=0.0)
    cps = [(c, 0.0) for c in checkpoints]
    stats = [run.stat(c, 0.0, 1, 0) for c in checkpoints]
    return run.result(traj, 0.0, cps, stats)


def sst_plan(
    scenario: Scenario,
    system: DynamicalSystem,
    stream,
    iterations: int,
    delta_bn: Optional[float] = None,
    delta_s: Optional[float] = None,
    shrink: Optional[tuple] = None,
    *,
    resolution: Optional[float] = None,
    checkpoints=None,
    audit_every: Optional[int] = None,
) -> PlanResult:
    """Sparse witness-pruned tree planner.

    Selection picks the cheapest active node within delta_bn of the random
    sample (nearest active node as fallback), propagation is Monte Carlo,
    and a new node survives only if it beats the representative of its
    local witness; displaced representatives deactivate and dead leaf
    chains are pruned.  With shrink=(xi, period) both radii contract
    geometrically every period iterations.
    """
    t0 = time.perf_counter()
    if iterations < 1:
        raise UsageError("iterations must be >= 1")
    diag = scenario.diagonal
    delta_bn = 0.05 * diag if delta_bn is None else float(delta_bn)
    delta_s = 0.02 * diag if delta_s is None else float(delta_s)
    if delta_bn <= 0.0 or delta_s <= 0.0:
        raise UsageError("delta_bn and delta_s must be > 0")
    if shrink is not None:
        xi, period = shrink
        if not 0.0 < xi < 1.0:
            raise UsageError("shrink factor xi must lie in (0, 1)")
        if int(period) < 1:
            raise UsageError("shrink period must be >= 1")
        period = int(period)
    goal = scenario.goal
    if goal is None:
        raise UsageError("scenario has no goal region")
    checker = CollisionChecker(scenario, resolution)
    run = _Run(scenario, checker, t0)
    cps = _normalize_checkpoints(checkpoints, iterations)
    root = _start_state(system, scenario)
    if _goal_hit(system, goal, root):
        return _trivial_kino(run, root, cps)

    tree = _KinoTree(root, system.control_dim)
    wit_states = np.empty((256, system.state_dim))
    wit_rep = np.empty(256, dtype=np.int64)
    wit_radius = np.empty(256)
    wit_states[0] = root
    wit_rep[0] = 0
    wit_radius[0] = delta_s
    n_wit = 1

    best = None
    best_traj = None
    records = []
    stats = []
    cp = set(cps)

    for it in range(1, iterations + 1):
        run.samples += 1
        x_rand = system.sample_state(stream, scenario)
        run.nn_queries += 1
        dists = system.distances(tree.states[: tree.size], x_rand)
        active = tree.active[: tree.size]
        near_mask = active & (dists <= delta_bn)
        if near_mask.any():
            costs = np.where(near_mask, tree.cost[: tree.size], np.inf)
            sel = int(np.argmin(costs))
        else:
            d_act = np.where(active, dists, np.inf)
            sel = int(np.argmin(d_act))

        traj, control, duration = monte_carlo_propagate(system, tree.states[sel], stream)
        if checker.states_valid(system.positions(traj[1:])):
            new_state = traj[-1]
            new_cost = float(tree.cost[sel]) + duration
            wd = system.distances(wit_states[:n_wit], new_state)
            w = int(np.argmin(wd))
            if wd[w] > delta_s:
                if n_wit == wit_states.shape[0]:
                    wit_states = np.vstack([wit_states, np.empty_like(wit_states)])
                    wit_rep = np.concatenate([wit_rep, np.empty_like(wit_rep)])
                    wit_radius = np.concatenate([wit_radius, np.empty_like(wit_radius)])
                wit_states[n_wit] = new_state
                w = n_wit
                n_wit += 1
                accept = True
            else:
                rep = int(wit_rep[w])
                rep_cost = float(tree.cost[rep])
                accept = new_cost < rep_cost
                if accept:
                    tree.deactivate_and_prune(rep)
            if accept:
                nid = tree.add(new_state, sel, control, duration)
                wit_rep[w] = nid
                wit_radius[w] = delta_s
                if _goal_hit(system, goal, new_state) and (best is None or new_cost < best):
                    best = new_cost
                    best_traj = tree.trace(nid)

        if shrink is not None and it % period == 0:
            delta_bn *= xi
            delta_s *= xi

        if audit_every and it % audit_every == 0:
            _sst_audit(tree, system, wit_states, wit_rep, wit_radius, n_wit)
        if it in cp:
            records.append((it, best))
            stats.append(run.stat(it, best, tree.alive, max(0, tree.alive - 1)))

    return run.result(best_traj, best, records, stats)


def _sst_audit(tree, system, wit_states, wit_rep, wit_radius, n_wit):
    """Witness exclusivity and membership, plus tree cost coherence."""
    reps = wit_rep[:n_wit]
    if len(set(reps.tolist())) != n_wit:
        raise AuditError("two witnesses share a representative")
    active_ids = set(np.nonzero(tree.active[: tree.size])[0].tolist())
    if active_ids != set(int(r) for r in reps):
        raise AuditError("active nodes and witness representatives differ")
    for i in range(n_wit):
        rep = int(reps[i])
        if tree.removed[rep] or not tree.active[rep]:
            raise AuditError(f"witness {i} has a dead representative")
        d = float(system.distances(tree.states[rep][None, :], wit_states[i])[0])
        if d > wit_radius[i] + 1e-12:
            raise AuditError(f"representative strayed {d} from witness {i}")
    tree.audit_costs()


def ao_rrt_plan(
    scenario: Scenario,
    system: DynamicalSystem,
    stream,
    iterations: int,
    cost_weight: float = 1.0,
    initial_bound: Optional[float] = None,
    *,
    resolution: Optional[float] = None,
    checkpoints=None,
    audit_every: Optional[int] = None,
) -> PlanResult:
    """Tree planner in the state-cost space with a shrinking cost bound.

    Samples carry a cost coordinate drawn uniformly in [0, current bound];
    the augmented metric is state distance plus cost_weight times the cost
    gap normalized by the initial bound.  Children above the bound are
    rejected; every new solution lowers the bound and prunes nodes above
    it, so the stored tree always respects the bound.
    """
    t0 = time.perf_counter()
    if iterations < 1:
        raise UsageError("iterations must be >= 1")
    if cost_weight < 0.0:
        raise UsageError("cost_weight must be >= 0")
    goal = scenario.goal
    if goal is None:
        raise UsageError("scenario has no goal region")
    # generous duration-cost scale for unit-speed systems
    scale = 2.0 * scenario.diagonal
    if initial_bound is None:
        bound = scale
    else:
        if not initial_bound > 0.0:
            raise UsageError("initial_bound must be > 0 (or infinite)")
        bound = float(initial_bound)
    sample_scale = bound if math.isfinite(bound) else scale
    w_eff = cost_weight / sample_scale

    checker = CollisionChecker(scenario, resolution)
    run = _Run(scenario, checker, t0)
    cps = _normalize_checkpoints(checkpoints, iterations)
    root = _start_state(system, scenario)
    if _goal_hit(system, goal, root):
        return _trivial_kino(run, root, cps)

    tree = _KinoTree(root, system.control_dim)
    best = None
    best_traj = None
    bounds_hist = []
    records = []
    stats = []
    cp = set(cps)

    for it in range(1, iterations + 1):
        run.samples += 1
        x_rand = system.sample_state(stream, scenario)
        c_rand = stream.next_uniform01() * (bound if math.isfinite(bound) else sample_scale)
        run.nn_queries += 1
        dists = system.distances(tree.states[: tree.size], x_rand)
        dists = dists + w_eff * np.abs(tree.cost[: tree.size] - c_rand)
        dists = np.where(tree.active[: tree.size], dists, np.inf)
        sel = int(np.argmin(dists))

        traj, control, duration = monte_carlo_propagate(system, tree.states[sel], stream)
        new_cost = float(tree.cost[sel]) + duration
        if new_cost <= bound and checker.states_valid(system.positions(traj[1:])):
            new_state = traj[-1]
            nid = tree.add(new_state, sel, control, duration)
            if _goal_hit(system, goal, new_state) and new_cost < bound:
                bound = new_cost
                best = new_cost
                best_traj = tree.trace(nid)
                bounds_hist.append(bound)
                # drop everything the new bound rules out
                live = tree.active[: tree.size]
                live[live & (tree.cost[: tree.size] > bound)] = False

        if audit_every and it % audit_every == 0:
            live_costs = tree.cost[: tree.size][tree.active[: tree.size]]
            if live_costs.size and float(live_costs.max()) > bound + 1e-12:
                raise AuditError("stored node exceeds the current cost bound")
            tree.audit_costs()
        if it in cp:
            live_n = int(tree.active[: tree.size].sum())
            records.append((it, best))
            stats.append(run.stat(it, best, live_n, max(0, live_n - 1)))

    return run.result(best_traj, best, records, stats, bounds=bounds_hist)


def cost_bounded_rrt(
    scenario: Scenario,
    system: DynamicalSystem,
    stream,
    bound: float,
    iterations: int,
    *,
    resolution: Optional[float] = None,
):
    """Probabilistically complete building block for the meta loop.

    Monte Carlo tree search that refuses nodes at or above the bound and
    returns the first goal-reaching trajectory (strictly below the bound),
    or None when the budget runs out.
    """
    if iterations < 1:
        raise UsageError("iterations must be >= 1")
    goal = scenario.goal
    if goal is None:
        raise UsageError("scenario has no goal region")
    checker = CollisionChecker(scenario, resolution)
    root = _start_state(system, scenario)
    if _goal_hit(system, goal, root):
        return Trajectory(states=(root.copy(),), controls=(), durations=(), cost=0.0), 0.0
    tree = _KinoTree(root, system.control_dim)
    for _ in range(iterations):
        x_rand = system.sample_state(stream, scenario)
        dists = system.distances(tree.states[: tree.size], x_rand)
        sel = int(np.argmin(dists))
        traj, control, duration = monte_carlo_propagate(system, tree.states[sel], stream)
        new_cost = float(tree.cost[sel]) + duration
        if new_cost >= bound:
            continue
        if not checker.states_valid(system.positions(traj[1:])):
            continue
        nid = tree.add(traj[-1], sel, control, duration)
        if _goal_hit(system, goal, traj[-1]):
            return tree.trace(nid), new_cost
    return None


def ao_meta(
    planner: Callable,
    beta: float,
    rounds: int,
    budget: int,
) -> PlanResult:
    """Meta loop: run a cost-bounded planner with geometrically lowering bounds.

    planner(bound, budget) must return (solution, cost) with cost strictly
    below the bound, or None.  Round 1 runs unbounded; afterwards the bound
    is (1 - beta) times the best cost.  Stops after `rounds` rounds or the
    first round that times out.
    """
    t0 = time.perf_counter()
    if not 0.0 < beta < 1.0:
        raise UsageError("beta must lie strictly inside (0, 1)")
    if rounds < 1:
        raise UsageError("rounds must be >= 1")
    if budget < 1:
        raise UsageError("budget must be >= 1")

    best = None
    best_sol = None
    bounds_hist = []
    records = []
    stats = []
    for k in range(1, rounds + 1):
        bound = math.inf if best is None else (1.0 - beta) * best
        out = planner(bound, budget)
        if out is None:
            break
        sol, cost = out
        if not cost < bound:
            raise UsageError("planner returned a solution at or above its bound")
        best = cost
        best_sol = sol
        bounds_hist.append(cost)
        records.append((k * budget, best))
        nodes = len(sol.states) if hasattr(sol, "states") else 0
        stats.append({
            "n": k * budget, "cost": best, "nodes": nodes,
            "edges": max(0, nodes - 1), "collision_checks": 0, "work": k * budget,
        })

    return PlanResult(
        path=best_sol,
        best_cost=best,
        checkpoints=records,
        counters={"samples": 0, "collision_checks": 0, "nn_queries": 0,
                  "rewires": 0, "rounds": len(bounds_hist)},
        elapsed_ms=(time.perf_counter() - t0) * 1e3,
        checkpoint_stats=stats,
        bounds=bounds_hist,
    )
