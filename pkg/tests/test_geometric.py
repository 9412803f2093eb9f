import heapq
import math

import numpy as np
import pytest

from aoplan import (
    AuditError,
    GoalRegion,
    HaltonStream,
    Roadmap,
    SearchTree,
    UniformStream,
    UsageError,
    default_rule,
    edge_valid,
    path_cost,
    prm_star,
    rrt,
    rrt_star,
    scenario_from_dict,
    shortest_path,
)

from conftest import OPT_BOX, OPT_EMPTY, pocket_scenario


def dijkstra_reference(roadmap):
    """Plain Dijkstra over the roadmap, goal set = roadmap.goal_ids."""
    dist = {roadmap.start_id: 0.0}
    heap = [(0.0, roadmap.start_id)]
    done = set()
    goals = set(roadmap.goal_ids)
    while heap:
        dv, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        if v in goals:
            return dv
        for u, w in roadmap.adjacency[v].items():
            nd = dv + w
            if nd < dist.get(u, math.inf):
                dist[u] = nd
                heapq.heappush(heap, (nd, u))
    return None


# --- roadmap planner --------------------------------------------------------


def test_prm_star_empty_square_reaches_near_optimal(empty_square):
    res = prm_star(empty_square, UniformStream(2, 7), 2000)
    assert res.best_cost is not None
    assert res.best_cost <= 1.19
    assert res.best_cost >= OPT_EMPTY - empty_square.goal.radius - 1e-9
    assert res.path.cost == pytest.approx(res.best_cost, abs=1e-12)
    assert np.allclose(res.path.waypoints[0], empty_square.start)
    end_gap = np.linalg.norm(res.path.waypoints[-1] - empty_square.goal.center)
    assert end_gap <= empty_square.goal.radius + 1e-12


def test_prm_star_path_edges_are_valid(empty_square):
    res = prm_star(empty_square, UniformStream(2, 1), 500)
    rho = empty_square.default_resolution()
    for a, b in zip(res.path.waypoints, res.path.waypoints[1:]):
        assert edge_valid(empty_square, a, b, rho)
    assert res.path.cost == pytest.approx(path_cost(res.path.waypoints), abs=1e-9)


def test_prm_star_start_inside_goal():
    sc = scenario_from_dict({
        "dimension": 2, "domain": {"min": [0, 0], "max": [1, 1]}, "obstacles": [],
        "start": [0.5, 0.5], "goal": {"center": [0.52, 0.5], "radius": 0.1},
    })
    res = prm_star(sc, UniformStream(2, 0), 10)
    assert res.best_cost == 0.0
    assert len(res.path.waypoints) == 1


def test_prm_star_walled_goal_returns_no_path():
    res = prm_star(pocket_scenario(), UniformStream(2, 5), 200)
    assert res.best_cost is None
    assert res.path is None
    assert res.checkpoints == [(200, None)]


def test_prm_star_roadmap_invariants(box_square):
    res = prm_star(box_square, UniformStream(2, 9), 400)
    rm = res.roadmap
    rho = box_square.default_resolution()
    checked = 0
    for u, nbrs in rm.adjacency.items():
        for v, w in nbrs.items():
            assert rm.adjacency[v][u] == w
            assert w == pytest.approx(
                float(np.linalg.norm(rm.vertices[u] - rm.vertices[v])), abs=1e-9)
            if u < v and checked < 200:
                assert edge_valid(box_square, rm.vertices[u], rm.vertices[v], rho)
                checked += 1


def test_prm_star_checkpoints_are_prefix_runs(empty_square):
    res = prm_star(empty_square, UniformStream(2, 21), 800, checkpoints=[200, 800])
    assert [n for n, _ in res.checkpoints] == [200, 800]
    assert all(c is not None for _, c in res.checkpoints)
    solo = prm_star(empty_square, UniformStream(2, 21), 200)
    assert solo.best_cost == pytest.approx(res.checkpoints[0][1], abs=1e-12)


def test_k_prm_star_runs(empty_square):
    rule = default_rule("k_prm_star", empty_square)
    res = prm_star(empty_square, UniformStream(2, 13), 700, rule)
    assert res.best_cost is not None
    assert res.best_cost <= 1.25


def test_prm_star_halton_guard():
    sc = scenario_from_dict({
        "dimension": 2, "domain": {"min": [0, 0], "max": [1, 1]}, "obstacles": [],
        "start": [0.1, 0.1], "goal": {"center": [0.9, 0.9], "radius": 0.02},
    })
    with pytest.raises(UsageError):
        prm_star(sc, HaltonStream(2), 50)
    res = prm_star(sc, HaltonStream(2), 300)
    assert res.best_cost is not None


def test_prm_star_usage_errors(empty_square):
    with pytest.raises(UsageError):
        prm_star(empty_square, UniformStream(2, 0), 1)
    with pytest.raises(UsageError):
        prm_star(empty_square, UniformStream(2, 0), 100, checkpoints=[50, 20])
    with pytest.raises(UsageError):
        prm_star(empty_square, UniformStream(2, 0), 100, checkpoints=[500])


# --- shortest path -----------------------------------------------------------


def two_vertex_roadmap(weight=5.0):
    rm = Roadmap(vertices={}, adjacency={}, start_id=0, goal_ids=[1])
    rm.add_vertex(0, np.array([0.0, 0.0]))
    rm.add_vertex(1, np.array([weight, 0.0]))
    rm.add_edge(0, 1, weight)
    return rm


def test_shortest_path_two_vertices():
    path = shortest_path(two_vertex_roadmap())
    assert path.cost == pytest.approx(5.0)
    assert len(path.waypoints) == 2


def test_shortest_path_triangle():
    rm = Roadmap(vertices={}, adjacency={}, start_id=0, goal_ids=[1])
    rm.add_vertex(0, np.array([0.0, 0.0]))
    rm.add_vertex(1, np.array([5.0, 0.0]))
    rm.add_vertex(2, np.array([3.0, 0.0]))
    rm.add_edge(0, 2, 3.0)
    rm.add_edge(2, 1, 4.0)
    assert shortest_path(rm).cost == pytest.approx(7.0)
    rm.add_edge(0, 1, 5.0)
    assert shortest_path(rm).cost == pytest.approx(5.0)


def test_shortest_path_disconnected_returns_none():
    rm = Roadmap(vertices={}, adjacency={}, start_id=0, goal_ids=[1])
    rm.add_vertex(0, np.array([0.0, 0.0]))
    rm.add_vertex(1, np.array([1.0, 0.0]))
    assert shortest_path(rm) is None


def test_astar_matches_dijkstra_on_random_roadmap(empty_square):
    res = prm_star(empty_square, UniformStream(2, 31), 500)
    path = shortest_path(res.roadmap)
    ref = dijkstra_reference(res.roadmap)
    assert path.cost == pytest.approx(ref, abs=1e-9)


# --- classic tree planner ----------------------------------------------------


def test_rrt_goal_bias_one_builds_straight_chain():
    sc = scenario_from_dict({
        "dimension": 2, "domain": {"min": [0, 0], "max": [1, 1]}, "obstacles": [],
        "start": [0.1, 0.1], "goal": {"center": [0.9, 0.9], "radius": 0.0},
    })
    eta = 0.25
    steps = math.ceil(OPT_EMPTY / eta)
    res = rrt(sc, UniformStream(2, 0), steps + 2, eta, goal_bias=1.0)
    assert res.best_cost == pytest.approx(OPT_EMPTY, abs=1e-9)
    assert len(res.path.waypoints) == steps + 1


def test_rrt_succeeds_in_empty_square(empty_square):
    res = rrt(empty_square, UniformStream(2, 3), 5000, eta=0.15)
    assert res.best_cost is not None
    assert res.best_cost >= OPT_EMPTY - empty_square.goal.radius - 1e-9


def test_rrt_first_connection_fixes_cost(empty_square):
    res = rrt(empty_square, UniformStream(2, 3), 4000, eta=0.15,
              checkpoints=[1000, 2000, 4000])
    defined = [c for _, c in res.checkpoints if c is not None]
    assert len(set(defined)) <= 1


def test_rrt_obstructed_goal_returns_no_path():
    sc = scenario_from_dict({
        "dimension": 2, "domain": {"min": [0, 0], "max": [1, 1]},
        "obstacles": [{"type": "box", "min": [0.8, 0.8], "max": [1.0, 1.0]}],
        "start": [0.1, 0.1], "goal": {"center": [0.92, 0.92], "radius": 0.05},
    })
    res = rrt(sc, UniformStream(2, 8), 800, eta=0.2)
    assert res.best_cost is None


# --- rewiring tree planner ---------------------------------------------------


def test_rrt_star_empty_square_seed11(empty_square):
    res = rrt_star(empty_square, UniformStream(2, 11), 4000, eta=0.15)
    assert res.best_cost is not None
    assert res.best_cost <= 1.17
    assert res.best_cost >= OPT_EMPTY - empty_square.goal.radius - 1e-9


def test_rrt_star_checkpoints_non_increasing(empty_square):
    res = rrt_star(empty_square, UniformStream(2, 17), 3000, eta=0.15,
                   checkpoints=[500, 1000, 2000, 3000])
    defined = [c for _, c in res.checkpoints if c is not None]
    assert all(b <= a + 1e-12 for a, b in zip(defined, defined[1:]))


def test_rrt_star_box_scene_approaches_oracle(box_square):
    res = rrt_star(box_square, UniformStream(2, 23), 6000, eta=0.1)
    assert res.best_cost is not None
    assert res.best_cost <= 0.88
    assert res.best_cost >= OPT_BOX - box_square.goal.radius - 1e-9


def test_rrt_star_audit_mode_passes(empty_square):
    res = rrt_star(empty_square, UniformStream(2, 29), 1500, eta=0.15,
                   audit_every=250)
    assert res.best_cost is not None


def test_rrt_star_path_is_valid_chain(box_square):
    res = rrt_star(box_square, UniformStream(2, 5), 3000, eta=0.12)
    rho = box_square.default_resolution()
    wp = res.path.waypoints
    assert np.allclose(wp[0], box_square.start)
    assert np.linalg.norm(wp[-1] - box_square.goal.center) <= box_square.goal.radius + 1e-12
    for a, b in zip(wp, wp[1:]):
        assert edge_valid(box_square, a, b, rho)
    assert res.path.cost == pytest.approx(path_cost(wp), abs=1e-9)


def test_rrt_star_deterministic(empty_square):
    a = rrt_star(empty_square, UniformStream(2, 77), 1200, eta=0.15)
    b = rrt_star(empty_square, UniformStream(2, 77), 1200, eta=0.15)
    assert a.best_cost == b.best_cost
    assert a.counters == b.counters


def test_rrt_star_rejects_k_rule(empty_square):
    with pytest.raises(UsageError):
        rrt_star(empty_square, UniformStream(2, 0), 100, eta=0.1,
                 rule=default_rule("k_prm_star", empty_square))


# --- search tree -------------------------------------------------------------


def test_search_tree_costs_and_reparent():
    tree = SearchTree(np.array([0.0, 0.0]))
    a = tree.add(np.array([1.0, 0.0]), 0, 1.0)
    b = tree.add(np.array([2.0, 0.0]), a, 1.0)
    c = tree.add(np.array([2.0, 1.0]), b, 1.0)
    assert tree.cost[c] == pytest.approx(3.0)
    before = tree.cost[[a, b, c]].copy()
    # shortcut b directly to the root with a cheaper edge
    tree.reparent(b, 0, 1.5)
    assert tree.cost[b] == pytest.approx(1.5)
    assert tree.cost[c] == pytest.approx(2.5)
    after = tree.cost[[a, b, c]]
    assert np.all(after <= before + 1e-12)
    tree.audit_costs()


def test_search_tree_audit_detects_corruption():
    tree = SearchTree(np.array([0.0, 0.0]))
    a = tree.add(np.array([1.0, 0.0]), 0, 1.0)
    tree.cost[a] = 0.5
    with pytest.raises(AuditError):
        tree.audit_costs()


def test_search_tree_trace_order():
    tree = SearchTree(np.array([0.0, 0.0]))
    a = tree.add(np.array([1.0, 0.0]), 0, 1.0)
    b = tree.add(np.array([1.0, 1.0]), a, 1.0)
    wp = tree.trace(b)
    assert np.allclose(wp[0], (0, 0))
    assert np.allclose(wp[-1], (1, 1))
    assert len(wp) == 3
