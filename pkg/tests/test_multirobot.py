import numpy as np
import pytest

from aoplan import (
    CompositeConfig,
    Roadmap,
    SaturationError,
    UniformStream,
    UsageError,
    build_per_robot_roadmaps,
    composite_edge_valid,
    drrt_star,
    scenario_from_dict,
    segments_valid,
    shortest_path,
    tensor_expand,
)
from aoplan.multirobot import _TensorTree


def empty_multi(robots):
    return scenario_from_dict({
        "dimension": 2, "domain": {"min": [0, 0], "max": [1, 1]},
        "obstacles": [], "robots": robots,
    })


SWAP_ROBOTS = [
    {"radius": 0.05, "start": [0.1, 0.5], "goal": {"center": [0.9, 0.5], "radius": 0.05}},
    {"radius": 0.05, "start": [0.9, 0.5], "goal": {"center": [0.1, 0.5], "radius": 0.05}},
]


# --- composite edges ---------------------------------------------------------


def cc(points, radii):
    return CompositeConfig(
        per_robot=tuple(np.asarray(p, dtype=float) for p in points),
        robot_radii=tuple(radii),
    )


def test_parallel_motion_far_apart_is_valid():
    sc = empty_multi(SWAP_ROBOTS)
    a = cc([(0.1, 0.2), (0.1, 0.8)], (0.05, 0.05))
    b = cc([(0.9, 0.2), (0.9, 0.8)], (0.05, 0.05))
    assert composite_edge_valid(sc, a, b, 0.01)


def test_swap_along_same_line_collides():
    sc = empty_multi(SWAP_ROBOTS)
    a = cc([(0.1, 0.5), (0.9, 0.5)], (0.05, 0.05))
    b = cc([(0.9, 0.5), (0.1, 0.5)], (0.05, 0.05))
    assert not composite_edge_valid(sc, a, b, 0.01)


def test_single_robot_reduces_to_margin_edge_check():
    sc = scenario_from_dict({
        "dimension": 2, "domain": {"min": [0, 0], "max": [1, 1]},
        "obstacles": [{"type": "box", "min": [0.4, 0.4], "max": [0.6, 0.6]}],
        "robots": [{"radius": 0.05, "start": [0.1, 0.1],
                    "goal": {"center": [0.9, 0.9], "radius": 0.05}}],
    })
    cases = [((0.1, 0.1), (0.9, 0.9)), ((0.1, 0.3), (0.9, 0.3)),
             ((0.1, 0.32), (0.9, 0.32)), ((0.2, 0.2), (0.2, 0.8))]
    for a, b in cases:
        composite = composite_edge_valid(sc, cc([a], [0.05]), cc([b], [0.05]), 0.01)
        plain = bool(segments_valid(
            sc, np.asarray(a)[None, :], np.asarray(b)[None, :], 0.01, margin=0.05)[0])
        assert composite == plain


def test_contact_separation_is_allowed():
    sc = empty_multi(SWAP_ROBOTS)
    # dyadic coordinates so the vertical gap is exactly the radius sum
    radii = (0.0625, 0.0625)
    a = cc([(0.25, 0.25), (0.25, 0.375)], radii)
    b = cc([(0.75, 0.25), (0.75, 0.375)], radii)
    assert composite_edge_valid(sc, a, b, 0.01)
    tighter = cc([(0.75, 0.25), (0.75, 0.3125)], radii)
    assert not composite_edge_valid(sc, a, tighter, 0.01)


def test_mismatched_robot_counts_rejected():
    sc = empty_multi(SWAP_ROBOTS)
    with pytest.raises(UsageError):
        composite_edge_valid(sc, cc([(0.1, 0.1)], [0.05]),
                             cc([(0.2, 0.2), (0.3, 0.3)], [0.05, 0.05]), 0.01)


# --- expansion ---------------------------------------------------------------


def square_roadmap(shift=0.0):
    rm = Roadmap(vertices={}, adjacency={}, start_id=0, goal_ids=[3])
    coords = [(0.2, 0.2), (0.8, 0.2), (0.2, 0.8), (0.8, 0.8)]
    for i, (x, y) in enumerate(coords):
        rm.add_vertex(i, np.array([x + shift, y]))
    for u, v in [(0, 1), (0, 2), (1, 3), (2, 3)]:
        rm.add_edge(u, v, float(np.linalg.norm(rm.vertices[u] - rm.vertices[v])))
    return rm


def hand_tree(scenario, roadmaps):
    # zero radii: the synthetic fixture stacks both robots on one roadmap
    return _TensorTree(scenario, roadmaps, (0.0, 0.0),
                       scenario.default_resolution(), (0, 0))


def test_tensor_expand_picks_componentwise_nearest():
    sc = empty_multi([
        {"radius": 0.02, "start": [0.2, 0.2], "goal": {"center": [0.8, 0.8], "radius": 0.05}},
        {"radius": 0.02, "start": [0.2, 0.2], "goal": {"center": [0.8, 0.8], "radius": 0.05}},
    ])
    roadmaps = [square_roadmap(), square_roadmap()]
    tree = hand_tree(sc, roadmaps)
    q = cc([(0.85, 0.15), (0.15, 0.9)], (0.02, 0.02))
    key = tensor_expand(tree, roadmaps, q)
    assert key is not None
    # brute-force oracle: enumerate the whole adjacent candidate product
    best = None
    for c0 in [0, 1, 2]:
        for c1 in [0, 1, 2]:
            d = (np.linalg.norm(roadmaps[0].vertices[c0] - np.asarray(q.per_robot[0]))
                 + np.linalg.norm(roadmaps[1].vertices[c1] - np.asarray(q.per_robot[1])))
            if best is None or d < best[0]:
                best = (d, (c0, c1))
    assert key == best[1]
    assert key == (1, 2)


def test_tensor_expand_rejects_stay_put():
    sc = empty_multi([
        {"radius": 0.02, "start": [0.2, 0.2], "goal": {"center": [0.8, 0.8], "radius": 0.05}},
        {"radius": 0.02, "start": [0.2, 0.2], "goal": {"center": [0.8, 0.8], "radius": 0.05}},
    ])
    roadmaps = [square_roadmap(), square_roadmap()]
    tree = hand_tree(sc, roadmaps)
    q = cc([(0.2, 0.2), (0.2, 0.2)], (0.02, 0.02))
    assert tensor_expand(tree, roadmaps, q) is None


def test_tensor_expand_rejects_invalid_composite_edge():
    sc = scenario_from_dict({
        "dimension": 2, "domain": {"min": [0, 0], "max": [1, 1]},
        "obstacles": [{"type": "box", "min": [0.4, 0.4], "max": [0.6, 0.6]}],
        "robots": [{"radius": 0.02, "start": [0.1, 0.5],
                    "goal": {"center": [0.9, 0.5], "radius": 0.05}}],
    })
    rm = Roadmap(vertices={}, adjacency={}, start_id=0, goal_ids=[1])
    rm.add_vertex(0, np.array([0.1, 0.5]))
    rm.add_vertex(1, np.array([0.9, 0.5]))
    rm.add_edge(0, 1, 0.8)  # hand-planted edge straight through the box
    tree = _TensorTree(sc, [rm], (0.02,), sc.default_resolution(), (0,))
    q = cc([(0.9, 0.5)], (0.02,))
    assert tensor_expand(tree, [rm], q) is None


# --- per-robot roadmaps ------------------------------------------------------


def test_two_connected_roadmaps_in_empty_square():
    sc = empty_multi(SWAP_ROBOTS)
    roadmaps = build_per_robot_roadmaps(sc, None, UniformStream(2, 15), 600)
    assert len(roadmaps) == 2
    for rm in roadmaps:
        path = shortest_path(rm)
        assert path is not None


def test_single_robot_roadmap_is_plain_prm(swap_scenario):
    sc = empty_multi([SWAP_ROBOTS[0]])
    roadmaps = build_per_robot_roadmaps(sc, None, UniformStream(2, 3), 300)
    assert len(roadmaps) == 1
    rm = roadmaps[0]
    assert len(rm.vertices) == 302
    assert np.allclose(rm.vertices[0], (0.1, 0.5))
    assert np.allclose(rm.vertices[1], (0.9, 0.5))


def test_oversized_robot_saturates():
    sc = scenario_from_dict({
        "dimension": 2, "domain": {"min": [0, 0], "max": [1, 1]},
        "obstacles": [{"type": "box", "min": [0.45, 0.45], "max": [0.55, 0.55]}],
        "start": [0.1, 0.1], "goal": {"center": [0.9, 0.9], "radius": 0.05},
    })
    from aoplan import GoalRegion, RobotSpec

    big = RobotSpec(radius=2.0, start=np.array([0.1, 0.1]),
                    goal=GoalRegion(center=np.array([0.9, 0.9]), radius=0.05))
    with pytest.raises(SaturationError):
        build_per_robot_roadmaps(sc, [big], UniformStream(2, 0), 50)


# --- full planner ------------------------------------------------------------


def test_drrt_star_solves_swap_and_separation_audit(swap_scenario):
    res = drrt_star(swap_scenario, None, UniformStream(2, 42), 200, 4000,
                    audit_every=1000)
    assert res.best_cost is not None
    path = res.path
    n_pts = len(path.per_robot[0])
    assert all(len(track) == n_pts for track in path.per_robot)
    assert np.allclose(path.per_robot[0][0], (0.1, 0.5))
    assert np.allclose(path.per_robot[1][0], (0.9, 0.5))
    rho = swap_scenario.default_resolution()
    radii = tuple(rb.radius for rb in swap_scenario.robots)
    for k in range(n_pts - 1):
        a = cc([track[k] for track in path.per_robot], radii)
        b = cc([track[k + 1] for track in path.per_robot], radii)
        assert composite_edge_valid(swap_scenario, a, b, rho)
    # composite cost is the sum of per-robot polyline lengths
    total = sum(
        float(np.linalg.norm(np.diff(np.asarray(track), axis=0), axis=1).sum())
        for track in path.per_robot
    )
    assert res.best_cost == pytest.approx(total, abs=1e-9)


def test_drrt_star_single_robot_matches_graph_optimum():
    sc = empty_multi([{"radius": 0.05, "start": [0.1, 0.1],
                       "goal": {"center": [0.9, 0.9], "radius": 0.05}}])
    res = drrt_star(sc, None, UniformStream(2, 3), 200, 4000)
    ref = shortest_path(res.roadmaps[0])
    assert res.best_cost == pytest.approx(ref.cost, abs=1e-9)


def test_drrt_star_infeasible_corridor_swap():
    sc = scenario_from_dict({
        "dimension": 2, "domain": {"min": [0, 0], "max": [1, 0.5]}, "obstacles": [],
        "robots": [
            {"radius": 0.3, "start": [0.1, 0.25],
             "goal": {"center": [0.9, 0.25], "radius": 0.05}},
            {"radius": 0.3, "start": [0.9, 0.25],
             "goal": {"center": [0.1, 0.25], "radius": 0.05}},
        ],
    })
    res = drrt_star(sc, None, UniformStream(2, 1), 100, 1500)
    assert res.best_cost is None
    assert res.path is None


def test_drrt_star_overlapping_starts_rejected():
    sc = empty_multi([
        {"radius": 0.3, "start": [0.4, 0.5], "goal": {"center": [0.9, 0.5], "radius": 0.05}},
        {"radius": 0.3, "start": [0.6, 0.5], "goal": {"center": [0.1, 0.5], "radius": 0.05}},
    ])
    with pytest.raises(UsageError):
        drrt_star(sc, None, UniformStream(2, 0), 100, 200)


def test_drrt_star_deterministic(swap_scenario):
    a = drrt_star(swap_scenario, None, UniformStream(2, 9), 150, 1200)
    b = drrt_star(swap_scenario, None, UniformStream(2, 9), 150, 1200)
    assert a.best_cost == b.best_cost
    assert a.counters == b.counters
