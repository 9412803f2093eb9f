"""Independent brute-force references for 2-D box scenes.

The visibility-graph optimum is the ground truth the convergence suites
compare against; the hyperball-cover check certifies that a returned path
admits the clearance volume the convergence arguments assume.
"""

from __future__ import annotations

import math
from heapq import heappush, heappop
from typing import Optional

import numpy as np

from .errors import UsageError
from .geometry import (
    BoxObstacle,
    Path,
    Scenario,
    clearance_of_points,
    points_valid,
    segments_valid,
)


def _visibility_vertices(scenario: Scenario, eps_vg: float) -> list:
    """Start, goal center, and obstacle corners pushed out by eps_vg.

    The true optimum can touch obstacle corners; the tiny outward inflation
    keeps oracle paths strictly valid under closed-obstacle semantics at a
    cost error bounded by the corner count times eps_vg.
    """
    verts = [np.asarray(scenario.start, dtype=float),
             np.asarray(scenario.goal.center, dtype=float)]
    for ob in scenario.obstacles:
        lo, hi = ob.lo, ob.hi
        for sx, sy in ((-1, -1), (-1, 1), (1, -1), (1, 1)):
            cx = (lo[0] if sx < 0 else hi[0]) + sx * eps_vg
            cy = (lo[1] if sy < 0 else hi[1]) + sy * eps_vg
            verts.append(np.array([cx, cy]))
    return verts


def optimal_cost_2d_boxes(
    scenario: Scenario,
    eps_vg: float = 1e-6,
    resolution: Optional[float] = None,
) -> Optional[float]:
    """Shortest start-to-goal-center cost through the visibility graph.

    Only defined for 2-D scenarios with box obstacles; exact up to the
    eps_vg corner inflation.  Returns None when start and goal are
    disconnected.
    """
    if scenario.dimension != 2:
        raise UsageError("the box-scene oracle is 2-D only")
    if any(not isinstance(ob, BoxObstacle) for ob in scenario.obstacles):
        raise UsageError("the box-scene oracle supports box obstacles only")
    if scenario.start is None or scenario.goal is None:
        raise UsageError("oracle needs a start and a goal")
    if resolution is None:
        resolution = 1e-4 * scenario.diagonal

    verts = _visibility_vertices(scenario, eps_vg)
    n = len(verts)
    pts = np.asarray(verts)

    # all-pairs candidate edges, validated at the fine oracle resolution
    ia, ib = np.triu_indices(n, k=1)
    valid = segments_valid(scenario, pts[ia], pts[ib], resolution)
    weights = np.linalg.norm(pts[ia] - pts[ib], axis=1)
    adj = [[] for _ in range(n)]
    for a, b, ok, w in zip(ia, ib, valid, weights):
        if ok:
            adj[a].append((int(b), float(w)))
            adj[b].append((int(a), float(w)))

    if scenario.start is not None and float(np.linalg.norm(pts[0] - pts[1])) == 0.0:
        return 0.0

    dist = [math.inf] * n
    dist[0] = 0.0
    heap = [(0.0, 0)]
    done = [False] * n
    while heap:
        dv, v = heappop(heap)
        if done[v]:
            continue
        done[v] = True
        if v == 1:
            return dv
        for u, w in adj[v]:
            nd = dv + w
            if nd < dist[u]:
                dist[u] = nd
                heappush(heap, (nd, u))
    return None


def tiling_cover_check(scenario: Scenario, path: Path, ball_radius: float) -> bool:
    """Certify a path with a chain of overlapping free balls.

    True iff consecutive waypoints are within ball_radius of each other and
    the ball of that radius around every waypoint stays inside the free
    space (clearance at least the radius).  This is the executable form of
    the hyperball-tiling construction used in the convergence analysis.
    """
    if ball_radius <= 0.0:
        raise UsageError("ball_radius must be > 0")
    wps = [np.asarray(w, dtype=float) for w in path.waypoints]
    for a, b in zip(wps[:-1], wps[1:]):
        if float(np.linalg.norm(b - a)) > ball_radius:
            return False
    chunk = 100_000
    for lo in range(0, len(wps), chunk):
        block = np.asarray(wps[lo:lo + chunk])
        if not points_valid(scenario, block).all():
            return False
        if float(clearance_of_points(scenario, block).min()) < ball_radius:
            return False
    return True
