"""Charging-point lookup structures and spatio-temporal delivery clustering.

The planner preprocesses charging points into a 3-d tree over
(x, y, unit cost), min-max normalized per dimension, so "near and cheap"
stations can be found with one query. Deliveries are grouped with a
density-based spatio-temporal clustering keyed on location and window end
time, then ordered by urgency.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import ConfigError
from .instance import ChargingPoint, Delivery, Location


# ---------------------------------------------------------------------------
# Normalized 3-d tree over charging options


@dataclass(frozen=True)
class _KdNode:
    index: int  # position in the tree's point list
    axis: int
    left: "_KdNode | None"
    right: "_KdNode | None"


class NormalizedKdTree:
    """Balanced 3-d tree over (x, y, unit_cost), min-max normalized.

    Normalization bounds are fixed at build time; queries are normalized with
    the same bounds and clamped into [0, 1]. A degenerate dimension
    (min == max) maps to the constant 0. Ties on distance break toward the
    lexicographically smallest charging-point id, exactly matching a linear
    scan with the same rule.
    """

    def __init__(self, cps: Sequence[ChargingPoint]):
        if not cps:
            raise ConfigError("at least one charging location is required")
        self.cps: tuple[ChargingPoint, ...] = tuple(cps)
        raw = [(c.location.x, c.location.y, c.unit_cost) for c in self.cps]
        self.bounds: tuple[tuple[float, float], ...] = tuple(
            (min(v[d] for v in raw), max(v[d] for v in raw)) for d in range(3)
        )
        self.min_unit_cost: float = min(c.unit_cost for c in self.cps)
        self._points: list[tuple[float, float, float]] = [
            self._normalize_raw(v) for v in raw
        ]
        self._root = self._build(list(range(len(self._points))), 0)

    def __len__(self) -> int:
        return len(self.cps)

    def _normalize_raw(self, value: tuple[float, float, float]) -> tuple[float, float, float]:
        out = []
        for d in range(3):
            lo, hi = self.bounds[d]
            if hi == lo:
                out.append(0.0)
            else:
                out.append(min(max((value[d] - lo) / (hi - lo), 0.0), 1.0))
        return tuple(out)

    def _build(self, indices: list[int], depth: int) -> _KdNode | None:
        if not indices:
            return None
        axis = depth % 3
        indices.sort(key=lambda i: (self._points[i][axis], self.cps[i].id))
        mid = len(indices) // 2
        return _KdNode(
            index=indices[mid],
            axis=axis,
            left=self._build(indices[:mid], depth + 1),
            right=self._build(indices[mid + 1 :], depth + 1),
        )

    def normalized_points(self) -> list[tuple[float, float, float]]:
        return list(self._points)

    def query(self, point: tuple[float, float, float]) -> ChargingPoint:
        """Nearest stored charging point to a raw (x, y, unit_cost) query."""
        q = self._normalize_raw(point)
        best: tuple[float, str, int] | None = None

        def visit(node: _KdNode | None) -> None:
            nonlocal best
            if node is None:
                return
            p = self._points[node.index]
            d2 = (p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2 + (p[2] - q[2]) ** 2
            key = (d2, self.cps[node.index].id, node.index)
            if best is None or key < best:
                best = key
            diff = q[node.axis] - p[node.axis]
            near, far = (node.left, node.right) if diff < 0 else (node.right, node.left)
            visit(near)
            if best is None or diff * diff <= best[0]:
                visit(far)

        visit(self._root)
        assert best is not None
        return self.cps[best[2]]


def build_kdtree(
    cps: Sequence[ChargingPoint], depot_as_cp: ChargingPoint | None = None
) -> NormalizedKdTree:
    """Build the normalized charging-option tree.

    ``depot_as_cp`` optionally adds the depot to the candidate set; by
    default only public charging points participate, so plans never route a
    mid-day charging stop through the depot.
    """
    points = list(cps)
    if depot_as_cp is not None:
        points.append(depot_as_cp)
    return NormalizedKdTree(points)


def nearest_cp(tree: NormalizedKdTree, query_location: Location) -> ChargingPoint:
    """Cheapest-and-nearest charging point for an arbitrary location.

    The query's cost coordinate is pinned to the minimum unit cost over all
    stored charging points, so the search trades off proximity against price.
    """
    return tree.query((query_location.x, query_location.y, tree.min_unit_cost))


# ---------------------------------------------------------------------------
# Spatio-temporal clustering


@dataclass(frozen=True)
class DeliveryCluster:
    """A group of deliveries close in space and deadline.

    ``members`` is sorted ascending by window end (ties by id);
    ``earliest_deadline`` is the smallest member window end.
    """

    members: tuple[str, ...]
    earliest_deadline: float


def _euclidean(a: Location, b: Location) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def st_dbscan(
    deliveries: Sequence[Delivery],
    eps_spatial: float,
    eps_temporal: float,
    min_pts: int,
    distance_fn: Callable[[Location, Location], float] | None = None,
) -> list[DeliveryCluster]:
    """Density-based clustering over (location, window end time).

    Two deliveries are neighbors when their spatial distance is at most
    ``eps_spatial`` AND their window-end gap is at most ``eps_temporal``.
    A point is a core point when its neighborhood (self included) has at
    least ``min_pts`` members. Points are seeded in ascending id order and
    clusters grow breadth-first, so the partition is deterministic. Noise
    points become singleton clusters: every delivery lands in exactly one
    cluster. The cluster list is sorted ascending by earliest deadline.
    """
    if not (eps_spatial > 0 and eps_temporal > 0):
        raise ConfigError("eps_spatial and eps_temporal must be > 0")
    if min_pts < 1:
        raise ConfigError("min_pts must be >= 1")
    dist = distance_fn or _euclidean
    pts = sorted(deliveries, key=lambda d: d.id)
    n = len(pts)

    def neighbors(i: int) -> list[int]:
        out = []
        for j in range(n):
            if (
                dist(pts[i].location, pts[j].location) <= eps_spatial
                and abs(pts[i].window_end - pts[j].window_end) <= eps_temporal
            ):
                out.append(j)
        return out

    UNSEEN, NOISE = -2, -1
    labels = [UNSEEN] * n
    cluster_id = 0
    for i in range(n):
        if labels[i] != UNSEEN:
            continue
        seed_neighbors = neighbors(i)
        if len(seed_neighbors) < min_pts:
            labels[i] = NOISE
            continue
        labels[i] = cluster_id
        queue = deque(seed_neighbors)
        while queue:
            j = queue.popleft()
            if labels[j] == NOISE:
                labels[j] = cluster_id  # border point
            if labels[j] != UNSEEN:
                continue
            labels[j] = cluster_id
            j_neighbors = neighbors(j)
            if len(j_neighbors) >= min_pts:
                queue.extend(j_neighbors)
        cluster_id += 1

    groups: dict[int, list[Delivery]] = {}
    for i, lbl in enumerate(labels):
        if lbl == NOISE:
            groups[cluster_id] = [pts[i]]  # singleton cluster for noise
            cluster_id += 1
        else:
            groups.setdefault(lbl, []).append(pts[i])

    clusters = []
    for members in groups.values():
        members.sort(key=lambda d: (d.window_end, d.id))
        clusters.append(
            DeliveryCluster(
                members=tuple(d.id for d in members),
                earliest_deadline=members[0].window_end,
            )
        )
    clusters.sort(key=lambda g: (g.earliest_deadline, g.members[0]))
    return clusters
