"""Balls, point clouds and the elementary covering kernels.

Balls carry no open/closed flag.  Each operation documents which convention it
uses: open membership is ``|p - c| < r``, closed membership is ``|p - c| <= r``.
Two balls are *disjoint* when ``|c1 - c2| > r1 + r2``; touching balls count as
intersecting.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import BoundViolation, EmptyInputError, InvalidRingError, PreconditionError

# relative slack for boundary membership; see net_radius_slack()
REL_TOL = 1e-9


def workers() -> int:
    """Thread cap for KD-tree queries, read from ``FROSTMAN_THREADS``."""
    try:
        return max(1, int(os.environ.get("FROSTMAN_THREADS", "1")))
    except ValueError:
        return 1


def _as_points(points, dim: int) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.size == 0:
        return arr.reshape(0, dim)
    if arr.ndim == 1:
        arr = arr.reshape(-1, dim)
    return arr


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0:
            raise PreconditionError(f"ball radius must be positive, got {self.radius}")

    @property
    def dim(self) -> int:
        return len(self.center)

    def contains(self, point, closed: bool = False) -> bool:
        dist = float(np.linalg.norm(np.asarray(point, dtype=float) - np.asarray(self.center)))
        return dist <= self.radius if closed else dist < self.radius

    def scaled(self, factor: float) -> "Ball":
        return Ball(self.center, self.radius * factor)


@dataclass
class PointCloud:
    """Finite stand-in for a compact set ``K``.

    ``resolution`` is the radius ``rho`` such that the represented set lies in
    the union of the closed balls ``B(p, rho)`` over the cloud points.
    """

    ambient_dim: int
    points: np.ndarray
    resolution: float = 1e-12

    def __post_init__(self):
        self.ambient_dim = int(self.ambient_dim)
        self.points = _as_points(self.points, self.ambient_dim)
        if self.points.shape[1] != self.ambient_dim:
            raise PreconditionError(
                f"points have dimension {self.points.shape[1]}, expected {self.ambient_dim}"
            )
        self.resolution = float(self.resolution)
        if not self.resolution > 0:
            raise PreconditionError("resolution must be positive")
        if len(self.points) > 1:
            if len(np.unique(self.points, axis=0)) != len(self.points):
                raise PreconditionError("cloud points must be pairwise distinct")

    def __len__(self) -> int:
        return len(self.points)

    def subset(self, index) -> "PointCloud":
        return PointCloud(self.ambient_dim, self.points[np.asarray(index, dtype=int)], self.resolution)

    def diameter(self) -> float:
        if len(self.points) < 2:
            return 0.0
        lo, hi = self.points.min(axis=0), self.points.max(axis=0)
        # bounding-box diagonal is an upper bound; exact for d=1
        if self.ambient_dim == 1:
            return float(hi[0] - lo[0])
        from scipy.spatial.distance import pdist

        if len(self.points) <= 4000:
            return float(pdist(self.points).max())
        return float(np.linalg.norm(hi - lo))


@dataclass
class BallFamily:
    """Ordered family of balls in ``R^d`` with optional subfamily labels (1-based)."""

    ambient_dim: int
    centers: np.ndarray
    radii: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        self.ambient_dim = int(self.ambient_dim)
        self.centers = _as_points(self.centers, self.ambient_dim)
        self.radii = np.asarray(self.radii, dtype=float).reshape(-1)
        if self.centers.shape != (len(self.radii), self.ambient_dim):
            raise PreconditionError(
                f"centers shape {self.centers.shape} does not match {len(self.radii)} radii in R^{self.ambient_dim}"
            )
        if np.any(~(self.radii > 0)):
            raise PreconditionError("all radii must be positive")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=int).reshape(-1)
            if len(self.labels) != len(self.radii):
                raise PreconditionError("every ball needs exactly one label")
            if len(self.labels) and self.labels.min() < 1:
                raise PreconditionError("labels are 1-based")

    @classmethod
    def from_balls(cls, balls: Sequence[Ball], labels=None, dim: int | None = None) -> "BallFamily":
        balls = list(balls)
        if dim is None:
            if not balls:
                raise EmptyInputError("cannot infer dimension of an empty family")
            dim = balls[0].dim
        centers = np.array([b.center for b in balls], dtype=float).reshape(len(balls), dim)
        radii = np.array([b.radius for b in balls], dtype=float)
        return cls(dim, centers, radii, labels)

    @classmethod
    def empty(cls, dim: int) -> "BallFamily":
        return cls(dim, np.zeros((0, dim)), np.zeros(0))

    def __len__(self) -> int:
        return len(self.radii)

    @property
    def balls(self) -> list[Ball]:
        return [Ball(c, r) for c, r in zip(self.centers, self.radii)]

    @property
    def label_count(self) -> int:
        if self.labels is None or not len(self.labels):
            return 1 if len(self) else 0
        return int(self.labels.max())

    def with_labels(self, labels) -> "BallFamily":
        return BallFamily(self.ambient_dim, self.centers, self.radii, labels)

    def take(self, index) -> "BallFamily":
        index = np.asarray(index, dtype=int)
        labels = None if self.labels is None else self.labels[index]
        return BallFamily(self.ambient_dim, self.centers[index], self.radii[index], labels)

    def subfamily(self, label: int) -> "BallFamily":
        if self.labels is None:
            return self.take(np.arange(len(self)) if label == 1 else [])
        return self.take(np.flatnonzero(self.labels == label))

    def scaled(self, factor: float) -> "BallFamily":
        return BallFamily(self.ambient_dim, self.centers, self.radii * factor, self.labels)

    @staticmethod
    def concat(families: Iterable["BallFamily"], dim: int) -> "BallFamily":
        families = [f for f in families if len(f)]
        if not families:
            return BallFamily.empty(dim)
        labels = None
        if all(f.labels is not None for f in families):
            labels = np.concatenate([f.labels for f in families])
        return BallFamily(
            dim,
            np.vstack([f.centers for f in families]),
            np.concatenate([f.radii for f in families]),
            labels,
        )


@dataclass(frozen=True)
class Ring:
    """``B_R(x) minus B_{R-r}(x)``: a ring with center x, radius (width) r and size R."""

    center: tuple
    radius: float
    size: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        if not self.radius > 0:
            raise InvalidRingError("ring radius must be positive")
        if self.radius > self.size:
            raise InvalidRingError(f"ring radius {self.radius} exceeds its size {self.size}")


def unit_ball_volume(d: int) -> float:
    """Volume ``pi_d`` of the unit ball in R^d."""
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def unit_sphere_area(d: int) -> float:
    """Surface area ``omega_{d-1}`` of the unit sphere in R^d (``omega_0 = 2``)."""
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)


def net_radius_slack(delta: float) -> float:
    """Separation used by constructors so that maximality becomes strict coverage.

    A maximal delta'-separated net with delta' slightly below delta puts every
    point at distance <= delta' < delta from the net, i.e. inside the open ball.
    """
    return delta * (1.0 - REL_TOL)


# --------------------------------------------------------------------------
# nets and packing
# --------------------------------------------------------------------------

def _greedy_net_indices(points: np.ndarray, delta: float) -> np.ndarray:
    tree = cKDTree(points)
    covered = np.zeros(len(points), dtype=bool)
    chosen = []
    for i in range(len(points)):
        if covered[i]:
            continue
        chosen.append(i)
        covered[tree.query_ball_point(points[i], delta, workers=workers())] = True
    return np.asarray(chosen, dtype=int)


def max_separated_net(cloud: PointCloud, delta: float) -> PointCloud:
    """Maximal delta-separated subset, built greedily in input order.

    Net points are pairwise more than ``delta`` apart and every cloud point is
    within ``delta`` (closed) of the net.
    """
    if len(cloud) == 0:
        raise EmptyInputError("cannot build a net of an empty cloud")
    if not delta > 0:
        raise PreconditionError("delta must be positive")
    return cloud.subset(_greedy_net_indices(cloud.points, delta))


def packing_count(net: PointCloud, ball: Ball, delta: float | None = None) -> int:
    """Number of net points in the closed ball.

    When ``delta`` (the net separation) is at least ``ball.radius / 3`` the count
    is checked against the ``100^d`` packing bound.
    """
    if len(net) == 0:
        return 0
    dist = np.linalg.norm(net.points - np.asarray(ball.center), axis=1)
    count = int(np.count_nonzero(dist <= ball.radius))
    if delta is not None and delta >= ball.radius / 3 * (1 - 1e-6):
        bound = 100 ** net.ambient_dim
        if count > bound:
            raise BoundViolation(f"packing count {count} exceeds 100^d = {bound}")
    return count


# --------------------------------------------------------------------------
# intersections, Vitali, colouring
# --------------------------------------------------------------------------

def intersecting_pairs(family: BallFamily) -> list[tuple[int, int]]:
    """All index pairs ``i < j`` of balls that are not disjoint."""
    n = len(family)
    if n < 2:
        return []
    tree = cKDTree(family.centers)
    rmax = float(family.radii.max())
    pairs = []
    for i in range(n):
        # widened so rounding inside the tree never drops a tangent neighbour
        for j in tree.query_ball_point(family.centers[i], (family.radii[i] + rmax) * (1 + 1e-9), workers=workers()):
            if j > i:
                dist = np.linalg.norm(family.centers[i] - family.centers[j])
                if dist <= family.radii[i] + family.radii[j]:
                    pairs.append((i, j))
    return pairs


def first_intersecting_pair(family: BallFamily) -> tuple[int, int] | None:
    pairs = intersecting_pairs(family)
    return pairs[0] if pairs else None


def vitali_select(family: BallFamily) -> BallFamily:
    """Greedy largest-radius-first disjoint subfamily (input order breaks ties).

    Every input ball meets a selected ball of at least its own radius, so the
    selected balls with tripled radii cover the union of the input.
    """
    return family.take(vitali_indices(family))


def vitali_indices(family: BallFamily) -> np.ndarray:
    order = np.argsort(-family.radii, kind="stable")
    chosen: list[int] = []
    for i in order:
        if chosen:
            dist = np.linalg.norm(family.centers[chosen] - family.centers[i], axis=1)
            if np.any(dist <= family.radii[chosen] + family.radii[i]):
                continue
        chosen.append(int(i))
    return np.sort(np.asarray(chosen, dtype=int))


def split_into_disjoint(family: BallFamily) -> BallFamily:
    """Greedy colouring of the intersection graph in input order.

    Each label class is pairwise disjoint and the number of labels is at most
    one plus the maximal intersection degree.
    """
    n = len(family)
    labels = np.zeros(n, dtype=int)
    if n == 0:
        return family.with_labels(labels)
    neighbours: list[list[int]] = [[] for _ in range(n)]
    for i, j in intersecting_pairs(family):
        neighbours[i].append(j)
        neighbours[j].append(i)
    for i in range(n):
        used = {labels[j] for j in neighbours[i] if labels[j]}
        k = 1
        while k in used:
            k += 1
        labels[i] = k
    return family.with_labels(labels)


# --------------------------------------------------------------------------
# supercoverings and Morse-type covers
# --------------------------------------------------------------------------

def _inner_third_hits(points: np.ndarray, family: BallFamily, slack: float = 0.0):
    """For each point, indices of balls whose open inner third contains it."""
    if len(family) == 0:
        return [[] for _ in range(len(points))]
    tree = cKDTree(family.centers)
    reach = float(family.radii.max()) / 3 * (1 + slack) * (1 + 1e-9)
    hits = []
    for p in points:
        cand = tree.query_ball_point(p, reach, workers=workers())
        if not cand:
            hits.append([])
            continue
        cand = np.asarray(cand)
        dist = np.linalg.norm(family.centers[cand] - p, axis=1)
        hits.append(sorted(cand[dist < family.radii[cand] / 3 * (1 + slack)].tolist()))
    return hits


def is_supercovering(cloud: PointCloud, family: BallFamily) -> tuple[bool, np.ndarray | None]:
    """Check that every cloud point lies in the open ball ``B_{r/3}(x)`` of some family ball.

    Returns ``(True, None)`` or ``(False, witness)`` with the first uncovered point.
    """
    if len(cloud) == 0:
        return True, None
    if len(family) == 0:
        return False, cloud.points[0].copy()
    tree = cKDTree(family.centers)
    reach = float(family.radii.max()) / 3 * (1 + 1e-9)
    for p in cloud.points:
        cand = tree.query_ball_point(p, reach, workers=workers())
        if cand:
            cand = np.asarray(cand)
            dist = np.linalg.norm(family.centers[cand] - p, axis=1)
            if np.any(dist < family.radii[cand] / 3):
                continue
        return False, p.copy()
    return True, None


def covers(cloud: PointCloud, family: BallFamily, closed: bool = False) -> tuple[bool, np.ndarray | None]:
    """Check that the family (open or closed balls) covers every cloud point."""
    if len(cloud) == 0:
        return True, None
    if len(family) == 0:
        return False, cloud.points[0].copy()
    tree = cKDTree(family.centers)
    reach = float(family.radii.max()) * (1 + 1e-9)
    for p in cloud.points:
        cand = tree.query_ball_point(p, reach, workers=workers())
        if cand:
            cand = np.asarray(cand)
            dist = np.linalg.norm(family.centers[cand] - p, axis=1)
            r = family.radii[cand]
            if np.any(dist <= r if closed else dist < r):
                continue
        return False, p.copy()
    return True, None


def bounded_multiplicity_cover(cloud: PointCloud, family: BallFamily) -> BallFamily:
    """Subfamily covering the cloud, labelled into disjoint subfamilies.

    Hypothesis: every point lies in ``B_{r/3}(y)`` for some ball ``B_r(y)``
    (checked with relative slack ``REL_TOL`` at the boundary).  Balls are kept
    largest first whenever their open inner third contains a point not yet in
    the inner third of a kept ball; boundary points left over are then assigned
    to the largest ball whose slackened inner third holds them.  The number of
    labels is the measured multiplicity, not a theoretical constant.
    """
    strict = _inner_third_hits(cloud.points, family)
    loose = _inner_third_hits(cloud.points, family, slack=REL_TOL)
    for i, h in enumerate(loose):
        if not h:
            raise PreconditionError(
                f"point {cloud.points[i].tolist()} lies in no inner third B_(r/3) of the family"
            )
    members: dict[int, list[int]] = {}
    for i, h in enumerate(strict):
        for b in h:
            members.setdefault(b, []).append(i)
    done = np.zeros(len(cloud), dtype=bool)
    keep = []
    for b in np.argsort(-family.radii, kind="stable"):
        pts = members.get(int(b), [])
        if pts and not done[pts].all():
            keep.append(int(b))
            done[pts] = True
    for i in np.flatnonzero(~done):
        cand = loose[i]
        best = max(cand, key=lambda b: (family.radii[b], -b))
        if best not in keep:
            keep.append(best)
    keep = sorted(keep)
    return split_into_disjoint(family.take(keep).with_labels(None))


def ring_volume(ring: Ring, d: int) -> tuple[float, float]:
    """Exact volume of the ring and the bound ``omega_{d-1} R^{d-1} r``."""
    if ring.radius > ring.size:
        raise InvalidRingError("ring radius exceeds its size")
    R, r = float(ring.size), float(ring.radius)
    exact = unit_ball_volume(d) * (R**d - (R - r) ** d)
    bound = unit_sphere_area(d) * R ** (d - 1) * r
    return exact, bound
