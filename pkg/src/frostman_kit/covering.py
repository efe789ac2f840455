"""Covering constructions: local-search covers, Morse-type covers and supercoverings.

Every constructor returns a labelled ``BallFamily`` and a ``CoveringReport``.
``verify_covering`` recomputes the report fields from the family alone.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

from .errors import BoundViolation, BudgetError, DivergenceError, PreconditionError, ResolutionError
from .gauge import GaugeFunction, as_gauge, check_d_falling, check_regular, gauge_label
from .geometry import (
    REL_TOL,
    Ball,
    BallFamily,
    PointCloud,
    _greedy_net_indices,
    _inner_third_hits,
    bounded_multiplicity_cover,
    covers,
    first_intersecting_pair,
    is_supercovering,
    net_radius_slack,
    split_into_disjoint,
    unit_ball_volume,
    unit_sphere_area,
    vitali_indices,
    workers,
)

MIN_RADIUS = 1e-12


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------

@dataclass
class CoveringReport:
    alpha_or_gauge: float | str
    budget_a: float | None
    per_label_sums: list
    decay_ratio_q: float | None
    label_count: int
    valid_supercover: bool
    valid_cover: bool = True
    disjoint_labels: bool = True
    violations: list = field(default_factory=list)
    constants: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def checked_fields(self) -> dict:
        """Fields recomputable from the family alone (everything but constructor constants)."""
        out = self.to_dict()
        out.pop("constants")
        return out


def _label_sums(family: BallFamily, g: GaugeFunction) -> list[float]:
    n = family.label_count
    if n == 0:
        return []
    labels = family.labels if family.labels is not None else np.ones(len(family), dtype=int)
    vals = np.asarray(g(family.radii), dtype=float)
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(1, n + 2))
    return [math.fsum(vals[order[bounds[k]:bounds[k + 1]]]) for k in range(n)]


def _log_decay_constant(sums: list[float], q: float, a: float) -> float:
    """``max_j log(s_j / (q^j a))`` over nonzero sums, computed in log space."""
    lq, la = math.log(q), math.log(a)
    vals = [math.log(s) - (j + 1) * lq - la for j, s in enumerate(sums) if s > 0]
    return max(vals) if vals else -math.inf


def _safe_exp(x: float) -> float | None:
    if x == -math.inf:
        return 0.0
    return math.exp(x) if x < 700 else None


def verify_covering(cloud: PointCloud, family: BallFamily, mode: str = "supercover", gauge=1.0,
                    budget: float | None = None, q: float | None = None) -> CoveringReport:
    """Recompute coverage, supercoverage, per-label disjointness and per-label gauge sums."""
    if mode not in ("cover", "supercover"):
        raise PreconditionError(f"mode must be 'cover' or 'supercover', got {mode!r}")
    g = as_gauge(gauge)
    sums = _label_sums(family, g)
    violations = []
    disjoint = True
    if family.labels is not None:
        for k in range(1, family.label_count + 1):
            idx = np.flatnonzero(family.labels == k)
            pair = first_intersecting_pair(family.take(idx))
            if pair is not None:
                disjoint = False
                violations.append(f"label {k}: balls {int(idx[pair[0]])} and {int(idx[pair[1]])} intersect")
    sup_ok, sup_wit = is_supercovering(cloud, family)
    cov_ok, cov_wit = covers(cloud, family)
    if mode == "supercover" and not sup_ok:
        violations.append(f"point {sup_wit.tolist()} is in no inner third")
    if mode == "cover" and not cov_ok:
        violations.append(f"point {cov_wit.tolist()} is uncovered")
    report = CoveringReport(
        alpha_or_gauge=gauge_label(g),
        budget_a=None if budget is None else float(budget),
        per_label_sums=sums,
        decay_ratio_q=None if q is None else float(q),
        label_count=family.label_count,
        valid_supercover=sup_ok,
        valid_cover=cov_ok,
        disjoint_labels=disjoint,
        violations=violations,
    )
    if q is not None and budget:
        logc = _log_decay_constant(sums, q, budget)
        report.constants = {"log_C_measured": logc, "C_measured": _safe_exp(logc)}
    return report


# --------------------------------------------------------------------------
# local-search covers
# --------------------------------------------------------------------------

@dataclass
class CoverSearchResult:
    family: BallFamily
    center_index: np.ndarray
    greedy_cost: float
    cost: float
    history: list


class _CoverState:
    """Mutable ball set over a fixed cloud with per-point coverage counts."""

    def __init__(self, pts, tree, pad, cost):
        self.pts, self.tree, self.pad, self.cost = pts, tree, pad, cost
        self.count = np.zeros(len(pts), dtype=int)
        self.balls: dict[int, list] = {}
        self._next = 0

    def members(self, c: int, r: float) -> np.ndarray:
        reach = r - self.pad
        if reach < 0:
            return np.zeros(0, dtype=int)
        cand = np.asarray(self.tree.query_ball_point(self.pts[c], reach * (1 + 1e-12) + 1e-300,
                                                     workers=workers()), dtype=int)
        if not len(cand):
            return cand
        dist = np.linalg.norm(self.pts[cand] - self.pts[c], axis=1)
        return cand[dist + self.pad <= r * (1 + 1e-12)]

    def add(self, c: int, r: float) -> int:
        key = self._next
        self._next += 1
        mem = self.members(c, r)
        self.balls[key] = [c, r, mem]
        self.count[mem] += 1
        return key

    def remove(self, key: int):
        _, _, mem = self.balls.pop(key)
        self.count[mem] -= 1

    def replace(self, key: int, c: int, r: float):
        self.remove(key)
        mem = self.members(c, r)
        self.balls[key] = [c, r, mem]
        self.count[mem] += 1

    def total(self) -> float:
        if not self.balls:
            return 0.0
        return math.fsum(np.atleast_1d(self.cost(np.array([b[1] for b in self.balls.values()]))))


def _one_cost(cost: Callable, r: float) -> float:
    return float(np.atleast_1d(cost(np.array([r])))[0])


def _greedy_cover(pts, tree, epsilon, pad, floor, cost):
    """Lazy-heap weighted set cover over (cloud centre, breakpoint radius) candidates."""
    n = len(pts)
    reach = epsilon - pad
    cands = []
    heap = []
    for i in range(n):
        nb = np.asarray(tree.query_ball_point(pts[i], reach * (1 + 1e-12), workers=workers()), dtype=int)
        dist = np.linalg.norm(pts[nb] - pts[i], axis=1)
        order = np.argsort(dist, kind="stable")
        nb, dist = nb[order], dist[order]
        radii = np.maximum(dist + pad, floor)
        keep = radii <= epsilon * (1 + 1e-12)
        nb, dist, radii = nb[keep], dist[keep], np.minimum(radii[keep], epsilon)
        # one candidate per distinct radius, covering every neighbour up to it
        ends = np.flatnonzero(np.r_[np.diff(radii) > 0, True]) + 1
        costs = np.atleast_1d(cost(radii[ends - 1]))
        cands.append((nb, radii))
        for k, e in enumerate(ends):
            heapq.heappush(heap, (costs[k] / e, -int(e), i, int(e)))
    uncovered = np.ones(n, dtype=bool)
    left = n
    chosen = []
    while left:
        key, neg, i, e = heapq.heappop(heap)
        nb, radii = cands[i]
        fresh = int(uncovered[nb[:e]].sum())
        if fresh == 0:
            continue
        if fresh != -neg:
            heapq.heappush(heap, (_one_cost(cost, radii[e - 1]) / fresh, -fresh, i, e))
            continue
        chosen.append((i, float(radii[e - 1])))
        uncovered[nb[:e]] = False
        left -= fresh
    return chosen


def cover_search(cloud: PointCloud, epsilon: float, cost: Callable, seed: int = 0, iterations: int = 100,
                 pad: float = 0.0, warm_start: BallFamily | None = None) -> CoverSearchResult:
    """Closed-ball cover with cloud centres and radii ``<= epsilon`` minimising ``sum cost(r)``.

    A ball ``B(x, r)`` covers ``p`` when ``|p - x| + pad <= r``; radii are at
    least ``max(pad, 1e-12)``.  Starts from a greedy weighted set cover (or
    from ``warm_start`` when that is cheaper) and applies drop, shrink and
    recentre moves in a seeded order, accepting only strict decreases.
    """
    if not epsilon > 0:
        raise PreconditionError("epsilon must be positive")
    floor = max(pad, MIN_RADIUS)
    if floor > epsilon:
        raise ResolutionError(f"epsilon={epsilon} is below the radius floor {floor}")
    pts = cloud.points
    n = len(pts)
    if n == 0:
        return CoverSearchResult(BallFamily.empty(cloud.ambient_dim), np.zeros(0, int), 0.0, 0.0, [0.0])
    tree = cKDTree(pts)
    rng = np.random.default_rng(seed)
    state = _CoverState(pts, tree, pad, cost)
    for c, r in _greedy_cover(pts, tree, epsilon, pad, floor, cost):
        state.add(c, r)
    greedy_cost = state.total()

    if warm_start is not None and len(warm_start):
        alt = _CoverState(pts, tree, pad, cost)
        index = {tuple(p): i for i, p in enumerate(pts)}
        ok = True
        for x, r in zip(warm_start.centers, warm_start.radii):
            i = index.get(tuple(x))
            if i is None or r > epsilon * (1 + 1e-12):
                ok = False
                break
            alt.add(i, float(min(r, epsilon)))
        if ok and np.all(alt.count > 0) and alt.total() < greedy_cost:
            state = alt

    history = [state.total()]
    for _ in range(iterations):
        improved = False
        for key in rng.permutation(sorted(state.balls)):
            key = int(key)
            if key not in state.balls:
                continue
            c, r, mem = state.balls[key]
            uniq = mem[state.count[mem] == 1]
            if len(uniq) == 0:
                state.remove(key)
                improved = True
                history.append(state.total())
                continue
            cur = _one_cost(cost, r)
            best = (cur, c, r)
            need = float(np.max(np.linalg.norm(pts[uniq] - pts[c], axis=1))) + pad
            r_new = max(need, floor)
            if r_new < r * (1 - 1e-12):
                best = (_one_cost(cost, r_new), c, r_new)
            pool = set(uniq.tolist())
            others = mem[state.count[mem] > 1]
            if len(others):
                pool.update(rng.choice(others, size=min(8, len(others)), replace=False).tolist())
            for c2 in sorted(pool):
                if c2 == c:
                    continue
                r2 = max(float(np.max(np.linalg.norm(pts[uniq] - pts[c2], axis=1))) + pad, floor)
                if r2 > epsilon * (1 + 1e-12):
                    continue
                r2 = min(r2, epsilon)
                k2 = _one_cost(cost, r2)
                if k2 < best[0]:
                    best = (k2, c2, r2)
            if best[0] < cur * (1 - 1e-12):
                state.replace(key, best[1], best[2])
                improved = True
                history.append(state.total())
        if not improved:
            break

    if np.any(state.count == 0):
        raise BoundViolation("local search left a cloud point uncovered")
    items = sorted(state.balls.values(), key=lambda b: (b[0], b[1]))
    idx = np.array([b[0] for b in items], dtype=int)
    radii = np.array([b[1] for b in items], dtype=float)
    fam = BallFamily(cloud.ambient_dim, pts[idx], radii)
    return CoverSearchResult(fam, idx, greedy_cost, state.total(), history)


def near_optimal_cover(cloud: PointCloud, epsilon: float, alpha, seed: int = 0, iterations: int = 100,
                       pad: float = 0.0) -> BallFamily:
    """Local minimum of ``sum r^alpha`` (or ``sum f(r)``) over closed covers with radii ``<= epsilon``."""
    g = as_gauge(alpha)
    return cover_search(cloud, epsilon, g, seed=seed, iterations=iterations, pad=pad).family


# --------------------------------------------------------------------------
# Morse-type cover from a Hausdorff cover
# --------------------------------------------------------------------------

def cover_from_hausdorff(cloud: PointCloud, raw_cover: BallFamily, epsilon: float, alpha,
                         a: float | None = None, diameter_ratio: float = 1e-3):
    """Cover by balls ``B(x, 3 diam D)`` with ``x`` in ``D`` and in the cloud, split into disjoint labels.

    ``raw_cover`` is a family of closed balls ``D`` (diameter ``2r``) with
    ``diam D <= diameter_ratio * epsilon`` covering the cloud.  Each label
    satisfies ``sum r^alpha <= 3^alpha sum (diam D)^alpha <= 3^alpha a``.
    """
    g = as_gauge(alpha)
    dim = cloud.ambient_dim
    if len(raw_cover) == 0:
        if len(cloud):
            raise PreconditionError(f"point {cloud.points[0].tolist()} is not covered by the raw cover")
        return BallFamily.empty(dim).with_labels(np.zeros(0, int)), verify_covering(cloud, BallFamily.empty(dim), "cover", g, a)
    diam = 2 * raw_cover.radii
    if np.any(diam > diameter_ratio * epsilon * (1 + 1e-12)):
        raise PreconditionError(f"raw cover diameters must not exceed {diameter_ratio} * epsilon")
    raw_sum = math.fsum(np.atleast_1d(g(diam)))
    if a is None:
        a = raw_sum
    elif raw_sum > a:
        raise BudgetError(f"raw cover sum {raw_sum} exceeds the budget a = {a}")
    ok, wit = covers(cloud, raw_cover.scaled(1 + 1e-12), closed=True)
    if not ok:
        raise PreconditionError(f"point {wit.tolist()} is not covered by the raw cover")
    tree = cKDTree(cloud.points)
    centers, radii, ratio = [], [], 1.0
    for x, r, dm in zip(raw_cover.centers, raw_cover.radii, diam):
        inside = tree.query_ball_point(x, r * (1 + 1e-12), workers=workers())
        if not inside:
            continue
        centers.append(cloud.points[min(inside)])
        radii.append(3 * dm)
        ratio = max(ratio, float(g(3 * dm)) / float(g(dm)))
    base = BallFamily(dim, np.asarray(centers).reshape(-1, dim), np.asarray(radii))
    fam = bounded_multiplicity_cover(cloud, base)
    report = verify_covering(cloud, fam, "cover", g, a)
    bound = ratio * a
    bad = [j + 1 for j, s in enumerate(report.per_label_sums) if s > bound * (1 + 1e-12)]
    report.constants = {
        "C": ratio,
        "theta_measured": fam.label_count,
        "raw_sum": raw_sum,
        "diameter_ratio": diameter_ratio,
        "bound_ok": not bad,
        "labels_over_bound": bad,
    }
    return fam, report


# --------------------------------------------------------------------------
# geometric-decay supercovering
# --------------------------------------------------------------------------

def decay_ratio(alpha) -> float:
    """``q = 1 - 9^(-alpha)``."""
    return 1.0 - 9.0 ** (-float(alpha))


def log_geometric_constant(alpha: float, d: int) -> float:
    """Log of ``q^(-100^d - 1) 3^alpha 100^d 9^d``; the value itself overflows for d >= 2."""
    q = decay_ratio(alpha)
    return -(100**d + 1) * math.log(q) + alpha * math.log(3) + d * math.log(100) + d * math.log(9)


def _gauge_ratios(g: GaugeFunction, lo: float, hi: float) -> tuple[float, float]:
    """Sampled ``sup g(9r)/g(r)`` and ``sup g(3r)/g(r)`` on ``[lo, hi]``."""
    grid = np.geomspace(max(lo, 1e-300), hi, 200)
    r9 = check_regular(g, 9.0, grid).ratio_bounds[1]
    r3 = check_regular(g, 3.0, grid).ratio_bounds[1]
    return r9, r3


def _check_budget(a, base_sum):
    if not a > 0:
        raise PreconditionError("budget a must be positive")
    if base_sum >= a:
        raise BudgetError(f"budget a = {a} does not exceed the base cover sum {base_sum}")


def supercover_geometric(cloud: PointCloud, alpha, epsilon: float, a: float, seed: int = 0,
                         iterations: int = 100):
    """Supercovering whose labels ``j`` carry ``sum f(r) <= C q^j a``.

    The base cover is split at radius ``epsilon / 9``.  Points covered by the
    large balls get ``epsilon``-balls on an ``epsilon/3``-net, coloured into at
    most ``100^d`` labels.  The small balls are tripled and peeled by repeated
    Vitali selection into labels ``100^d + 1, 100^d + 2, ...``.
    """
    g = as_gauge(alpha)
    d = cloud.ambient_dim
    beta = g.exponent
    if beta is not None and not 0 < beta <= d:
        raise PreconditionError(f"alpha must lie in (0, {d}]")
    if not epsilon > 0:
        raise PreconditionError("epsilon must be positive")
    offset = 100**d
    base = cover_search(cloud, epsilon, g, seed=seed, iterations=iterations, pad=cloud.resolution)
    base_sum = base.cost
    _check_budget(a, base_sum)
    if beta is not None:
        q, r3 = decay_ratio(beta), 3.0**beta
        log_bound = log_geometric_constant(beta, d)
    else:
        r9, r3 = _gauge_ratios(g, max(cloud.resolution, MIN_RADIUS), epsilon)
        q = 1.0 - 1.0 / r9
        log_bound = -(offset + 1) * math.log(q) + math.log(r3) + d * math.log(100) + math.log(r9)

    fam0 = base.family
    big = fam0.radii >= epsilon / 9
    B1, B2 = fam0.take(np.flatnonzero(big)), fam0.take(np.flatnonzero(~big))
    in_k0 = np.zeros(len(cloud), dtype=bool)
    if len(B1):
        tree = cKDTree(cloud.points)
        for x, r in zip(B1.centers, B1.radii):
            in_k0[tree.query_ball_point(x, r * (1 + REL_TOL), workers=workers())] = True
    parts = []
    net_size = 0
    if in_k0.any():
        k0 = cloud.points[in_k0]
        net = k0[_greedy_net_indices(k0, net_radius_slack(epsilon / 3))]
        net_size = len(net)
        c1 = split_into_disjoint(BallFamily(d, net, np.full(len(net), float(epsilon))))
        if c1.label_count > offset:
            raise BoundViolation(f"net layer needs {c1.label_count} > 100^d labels")
        parts.append(c1)
    peel_steps = 0
    tail_bad = []
    if len(B2):
        c2 = BallFamily(d, B2.centers, 3 * B2.radii * (1 + REL_TOL))
        labels = np.zeros(len(c2), dtype=int)
        remaining = np.arange(len(c2))
        wts = np.asarray(g(c2.radii), dtype=float)
        tail = math.fsum(wts)
        j = offset
        while len(remaining):
            sel = remaining[vitali_indices(c2.take(remaining))]
            j += 1
            labels[sel] = j
            remaining = np.setdiff1d(remaining, sel)
            new_tail = math.fsum(wts[remaining])
            if new_tail > q * tail * (1 + 1e-12) + 1e-300:
                tail_bad.append(j)
            tail = new_tail
            peel_steps += 1
        parts.append(c2.with_labels(labels))
    fam = BallFamily.concat(parts, d)
    if fam.labels is None:
        fam = fam.with_labels(np.zeros(0, int))

    report = verify_covering(cloud, fam, "supercover", g, a)
    report.decay_ratio_q = q
    logc = _log_decay_constant(report.per_label_sums, q, a)
    report.constants = {
        "q": q,
        "C": _safe_exp(logc),
        "log_C": logc,
        "C_bound": _safe_exp(log_bound),
        "log_C_bound": log_bound,
        "decay_ok": bool(logc <= log_bound + 1e-12),
        "ratio_3": r3,
        "label_offset": offset,
        "base_sum": base_sum,
        "base_greedy_sum": base.greedy_cost,
        "base_balls": len(fam0),
        "large_balls": len(B1),
        "small_balls": len(B2),
        "net_size": net_size,
        "peel_labels": peel_steps,
        "tail_ratio_violations": tail_bad,
        "epsilon": float(epsilon),
        "seed": int(seed),
    }
    return fam, report


# --------------------------------------------------------------------------
# bounded-multiplicity supercovering via rings
# --------------------------------------------------------------------------

@dataclass
class RingDecomposition:
    """Rings ``F^j = B_{r_j} minus B_{r_{j-1}}`` filling the annulus ``B_r minus B_{r/3}``.

    ``r_j = r/3 + r l (1 - q^(j+1)) / (1 - q)`` with ``l = 2(1-q)/3`` and
    ``r_{-1} = r/3``; the width of ``F^j`` is ``r l q^j``.
    """

    base_ball: Ball
    q: float
    l: float = field(init=False)

    def __post_init__(self):
        if not 0 < self.q < 1:
            raise PreconditionError("q must lie in (0, 1)")
        self.l = 2 * (1 - self.q) / 3

    def radius(self, j: int) -> float:
        r = self.base_ball.radius
        if j < 0:
            return r / 3
        return r / 3 + r * self.l * (1 - self.q ** (j + 1)) / (1 - self.q)

    def width(self, j: int) -> float:
        return self.base_ball.radius * self.l * self.q**j

    def ring_radii(self, count: int) -> list[float]:
        return [self.radius(j) for j in range(count)]

    def ring_index(self, t) -> np.ndarray:
        """Index ``j`` with ``r_{j-1} <= t < r_j`` for distances ``r/3 <= t < r``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        r = self.base_ball.radius
        u = np.clip(1 - 3 * (t - r / 3) / (2 * r), 1e-300, 1.0)
        j = np.maximum(np.floor(np.log(u) / np.log(self.q)).astype(int), 0)
        out = np.empty_like(j)
        for k, (tk, jk) in enumerate(zip(t, j)):
            while tk >= self.radius(jk):
                jk += 1
            while jk > 0 and tk < self.radius(jk - 1):
                jk -= 1
            out[k] = jk
        return out


def _resolution_depth(R: float, l: float, q: float, resolution: float) -> int:
    """First ring index whose width ``R l q^j`` drops below the resolution."""
    if R * l <= resolution:
        return 0
    return int(math.floor(math.log(resolution / (R * l)) / math.log(q))) + 1


def ring_net_constant(d: int, q: float) -> float:
    """``C_0 = 2 omega_{d-1} l / (pi_d (l q / 6)^d)`` bounding ``|E^j| <= C_0 q^((1-d) j)``."""
    l = 2 * (1 - q) / 3
    return 2 * unit_sphere_area(d) * l / (unit_ball_volume(d) * (l * q / 6) ** d)


def ring_sum_constant(alpha: float, d: int, q: float) -> float:
    """``C = C_0 l^alpha q^alpha sum_k q^(k(alpha-d+1))`` in closed form."""
    if alpha <= d - 1:
        raise DivergenceError(f"sum_k q^(k(alpha-d+1)) diverges for alpha = {alpha} <= d - 1 = {d - 1}")
    l = 2 * (1 - q) / 3
    return ring_net_constant(d, q) * (l * q) ** alpha / (1 - q ** (alpha - d + 1))


def supercover_bounded(cloud: PointCloud, alpha, epsilon: float, a: float, q: float = 0.5, seed: int = 0,
                       iterations: int = 100):
    """Supercovering split into at most ``M (1 + 3 100^d)`` disjoint labels, each with ``sum <= C_2 a``.

    ``M`` is the label count of the base Morse-type cover.  Each base ball's
    annulus ``B_r minus B_{r/3}`` is cut into rings of geometrically shrinking
    width; points in ring ``j`` get balls of radius ``r l q^(j+1)`` on a
    ``r l q^(j+1) / 3``-net.  Ring families are coloured and grouped by
    ``j mod 3``.  Rings beyond the last one holding a cloud point are not
    built, and rings narrower than the cloud resolution only receive points
    that no base inner third already covers.
    """
    g = as_gauge(alpha)
    d = cloud.ambient_dim
    beta = g.exponent
    if beta is not None:
        if beta <= d - 1:
            raise DivergenceError(f"alpha = {beta} <= d - 1 = {d - 1}: the ring series diverges")
        if beta > d:
            raise PreconditionError(f"alpha must lie in (d-1, d] = ({d - 1}, {d}]")
    else:
        res = check_d_falling(g, d)
        if not res.is_d_falling:
            raise DivergenceError(f"gauge is not {d}-falling: {res.reason}")
    if not 0 < q < 1:
        raise PreconditionError("q must lie in (0, 1)")
    if not epsilon > 0:
        raise PreconditionError("epsilon must be positive")

    base = cover_search(cloud, epsilon / 3, g, seed=seed, iterations=iterations, pad=cloud.resolution)
    _check_budget(a, base.cost)
    tripled = BallFamily(d, base.family.centers, 3 * base.family.radii * (1 + REL_TOL))
    base_fam = bounded_multiplicity_cover(cloud, tripled)
    m_labels = base_fam.label_count
    offset = 100**d
    l = 2 * (1 - q) / 3

    tree = cKDTree(cloud.points)
    # points already inside a base inner third need no ring below the resolution scale
    in_base = np.array([bool(h) for h in _inner_third_hits(cloud.points, base_fam)], dtype=bool)
    ring_parts = []  # (key, centers, radius)
    net_over = []
    deepest = 0
    c0 = ring_net_constant(d, q)
    for b, (x, R, m) in enumerate(zip(base_fam.centers, base_fam.radii, base_fam.labels)):
        rings = RingDecomposition(Ball(x, R), q)
        idx = np.asarray(tree.query_ball_point(x, R, workers=workers()), dtype=int)
        if not len(idx):
            continue
        dist = np.linalg.norm(cloud.points[idx] - x, axis=1)
        sel = (dist >= R / 3) & (dist < R)
        idx, dist = idx[sel], dist[sel]
        if not len(idx):
            continue
        order = np.argsort(idx)
        idx, dist = idx[order], dist[order]
        js = rings.ring_index(dist)
        cut = _resolution_depth(R, l, q, cloud.resolution)
        fine = (js >= cut) & in_base[idx]
        idx, dist, js = idx[~fine], dist[~fine], js[~fine]
        for j in np.unique(js):
            j = int(j)
            deepest = max(deepest, j)
            pts = cloud.points[idx[js == j]]
            rho = R * l * q ** (j + 1)
            net = pts[_greedy_net_indices(pts, net_radius_slack(rho / 3))]
            if len(net) > c0 * q ** ((1 - d) * j) * (1 + 1e-9):
                net_over.append((b, j, len(net)))
            col = split_into_disjoint(BallFamily(d, net, np.full(len(net), rho)))
            if col.label_count > offset:
                raise BoundViolation(f"ring family needs {col.label_count} > 100^d colours")
            for c in range(1, col.label_count + 1):
                mask = col.labels == c
                ring_parts.append(((int(m), j % 3, c), net[mask], rho, b, j))

    keys = sorted({p[0] for p in ring_parts})
    key_label = {k: m_labels + 1 + i for i, k in enumerate(keys)}
    # deterministic merge order: base ball, then j, then net index
    ring_parts.sort(key=lambda p: (p[3], p[4], p[0][2]))
    fams = [base_fam]
    for key, centers, rho, _, _ in ring_parts:
        fams.append(BallFamily(d, centers, np.full(len(centers), rho), np.full(len(centers), key_label[key])))
    fam = BallFamily.concat(fams, d)

    report = verify_covering(cloud, fam, "supercover", g, a)
    report.decay_ratio_q = q
    max_labels = m_labels * (1 + 3 * offset)
    base_const = (3.0 * (1 + REL_TOL)) ** beta if beta is not None else \
        _gauge_ratios(g, max(cloud.resolution, MIN_RADIUS), epsilon)[1] * (1 + REL_TOL)
    if beta is not None:
        c_ring = ring_sum_constant(beta, d, q)
        c2 = max(c_ring, 1.0) * base_const
    else:
        c_ring = None
        c2 = max(report.per_label_sums, default=0.0) / a
    bad = [k + 1 for k, s in enumerate(report.per_label_sums) if s > c2 * a * (1 + 1e-12)]
    report.constants = {
        "q": q,
        "l": l,
        "C_0": c0,
        "C": c_ring,
        "C_1": max_labels,
        "C_2": c2,
        "base_constant": base_const,
        "base_labels": m_labels,
        "base_sum": base.cost,
        "ring_labels": len(keys),
        "deepest_ring": deepest,
        "label_bound_ok": fam.label_count <= max_labels,
        "sum_bound_ok": not bad,
        "labels_over_bound": bad,
        "net_count_violations": [list(v) for v in net_over],
        "epsilon": float(epsilon),
        "seed": int(seed),
    }
    return fam, report
