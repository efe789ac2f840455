import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frostman_kit.errors import BoundViolation, EmptyInputError, InvalidRingError, PreconditionError
from frostman_kit.geometry import (
    Ball, BallFamily, PointCloud, Ring, bounded_multiplicity_cover, covers, intersecting_pairs,
    is_supercovering, max_separated_net, packing_count, ring_volume, split_into_disjoint,
    unit_ball_volume, unit_sphere_area, vitali_select,
)
from conftest import random_cloud


def brute_separated(points, delta):
    d = np.linalg.norm(points[:, None] - points[None], axis=-1)
    np.fill_diagonal(d, np.inf)
    return bool((d > delta).all())


def brute_maximal(cloud_pts, net_pts, delta):
    d = np.linalg.norm(cloud_pts[:, None] - net_pts[None], axis=-1)
    return bool((d.min(axis=1) <= delta).all())


def brute_disjoint(family):
    for i, j in itertools.combinations(range(len(family)), 2):
        if np.linalg.norm(family.centers[i] - family.centers[j]) <= family.radii[i] + family.radii[j]:
            return False
    return True


# ---- nets and packing ----------------------------------------------------

def test_net_single_point():
    net = max_separated_net(PointCloud(2, [[0.3, 0.7]]), 5.0)
    assert net.points.tolist() == [[0.3, 0.7]]


def test_net_1d_example():
    cloud = PointCloud(1, np.arange(11)[:, None] / 10)
    net = max_separated_net(cloud, 0.35)
    assert np.allclose(net.points[:, 0], [0.0, 0.4, 0.8])
    assert brute_separated(net.points, 0.35)
    assert brute_maximal(cloud.points, net.points, 0.35)


def test_net_empty_cloud_rejected():
    with pytest.raises(EmptyInputError):
        max_separated_net(PointCloud(1, np.zeros((0, 1))), 0.1)


def test_net_grid_packing():
    g = np.arange(21) * 0.05
    cloud = PointCloud(2, np.array(list(itertools.product(g, g))))
    net = max_separated_net(cloud, 0.3)
    assert brute_separated(net.points, 0.3)
    assert brute_maximal(cloud.points, net.points, 0.3)
    for p in cloud.points:
        ball = Ball(p, 0.9)
        scan = int((np.linalg.norm(net.points - p, axis=1) <= 0.9).sum())
        assert packing_count(net, ball) == scan <= 100 ** 2


def test_packing_count_examples():
    assert packing_count(PointCloud(1, [[0.0]]), Ball([0.0], 1.0)) == 1
    eps = 0.3
    cloud = PointCloud(1, np.linspace(0, 3, 601)[:, None])
    net = max_separated_net(cloud, eps / 3)
    for x in np.linspace(0, 3, 31):
        assert packing_count(net, Ball([x], eps), delta=eps / 3) <= 100
    rng = np.random.default_rng(3)
    net2 = max_separated_net(PointCloud(2, rng.random((2000, 2))), 0.1)
    for x in rng.random((20, 2)):
        scan = int((np.linalg.norm(net2.points - x, axis=1) <= 0.3).sum())
        assert packing_count(net2, Ball(x, 0.3), delta=0.1) == scan <= 100 ** 2


def test_packing_count_asserts_bound():
    # a declared separation that the points do not honour trips the bound check
    crowded = PointCloud(1, (np.arange(101) * 1e-3)[:, None])
    with pytest.raises(BoundViolation):
        packing_count(crowded, Ball([0.05], 0.3), delta=0.1)


# ---- Vitali, splitting, multiplicity -------------------------------------

def test_vitali_trivial_cases():
    one = BallFamily(1, [[0.0]], [1.0])
    assert len(vitali_select(one)) == 1
    two = BallFamily(1, [[0.0], [5.0]], [1.0, 1.0])
    assert len(vitali_select(two)) == 2


def test_vitali_example():
    fam = BallFamily(1, [[0.0], [0.5], [1.6]], [1.0, 1.0, 0.4])
    sel = vitali_select(fam)
    assert sel.centers[:, 0].tolist() == [0.0, 1.6]
    assert sel.radii.tolist() == [1.0, 0.4]
    # interval arithmetic: (-0.5, 1.5) lies inside the tripled (-3, 3)
    lo, hi = 0.5 - 1.0, 0.5 + 1.0
    assert any(c - 3 * r <= lo and hi <= c + 3 * r for c, r in zip(sel.centers[:, 0], sel.radii))


def test_multiplicity_examples():
    one = bounded_multiplicity_cover(PointCloud(1, [[0.0]]), BallFamily(1, [[0.0]], [1.0]))
    assert len(one) == 1 and one.label_count == 1
    two = bounded_multiplicity_cover(PointCloud(1, [[0.0], [1.0]]), BallFamily(1, [[0.0], [1.0]], [3.0, 3.0]))
    assert len(two) == 2 and two.label_count == 2


def test_multiplicity_random_cloud():
    cloud = random_cloud(7, 50, 2)
    rng = np.random.default_rng(7)
    radii = 3 * (0.05 + 0.1 * rng.random(50))
    out = bounded_multiplicity_cover(cloud, BallFamily(2, cloud.points, radii))
    assert covers(cloud, out)[0]
    for lab in range(1, out.label_count + 1):
        assert brute_disjoint(out.subfamily(lab))


def test_multiplicity_hypothesis_violation_names_point():
    with pytest.raises(PreconditionError, match="0.9"):
        bounded_multiplicity_cover(PointCloud(1, [[0.0], [0.9]]), BallFamily(1, [[0.0]], [1.0]))


def test_split_examples():
    disjoint = BallFamily(1, [[0.0], [3.0], [6.0]], [1.0, 1.0, 1.0])
    assert split_into_disjoint(disjoint).label_count == 1
    pair = BallFamily(1, [[0.0], [1.0]], [1.0, 1.0])
    assert split_into_disjoint(pair).label_count == 2


def test_split_net_balls_within_packing_bound():
    eps = 0.15
    g = np.arange(41) * 0.025
    cloud = PointCloud(2, np.array(list(itertools.product(g, g))))
    net = max_separated_net(cloud, eps / 3)
    fam = split_into_disjoint(BallFamily(2, net.points, np.full(len(net), eps)))
    assert fam.label_count <= 100 ** 2
    for lab in range(1, fam.label_count + 1):
        assert brute_disjoint(fam.subfamily(lab))


# ---- rings and supercoverings -------------------------------------------

def test_sphere_and_ball_constants():
    assert unit_sphere_area(1) == pytest.approx(2.0)
    assert unit_sphere_area(2) == pytest.approx(2 * math.pi)
    assert unit_sphere_area(3) == pytest.approx(4 * math.pi)
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)


def test_ring_volume_examples():
    exact, bound = ring_volume(Ring([0.0], 1.5, 1.5), 1)
    assert exact == pytest.approx(3.0) and bound == pytest.approx(3.0)
    exact, bound = ring_volume(Ring([0.0, 0.0], 0.5, 1.0), 2)
    assert exact == pytest.approx(math.pi * 0.75) and bound == pytest.approx(math.pi)
    exact, bound = ring_volume(Ring([0.0, 0.0, 0.0], 0.1, 2.0), 3)
    assert bound == pytest.approx(4 * math.pi * 4 * 0.1)
    assert exact == pytest.approx(4 / 3 * math.pi * (8 - 1.9 ** 3)) and exact <= bound


def test_invalid_ring():
    with pytest.raises(InvalidRingError):
        Ring([0.0], 2.0, 1.0)
    with pytest.raises(InvalidRingError):
        Ring([0.0], 0.0, 1.0)


def test_supercovering_examples():
    assert is_supercovering(PointCloud(1, np.zeros((0, 1))), BallFamily(1, [[0.0]], [1.0]))[0]
    assert is_supercovering(PointCloud(1, [[0.0]]), BallFamily(1, [[0.0]], [3.0]))[0]
    ok, witness = is_supercovering(PointCloud(1, [[0.0], [1.0]]), BallFamily(1, [[0.0]], [2.0]))
    assert not ok and witness.tolist() == [1.0]


def test_point_cloud_rejects_duplicates():
    with pytest.raises(PreconditionError):
        PointCloud(1, [[0.0], [0.0]])


# ---- properties ----------------------------------------------------------

clouds = st.builds(
    lambda seed, n, d: random_cloud(seed, n, d, 1e-9),
    st.integers(0, 10_000), st.integers(1, 60), st.integers(1, 3))


@settings(max_examples=60, deadline=None)
@given(clouds, st.floats(0.01, 0.5))
def test_net_separated_and_maximal(cloud, delta):
    net = max_separated_net(cloud, delta)
    assert brute_separated(net.points, delta)
    assert brute_maximal(cloud.points, net.points, delta)
    assert set(map(tuple, net.points)) <= set(map(tuple, cloud.points))


@settings(max_examples=60, deadline=None)
@given(clouds, st.floats(0.01, 0.3))
def test_packing_bound_holds(cloud, eps):
    net = max_separated_net(cloud, eps / 3)
    for p in cloud.points[:10]:
        assert packing_count(net, Ball(p, eps), delta=eps / 3) <= 100 ** cloud.ambient_dim


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 25), st.integers(1, 3))
def test_vitali_disjoint_and_tripled_cover(seed, n, d):
    rng = np.random.default_rng(seed)
    fam = BallFamily(d, rng.random((n, d)), 0.02 + 0.3 * rng.random(n))
    sel = vitali_select(fam)
    assert brute_disjoint(sel)
    tripled = sel.scaled(3.0)
    samples = [fam.centers]
    for _ in range(4):
        u = rng.normal(size=(n, d))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        samples.append(fam.centers + 0.999999 * fam.radii[:, None] * u)
    pts = np.vstack(samples)
    dist = np.linalg.norm(pts[:, None] - tripled.centers[None], axis=-1)
    assert (dist < tripled.radii[None]).any(axis=1).all()


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 40), st.integers(1, 3))
def test_split_labels_disjoint(seed, n, d):
    rng = np.random.default_rng(seed)
    fam = BallFamily(d, rng.random((n, d)), 0.01 + 0.2 * rng.random(n))
    out = split_into_disjoint(fam)
    degree = np.zeros(n, dtype=int)
    for i, j in intersecting_pairs(fam):
        degree[i] += 1
        degree[j] += 1
    assert out.label_count <= 1 + degree.max()
    for lab in range(1, out.label_count + 1):
        assert brute_disjoint(out.subfamily(lab))


def test_ring_volume_bound_random():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        d = int(rng.integers(1, 4))
        R = float(rng.uniform(1e-3, 10))
        r = float(rng.uniform(1e-6, 1) * R)
        exact, bound = ring_volume(Ring(np.zeros(d), r, R), d)
        assert exact <= bound * (1 + 1e-12)


def test_determinism():
    cloud = random_cloud(11, 200, 2)
    a = max_separated_net(cloud, 0.07)
    b = max_separated_net(cloud, 0.07)
    assert np.array_equal(a.points, b.points)
    fam = BallFamily(2, cloud.points[:40], np.full(40, 0.1))
    assert np.array_equal(split_into_disjoint(fam).labels, split_into_disjoint(fam).labels)


def test_tangent_balls_are_not_disjoint():
    # distance equals the radius sum exactly after rounding; the tree prefilter must keep it
    s = 2.0 ** -5
    r = 3 * s * math.sqrt(2)
    fam = BallFamily(2, [[0.5, 0.34375], [0.6875, 0.15625]], [r, r])
    assert np.linalg.norm(fam.centers[0] - fam.centers[1]) <= 2 * r
    assert intersecting_pairs(fam) == [(0, 1)]
    assert split_into_disjoint(fam).label_count == 2
