"""Frostman sums over disjoint families, adversarial stress tests and certificate pipelines."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .covering import cover_from_hausdorff, supercover_bounded, supercover_geometric
from .errors import (
    DisjointnessError,
    DivergenceError,
    HypothesisError,
    PreconditionError,
)
from .gauge import GaugeFunction, as_gauge, check_d_falling, dini_transform, premeasure_estimate
from .geometry import BallFamily, PointCloud, first_intersecting_pair, workers
from .measures import DiscreteSignedMeasure, RadialProfile, positive_dominant_region


@dataclass
class FrostmanHypothesis:
    """``sum_j |int psi((y - x_j)/r_j) dmu(y)| <= constant * g(sum_j f(r_j))`` for disjoint families."""

    profile: RadialProfile
    gauge_sum: float | GaugeFunction
    weight: GaugeFunction
    constant: float = 1.0

    def __post_init__(self):
        if not self.constant > 0:
            raise PreconditionError("the hypothesis constant must be positive")

    @property
    def f(self) -> GaugeFunction:
        return as_gauge(self.gauge_sum)

    def rhs(self, radii) -> float:
        s = math.fsum(np.atleast_1d(self.f(np.asarray(radii, dtype=float))))
        return self.constant * float(self.weight(s))


# --------------------------------------------------------------------------
# sums
# --------------------------------------------------------------------------

def _smoothed_per_ball(mu: DiscreteSignedMeasure, family: BallFamily, profile: RadialProfile, part="signed"):
    out = np.zeros(len(family))
    if len(mu) == 0 or len(family) == 0:
        return out
    w = mu.part(part)
    if profile.compact:
        tree = cKDTree(mu.points)
        for k, (c, r) in enumerate(zip(family.centers, family.radii)):
            idx = np.asarray(tree.query_ball_point(c, r * profile.support_radius, workers=workers()), dtype=int)
            if len(idx):
                t = np.linalg.norm(mu.points[idx] - c, axis=1) / r
                out[k] = math.fsum(w[idx] * np.asarray(profile(t)).reshape(-1))
        return out
    for k, (c, r) in enumerate(zip(family.centers, family.radii)):
        t = np.linalg.norm(mu.points - c, axis=1) / r
        out[k] = math.fsum(w * np.asarray(profile(t)).reshape(-1))
    return out


def frostman_sum(mu: DiscreteSignedMeasure, family: BallFamily, profile: RadialProfile, check: bool = True) -> float:
    """``sum_j |int profile((y - x_j)/r_j) dmu(y)|`` over a pairwise disjoint family."""
    if check:
        pair = first_intersecting_pair(family)
        if pair is not None:
            raise DisjointnessError(f"balls {pair[0]} and {pair[1]} intersect", pair=pair)
    return math.fsum(np.abs(_smoothed_per_ball(mu, family, profile)))


def label_frostman_sums(mu, family: BallFamily, profile: RadialProfile) -> list[float]:
    """Frostman sum of each label class (labels are assumed disjoint, as constructors guarantee)."""
    if family.label_count == 0:
        return []
    per_ball = np.abs(_smoothed_per_ball(mu, family, profile))
    labels = family.labels if family.labels is not None else np.ones(len(family), dtype=int)
    return [math.fsum(per_ball[labels == k]) for k in range(1, family.label_count + 1)]


# --------------------------------------------------------------------------
# adversarial search
# --------------------------------------------------------------------------

@dataclass
class AdversarialResult:
    worst_ratio: float
    witness: BallFamily
    history: list

    def __iter__(self):
        return iter((self.worst_ratio, self.witness))


def _radius_grid(mu: DiscreteSignedMeasure, r_min, r_max, size):
    if r_min is None:
        if len(mu) > 1:
            dist, _ = cKDTree(mu.points).query(mu.points, k=2)
            r_min = max(float(dist[:, 1].min()) / 4, 1e-12)
        else:
            r_min = 1e-6
    if r_max is None:
        lo, hi = mu.points.min(axis=0), mu.points.max(axis=0)
        r_max = max(float(np.linalg.norm(hi - lo)), 4 * r_min, 1.0 if len(mu) < 2 else 0.0)
    return np.geomspace(r_min, r_max, size)


def _disjoint_from(centers, radii, c, r, skip=None) -> bool:
    for k, (c2, r2) in enumerate(zip(centers, radii)):
        if k == skip:
            continue
        if np.linalg.norm(np.asarray(c2) - c) <= r2 + r:
            return False
    return True


def adversarial_search(mu: DiscreteSignedMeasure, hypothesis: FrostmanHypothesis, seed: int = 0,
                       iterations: int = 1000, family_size_max: int = 8, r_min: float | None = None,
                       r_max: float | None = None, grid_size: int = 32) -> AdversarialResult:
    """Search disjoint families maximising ``frostman_sum / (constant g(sum f(r)))``.

    Centres are atoms and radii come from a log grid between ``r_min`` (a
    quarter of the smallest atom spacing by default) and the support diameter.
    Each step either draws a random family or mutates the best one (grow,
    shrink, recentre, add or drop a ball); ``history`` holds the best ratio so far.
    """
    if iterations < 1:
        raise PreconditionError("iterations must be >= 1")
    d = mu.ambient_dim
    if len(mu) == 0:
        return AdversarialResult(0.0, BallFamily.empty(d), [0.0] * iterations)
    rng = np.random.default_rng(seed)
    grid = _radius_grid(mu, r_min, r_max, grid_size)
    pts = mu.points
    prof = hypothesis.profile

    def ratio(cidx, ridx):
        fam = BallFamily(d, pts[cidx], grid[ridx])
        num = math.fsum(np.abs(_smoothed_per_ball(mu, fam, prof)))
        den = hypothesis.rhs(grid[ridx])
        if den <= 0:
            return math.inf if num > 0 else 0.0
        return num / den

    best = (-1.0, [], [])
    history = []
    for it in range(iterations):
        if it % 2 == 0 or not best[1]:
            k = int(rng.integers(1, family_size_max + 1))
            cidx, ridx = [], []
            for _ in range(k):
                c, r = int(rng.integers(len(pts))), int(rng.integers(len(grid)))
                if _disjoint_from(pts[cidx], grid[ridx], pts[c], grid[r]):
                    cidx.append(c)
                    ridx.append(r)
        else:
            cidx, ridx = list(best[1]), list(best[2])
            move = int(rng.integers(5))
            b = int(rng.integers(len(cidx)))
            if move == 0 and ridx[b] + 1 < len(grid):
                cand = (cidx[b], ridx[b] + 1)
            elif move == 1 and ridx[b] > 0:
                cand = (cidx[b], ridx[b] - 1)
            elif move == 2:
                cand = (int(rng.integers(len(pts))), ridx[b])
            elif move == 3 and len(cidx) < family_size_max:
                b = None
                cand = (int(rng.integers(len(pts))), int(rng.integers(len(grid))))
            elif move == 4 and len(cidx) > 1:
                del cidx[b], ridx[b]
                cand = None
            else:
                cand = None
            if cand is not None:
                if not _disjoint_from(pts[cidx], grid[ridx], pts[cand[0]], grid[cand[1]], skip=b):
                    history.append(best[0])
                    continue
                if b is None:
                    cidx.append(cand[0])
                    ridx.append(cand[1])
                else:
                    cidx[b], ridx[b] = cand
        val = ratio(np.asarray(cidx, dtype=int), np.asarray(ridx, dtype=int))
        if val > best[0]:
            best = (val, cidx, ridx)
        history.append(best[0])
    witness = BallFamily(d, pts[np.asarray(best[1], dtype=int)], grid[np.asarray(best[2], dtype=int)])
    return AdversarialResult(float(best[0]), witness, history)


def estimate_constant(mu, profile, gauge_sum, weight, seed=0, iterations=2000, **kw) -> float:
    """Hypothesis constant making ``adversarial_search`` ratio equal to 1 (the worst ratio at constant 1)."""
    hyp = FrostmanHypothesis(profile, gauge_sum, weight, 1.0)
    return adversarial_search(mu, hyp, seed=seed, iterations=iterations, **kw).worst_ratio


# --------------------------------------------------------------------------
# tail classes
# --------------------------------------------------------------------------

@dataclass
class TailResult:
    tail_class: str
    values: np.ndarray
    note: str = ""

    def __str__(self):
        return self.tail_class


def tail_class_check(profile: RadialProfile, alpha: float, radii_grid=None) -> TailResult:
    """Classify ``phi(x) |x|^alpha`` at infinity as big-O, little-o or neither.

    Over the last decade of the grid: growth above 1% means neither, monotone
    decrease to at most 1% of the maximum means little-o, otherwise big-O.
    """
    grid = np.geomspace(1.0, 1e6, 121) if radii_grid is None else np.sort(np.asarray(radii_grid, float))
    vals = np.asarray(profile(grid)).reshape(-1) * grid**alpha
    if profile.compact:
        return TailResult("little-o", vals, "compact profile: the tail vanishes identically")
    last = grid >= grid[-1] / 10
    tail = vals[last]
    if tail[-1] > tail[0] * 1.01:
        return TailResult("neither", vals, "phi(x)|x|^alpha grows over the last decade")
    if np.all(np.diff(tail) <= 0) and tail[-1] <= 0.01 * vals.max():
        return TailResult("little-o", vals)
    return TailResult("big-O", vals)


def tail_delta(mu: DiscreteSignedMeasure, profile: RadialProfile, alpha: float, epsilon: float, N: int = 1,
               grid_size: int = 400) -> float:
    """``|mu|(R^d) sup_{r <= epsilon/N} profile(1/(N r)) / r^alpha`` over a log grid of radii."""
    r = np.geomspace(epsilon / N * 1e-6, epsilon / N, grid_size)
    vals = np.asarray(profile(1.0 / (N * r))).reshape(-1) / r**alpha
    return mu.total_variation() * float(vals.max())


# --------------------------------------------------------------------------
# certificates
# --------------------------------------------------------------------------

@dataclass
class Certificate:
    lemma: str
    target_set: dict
    premeasure_bound_a: float
    supercover_report: dict
    frostman_sums_per_label: list
    final_bound: float
    bound_kind: str
    measured_mass: float
    slack: float
    valid: bool
    reasons: list = field(default_factory=list)
    constants: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _slack(bound: float, mass: float) -> float:
    if mass <= 0:
        return math.inf
    return bound / mass


def _cloud_summary(A: PointCloud) -> dict:
    return {"dim": A.ambient_dim, "size": len(A), "resolution": A.resolution}


def atoms_in_set(mu: DiscreteSignedMeasure, A: PointCloud) -> np.ndarray:
    """Indices of atoms within ``A.resolution`` of a point of ``A``."""
    if len(mu) == 0 or len(A) == 0:
        return np.zeros(0, dtype=int)
    dist, _ = cKDTree(A.points).query(mu.points)
    return np.flatnonzero(dist <= A.resolution * (1 + 1e-9))


def _region(mu, A, profile, N):
    """Positive-dominant atoms of mu lying in A, with ``epsilon_region = 1/(2C)``."""
    eps_region = 1.0 / (2.0 * profile.equivalence_factor)
    inside = atoms_in_set(mu, A)
    sub = mu.take(inside)
    region = positive_dominant_region(mu, eps_region, N) if len(mu) else np.zeros(0, int)
    keep = np.intersect1d(inside, region)
    return keep, eps_region, sub


def _premeasure_max(clouds, alpha, delta, seed):
    vals = [premeasure_estimate(c, alpha, delta, seed=seed)[0] for c in clouds if len(c)]
    return max(vals, default=0.0)


def _empty_certificate(lemma, A, a, kind, reasons, constants):
    return Certificate(lemma, _cloud_summary(A), a, {}, [], 0.0, kind, 0.0, math.inf, True, reasons, constants)


def certify_teor1(mu: DiscreteSignedMeasure, A: PointCloud, alpha, epsilon: float,
                  hypothesis: FrostmanHypothesis, seed: int = 0, iterations: int = 50) -> Certificate:
    """Mechanise ``mu_+(A) <~ h(a)`` through a geometric-decay supercovering.

    Stages: premeasure ``a`` of A at scale ``2 epsilon``; the positive-dominant
    atoms K of A with ``epsilon_region = 1/(2C)`` and ``N = ceil(1/epsilon) - 1``;
    a supercovering of K whose label sums decay like ``C q^j a``; per-label
    Frostman sums checked against ``constant g(s_j)``; final bound
    ``2 sum_j constant g(C q^j a)`` compared with ``h(a)``.
    """
    g = hypothesis.weight
    prof = hypothesis.profile
    if not prof.compact:
        raise PreconditionError("this pipeline needs a compactly supported profile")
    if not 0 < epsilon < 1:
        raise PreconditionError("epsilon must lie in (0, 1)")
    dini_transform(g, 1.0)  # raises on a non-Dini weight
    N = max(1, math.ceil(1.0 / epsilon) - 1)
    a, _ = premeasure_estimate(A, alpha, 2 * epsilon, seed=seed, iterations=iterations)
    keep, eps_region, _ = _region(mu, A, prof, N)
    constants = {"N": N, "epsilon_region": eps_region, "equivalence_factor": prof.equivalence_factor,
                 "hypothesis_constant": hypothesis.constant, "weight": g.name, "epsilon": epsilon, "seed": seed}
    measured = math.fsum(mu.part("positive")[keep])
    if len(keep) == 0 or measured == 0:
        return _empty_certificate("teor1", A, a, "h-of-a", ["no positive-dominant mass in A"], constants)
    K = PointCloud(mu.ambient_dim, mu.points[keep], A.resolution)
    a_eff = max(a, _premeasure_max([K], alpha, 2 * epsilon, seed)) * (1 + 1e-9)
    fam, rep = supercover_geometric(K, alpha, epsilon, a_eff, seed=seed, iterations=iterations)
    sums = rep.per_label_sums
    fsums = label_frostman_sums(mu, fam, prof)
    reasons = []
    over = [j + 1 for j, (F, s) in enumerate(zip(fsums, sums))
            if F > hypothesis.constant * float(g(s)) * (1 + 1e-9) + 1e-300]
    if over:
        reasons.append(f"hypothesis fails on labels {over[:10]}")
    if not rep.constants["decay_ok"]:
        reasons.append("supercover decay constant exceeds the closed form")
    if not (rep.valid_supercover and rep.disjoint_labels):
        reasons.append("supercovering invalid: " + "; ".join(rep.violations[:3]))
    q, logc = rep.constants["q"], rep.constants["log_C"]
    la = math.log(a_eff)
    terms = [hypothesis.constant * float(g(math.exp(min(logc + (j + 1) * math.log(q) + la, 700.0))))
             for j, s in enumerate(sums)]
    final = 2.0 * math.fsum(terms)
    chain = 2.0 * math.fsum(fsums)
    h = dini_transform(g, max(1.0, a_eff))
    h_a = float(h(a_eff))
    geo = math.fsum(float(g(q ** (j + 1) * a_eff)) for j in range(len(sums)))
    constants.update({
        "a_effective": a_eff,
        "h_of_a": h_a,
        "kappa": final / h_a if h_a > 0 else math.inf,
        "geometric_sum_over_h": geo / h_a if h_a > 0 else math.inf,
        "one_over_log_inverse_q": 1.0 / math.log(1.0 / q),
        "chain_intermediate": chain,
        "chain_ok": bool(measured <= chain * (1 + 1e-9)),
        "region_size": int(len(keep)),
        "labels": rep.label_count,
    })
    if not constants["chain_ok"]:
        reasons.append("measured mass exceeds twice the Frostman sums")
    valid = not reasons and measured <= final * (1 + 1e-12)
    if measured > final * (1 + 1e-12):
        reasons.append("measured mass exceeds the final bound")
    return Certificate("teor1", _cloud_summary(A), a_eff, rep.to_dict(), fsums, final, "h-of-a", measured,
                       _slack(final, measured), valid, reasons, constants)


def certify_teor2(mu: DiscreteSignedMeasure, A: PointCloud, alpha, epsilon: float,
                  hypothesis: FrostmanHypothesis, seed: int = 0, q: float = 0.5, dilation: float | None = None,
                  iterations: int = 50) -> Certificate:
    """Mechanise ``mu_+(A) <~ C_1 g(C_2 a) + C_1 mu_-(V)`` through the ring supercovering.

    ``V`` is the union of the open ``dilation``-neighbourhood of the positive
    atoms in A (default ``2 A.resolution``) and the emitted balls, so every
    ball lies in V and ``eps_neg = mu_-(V)``.
    """
    f = as_gauge(alpha)
    d = A.ambient_dim
    if f.exponent is not None:
        if f.exponent <= d - 1:
            raise DivergenceError(f"alpha = {f.exponent} <= d - 1 = {d - 1}")
    elif not check_d_falling(f, d).is_d_falling:
        raise DivergenceError("gauge is not d-falling")
    g = hypothesis.weight
    prof = hypothesis.profile
    if not np.all(np.asarray(prof(np.linspace(0, 0.75, 31))) >= 1 - 1e-12):
        raise PreconditionError("profile must be >= 1 on [0, 3/4]")
    rho_v = 2 * A.resolution if dilation is None else float(dilation)
    a, _ = premeasure_estimate(A, f, 2 * epsilon, seed=seed, iterations=iterations)
    inside = atoms_in_set(mu, A)
    pos = inside[mu.weights[inside] > 0]
    measured = math.fsum(mu.weights[pos])
    constants = {"q": q, "dilation": rho_v, "hypothesis_constant": hypothesis.constant, "weight": g.name,
                 "epsilon": epsilon, "seed": seed}
    if len(pos) == 0:
        return _empty_certificate("teor2", A, a, "g-of-a", ["no positive mass in A"], constants)
    K = PointCloud(d, mu.points[pos], A.resolution)
    a_eff = max(a, _premeasure_max([K], f, 2 * epsilon / 3, seed)) * (1 + 1e-9)
    fam, rep = supercover_bounded(K, f, epsilon, a_eff, q=q, seed=seed, iterations=iterations)
    fsums = label_frostman_sums(mu, fam, prof)
    neg_w = mu.part("negative")
    in_v = np.zeros(len(mu), dtype=bool)
    if np.any(neg_w):
        tree = cKDTree(mu.points)
        for x in mu.points[pos]:
            in_v[tree.query_ball_point(x, rho_v * (1 - 1e-12), workers=workers())] = True
        for c, r in zip(fam.centers, fam.radii):
            in_v[tree.query_ball_point(c, r * (1 - 1e-12), workers=workers())] = True
    eps_neg = math.fsum(neg_w[in_v])
    c1 = rep.label_count
    c2 = rep.constants["C_2"]
    reasons = []
    sums = rep.per_label_sums
    over = [j + 1 for j, (F, s) in enumerate(zip(fsums, sums))
            if F > hypothesis.constant * float(g(s)) * (1 + 1e-9) + 1e-300]
    if over:
        reasons.append(f"hypothesis fails on labels {over[:10]}")
    if not (rep.constants["label_bound_ok"] and rep.constants["sum_bound_ok"]):
        reasons.append("ring supercovering exceeds its label-count or sum bound")
    if not (rep.valid_supercover and rep.disjoint_labels):
        reasons.append("supercovering invalid: " + "; ".join(rep.violations[:3]))
    final = c1 * hypothesis.constant * float(g(c2 * a_eff)) + c1 * prof.sup * eps_neg
    if measured > final * (1 + 1e-12):
        reasons.append("measured mass exceeds the final bound")
    constants.update({"a_effective": a_eff, "C_1": c1, "C_1_bound": rep.constants["C_1"], "C_2": c2,
                      "eps_neg": eps_neg, "labels": c1})
    return Certificate("teor2", _cloud_summary(A), a_eff, rep.to_dict(), fsums, final, "g-of-a", measured,
                       _slack(final, measured), not reasons, reasons, constants)


def certify_teor3(mu: DiscreteSignedMeasure, A: PointCloud, alpha, epsilon: float,
                  hypothesis: FrostmanHypothesis, seed: int = 0, N: int = 1, iterations: int = 50) -> Certificate:
    """Mechanise ``mu_+(A) <~ g(a) + a delta(epsilon)`` for profiles with power tails.

    The covering is the Morse-type cover built from a Hausdorff cover with
    radii below ``epsilon / N``; ``delta(epsilon)`` is the tail term
    ``|mu|(R^d) sup_{r <= epsilon/N} psi(1/(N r)) / r^alpha``.  A big-O tail
    yields an absolute-continuity certificate (see ``absolute_continuity_sequence``).
    """
    prof = hypothesis.profile
    f = as_gauge(alpha)
    beta = f.exponent if f.exponent is not None else 1.0
    tail = tail_class_check(prof, beta)
    if tail.tail_class == "neither":
        raise HypothesisError(f"profile tail is neither O nor o of |x|^-{beta}")
    if not 0 < epsilon < 1:
        raise PreconditionError("epsilon must lie in (0, 1)")
    if not np.all(np.asarray(prof(np.linspace(0, 3, 61))) > 0):
        raise PreconditionError("profile support must contain B_3(0)")
    g = hypothesis.weight
    scale = epsilon / N
    delta_cover = scale / 3 * (1 - 1e-9)
    a, raw = premeasure_estimate(A, f, delta_cover, seed=seed, iterations=iterations)
    keep, eps_region, _ = _region(mu, A, prof, N)
    delta = 0.0 if prof.compact else tail_delta(mu, prof, beta, epsilon, N)
    kind = "g-of-a" if tail.tail_class == "little-o" else "absolute-continuity"
    constants = {"N": N, "epsilon_region": eps_region, "tail_class": tail.tail_class, "delta": delta,
                 "covering": "cover_from_hausdorff", "hypothesis_constant": hypothesis.constant,
                 "weight": g.name, "epsilon": epsilon, "seed": seed}
    measured = math.fsum(mu.part("positive")[keep])
    if len(keep) == 0 or measured == 0:
        return _empty_certificate("teor3", A, a, kind, ["no positive-dominant mass in A"], constants)
    K = PointCloud(mu.ambient_dim, mu.points[keep], A.resolution)
    raw_k, a_k = raw, a
    if len(K) != len(A):
        a_k, raw_k = premeasure_estimate(K, f, delta_cover, seed=seed, iterations=iterations)
    a_eff = max(a, a_k)
    fam, rep = cover_from_hausdorff(K, raw_k.scaled(1.0), epsilon, f, a=a_eff, diameter_ratio=1.0 / (3 * N))
    fsums = label_frostman_sums(mu, fam, prof)
    sums = rep.per_label_sums
    reasons = []
    over = [j + 1 for j, (F, s) in enumerate(zip(fsums, sums))
            if F > hypothesis.constant * float(g(s)) * (1 + 1e-9) + 1e-300]
    if over:
        reasons.append(f"hypothesis fails on labels {over[:10]}")
    if not (rep.valid_cover and rep.disjoint_labels):
        reasons.append("cover invalid: " + "; ".join(rep.violations[:3]))
    psi_min = float(np.min(np.asarray(prof(np.linspace(0, 1, 101)))))
    total_r = math.fsum(sums)
    final = 2.0 / psi_min * (math.fsum(hypothesis.constant * float(g(s)) for s in sums) + delta * total_r)
    if measured > final * (1 + 1e-12):
        reasons.append("measured mass exceeds the final bound")
    constants.update({"a_effective": a_eff, "psi_min_on_unit_ball": psi_min, "tail_term": delta * total_r,
                      "delta_profile": {repr(e): tail_delta(mu, prof, beta, e, N)
                                        for e in (epsilon, epsilon / 2, epsilon / 4)},
                      "labels": rep.label_count, "max_radius": float(fam.radii.max()) if len(fam) else 0.0})
    return Certificate("teor3", _cloud_summary(A), a_eff, rep.to_dict(), fsums, final, kind, measured,
                       _slack(final, measured), not reasons, reasons, constants)


def absolute_continuity_sequence(mu: DiscreteSignedMeasure, sets, alpha, delta: float, seed: int = 0):
    """Premeasure bounds ``a_k`` and positive masses of a sequence of sets ``A_k``.

    Used for big-O tails: the masses must go to 0 together with ``a_k``.
    """
    out = []
    for A in sets:
        a, _ = premeasure_estimate(A, alpha, delta, seed=seed)
        inside = atoms_in_set(mu, A)
        out.append((a, math.fsum(mu.part("positive")[inside])))
    return out
