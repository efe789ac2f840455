"""Atomic signed measures, radial test profiles and example generators."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

from .errors import AbsoluteContinuityError, NonIntegrableError, PreconditionError
from .geometry import Ball, PointCloud, _as_points, workers

PARTS = ("signed", "positive", "negative", "variation")


@dataclass
class DiscreteSignedMeasure:
    """Finite sum of weighted Dirac masses ``sum w_i delta_{x_i}``."""

    ambient_dim: int
    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.ambient_dim = int(self.ambient_dim)
        self.points = _as_points(self.points, self.ambient_dim)
        self.weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if self.points.shape != (len(self.weights), self.ambient_dim):
            raise PreconditionError("points and weights do not match")
        if np.any(self.weights == 0) or not np.all(np.isfinite(self.weights)):
            raise PreconditionError("atom weights must be finite and nonzero")
        if len(self.points) > 1 and len(np.unique(self.points, axis=0)) != len(self.points):
            raise PreconditionError("atom locations must be pairwise distinct")

    @classmethod
    def empty(cls, dim: int) -> "DiscreteSignedMeasure":
        return cls(dim, np.zeros((0, dim)), np.zeros(0))

    @classmethod
    def from_arrays(cls, dim, points, weights, drop_zeros: bool = True) -> "DiscreteSignedMeasure":
        points = _as_points(points, dim)
        weights = np.asarray(weights, dtype=float).reshape(-1)
        if drop_zeros:
            keep = weights != 0
            points, weights = points[keep], weights[keep]
        return cls(dim, points, weights)

    def __len__(self) -> int:
        return len(self.weights)

    def part(self, which: str = "signed") -> np.ndarray:
        """Weights of the signed measure, its positive or negative part, or its variation."""
        w = self.weights
        if which == "signed":
            return w
        if which == "positive":
            return np.where(w > 0, w, 0.0)
        if which == "negative":
            return np.where(w < 0, -w, 0.0)
        if which == "variation":
            return np.abs(w)
        raise PreconditionError(f"part must be one of {PARTS}")

    def total_variation(self) -> float:
        return math.fsum(np.abs(self.weights))

    def take(self, index) -> "DiscreteSignedMeasure":
        index = np.asarray(index, dtype=int)
        return DiscreteSignedMeasure(self.ambient_dim, self.points[index], self.weights[index])

    def support_cloud(self, resolution: float = 1e-12) -> PointCloud:
        return PointCloud(self.ambient_dim, self.points.copy(), resolution)


# --------------------------------------------------------------------------
# masses
# --------------------------------------------------------------------------

def _dist(points: np.ndarray, center) -> np.ndarray:
    return np.linalg.norm(points - np.asarray(center, dtype=float), axis=1)


def ball_mass(mu: DiscreteSignedMeasure, ball: Ball, part: str = "signed") -> float:
    """Selected mass of the atoms strictly inside the (open) ball."""
    if len(mu) == 0:
        return 0.0
    inside = _dist(mu.points, ball.center) < ball.radius
    return math.fsum(mu.part(part)[inside])


def hahn_split(mu: DiscreteSignedMeasure):
    """``(mu_plus, mu_minus, A_plus, A_minus)`` with ``mu = mu_plus - mu_minus``."""
    pos, neg = mu.weights > 0, mu.weights < 0
    d = mu.ambient_dim
    mu_plus = DiscreteSignedMeasure(d, mu.points[pos], mu.weights[pos])
    mu_minus = DiscreteSignedMeasure(d, mu.points[neg], -mu.weights[neg])
    return mu_plus, mu_minus, mu.points[pos].copy(), mu.points[neg].copy()


def positive_dominant_region(mu: DiscreteSignedMeasure, epsilon: float, N: int) -> np.ndarray:
    """Indices of positive atoms x with ``mu_-(B_r(x)) <= epsilon mu_+(B_r(x))`` for all ``r < 1/N``.

    Both sides are step functions of r that jump only at the distances from x
    to other atoms, so the condition is checked on each prefix of atoms sorted
    by distance (the open ball just above each critical radius).
    """
    if not epsilon > 0:
        raise PreconditionError("epsilon must be positive")
    if int(N) < 1:
        raise PreconditionError("N must be at least 1")
    if len(mu) == 0:
        return np.zeros(0, dtype=int)
    pos_w, neg_w = mu.part("positive"), mu.part("negative")
    if not np.any(neg_w):
        return np.flatnonzero(pos_w > 0)
    reach = 1.0 / int(N)
    tree = cKDTree(mu.points)
    out = []
    for i in np.flatnonzero(pos_w > 0):
        nb = np.asarray(tree.query_ball_point(mu.points[i], reach, workers=workers()), dtype=int)
        dist = _dist(mu.points[nb], mu.points[i])
        keep = dist < reach
        nb, dist = nb[keep], dist[keep]
        order = np.argsort(dist, kind="stable")
        nb, dist = nb[order], dist[order]
        cp, cn = np.cumsum(pos_w[nb]), np.cumsum(neg_w[nb])
        # evaluate only after the last atom at each distinct distance
        last = np.r_[dist[1:] > dist[:-1], True]
        if np.all(cn[last] <= epsilon * cp[last] * (1 + 1e-12)):
            out.append(int(i))
    return np.asarray(out, dtype=int)


# --------------------------------------------------------------------------
# radial profiles
# --------------------------------------------------------------------------

def smoothstep(u):
    u = np.clip(u, 0.0, 1.0)
    return 3 * u**2 - 2 * u**3


PROFILE_KINDS = ("plateau", "power_tail", "log_power_tail", "gaussian")


@dataclass(frozen=True)
class RadialProfile:
    """Radial test function of ``t = |x|``.

    ``plateau``         1 on [0, 3s/4], cubic smoothstep down to 0 at s, compact;
                        params ``()`` (s = 1) or ``(s,)``
    ``power_tail``      ``(1 + t)^-a``, params ``(a,)``
    ``log_power_tail``  ``(1 + t)^-a log(2 + t) / log 2``, params ``(a,)``
    ``gaussian``        ``exp(-t^2)``

    With ``equivalence_factor`` C > 1 the profile is the equivalent function
    ``psi = phi (1 + (C - 1) min(t, 1))`` so that ``phi <= psi <= C phi``.
    """

    kind: str
    params: tuple = ()
    equivalence_factor: float = 1.0

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise PreconditionError(f"unknown profile kind {self.kind!r}")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.kind in ("power_tail", "log_power_tail") and len(self.params) != 1:
            raise PreconditionError(f"{self.kind} takes one exponent")
        if self.kind == "plateau" and (len(self.params) > 1 or any(p < 1 for p in self.params)):
            raise PreconditionError("plateau takes at most one support radius s >= 1")
        if not self.equivalence_factor >= 1:
            raise PreconditionError("equivalence factor must be >= 1")

    @property
    def compact(self) -> bool:
        return self.kind == "plateau"

    @property
    def support_radius(self) -> float:
        if not self.compact:
            return math.inf
        return self.params[0] if self.params else 1.0

    @property
    def tail_class(self) -> str:
        if self.kind == "plateau":
            return "compact"
        if self.kind == "power_tail":
            return f"big-O({self.params[0]})"
        if self.kind == "gaussian":
            return "little-o"
        return "neither"

    @property
    def sup(self) -> float:
        """Upper bound for the profile values."""
        return float(self.equivalence_factor)

    def base(self, t):
        t = np.abs(np.asarray(t, dtype=float))
        if self.kind == "plateau":
            s = self.support_radius
            return 1.0 - smoothstep((t - 0.75 * s) / (0.25 * s))
        if self.kind == "power_tail":
            return (1.0 + t) ** -self.params[0]
        if self.kind == "log_power_tail":
            return (1.0 + t) ** -self.params[0] * np.log(2.0 + t) / math.log(2.0)
        return np.exp(-(t**2))

    def __call__(self, t):
        t = np.abs(np.asarray(t, dtype=float))
        out = self.base(t)
        if self.equivalence_factor != 1.0:
            out = out * (1.0 + (self.equivalence_factor - 1.0) * np.minimum(t, 1.0))
        return float(out) if np.ndim(out) == 0 else out

    def plain(self) -> "RadialProfile":
        return RadialProfile(self.kind, self.params, 1.0)


def smoothed_mass(mu: DiscreteSignedMeasure, profile: RadialProfile, ball: Ball, part: str = "signed") -> float:
    """``sum_y w(y) profile(|y - center| / radius)`` over atoms y."""
    if len(mu) == 0:
        return 0.0
    t = _dist(mu.points, ball.center) / ball.radius
    w = mu.part(part)
    if profile.compact:
        keep = t < profile.support_radius
        t, w = t[keep], w[keep]
    return math.fsum(w * np.asarray(profile(t)).reshape(-1))


@dataclass
class NocResult:
    holds: bool
    lhs: float
    rhs: float
    notes: list = field(default_factory=list)

    def __iter__(self):
        return iter((self.holds, self.lhs, self.rhs))


def noc_inequality_check(mu, profile_phi: RadialProfile, profile_psi: RadialProfile, x, r: float,
                         epsilon: float, N: int | None = None, tol: float = 1e-12) -> NocResult:
    """Compare ``int psi dmu_+`` with ``2 int psi dmu`` over the ball ``B_r(x)``.

    Preconditions (sandwich ``phi <= psi <= phi / (2 epsilon)`` on a sample of
    [0, 1], region membership of x, ``r < 1/N``) are checked and reported in
    ``notes``; the comparison is computed regardless.
    """
    notes = []
    t = np.linspace(0.0, 1.0, 401)
    phi, psi = np.asarray(profile_phi(t)), np.asarray(profile_psi(t))
    if np.any(psi < phi * (1 - 1e-12)) or np.any(psi > phi / (2 * epsilon) * (1 + 1e-12) + 1e-300):
        notes.append("psi is not between phi and phi/(2 epsilon) on the sample")
    if N is not None:
        if not r < 1.0 / N:
            notes.append(f"r = {r} is not below 1/N = {1.0 / N}")
        region = positive_dominant_region(mu, epsilon, N)
        hit = np.flatnonzero(np.all(mu.points[region] == np.asarray(x, dtype=float), axis=1)) if len(region) else []
        if not len(hit):
            notes.append("x is not in the positive-dominant region")
    ball = Ball(x, r)
    lhs = smoothed_mass(mu, profile_psi, ball, "positive")
    rhs = 2 * smoothed_mass(mu, profile_psi, ball, "signed")
    return NocResult(bool(lhs <= rhs + tol * max(1.0, abs(rhs))), lhs, rhs, notes)


# --------------------------------------------------------------------------
# energy
# --------------------------------------------------------------------------

def energy_integral(mu: DiscreteSignedMeasure, alpha: float) -> float:
    """Off-diagonal Riesz energy ``sum_{i != j} w_i w_j |x_i - x_j|^-alpha``."""
    if not alpha > 0:
        raise PreconditionError("alpha must be positive")
    if np.any(mu.weights < 0):
        raise PreconditionError("energy needs a nonnegative measure")
    n = len(mu)
    if n < 2:
        return 0.0
    w = mu.weights
    i, j = np.triu_indices(n, k=1)
    return 2.0 * math.fsum(w[i] * w[j] * pdist(mu.points) ** -alpha)


def energy_trend(values) -> dict:
    """Classify energies over successive refinements as settling or growing.

    The verdict uses the ratio of the last two increments: below 1 the
    increments shrink geometrically (Cauchy), otherwise the values keep growing.
    """
    v = np.asarray(values, dtype=float)
    if len(v) < 3:
        raise PreconditionError("need at least three refinement levels")
    inc = np.diff(v)
    ratio = float(inc[-1] / inc[-2]) if inc[-2] != 0 else math.inf
    return {
        "values": v.tolist(),
        "increment_ratio": ratio,
        "relative_change": float(abs(inc[-1]) / abs(v[-2])),
        "growth": float(v[-1] / v[-2]),
        "verdict": "cauchy" if ratio < 1 else "divergent",
    }


# --------------------------------------------------------------------------
# monotone rearrangement
# --------------------------------------------------------------------------

@dataclass
class Rearrangement:
    """Nonincreasing step function ``|dnu/dmu|*`` and its integral ``G``."""

    values: np.ndarray
    masses: np.ndarray
    breaks: np.ndarray  # cumulative mu-mass, starts at 0

    @property
    def total_mass(self) -> float:
        return float(self.breaks[-1])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        k = np.searchsorted(self.breaks, t, side="right") - 1
        inside = (t >= 0) & (t < self.breaks[-1])
        out = np.where(inside, self.values[np.clip(k, 0, len(self.values) - 1)] if len(self.values) else 0.0, 0.0)
        return float(out) if np.ndim(out) == 0 else out

    def G(self, t):
        """``int_0^t |dnu/dmu|*(s) ds``; piecewise linear, concave, constant after ``mu(X)``."""
        t = np.clip(np.asarray(t, dtype=float), 0.0, self.total_mass)
        knots = np.r_[0.0, np.cumsum(self.values * self.masses)]
        out = np.interp(t, self.breaks, knots) if len(self.values) else np.zeros_like(t)
        return float(out) if np.ndim(out) == 0 else out


def monotone_rearrangement(nu: DiscreteSignedMeasure, mu: DiscreteSignedMeasure) -> Rearrangement:
    """Sort the densities ``|w_nu(x) / w_mu(x)|`` in nonincreasing order, each on mu-mass ``w_mu(x)``."""
    if np.any(mu.weights < 0):
        raise PreconditionError("the reference measure must be nonnegative")
    index = {tuple(p): i for i, p in enumerate(mu.points)}
    dens = np.zeros(len(mu))
    for p, w in zip(nu.points, nu.weights):
        i = index.get(tuple(p))
        if i is None:
            raise AbsoluteContinuityError(f"atom {list(p)} of nu is not an atom of mu")
        dens[i] = abs(w) / mu.weights[i]
    order = np.lexsort((np.arange(len(mu)), -dens))
    values, masses = dens[order], mu.weights[order]
    breaks = np.r_[0.0, np.cumsum(masses)]
    return Rearrangement(values, masses, breaks)


# --------------------------------------------------------------------------
# examples
# --------------------------------------------------------------------------

def cantor_points(level: int, dim: int = 1, ratio: float = 1.0 / 3.0) -> np.ndarray:
    """Left-bottom corners of the level-``level`` cells of a symmetric Cantor set.

    ``ratio`` 1/3 gives the middle-thirds set, 1/4 the middle-half set; the
    product of ``dim`` copies is returned for ``dim > 1``.
    """
    if level < 0 or dim < 1:
        raise PreconditionError("level must be >= 0 and dim >= 1")
    if not 0 < ratio < 0.5:
        raise PreconditionError("ratio must lie in (0, 1/2)")
    pts = np.array([0.0])
    for k in range(1, level + 1):
        pts = np.concatenate([pts, pts + (1 - ratio) * ratio ** (k - 1)])
    pts = np.sort(pts)
    if dim == 1:
        return pts.reshape(-1, 1)
    grids = np.meshgrid(*([pts] * dim), indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=1)


def cantor_resolution(level: int, dim: int = 1, ratio: float = 1.0 / 3.0) -> float:
    """Radius such that each level cell lies in the closed ball around its corner."""
    return math.sqrt(dim) * ratio**level


def cantor_cloud(level: int, dim: int = 1, ratio: float = 1.0 / 3.0) -> PointCloud:
    return PointCloud(dim, cantor_points(level, dim, ratio), cantor_resolution(level, dim, ratio))


def _eval_samples(f, dim: int, n: int, h: float) -> np.ndarray:
    axes = [np.arange(n) * h] * dim
    grids = np.meshgrid(*axes, indexing="ij")
    if callable(f):
        return np.asarray(f(*grids), dtype=float)
    if isinstance(f, str):
        names = dict(zip("xyz", grids))
        expr = f.replace("^", "**")
        env = {"__builtins__": {}, "np": np, "sin": np.sin, "cos": np.cos, "exp": np.exp,
               "log": np.log, "sqrt": np.sqrt, "pi": np.pi}
        return np.broadcast_to(np.asarray(eval(expr, env, names), dtype=float), grids[0].shape).copy()
    return np.asarray(f, dtype=float)


def generate_example(kind: str, **params):
    """Example measures.

    ``cantor``         level, dim=1, ratio=1/3: uniform measure on the corners
    ``power_law``      beta, n: atoms ``k/n`` with weight ``(k/n)^-beta / n``
    ``grid_gradient``  f (samples, callable or expression in x, y, z), orders,
                       h=0.1, n=11: forward differences of order ``m_j`` along
                       axis j, one measure per axis (atoms at the lower corner)
    ``random``         seed, n, sign_mix=0.5, dim=1: uniform points in the unit
                       cube, |w| uniform in [0.1, 1], negative with probability sign_mix
    """
    if kind == "cantor":
        level = int(params.get("level", 5))
        dim = int(params.get("dim", 1))
        ratio = float(params.get("ratio", 1.0 / 3.0))
        pts = cantor_points(level, dim, ratio)
        return DiscreteSignedMeasure(dim, pts, np.full(len(pts), 2.0 ** (-level * dim)))
    if kind == "power_law":
        beta = float(params["beta"])
        n = int(params.get("n", 1000))
        if beta >= 1:
            raise NonIntegrableError(f"|x|^-beta is not integrable at 0 for beta = {beta} >= 1")
        if n < 1:
            raise PreconditionError("n must be positive")
        x = np.arange(1, n + 1) / n
        return DiscreteSignedMeasure(1, x.reshape(-1, 1), x**-beta / n)
    if kind == "grid_gradient":
        h = float(params.get("h", 0.1))
        n = int(params.get("n", 11))
        f = params["f"]
        if isinstance(f, (str,)) or callable(f):
            dim = int(params.get("dim", len(np.atleast_1d(params.get("orders", params.get("m", 1))))))
            samples = _eval_samples(f, dim, n, h)
        else:
            samples = np.asarray(f, dtype=float)
            dim = samples.ndim
        orders = np.atleast_1d(params.get("orders", params.get("m", 1))).astype(int)
        if len(orders) == 1 and dim > 1:
            orders = np.repeat(orders, dim)
        if len(orders) != dim or np.any(orders < 0):
            raise PreconditionError("need one nonnegative order per axis")
        out = []
        for j, m in enumerate(orders):
            diff = np.diff(samples, n=int(m), axis=j) if m else samples
            idx = np.indices(diff.shape).reshape(dim, -1).T
            out.append(DiscreteSignedMeasure.from_arrays(dim, idx * h, diff.reshape(-1)))
        return out
    if kind == "random":
        rng = np.random.default_rng(int(params.get("seed", 0)))
        n = int(params.get("n", 100))
        dim = int(params.get("dim", 1))
        mix = float(params.get("sign_mix", 0.5))
        pts = rng.random((n, dim))
        mag = rng.uniform(0.1, 1.0, n)
        sign = np.where(rng.random(n) < mix, -1.0, 1.0)
        return DiscreteSignedMeasure(dim, pts, sign * mag)
    raise PreconditionError(f"unknown example kind {kind!r}")
