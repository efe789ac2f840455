"""Weight functions ``g``, gauges ``f``, the Dini transform and premeasure estimates."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import DegenerateGaugeError, DiniViolationError, PreconditionError, ResolutionError

KINDS = ("power", "log_power", "table")

# Cauchy test for dyadic partial integrals
CAUCHY_TOL = 1e-3
CAUCHY_WINDOW = 10
# smallest scale explored when testing for divergence at 0
DEPTH_FLOOR = 1e-290


@dataclass(frozen=True)
class GaugeFunction:
    """A nondecreasing weight on ``(0, t_max]``.

    ``power``      params ``(beta[, coef])``        ``coef * t**beta``
    ``log_power``  params ``(beta, gamma[, coef])`` ``coef * t**beta * log(1/t)**gamma``
    ``table``      samples ``t``, ``g``             log-linear interpolation

    Beyond ``t_max`` the function is continued linearly through the origin,
    ``g(t) = g(t_max) * t / t_max``, which keeps it nondecreasing and regular.
    Below the first table sample the first segment's power law is extended.
    """

    kind: str
    params: tuple = ()
    t_max: float = math.inf
    t: tuple | None = None
    g: tuple | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PreconditionError(f"unknown gauge kind {self.kind!r}")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.kind == "table":
            t = np.asarray(self.t, dtype=float)
            g = np.asarray(self.g, dtype=float)
            if t.ndim != 1 or t.shape != g.shape or len(t) < 2:
                raise PreconditionError("table gauges need matching t and g samples (at least two)")
            if np.any(np.diff(t) <= 0) or t[0] <= 0 or np.any(g <= 0):
                raise PreconditionError("table samples must have increasing positive t and positive g")
            object.__setattr__(self, "t", tuple(t.tolist()))
            object.__setattr__(self, "g", tuple(g.tolist()))
            object.__setattr__(self, "t_max", float(t[-1]))
        elif self.kind == "log_power":
            if len(self.params) not in (2, 3):
                raise PreconditionError("log_power gauges take (beta, gamma[, coef])")
            if math.isinf(self.t_max):
                object.__setattr__(self, "t_max", math.exp(-1.0))
            if not 0 < self.t_max < 1:
                raise PreconditionError("log_power gauges live on (0, t_max] with t_max < 1")
        else:
            if len(self.params) not in (1, 2):
                raise PreconditionError("power gauges take (beta[, coef])")

    # construction helpers ---------------------------------------------------
    @classmethod
    def power(cls, beta: float, coef: float = 1.0) -> "GaugeFunction":
        return cls("power", (beta,) if coef == 1.0 else (beta, coef))

    @classmethod
    def log_power(cls, beta: float, gamma: float, coef: float = 1.0, t_max: float | None = None):
        """``coef * t^beta * log(1/t)^gamma``; by default the domain stops where it stops increasing."""
        if t_max is None:
            t_max = math.exp(-max(1.0, gamma / beta)) if beta > 0 and gamma > 0 else math.exp(-1.0)
        params = (beta, gamma) if coef == 1.0 else (beta, gamma, coef)
        return cls("log_power", params, t_max)

    @classmethod
    def table(cls, t, g) -> "GaugeFunction":
        return cls("table", (), t=tuple(np.asarray(t, float)), g=tuple(np.asarray(g, float)))

    @property
    def name(self) -> str:
        if self.kind == "table":
            return f"table[{len(self.t)}]"
        return f"{self.kind}({', '.join(repr(p) for p in self.params)})"

    @property
    def exponent(self) -> float | None:
        """The exponent beta of a pure power gauge ``t**beta``, else ``None``."""
        if self.kind == "power" and (len(self.params) == 1 or self.params[1] == 1.0):
            return self.params[0]
        return None

    # evaluation ---------------------------------------------------------------
    def _core(self, t: np.ndarray) -> np.ndarray:
        p = self.params
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if self.kind == "power":
                out = t ** p[0]
                if len(p) == 2:
                    out = p[1] * out
                if p[0] > 0:
                    out = np.where(t == 0, 0.0, out)
                return out
            if self.kind == "log_power":
                beta, gamma = p[0], p[1]
                coef = p[2] if len(p) == 3 else 1.0
                out = coef * t**beta * (-np.log(t)) ** gamma
                return np.where(t == 0, 0.0, out)
            tt, gg = np.log(np.asarray(self.t)), np.log(np.asarray(self.g))
            lt = np.log(np.where(t > 0, t, 1.0))
            slope = (gg[1] - gg[0]) / (tt[1] - tt[0])
            inner = np.interp(lt, tt, gg)
            low = gg[0] + slope * (lt - tt[0])
            out = np.exp(np.where(lt < tt[0], low, inner))
            return np.where(t == 0, 0.0, out)

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        if self.kind == "power" or math.isinf(self.t_max):
            out = self._core(arr)
        else:
            inside = arr <= self.t_max
            top = float(self._core(np.asarray(self.t_max)))
            out = np.where(inside, self._core(np.minimum(arr, self.t_max)), top * arr / self.t_max)
        return float(out) if np.ndim(out) == 0 else out


def as_gauge(alpha_or_gauge) -> GaugeFunction:
    if isinstance(alpha_or_gauge, GaugeFunction):
        return alpha_or_gauge
    return GaugeFunction.power(float(alpha_or_gauge))


def gauge_label(alpha_or_gauge):
    """Report tag: the exponent as a float for power gauges, else the gauge name."""
    g = as_gauge(alpha_or_gauge)
    return g.exponent if g.exponent is not None else g.name


def default_grid(g: GaugeFunction, kmin: int = 2, kmax: int = 40) -> np.ndarray:
    top = min(g.t_max, 1.0)
    return np.sort(top * 2.0 ** -np.arange(kmin - 2, kmax - 1, dtype=float)) if g.kind == "log_power" \
        else np.sort(2.0 ** -np.arange(kmin, kmax + 1, dtype=float))


# --------------------------------------------------------------------------
# regularity
# --------------------------------------------------------------------------

@dataclass
class RegularityResult:
    is_regular: bool
    ratio_bounds: tuple[float, float]
    reasons: list[str] = field(default_factory=list)

    def __iter__(self):
        return iter((self.is_regular, self.ratio_bounds))


def check_regular(g: GaugeFunction, c: float = 2.0, sample_grid=None) -> RegularityResult:
    """Sampled check that ``g`` is nondecreasing, vanishes at 0 and ``g(x) ~ g(cx)``.

    The ratio ``g(cx)/g(x)`` is taken over grid points whose image ``cx`` stays
    inside the domain ``(0, t_max]``.
    """
    if not c > 1:
        raise PreconditionError("the comparison factor c must exceed 1")
    grid = np.sort(np.asarray(default_grid(g) if sample_grid is None else sample_grid, dtype=float))
    grid = grid[(grid > 0) & (grid <= g.t_max)]
    if len(grid) < 2:
        raise PreconditionError("sample grid must contain at least two points of the domain")
    vals = np.asarray(g(grid), dtype=float)
    if np.any(vals == 0):
        bad = grid[np.flatnonzero(vals == 0)[0]]
        raise DegenerateGaugeError(f"g vanishes at t = {bad} > 0")
    reasons = []
    if not np.all(np.isfinite(vals)) or np.any(vals < 0):
        reasons.append("g is not finite and positive on the grid")
    if np.any(np.diff(vals) < -1e-12 * np.abs(vals[1:])):
        reasons.append("g decreases on the grid")
    inside = grid[grid * c <= g.t_max]
    if len(inside) == 0:
        reasons.append("no grid point x with cx inside the domain")
        ratio = (math.nan, math.nan)
    else:
        r = np.asarray(g(inside * c)) / np.asarray(g(inside))
        ratio = (float(r.min()), float(r.max()))
        if not (np.all(np.isfinite(r)) and r.min() > 0):
            reasons.append("ratio g(cx)/g(x) not finite and positive")
    if not vals[0] < 0.1 * vals[-1]:
        reasons.append("g does not approach 0 at the bottom of the grid")
    return RegularityResult(not reasons, ratio, reasons)


# --------------------------------------------------------------------------
# Dini transform
# --------------------------------------------------------------------------

def _log_piece(fun: Callable, lo: float, hi: float, rel: float) -> float:
    """``int_lo^hi fun(t)/t dt`` computed in the variable ``u = log t``."""
    val, _ = integrate.quad(
        lambda u: float(fun(math.exp(u))), math.log(lo), math.log(hi),
        epsabs=0.0, epsrel=rel, limit=200,
    )
    return val


def _dyadic_pieces(fun: Callable, x: float, rel: float):
    """Integrals of fun(t)/t over the dyadic shells ``[x 2^-(k+1), x 2^-k]``.

    Returns ``(pieces, converged_depth)``; the depth is ``None`` when the
    partial sums never pass the Cauchy test before ``DEPTH_FLOOR``.
    """
    kmax = int(math.floor(math.log2(x / DEPTH_FLOOR)))
    pieces: list[float] = []
    for k in range(kmax):
        hi = x * 2.0**-k
        pieces.append(_log_piece(fun, hi / 2, hi, rel))
        if k + 1 >= CAUCHY_WINDOW:
            window = pieces[-CAUCHY_WINDOW:]
            total = math.fsum(pieces)
            if total > 0 and math.fsum(window) <= CAUCHY_TOL * total:
                return pieces, k
            if k + 1 >= 2 * CAUCHY_WINDOW and all(
                b >= a for a, b in zip(window, window[1:])
            ):
                return pieces, None
    return pieces, None


def _local_exponent(fun: Callable, t: float) -> float:
    g1, g2 = float(fun(t)), float(fun(t / 2))
    if g1 <= 0 or g2 <= 0:
        return math.nan
    return math.log(g1 / g2) / math.log(2.0)


@dataclass
class DiniTransform:
    """Tabulated ``h(x) = int_0^x g(t)/t dt`` on a geometric grid.

    Between nodes ``h`` is completed by quadrature from the node below; below
    the bottom node ``g`` is treated as a power law with its local exponent.
    """

    source: Callable
    x_max: float
    nodes: np.ndarray
    values: np.ndarray
    rel_tol: float
    bottom_exponent: float

    def __call__(self, x):
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(arr)
        for i, xi in enumerate(arr):
            out[i] = self._eval(float(xi))
        return float(out[0]) if np.ndim(x) == 0 else out

    def _eval(self, x: float) -> float:
        if x <= 0:
            return 0.0
        t_b = self.nodes[0]
        if x < t_b:
            return float(self.source(x)) / self.bottom_exponent
        j = int(np.searchsorted(self.nodes, x, side="right") - 1)
        base = float(self.values[j])
        if x == self.nodes[j]:
            return base
        return base + _log_piece(self.source, float(self.nodes[j]), x, self.rel_tol * 1e-2)

    def min_ratio_to_source(self) -> float:
        """``min h/g`` over the table nodes; ``>= 1`` means ``g <= h`` there."""
        g = np.asarray([float(self.source(t)) for t in self.nodes])
        mask = g > 0
        return float(np.min(self.values[mask] / g[mask]))


def _dini_table(fun: Callable, x_max: float, rel_tol: float, per_octave: int = 4, min_depth: int = 64):
    quad_rel = max(min(rel_tol * 1e-2, 1e-10), 1e-14)
    pieces, depth = _dyadic_pieces(fun, x_max, quad_rel)
    if depth is None:
        raise DiniViolationError(
            "integral of g(t)/t near 0 fails the Cauchy test "
            f"(last {CAUCHY_WINDOW} dyadic pieces sum to {math.fsum(pieces[-CAUCHY_WINDOW:]):.3g} "
            f"of {math.fsum(pieces):.3g})"
        )
    kmax = int(math.floor(math.log2(x_max / DEPTH_FLOOR)))
    depth_tab = min(max(depth + CAUCHY_WINDOW, min_depth), kmax)
    m = per_octave
    nodes = x_max * 2.0 ** (-np.arange(depth_tab * m, -1, -1, dtype=float) / m)
    beta = _local_exponent(fun, float(nodes[0]))
    if not beta > 0:
        raise DiniViolationError(f"local exponent {beta} at the bottom of the table is not positive")
    values = np.empty_like(nodes)
    values[0] = float(fun(nodes[0])) / beta
    incr = [0.0] + [_log_piece(fun, float(a), float(b), quad_rel) for a, b in zip(nodes[:-1], nodes[1:])]
    acc = values[0]
    for i in range(1, len(nodes)):
        acc += incr[i]
        values[i] = acc
    return nodes, values, beta


def dini_transform(g: GaugeFunction | Callable, x_max: float = 1.0, rel_tol: float = 1e-8) -> DiniTransform:
    """Tabulate ``h(x) = int_0^x g(t)/t dt`` on ``(0, x_max]``.

    Raises ``DiniViolationError`` when the dyadic partial integrals near 0 do
    not settle (Cauchy test, tolerance 1e-3 over 10 consecutive scales).
    """
    if not x_max > 0:
        raise PreconditionError("x_max must be positive")
    nodes, values, beta = _dini_table(g, float(x_max), rel_tol)
    return DiniTransform(g, float(x_max), nodes, values, rel_tol, beta)


# --------------------------------------------------------------------------
# d-falling gauges
# --------------------------------------------------------------------------

@dataclass
class DFallingResult:
    is_d_falling: bool
    comparability: tuple[float, float]
    reason: str = ""

    def __iter__(self):
        return iter((self.is_d_falling, self.comparability))


def check_d_falling(f: GaugeFunction, d: int, sample_grid=None) -> DFallingResult:
    """Test ``int_0^1 f(t)/t^d dt < inf`` and ``x^(d-1) int_0^x f/t^d ~ f(x)`` on a grid."""
    top = min(f.t_max, 1.0)
    reduced = lambda t: float(f(t)) / t ** (d - 1)  # noqa: E731  f(t)/t^d = reduced(t)/t
    try:
        H = dini_transform(reduced, top)
    except DiniViolationError as exc:
        return DFallingResult(False, (math.nan, math.nan), f"int_0 f(t)/t^d dt diverges: {exc}")
    grid = np.sort(np.asarray(default_grid(f) if sample_grid is None else sample_grid, dtype=float))
    grid = grid[(grid > 0) & (grid <= top)]
    ratios = np.asarray([x ** (d - 1) * H(x) / float(f(x)) for x in grid])
    lo, hi = float(ratios.min()), float(ratios.max())
    ok = bool(np.all(np.isfinite(ratios)) and lo > 0)
    return DFallingResult(ok, (lo, hi), "" if ok else "comparability ratio degenerate on the grid")


# --------------------------------------------------------------------------
# premeasure estimates
# --------------------------------------------------------------------------

def premeasure_estimate(cloud, gauge, delta: float, seed: int = 0, iterations: int = 50, warm_start=None):
    """Covering upper bound for the delta-premeasure ``inf sum f(diam B_j)``.

    Balls have diameter at most ``delta`` (radius ``delta / 2``), centres in the
    cloud, and must contain the whole ``resolution``-ball of each point they
    cover.  Returns ``(upper_bound, witness_cover)``.
    """
    from .covering import cover_search

    if delta < 2 * cloud.resolution * (1 - 1e-12):
        raise ResolutionError(f"delta={delta} is below twice the cloud resolution {cloud.resolution}")
    f = as_gauge(gauge)
    res = cover_search(
        cloud, delta / 2, cost=lambda r: f(2 * np.asarray(r)), seed=seed,
        iterations=iterations, pad=cloud.resolution, warm_start=warm_start,
    )
    return res.cost, res.family


def premeasure_profile(cloud, gauge, deltas, seed: int = 0, iterations: int = 50):
    """Premeasure bounds for increasing ``deltas``, each search warm-started from the last witness.

    Since every witness at a smaller scale is admissible at a larger one, the
    bounds are nonincreasing in delta.
    """
    out = []
    witness = None
    for delta in sorted(deltas):
        bound, witness = premeasure_estimate(cloud, gauge, delta, seed, iterations, warm_start=witness)
        out.append((float(delta), bound))
    return out
