"""Closed-form dimension solvers for four classical settings.

Each solver evaluates the known closed form and, independently, runs the
generic engine in :mod:`rectdim.dimcore` on an explicit exponent profile.
The two routes must agree; a mismatch raises :class:`VerificationError`.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from .cantor import CantorAxisSpec
from .dimcore import (DimensionReport, ExponentProfile, ProductSpaceSpec,
                      compute_s)
from .errors import ValidationError, VerificationError

CROSS_TOL = 1e-10


def _sorted_desc(values):
    values = [float(v) for v in values]
    perm = sorted(range(len(values)), key=lambda i: (-values[i], i))
    return [values[i] for i in perm], perm


def _full_measure_report(value: float, d: int, details: dict) -> DimensionReport:
    from .dimcore import Partition
    part = Partition(0.0, frozenset(), frozenset(), frozenset(range(d)))
    return DimensionReport(float(value), float("nan"), part, (), full_measure=True, details=details)


# ---------------------------------------------------------------- simultaneous

@dataclass(frozen=True)
class SimultaneousInstance:
    """Approximation exponents tau_i, one per coordinate."""

    tau: tuple[float, ...]

    def __post_init__(self):
        tau = tuple(float(x) for x in self.tau)
        object.__setattr__(self, "tau", tau)
        if not tau:
            raise ValidationError("tau must be non-empty")
        if any(not (x >= 0) or not math.isfinite(x) for x in tau):
            raise ValidationError(f"tau entries must be finite and non-negative, got {tau}")

    @property
    def m(self) -> int:
        return len(self.tau)


def _threshold_K(values, budget):
    """Largest K with values[K-1] > (budget - sum(values[K:]))/K, or 0."""
    m = len(values)
    for K in range(m, 0, -1):
        rest = math.fsum(values[K:])
        if values[K - 1] > (budget - rest) / K:
            return K
    return 0


def simultaneous_exponent_choice(inst: SimultaneousInstance) -> ExponentProfile:
    """Exponent profile (a, t) with sum(a) = m + 1 realising the dimension."""
    tau, _ = _sorted_desc(inst.tau)
    m = len(tau)
    if math.fsum(tau) <= 1:
        raise ValidationError("exponent choice needs sum(tau) > 1")
    if tau[-1] >= 1.0 / m:
        a = [1.0 + 1.0 / m] * m
        t = [x - 1.0 / m for x in tau]
    else:
        K = _threshold_K(tau, 1.0)
        if K == 0:
            raise ValidationError(f"no valid threshold K for tau={tau}")
        rest = math.fsum(tau[K:])
        head = (1.0 - rest) / K + 1.0
        a = [head] * K + [x + 1.0 for x in tau[K:]]
        t = [max(0.0, 1.0 + x - y) for x, y in zip(tau, a)]
    return ExponentProfile(tuple(a), tuple(t))


def simultaneous_closed_form(tau_sorted) -> tuple[float, int]:
    m = len(tau_sorted)
    best, best_i = math.inf, 0
    for i in range(1, m + 1):
        ti = tau_sorted[i - 1]
        val = (m + 1 + (m - i) * ti - math.fsum(tau_sorted[i:])) / (1.0 + ti)
        if val < best:
            best, best_i = val, i
    return best, best_i


def simultaneous_dim(inst: SimultaneousInstance) -> DimensionReport:
    tau, perm = _sorted_desc(inst.tau)
    m = len(tau)
    if math.fsum(tau) <= 1:
        return _full_measure_report(m, m, {"permutation": perm, "argmin_i": None})
    closed, arg_i = simultaneous_closed_form(tau)
    profile = simultaneous_exponent_choice(inst)
    rep = compute_s(ProductSpaceSpec((1.0,) * m, 0.0), profile)
    generic = rep.value
    if abs(generic - closed) > CROSS_TOL:
        raise VerificationError(f"closed form {closed!r} disagrees with generic route {generic!r} for tau={tau}")
    rep.value = closed
    rep.details = {"permutation": perm, "argmin_i": arg_i, "generic_value": generic,
                   "a": list(profile.a), "t": list(profile.t)}
    return rep


# ---------------------------------------------------------------- linear forms

@dataclass(frozen=True)
class LinearFormsInstance:
    m: int
    n: int
    lam: tuple[float, ...]

    def __post_init__(self):
        lam = tuple(float(x) for x in self.lam)
        object.__setattr__(self, "lam", lam)
        if self.m < 1 or self.n < 1:
            raise ValidationError("m and n must be positive")
        if len(lam) != self.m:
            raise ValidationError(f"expected {self.m} exponents, got {len(lam)}")
        if any(not (x >= 1) or not math.isfinite(x) for x in lam):
            raise ValidationError(f"every lambda_i must be finite and at least 1, got {lam}")


def linear_forms_exponent_choice(inst: LinearFormsInstance) -> ExponentProfile:
    """Profile with a_i + t_i = lambda_i and sum(a) = m + n.

    The head value for i <= K is (m+n-S)/K; adding one more unit, as a
    literal reading of the construction suggests, would break sum(a) = m+n.
    """
    lam, _ = _sorted_desc(inst.lam)
    m, n = inst.m, inst.n
    if math.fsum(lam) <= m + n:
        raise ValidationError("exponent choice needs sum(lambda) > m + n")
    if lam[-1] >= 1.0 + n / m:
        a = [1.0 + n / m] * m
    else:
        K = _threshold_K(lam, float(m + n))
        if K == 0:
            raise ValidationError(f"no valid threshold K for lambda={lam}")
        head = (m + n - math.fsum(lam[K:])) / K
        a = [head] * K + lam[K:]
    t = [max(0.0, x - y) for x, y in zip(lam, a)]
    return ExponentProfile(tuple(a), tuple(t))


def linear_forms_closed_form(lam_sorted, m: int, n: int) -> tuple[float, int]:
    best, best_i = math.inf, 0
    for i in range(1, m + 1):
        li = lam_sorted[i - 1]
        val = m * (n - 1) + (m + n + math.fsum(li - x for x in lam_sorted[i - 1:])) / li
        if val < best:
            best, best_i = val, i
    return best, best_i


def linear_forms_dim(inst: LinearFormsInstance) -> DimensionReport:
    lam, perm = _sorted_desc(inst.lam)
    m, n = inst.m, inst.n
    if math.fsum(lam) <= m + n:
        return _full_measure_report(m * n, m, {"permutation": perm, "argmin_i": None})
    closed, arg_i = linear_forms_closed_form(lam, m, n)
    profile = linear_forms_exponent_choice(inst)
    space = ProductSpaceSpec((float(n),) * m, 1.0 - 1.0 / n)
    rep = compute_s(space, profile)
    generic = rep.value
    if abs(generic - closed) > CROSS_TOL:
        raise VerificationError(f"closed form {closed!r} disagrees with generic route {generic!r} for lambda={lam}")
    rep.value = closed
    rep.details = {"permutation": perm, "argmin_i": arg_i, "generic_value": generic,
                   "a": list(profile.a), "t": list(profile.t)}
    return rep


# ---------------------------------------------------------------- shrinking targets

def shrinking_target_space(axes: Sequence[CantorAxisSpec]) -> ProductSpaceSpec:
    return ProductSpaceSpec(tuple(ax.delta for ax in axes), 0.0)


def shrinking_target_profile(axes: Sequence[CantorAxisSpec], t: Sequence[float]) -> ExponentProfile:
    if len(axes) != len(t):
        raise ValidationError(f"{len(axes)} axes but {len(t)} exponents")
    return ExponentProfile(tuple(ax.log_base for ax in axes), tuple(float(x) for x in t))


def shrinking_target_dim(axes: Sequence[CantorAxisSpec], t: Sequence[float]) -> DimensionReport:
    """Dimension of the points whose orbit under x -> b_i x hits shrinking targets.

    ``details['hausdorff_measure']`` is an annotation only: the set has
    infinite s-dimensional Hausdorff measure when some t_i > 0.
    """
    space = shrinking_target_space(axes)
    rep = compute_s(space, shrinking_target_profile(axes, t))
    rep.full_measure = all(float(x) == 0.0 for x in t)
    rep.details = {"hausdorff_measure": "full" if rep.full_measure else "infinite",
                   "deltas": list(space.deltas)}
    return rep


# ---------------------------------------------------------------- multiplicative

class Regime(str, enum.Enum):
    FORMULA_HOLDS = "formula_holds"
    FORMULA_FAILS = "formula_fails"


def _ordered_pair(axis_a: CantorAxisSpec, axis_b: CantorAxisSpec, t1: float, t2: float):
    """Order so that log a >= log b; returns (la, lb, d1, d2, t1, t2, swapped)."""
    if axis_a.base >= axis_b.base:
        return axis_a.log_base, axis_b.log_base, axis_a.delta, axis_b.delta, t1, t2, False
    return axis_b.log_base, axis_a.log_base, axis_b.delta, axis_a.delta, t2, t1, True


def mult_closed_form(la: float, lb: float, d1: float, d2: float, t1: float, t2: float) -> tuple[float, str]:
    """The three-case closed form; requires la >= lb.  Returns (value, case)."""
    if la < lb:
        raise ValidationError("closed form needs log a >= log b")
    tail_a = d1 + d2 - (d1 * t1 + d2 * t2) / (t1 + la)
    if la >= t2 + lb:
        return min(d1 + d2 - t2 * d2 / (t2 + lb), tail_a), "i"
    if t1 + la >= t2 + lb:
        return min((d1 * la + d2 * lb) / (t2 + lb), tail_a), "ii"
    return min((d1 * la + d2 * lb) / (t1 + la), d1 + d2 - (d1 * t1 + d2 * t2) / (t2 + lb)), "iii"


def _mult_pair_generic(la, lb, d1, d2, t1, t2) -> DimensionReport:
    return compute_s(ProductSpaceSpec((d1, d2), 0.0), ExponentProfile((la, lb), (t1, t2)))


def mult_pair_dim(axis_a: CantorAxisSpec, axis_b: CantorAxisSpec, t1: float, t2: float) -> DimensionReport:
    """Dimension of the rectangle set with per-axis exponents (t1, t2)."""
    if not (t1 >= 0 and t2 >= 0):
        raise ValidationError(f"t1, t2 must be non-negative, got {t1}, {t2}")
    la, lb, d1, d2, s1, s2, swapped = _ordered_pair(axis_a, axis_b, float(t1), float(t2))
    rep = _mult_pair_generic(la, lb, d1, d2, s1, s2)
    closed, case = mult_closed_form(la, lb, d1, d2, s1, s2)
    if abs(rep.value - closed) > CROSS_TOL:
        raise VerificationError(f"closed form {closed!r} (case {case}) disagrees with generic {rep.value!r}")
    rep.details = {"case": case, "closed_form": closed, "swapped": swapped}
    return rep


def _mult_pair_value(la, lb, d1, d2, t1, t2) -> float:
    # plain-float fast path used inside the optimiser; mirrors the generic engine
    return _mult_pair_generic(la, lb, d1, d2, t1, t2).value


@dataclass
class MultiplicativeResult:
    axis_a: CantorAxisSpec
    axis_b: CantorAxisSpec
    t: float
    regime: Regime
    dim: float
    that_t2: float | None
    formula_value: float
    covering_upper: float
    slicing_lower: float
    numeric_max: float
    numeric_argmax: float
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "axis_a": self.axis_a.as_dict(), "axis_b": self.axis_b.as_dict(), "t": self.t,
            "regime": self.regime.value, "dim": self.dim, "that_t2": self.that_t2,
            "formula_value": self.formula_value, "covering_upper": self.covering_upper,
            "slicing_lower": self.slicing_lower, "numeric_max": self.numeric_max,
            "numeric_argmax": self.numeric_argmax, "details": self.details,
        }


def classify_regime(axis_a: CantorAxisSpec, axis_b: CantorAxisSpec, t: float) -> Regime:
    """Axes are expected with delta_a >= delta_b (see :func:`mult_dim`)."""
    a, b = axis_a.base, axis_b.base
    la, lb = axis_a.log_base, axis_b.log_base
    # t = 0 is the unshrunk product: every bound collapses to delta_a + delta_b
    if t == 0 or a <= b or la <= t + lb:
        return Regime.FORMULA_HOLDS
    if axis_b.delta * (t + la) >= axis_a.delta * la:
        return Regime.FORMULA_HOLDS
    return Regime.FORMULA_FAILS


def _bisect_root(g: Callable[[float], float], lo: float, hi: float):
    glo, ghi = g(lo), g(hi)
    if glo == 0:
        return lo
    if ghi == 0:
        return hi
    if glo * ghi > 0:
        return None
    return optimize.brentq(g, lo, hi, xtol=1e-14)


def mult_profile(axis_a: CantorAxisSpec, axis_b: CantorAxisSpec, t: float, points: int = 1001,
                 threads: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Grid of f(t2) = dim of the (t - t2, t2) rectangle set over [0, t]."""
    grid = np.linspace(0.0, t, points)
    la, lb, d1, d2 = axis_a.log_base, axis_b.log_base, axis_a.delta, axis_b.delta

    def f(x):
        return _mult_pair_value(la, lb, d1, d2, t - x, x)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            vals = list(pool.map(f, grid))
    else:
        vals = [f(x) for x in grid]
    return grid, np.asarray(vals)


def mult_dim(axis_a: CantorAxisSpec, axis_b: CantorAxisSpec, t: float, threads: int = 1) -> MultiplicativeResult:
    """Dimension of the multiplicative shrinking-target set on a Cantor product.

    Axes are reordered so the first has the larger Ahlfors exponent.  The
    supremum over t2 is always located numerically; in the regimes where the
    two-term max formula is known to hold it must agree with the numbers.
    """
    t = float(t)
    if not (t >= 0) or not math.isfinite(t):
        raise ValidationError(f"t must be finite and non-negative, got {t}")
    if axis_a.delta < axis_b.delta:
        axis_a, axis_b = axis_b, axis_a
    la, lb, d1, d2 = axis_a.log_base, axis_b.log_base, axis_a.delta, axis_b.delta
    formula = max(d1 + d2 * lb / (t + lb), d2 + d1 * la / (t + la))
    covering = d1 + d2 * la / (t + la)
    regime = classify_regime(axis_a, axis_b, t)

    def f(x):
        x = min(max(x, 0.0), t)
        return _mult_pair_value(la, lb, d1, d2, t - x, x)

    if t == 0.0:
        best_x, best = 0.0, f(0.0)
    else:
        grid, vals = mult_profile(axis_a, axis_b, t, threads=threads)
        i = int(np.argmax(vals))  # first index on ties = smallest t2
        best_x, best = float(grid[i]), float(vals[i])
        if 0 < i < len(grid) - 1:
            res = optimize.minimize_scalar(lambda x: -f(x), bracket=(grid[i - 1], grid[i], grid[i + 1]),
                                           method="golden", options={"xtol": 1e-10})
            if -res.fun > best:
                best_x, best = float(res.x), float(-res.fun)

    details = {"crossing_displayed": None, "crossing_case_i": None}
    if t > 0:
        # diagnostics only: the two candidate crossing equations
        def g_disp(x):
            t1 = t - x
            return (d1 * la + d2 * lb) / (t1 + la) - (d1 + d2 - (d1 * t1 + d2 * x) / (x + lb))

        def g_case(x):
            t1 = t - x
            return (d1 + d2 - x * d2 / (x + lb)) - (d1 + d2 - (d1 * t1 + d2 * x) / (t1 + la))

        details["crossing_displayed"] = _bisect_root(g_disp, 0.0, t)
        details["crossing_case_i"] = _bisect_root(g_case, 0.0, t)

    if regime is Regime.FORMULA_HOLDS:
        if abs(best - formula) > 1e-8:
            raise VerificationError(f"numerical supremum {best!r} disagrees with the max formula {formula!r}")
        dim, that = formula, None
    else:
        h = max(1e-7, 1e-6 * t)
        left, right = f(best_x - h), f(best_x + h)
        ok = (0.0 < best_x < t) and left < best and right < best and formula < best < covering
        details["derivative_left"] = (best - left) / h
        details["derivative_right"] = (right - best) / h
        if not ok:
            raise VerificationError(f"sandwich/bracket check failed: {formula} < {best} < {covering}, t2={best_x}")
        dim, that = best, best_x
    details["tighter_upper"] = d1 + d2 - t * d2 / la if regime is Regime.FORMULA_FAILS else None
    return MultiplicativeResult(axis_a, axis_b, t, regime, dim, that, formula, covering, formula,
                                best, best_x, details)


# ---------------------------------------------------------------- general approximating functions

@dataclass
class OrbitResult:
    orbit: np.ndarray
    candidates: list
    cluster_sizes: list
    liminf: tuple

    def as_dict(self) -> dict:
        return {"orbit": self.orbit.tolist(), "candidates": [list(c) for c in self.candidates],
                "cluster_sizes": self.cluster_sizes, "liminf": list(self.liminf)}


RHO_LOGS = {
    "inverse": lambda n: -math.log(n),   # rho(u) = 1/u
    "exp": lambda n: -float(n),          # rho(u) = e^{-u}
}


def _cluster(points: np.ndarray, eps: float):
    """Group points whose eps-grid cells touch (king-move adjacency)."""
    cells = {}
    for idx, p in enumerate(points):
        cells.setdefault(tuple(np.floor(p / eps).astype(np.int64)), []).append(idx)
    keys = sorted(cells)
    parent = {k: k for k in keys}

    def find(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    d = points.shape[1]
    offsets = np.array(np.meshgrid(*[[-1, 0, 1]] * d, indexing="ij")).reshape(d, -1).T
    for k in keys:
        for off in offsets:
            nb = tuple(int(x) for x in np.asarray(k) + off)
            if nb in cells:
                ra, rb = find(k), find(nb)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
    groups = {}
    for k in keys:
        groups.setdefault(find(k), []).extend(cells[k])
    out = []
    for root in sorted(groups):
        members = groups[root]
        out.append((tuple(float(x) for x in points[members].mean(axis=0)), len(members)))
    out.sort()
    return out


def exponent_orbit(samples, rho_log: Callable[[float], float] | str = "inverse", eps: float = 0.05,
                   tail: float = 0.5) -> OrbitResult:
    """Exponent vectors log psi_i(n)/log rho(n) and their approximate accumulation points.

    ``samples`` rows are (n, psi_1(n), ..., psi_d(n)).  Accumulation points are
    approximated by clustering the last ``tail`` fraction of the orbit on an
    eps-grid; ``liminf`` is the coordinatewise minimum over that tail.
    """
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] < 2:
        raise ValidationError("samples must be a non-empty table of rows (n, psi_1, ..., psi_d)")
    if not (eps > 0):
        raise ValidationError("clustering eps must be positive")
    if not (0 < tail <= 1):
        raise ValidationError("tail fraction must lie in (0, 1]")
    ns, psis = arr[:, 0], arr[:, 1:]
    if np.any(np.diff(ns) <= 0):
        raise ValidationError("n must be strictly increasing")
    if np.any(psis <= 0) or np.any(psis >= 1):
        raise ValidationError("psi values must lie in (0, 1)")
    rl = RHO_LOGS[rho_log] if isinstance(rho_log, str) else rho_log
    logs = np.array([rl(n) for n in ns])
    if np.any(logs >= 0):
        raise ValidationError("log rho(n) must be negative for every sample")
    orbit = np.log(psis) / logs[:, None]
    start = min(len(orbit) - 1, int(math.floor(len(orbit) * (1 - tail))))
    tail_pts = orbit[start:]
    clusters = _cluster(tail_pts, eps)
    return OrbitResult(orbit, [c for c, _ in clusters], [k for _, k in clusters],
                       tuple(float(x) for x in tail_pts.min(axis=0)))


def liminf_rate(samples, tail: float = 0.5) -> float:
    """liminf of -log psi(n)/n estimated on the tail of a single-function sample table."""
    res = exponent_orbit(samples, "exp", eps=1.0, tail=tail)
    return res.liminf[0]


def simultaneous_sup(candidates: Sequence[Sequence[float]]) -> tuple[float, int]:
    """Supremum of the simultaneous dimension over candidate exponent vectors."""
    if not candidates:
        from .errors import EmptyCandidatesError
        raise EmptyCandidatesError("candidate set is empty")
    vals = [simultaneous_dim(SimultaneousInstance(tuple(c))).value for c in candidates]
    i = int(np.argmax(vals))
    return vals[i], i
