"""Covering geometry of shrunk rectangles and an independent counting oracle.

Two halves live here.  The *model* side evaluates the modelled number of
balls of radius r^A needed to cover one level of shrunk rectangles and
extracts the critical exponent from it.  The *oracle* side builds the actual
level sets of a shrinking-target system on a product of Cantor sets with exact
rational endpoints and counts grid cells (or minimal ball covers) directly.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .cantor import CantorAxisSpec
from .dimcore import (ExponentProfile, ProductSpaceSpec, build_alphabet,
                      compute_s, partition_for)
from .errors import BudgetExceededError, ValidationError, VerificationError


# ---------------------------------------------------------------- model side

@dataclass(frozen=True)
class RectangleSpec:
    sides: tuple[float, ...]

    def __post_init__(self):
        sides = tuple(float(x) for x in self.sides)
        object.__setattr__(self, "sides", sides)
        if not sides or any(not (0 < x <= 1) for x in sides):
            raise ValidationError(f"sides must lie in (0, 1], got {sides}")


def singular_cover_cost(rect: RectangleSpec, s: float) -> float:
    """Singular value function: min over i of l_1...l_{i-1} * l_i^(s-i+1)."""
    ls = sorted(rect.sides, reverse=True)
    if not (0 <= s <= len(ls)):
        raise ValidationError(f"s must lie in [0, {len(ls)}], got {s}")
    best = math.inf
    prefix = 0.0  # log of l_1...l_{i-1}
    for i, l in enumerate(ls, start=1):
        best = min(best, prefix + (s - i + 1) * math.log(l))
        prefix += math.log(l)
    return math.exp(best)


@dataclass(frozen=True)
class LevelSpec:
    """One level of a ubiquity system at scale ``r``.

    ``log_counts[k]`` is log T_k, the log number of big balls along
    direction k; by default T_k = r^(-a_k delta_k).
    """

    space: ProductSpaceSpec
    profile: ExponentProfile
    r: float
    log_counts: tuple[float, ...] | None = None

    def __post_init__(self):
        if not (0 < self.r < 1):
            raise ValidationError(f"r must lie in (0, 1), got {self.r}")
        if self.space.d != self.profile.d:
            raise ValidationError("space and profile dimensions differ")
        if self.log_counts is not None:
            lc = tuple(float(x) for x in self.log_counts)
            if len(lc) != self.space.d or any(x < 0 for x in lc):
                raise ValidationError("log_counts must have length d and be non-negative")
            object.__setattr__(self, "log_counts", lc)

    @property
    def L(self) -> float:
        return -math.log(self.r)

    def log_T(self, k: int) -> float:
        if self.log_counts is not None:
            return self.log_counts[k]
        return self.profile.a[k] * self.space.deltas[k] * self.L


def cover_count(level: LevelSpec, A: float) -> float:
    """Log of the modelled number of r^A-balls covering the level's shrunk rectangles.

    Per direction: r^(-A delta_k) on K1, T_k (r^(a_k+t_k)/r^A)^delta_k on K2
    and T_k on K3.  Points only (kappa = 0).
    """
    if not (A > 0) or not math.isfinite(A):
        raise ValidationError(f"A must be positive and finite, got {A}")
    if level.space.kappa != 0.0:
        raise ValidationError("the cover model is implemented for point resonant sets (kappa = 0)")
    part = partition_for(A, level.profile)
    dl, a, t, L = level.space.deltas, level.profile.a, level.profile.t, level.L
    total = 0.0
    for k in part.k1:
        total += A * dl[k] * L
    for k in part.k2:
        total += level.log_T(k) + (A - a[k] - t[k]) * dl[k] * L
    for k in part.k3:
        total += level.log_T(k)
    return total


def model_levels(space: ProductSpaceSpec, profile: ExponentProfile, rs: Iterable[float]) -> list[LevelSpec]:
    return [LevelSpec(space, profile, float(r)) for r in rs]


def _cost_rate(level: LevelSpec, s: float) -> float:
    # min over A of log(count * r^(sA)), normalised by log(1/r)
    alph = build_alphabet(level.profile).entries
    return min(cover_count(level, A) - s * A * level.L for A in alph) / level.L


def critical_exponent(levels: Sequence[LevelSpec], lo: float = 0.0, hi: float | None = None,
                      tol: float = 1e-6) -> float:
    """Smallest s for which the optimal s-cost of the levels tends to zero.

    The cost at each level is count * r^(sA) minimised over the alphabet.  The
    decision uses the log-cost at the finest level (smallest r) divided by
    log(1/r): a negative rate means the cost tends to zero along the levels.
    """
    if not levels:
        raise ValidationError("need at least one level")
    levels = sorted(levels, key=lambda lv: -lv.r)
    if hi is None:
        hi = levels[0].space.total

    def summable(s):
        return _cost_rate(levels[-1], s) <= 0.0

    if not summable(hi):
        raise ValidationError("non-convergent bracket: cost does not vanish at the upper bound")
    if summable(lo):
        if lo > 0:
            raise ValidationError("non-convergent bracket: cost already vanishes at the lower bound")
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if summable(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------- exact level sets

def nice_rational(x: float, digits: int = 12) -> Fraction:
    """Rational approximation of a positive float with relative error about 10^-digits.

    Powers of two (and simple ratios) come back exactly, which keeps dyadic
    geometry exact when it is exact mathematically.
    """
    if not (x > 0) or not math.isfinite(x):
        raise ValidationError(f"expected a positive finite number, got {x}")
    m, e = math.frexp(x)
    return Fraction(m).limit_denominator(10 ** digits) * Fraction(2) ** e


def anchor_value(axis: CantorAxisSpec, digits: Sequence[int]) -> Fraction:
    """Point of the Cantor set with a finite digit expansion (trailing zeros)."""
    val = Fraction(0)
    for j, dg in enumerate(digits, start=1):
        if dg not in axis.digits:
            raise ValidationError(f"anchor digit {dg} not in {axis.digits}")
        val += Fraction(dg, axis.base ** j)
    if digits and 0 not in axis.digits:
        raise ValidationError("a finite anchor expansion needs 0 among the digits")
    return val


@dataclass
class AxisUnion:
    """Disjoint open intervals (lo, hi) in units of 1/denom, sorted."""

    axis: CantorAxisSpec
    denom: int
    intervals: list[tuple[int, int]]
    raw_count: int

    def as_fractions(self) -> list[tuple[Fraction, Fraction]]:
        return [(Fraction(a, self.denom), Fraction(b, self.denom)) for a, b in self.intervals]

    def lebesgue(self) -> Fraction:
        return Fraction(sum(b - a for a, b in self.intervals), self.denom)


@dataclass
class ProductIntervalUnion:
    """Product over directions of interval unions, intersected with each axis' Cantor set."""

    axes: tuple[AxisUnion, ...]
    n: int
    t: tuple[float, ...]

    @property
    def d(self) -> int:
        return len(self.axes)


def _merge(intervals: list[tuple[int, int]]) -> list[tuple[int, int]]:
    out = []
    for lo, hi in sorted(intervals):
        if out and lo <= out[-1][1]:
            if hi > out[-1][1]:
                out[-1] = (out[-1][0], hi)
        else:
            out.append((lo, hi))
    return out


def build_shrinking_level(axes: Sequence[CantorAxisSpec], t: Sequence[float], n: int,
                          anchor: Sequence[Sequence[int]] | None = None,
                          max_intervals: int = 10 ** 6) -> ProductIntervalUnion:
    """Level-n union of shrunk targets: intervals of half-width b^-n e^(-n t) about x(v).

    x(v) = (v + x_o) / b^n runs over all Cantor words v of length n; the
    anchor x_o is a finite digit string per axis (default all zeros).
    """
    if len(axes) != len(t):
        raise ValidationError(f"{len(axes)} axes but {len(t)} exponents")
    if n < 1:
        raise ValidationError("level n must be at least 1")
    anchor = anchor or [()] * len(axes)
    out = []
    for ax, ti, dig in zip(axes, t, anchor):
        ti = float(ti)
        if ti < 0:
            raise ValidationError("t must be non-negative")
        count = ax.k ** n
        if count > max_intervals:
            raise BudgetExceededError(f"{count} intervals exceed the budget {max_intervals}")
        xo = anchor_value(ax, dig)
        h = nice_rational(math.exp(-n * ti)) / ax.base ** n
        denom = ax.base ** n * xo.denominator * h.denominator
        unit = denom // ax.base ** n
        off = xo.numerator * (denom // (ax.base ** n * xo.denominator))
        hw = h.numerator * (denom // h.denominator)
        ivs = []
        for v in ax.words(n):
            c = v * unit + off
            ivs.append((max(0, c - hw), min(denom, c + hw)))
        out.append(AxisUnion(ax, denom, _merge(ivs), count))
    return ProductIntervalUnion(tuple(out), n, tuple(float(x) for x in t))


@dataclass
class _Pieces:
    """Refined pieces of one direction: union intersected with level-M cylinders."""

    lo_f: np.ndarray
    hi_f: np.ndarray
    lo_exact: list
    hi_exact: list
    denom: int


def _refine(au: AxisUnion, M: int, budget: int) -> _Pieces:
    ax = au.axis
    if ax.is_full or M <= 0:
        los = [a for a, _ in au.intervals]
        his = [b for _, b in au.intervals]
        return _Pieces(np.array([a / au.denom for a in los]), np.array([b / au.denom for b in his]),
                       los, his, au.denom)
    bM = ax.base ** M
    scale = bM // math.gcd(bM, au.denom)
    denom = au.denom * scale
    c = denom // bM
    if ax.k ** M > budget:
        raise BudgetExceededError(f"refinement to level {M} needs {ax.k ** M} cylinders")
    words = np.array([0], dtype=object if bM >= 2 ** 62 else np.int64)
    for _ in range(M):
        words = (words[:, None] * ax.base + np.array(ax.digits)).ravel()
    los, his = [], []
    for lo, hi in au.intervals:
        lo, hi = lo * scale, hi * scale
        i0 = int(np.searchsorted(words, lo // c, side="left"))
        i1 = int(np.searchsorted(words, -(-hi // c) - 1, side="right"))
        for N in words[i0:i1].tolist():
            a, b = max(N * c, lo), min((N + 1) * c, hi)
            if b > a:
                los.append(a)
                his.append(b)
        if len(los) > budget:
            raise BudgetExceededError("too many refined pieces")
    return _Pieces(np.array([a / denom for a in los]), np.array([b / denom for b in his]), los, his, denom)


def refine_level(union: ProductIntervalUnion, finest_eps: float, budget: int = 4 * 10 ** 6) -> list[_Pieces]:
    """Refine each Cantor direction to cylinders a couple of levels below ``finest_eps``."""
    out = []
    for au in union.axes:
        b = au.axis.base
        M = max(union.n, int(math.ceil(math.log(1.0 / finest_eps) / math.log(b))) + 2)
        out.append(_refine(au, M, budget))
    return out


def _floor_cells(vals_f, exact, denom, eps: Fraction, upper: bool):
    """floor(x/eps) (or ceil(x/eps) - 1 when ``upper``) with exact fallback near ties."""
    ef = float(eps)
    q = vals_f / ef
    res = np.ceil(q) - 1 if upper else np.floor(q)
    near = np.abs(q - np.round(q)) < 1e-6 * np.maximum(1.0, np.abs(q))
    if near.any():
        P, R = eps.numerator, eps.denominator
        for i in np.nonzero(near)[0]:
            num = exact[i] * R
            den = denom * P
            res[i] = -((-num) // den) - 1 if upper else num // den
    return res.astype(np.int64)


def _count_cells(pc: _Pieces, eps: Fraction) -> int:
    if len(pc.lo_f) == 0:
        return 0
    jlo = _floor_cells(pc.lo_f, pc.lo_exact, pc.denom, eps, upper=False)
    jhi = _floor_cells(pc.hi_f, pc.hi_exact, pc.denom, eps, upper=True)
    prev = np.maximum.accumulate(jhi)
    prev = np.concatenate(([np.iinfo(np.int64).min // 2], prev[:-1]))
    start = np.maximum(jlo, prev + 1)
    return int(np.maximum(jhi - start + 1, 0).sum())


def _count_balls(pc: _Pieces, r: float) -> int:
    """Greedy minimal cover of the pieces by intervals of length 2r (optimal in 1-D)."""
    lo, hi = pc.lo_f, pc.hi_f
    n = len(lo)
    w = 2.0 * r
    cnt, reach = 0, -math.inf
    while True:
        j = int(np.searchsorted(hi, reach, side="right"))  # first piece not yet covered
        if j >= n:
            return cnt
        start = max(lo[j], reach)
        k = max(1, int(math.ceil((hi[j] - start) / w)))
        cnt += k
        reach = start + k * w


@dataclass
class GridCount:
    per_direction: tuple[int, ...]
    log_total: float

    @property
    def total(self) -> int:
        return math.prod(self.per_direction)


def grid_count(union: ProductIntervalUnion, eps: float | Fraction, pieces: list[_Pieces] | None = None) -> GridCount:
    """Number of grid cells [j eps, (j+1) eps)^d meeting the level set (product over directions)."""
    e = Fraction(eps) if isinstance(eps, Fraction) else nice_rational(float(eps))
    if not (0 < e < 1):
        raise ValidationError(f"eps must lie in (0, 1), got {eps}")
    pieces = pieces or refine_level(union, float(e))
    per = tuple(_count_cells(pc, e) for pc in pieces)
    return GridCount(per, math.fsum(math.log(x) for x in per) if all(per) else -math.inf)


def ball_cover_count(union: ProductIntervalUnion, r: float, pieces: list[_Pieces] | None = None) -> GridCount:
    """Size of a minimal cover by sup-norm balls of radius r (product of 1-D optimal covers)."""
    if not (0 < r < 1):
        raise ValidationError(f"r must lie in (0, 1), got {r}")
    pieces = pieces or refine_level(union, r)
    per = tuple(_count_balls(pc, float(r)) for pc in pieces)
    return GridCount(per, math.fsum(math.log(x) for x in per) if all(per) else -math.inf)


@dataclass
class LevelScan:
    n: int
    A: np.ndarray
    eps: np.ndarray
    log_counts: np.ndarray
    s_star: float
    argmin: int
    steps_to_alphabet: float

    def rows(self):
        for A, e, lc in zip(self.A, self.eps, self.log_counts):
            cost = lc + self.s_star * math.log(e)
            yield {"n": self.n, "A": float(A), "eps": float(e), "log_N": float(lc),
                   "N": int(round(math.exp(lc))), "log_cost": float(cost)}


@dataclass
class EmpiricalExponent:
    levels: list[LevelScan]
    predicted: float
    counter: str
    alphabet: tuple[float, ...] = field(default_factory=tuple)

    @property
    def last(self) -> float:
        return self.levels[-1].s_star

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=["n", "A", "eps", "N", "log_N", "log_cost"], lineterminator="\n")
        w.writeheader()
        for lv in self.levels:
            for row in lv.rows():
                w.writerow({k: (format(v, ".17g") if isinstance(v, float) else v) for k, v in row.items()})
        return buf.getvalue()


def empirical_critical_exponent(axes: Sequence[CantorAxisSpec], t: Sequence[float], n_range: Iterable[int],
                                steps: int = 64, counter: str = "grid",
                                anchor: Sequence[Sequence[int]] | None = None) -> EmpiricalExponent:
    """Per level n: s*_n = min over the eps grid of log N(eps) / log(1/eps).

    The grid is eps = e^(-nA) for ``steps`` values of A evenly spanning the
    alphabet range.  ``counter`` is ``"grid"`` (grid cells) or ``"balls"``
    (minimal covers by balls of radius eps).
    """
    if counter not in ("grid", "balls"):
        raise ValidationError(f"unknown counter {counter!r}")
    if steps < 2:
        raise ValidationError("need at least two grid steps")
    from .applications import shrinking_target_dim, shrinking_target_profile
    profile = shrinking_target_profile(axes, t)
    alph = build_alphabet(profile).entries
    predicted = shrinking_target_dim(axes, t).value
    lo, hi = alph[0], alph[-1]
    if hi == lo:
        hi = lo * 1.5
    As = np.linspace(lo, hi, steps)
    step = As[1] - As[0]
    scans = []
    for n in n_range:
        union = build_shrinking_level(axes, t, n, anchor)
        eps_f = np.exp(-n * As)
        pieces = refine_level(union, float(eps_f.min()))
        logs = []
        for e in eps_f:
            if counter == "grid":
                g = grid_count(union, nice_rational(float(e)), pieces)
            else:
                g = ball_cover_count(union, float(e), pieces)
            logs.append(g.log_total)
        logs = np.array(logs)
        ratios = logs / (n * As)
        k = int(np.argmin(ratios))
        dist = min(abs(As[k] - a) for a in alph) / step
        scans.append(LevelScan(n, As.copy(), eps_f, logs, float(ratios[k]), k, float(dist)))
    if not scans:
        raise ValidationError("empty level range")
    return EmpiricalExponent(scans, predicted, counter, tuple(alph))


def shrinking_model_level(axes: Sequence[CantorAxisSpec], t: Sequence[float], n: int) -> LevelSpec:
    """Cover model for the level-n shrinking system: r = e^-n, T_k = (#digits)^n."""
    from .applications import shrinking_target_profile, shrinking_target_space
    space = shrinking_target_space(axes)
    profile = shrinking_target_profile(axes, t)
    return LevelSpec(space, profile, math.exp(-n), tuple(n * math.log(ax.k) for ax in axes))
