"""Numerical checks of the local ubiquity inequality.

For a ball B and a level k the quantity of interest is

    m(B intersected with the union of Delta(R_alpha, M rho(u_k)^a) over l_k <= beta_alpha <= u_k) / m(B)

computed exactly by an interval sweep where the geometry is one-dimensional
per direction, and by seeded Monte Carlo otherwise.  Coordinates live on the
torus R/Z so that balls near 0 or 1 need no special treatment.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ..cantor import CantorAxisSpec, cantor_measure
from ..coverlab import anchor_value
from ..errors import BudgetExceededError, ValidationError


class SystemKind(str, enum.Enum):
    SIMULTANEOUS = "simultaneous"
    LINEAR_FORMS = "linear_forms"
    SHRINKING = "shrinking"


@dataclass(frozen=True)
class UbiquitySystemSpec:
    """A ubiquity system: resonant sets, weights and the level windows [l_k, u_k].

    Rational systems use rho(u) = 1/u with l_k = M^(k-1), u_k = M^k; the
    shrinking-target system uses rho(u) = e^-u with l_k = u_k = k.
    """

    kind: SystemKind
    m: int = 1
    n: int = 1
    a: tuple[float, ...] = ()
    M: int = 32
    axes: tuple[CantorAxisSpec, ...] = ()
    anchor: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        kind = SystemKind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "a", tuple(float(x) for x in self.a))
        if kind is SystemKind.SHRINKING:
            if not self.axes:
                raise ValidationError("shrinking systems need at least one axis")
            if self.anchor and len(self.anchor) != len(self.axes):
                raise ValidationError("anchor needs one digit string per axis")
            return
        if self.m < 1 or self.n < 1:
            raise ValidationError("m and n must be positive")
        nn = 1 if kind is SystemKind.SIMULTANEOUS else self.n
        if kind is SystemKind.SIMULTANEOUS and self.n != 1:
            raise ValidationError("simultaneous systems have n = 1")
        if len(self.a) != self.m or any(x < 1 for x in self.a):
            raise ValidationError(f"need m={self.m} exponents, each at least 1")
        if abs(math.fsum(self.a) - (self.m + nn)) > 1e-12:
            raise ValidationError(f"exponents must sum to {self.m + nn}, got {math.fsum(self.a)}")
        if self.M < self.min_M():
            raise ValidationError(f"M={self.M} is below the admissible threshold {self.min_M()}")

    def min_M(self) -> int:
        if self.kind is SystemKind.SIMULTANEOUS:
            return 2 ** (3 * self.m + 2)
        if self.kind is SystemKind.LINEAR_FORMS:
            return 2 ** (2 * self.m + 1) * self.n ** self.m
        return 1

    def window(self, k: int) -> tuple[int, int]:
        if k < 1:
            raise ValidationError("levels start at 1")
        if self.kind is SystemKind.SHRINKING:
            return k, k
        return self.M ** (k - 1), self.M ** k

    def rho(self, u: float) -> float:
        return math.exp(-u) if self.kind is SystemKind.SHRINKING else 1.0 / u

    def compliance(self, k: int, radius: float) -> bool:
        """Whether level k satisfies the two smallness conditions used in the ubiquity proof."""
        if self.kind is SystemKind.SHRINKING:
            return True
        m, n, M = self.m, self.n, self.M
        first = 2 ** (2 * m) * n ** (m / 2) / M ** n <= 0.25
        second = n * 2 ** m * 3 ** (m + n) * k * math.log(M) / M ** k <= radius ** m / 4
        return first and second

    def min_compliant_level(self, radius: float, k_max: int = 64) -> int:
        for k in range(1, k_max + 1):
            if self.compliance(k, radius):
                return k
        raise ValidationError(f"no compliant level up to {k_max} for radius {radius}")

    def as_dict(self) -> dict:
        out = {"kind": self.kind.value}
        if self.kind is SystemKind.SHRINKING:
            out["axes"] = [ax.as_dict() for ax in self.axes]
            out["anchor"] = [list(x) for x in self.anchor]
        else:
            out.update({"m": self.m, "n": self.n, "a": list(self.a), "M": self.M})
        return out


@dataclass
class UbiquityReport:
    level: int
    fraction: float
    stderr: float
    method: str
    exact: str | None = None
    samples: int = 0
    degenerate: bool = False
    compliant: bool | None = None
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"level": self.level, "fraction": self.fraction, "stderr": self.stderr, "method": self.method,
                "exact": self.exact, "samples": self.samples, "degenerate": self.degenerate,
                "compliant": self.compliant}


# ---------------------------------------------------------------- exact, one direction

def _arc_points(a: Fraction, b: Fraction, lo_q: int, hi_q: int):
    """All (p, q) with lo_q <= q <= hi_q and a <= p/q <= b, sorted by value."""
    qs = np.arange(lo_q, hi_q + 1, dtype=np.int64)
    # exact bounds in Python integers: the fractions' numerators overflow int64
    p_lo = np.array([-((-a.numerator * q) // a.denominator) for q in range(lo_q, hi_q + 1)], dtype=np.int64)
    p_hi = np.array([(b.numerator * q) // b.denominator for q in range(lo_q, hi_q + 1)], dtype=np.int64)
    counts = np.maximum(p_hi - p_lo + 1, 0)
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    q_all = np.repeat(qs, counts)
    starts = np.repeat(p_lo - np.concatenate(([0], np.cumsum(counts)[:-1])), counts)
    p_all = starts + np.arange(total, dtype=np.int64)
    order = np.argsort(p_all / q_all, kind="stable")
    return p_all[order], q_all[order]


def _covered_length(p_all, q_all, eps: Fraction, lo_b: Fraction, hi_b: Fraction) -> Fraction:
    """Length of [lo_b, hi_b] covered by the eps-neighbourhoods of sorted points p/q."""
    total = len(p_all)
    if total == 0:
        return Fraction(0)
    vals = p_all / q_all
    # gap between consecutive points compared with 2 eps; decide in floats,
    # re-decide exactly where the float comparison is too close to call
    gaps = np.diff(vals)
    two_eps = float(2 * eps)
    joined = gaps < two_eps
    for i in np.nonzero(np.abs(gaps - two_eps) <= 1e-9 * two_eps)[0]:
        g = Fraction(int(p_all[i + 1]), int(q_all[i + 1])) - Fraction(int(p_all[i]), int(q_all[i]))
        joined[i] = g <= 2 * eps
    breaks = np.nonzero(~joined)[0]
    firsts = np.concatenate(([0], breaks + 1))
    lasts = np.concatenate((breaks, [total - 1]))
    covered = Fraction(0)
    for f, l in zip(firsts.tolist(), lasts.tolist()):
        left = max(Fraction(int(p_all[f]), int(q_all[f])) - eps, lo_b)
        right = min(Fraction(int(p_all[l]), int(q_all[l])) + eps, hi_b)
        if right > left:
            covered += right - left
    return covered


def _arc_fraction_rationals(center: Fraction, radius: Fraction, lo_q: int, hi_q: int, eps: Fraction,
                            max_points: int, chunk_points: int = 4 * 10 ** 6) -> Fraction:
    """Length of B(center, radius) covered by eps-balls about all p/q with lo_q <= q <= hi_q.

    Works on the lifted line: every integer p is allowed, which is the same as
    taking 0 <= p <= q on the torus.  The ball is cut into pieces holding about
    ``chunk_points`` points each; a piece only needs the points within eps of it.
    """
    a, b = center - radius, center + radius
    # points with q in [lo_q, hi_q] in an interval of length L: about L (hi_q^2 - lo_q^2) / 2
    density = (hi_q * hi_q - lo_q * lo_q + 2 * hi_q) / 2
    expected = float((b - a + 2 * eps)) * density + (hi_q - lo_q + 1)
    if expected > max_points:
        raise BudgetExceededError(f"about {int(expected)} rational points exceed the budget {max_points}")
    pieces = max(1, math.ceil(expected / chunk_points))
    cuts = [a + (b - a) * Fraction(i, pieces) for i in range(pieces + 1)]
    covered = Fraction(0)
    for lo_b, hi_b in zip(cuts, cuts[1:]):
        p_all, q_all = _arc_points(lo_b - eps, hi_b + eps, lo_q, hi_q)
        covered += _covered_length(p_all, q_all, eps, lo_b, hi_b)
    return covered


def _shrinking_exact(spec: UbiquitySystemSpec, center: Sequence[Fraction], radius: Fraction, k: int):
    from ..coverlab import build_shrinking_level
    union = build_shrinking_level(spec.axes, [0.0] * len(spec.axes), k, spec.anchor or None)
    frac = Fraction(1)
    for ax, au, c in zip(spec.axes, union.axes, center):
        lo, hi = max(Fraction(0), c - radius), min(Fraction(1), c + radius)
        ball = cantor_measure(ax, lo, hi)
        if ball == 0:
            return None
        hit = Fraction(0)
        for a, b in au.as_fractions():
            a, b = max(a, lo), min(b, hi)
            if b > a:
                hit += cantor_measure(ax, a, b)
        frac *= hit / ball
    return frac


# ---------------------------------------------------------------- Monte Carlo

def _mc_hits(spec: UbiquitySystemSpec, x: np.ndarray, k: int, q_chunk: int = 4096) -> np.ndarray:
    """x has shape (samples, m, n); returns a boolean hit mask."""
    lo_q, hi_q = spec.window(k)
    Q = float(hi_q)
    tol = spec.M * Q ** (-np.asarray(spec.a))  # per-row distance to the resonant set
    S = x.shape[0]
    hit = np.zeros(S, dtype=bool)
    if spec.kind is SystemKind.SIMULTANEOUS:
        xs = x[:, :, 0]
        for q0 in range(lo_q, hi_q + 1, q_chunk):
            qs = np.arange(q0, min(hi_q, q0 + q_chunk - 1) + 1, dtype=float)
            live = np.nonzero(~hit)[0]
            if live.size == 0:
                break
            prod = xs[live][:, None, :] * qs[None, :, None]
            dist = np.abs(prod - np.rint(prod))
            ok = np.all(dist < qs[None, :, None] * tol[None, None, :], axis=2)
            hit[live] = ok.any(axis=1)
        return hit
    # linear forms: enumerate integer vectors q with l_k <= |q|_max <= u_k
    n = spec.n
    count = (2 * hi_q + 1) ** n
    if count > 5 * 10 ** 6:
        raise BudgetExceededError(f"{count} integer vectors exceed the Monte Carlo budget")
    grid = np.array(list(itertools.product(range(-hi_q, hi_q + 1), repeat=n)), dtype=float)
    norm = np.abs(grid).max(axis=1)
    grid = grid[(norm >= lo_q) & (norm <= hi_q)]
    l2 = np.linalg.norm(grid, axis=1)
    for c0 in range(0, len(grid), q_chunk):
        g = grid[c0:c0 + q_chunk]
        live = np.nonzero(~hit)[0]
        if live.size == 0:
            break
        val = np.einsum("smn,qn->sqm", x[live], g)
        dist = np.abs(val - np.rint(val))
        ok = np.all(dist < l2[c0:c0 + q_chunk, None][None] * tol[None, None, :], axis=2)
        hit[live] = ok.any(axis=1)
    return hit


def ubiquity_coverage(spec: UbiquitySystemSpec, center: Sequence[float], radius: float, k: int,
                      method: str = "exact_1d", samples: int = 4000, seed: int | None = None,
                      max_points: int = 10 ** 8) -> UbiquityReport:
    """Fraction of the ball B(center, radius) covered at level k.

    ``center`` has one coordinate per direction (m for simultaneous, m*n for
    linear forms in row-major order, d for shrinking systems).  Monte Carlo
    requires an explicit seed.
    """
    if radius < 0:
        raise ValidationError("radius must be non-negative")
    if k < 1:
        raise ValidationError("levels start at 1")
    dims = {SystemKind.SIMULTANEOUS: spec.m, SystemKind.LINEAR_FORMS: spec.m * spec.n,
            SystemKind.SHRINKING: len(spec.axes)}[spec.kind]
    if len(center) != dims:
        raise ValidationError(f"center needs {dims} coordinates, got {len(center)}")
    compliant = spec.compliance(k, radius) if radius > 0 else None
    if radius == 0:
        return UbiquityReport(k, 0.0, 0.0, method, None, 0, True, compliant)
    if spec.kind is not SystemKind.SHRINKING and radius > 0.5:
        raise ValidationError("balls on the torus need radius at most 1/2")

    if method == "exact_1d":
        c = [Fraction(x) for x in center]
        r = Fraction(radius)
        if spec.kind is SystemKind.SHRINKING:
            frac = _shrinking_exact(spec, c, r, k)
            if frac is None:
                return UbiquityReport(k, 0.0, 0.0, method, None, 0, True, compliant)
        elif spec.kind is SystemKind.SIMULTANEOUS and spec.m == 1:
            lo_q, hi_q = spec.window(k)
            a = Fraction(spec.a[0]).limit_denominator(10 ** 9)
            if a.denominator != 1:
                raise ValidationError("the exact sweep needs an integer exponent")
            eps = Fraction(spec.M, hi_q ** int(a))
            frac = _arc_fraction_rationals(c[0] % 1, r, lo_q, hi_q, eps, max_points) / (2 * r)
        else:
            raise ValidationError("exact_1d supports shrinking systems and simultaneous m=1 only")
        return UbiquityReport(k, float(frac), 0.0, method, f"{frac.numerator}/{frac.denominator}", 0,
                              False, compliant)

    if method != "monte_carlo":
        raise ValidationError(f"unknown method {method!r}")
    if seed is None:
        raise ValidationError("Monte Carlo needs an explicit seed")
    if samples < 1:
        raise ValidationError("need at least one sample")
    rng = np.random.default_rng(seed)
    c = np.asarray(center, dtype=float)
    if spec.kind is SystemKind.SHRINKING:
        raise ValidationError("shrinking systems are handled exactly; use exact_1d")
    pts = (c[None, :] + rng.uniform(-radius, radius, size=(samples, dims))) % 1.0
    hits = _mc_hits(spec, pts.reshape(samples, spec.m, spec.n), k)
    p = float(hits.mean())
    se = math.sqrt(max(p * (1 - p), 0.0) / samples)
    return UbiquityReport(k, p, se, method, None, samples, False, compliant)
