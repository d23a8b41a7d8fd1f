"""Cantor-subset construction with a mass distribution, tested against the MDP.

The construction is the point-resonant shrinking-target one on a product of
missing-digit Cantor sets.  Inside every level-(k-1) ball:

* big rectangles are level-n_k cylinders (thinned by a fixed trailing digit
  block so that 3x enlargements stay disjoint) whose resonant point
  x(v) = (v + x_o) / b^n lies in the inner half of the ball;
* each big rectangle has exactly one shrunk rectangle, of half-widths
  b_i^-n e^(-n t_i) about x(v);
* each shrunk rectangle is divided into balls of the common radius
  e^(-n A) with A = max_i (log b_i + t_i), again thinned for separation.

Balls are sup-norm balls, so everything factorises over directions and the
tree is stored lazily as one digit-arithmetic tree per direction.  Positions
are exact integers in a per-direction unit 1 / (2 (b-1) b^G), which makes
every Cantor point with an eventually constant tail representable.
"""
from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import gmpy2
import mpmath
import numpy as np

from ..cantor import AffineWordFamily, CantorAxisSpec, WordCounter
from ..dimcore import ExponentProfile, ProductSpaceSpec, compute_s
from ..errors import BudgetExceededError, ValidationError, VerificationError

SEPARATION = 6  # sibling centres at least 6 radii apart: 3x enlargements are disjoint
CONTAINMENT = 6  # child big radius at most 1/6 of the parent ball radius


def proportional_masses(parent, weights: Sequence) -> list[Fraction]:
    """Split ``parent`` proportionally to non-negative ``weights`` (exact)."""
    ws = [Fraction(w) for w in weights]
    if not ws or any(w < 0 for w in ws):
        raise ValidationError("weights must be a non-empty list of non-negative numbers")
    total = sum(ws)
    if total == 0:
        raise ValidationError("weights sum to zero")
    parent = Fraction(parent)
    return [parent * w / total for w in ws]


@dataclass(frozen=True)
class AxisLevel:
    """Geometry of one level in one direction, all lengths in integer units."""

    n: int
    j: int  # trailing digits fixed on big cylinders
    alpha: object  # big positions: alpha * w + beta
    beta: object
    big_r: object
    h: object
    rho: object
    flat: bool
    m: int = 0  # cylinder level of division centres
    j2: int = 0
    alpha2: object = 0  # division centres relative to x(v)
    beta2: object = 0
    d_first: int = 0
    D: int = 1
    off_lo: object = 0
    off_hi: object = 0

    @property
    def q_big(self) -> int:
        return self.n - self.j

    @property
    def q_div(self) -> int:
        return self.m - self.n - self.j2


class _InvalidLevel(Exception):
    pass


class AxisTree:
    """Lazy per-direction tree: root -> big -> shrunk -> ball -> big -> ..."""

    def __init__(self, axis: CantorAxisSpec, t: float, A: float, ns: Sequence[int],
                 anchor: Sequence[int] = (), G: int | None = None):
        self.axis = axis
        self.t = float(t)
        self.A = float(A)
        self.anchor = tuple(int(x) for x in anchor)
        if any(dg not in axis.digits for dg in self.anchor):
            raise ValidationError(f"anchor digits {self.anchor} must come from {axis.digits}")
        self.counter = WordCounter(axis)
        b = axis.base
        self.lam = axis.digits[0]
        self.X_o = 0
        for dg in self.anchor:
            self.X_o = self.X_o * b + dg
        if G is None:
            G = self.required_G(ns)
        self.G = G
        self.U = gmpy2.mpz(2 * (b - 1)) * gmpy2.mpz(b) ** G
        self.flat = abs(axis.log_base + self.t - self.A) <= 1e-12
        self.levels: list[AxisLevel] = [self._level(n) for n in ns]

    def required_G(self, ns) -> int:
        b = self.axis.base
        top = max(ns)
        m_top = math.ceil(top * self.A / math.log(b)) + 3
        return max(top + len(self.anchor), m_top) + 2

    # ---- units
    def unit(self, q: int):
        return gmpy2.mpz(2 * (self.axis.base - 1)) * gmpy2.mpz(self.axis.base) ** (self.G - q)

    def zero_tail(self, q: int):
        return gmpy2.mpz(2 * self.lam) * gmpy2.mpz(self.axis.base) ** (self.G - q)

    def x_offset(self, n: int):
        L = len(self.anchor)
        return self.X_o * self.unit(n + L) + self.zero_tail(n + L)

    def scaled_exp(self, x: float):
        """floor(U * e^-x) for x > 0."""
        with mpmath.workprec(160):
            return gmpy2.mpz(int(mpmath.floor(mpmath.exp(mpmath.log(int(self.U)) - mpmath.mpf(x)))))

    def _level(self, n: int) -> AxisLevel:
        b, K = self.axis.base, self.axis.k
        if n + len(self.anchor) > self.G:
            raise _InvalidLevel("unit too coarse")
        j = 0
        while b ** j < SEPARATION:
            j += 1
        if j > n:
            raise _InvalidLevel("level too shallow for separation")
        S_j = self.lam * (b ** j - 1) // (b - 1)
        un = self.unit(n)
        alpha = gmpy2.mpz(b) ** j * un
        beta = S_j * un + self.x_offset(n)
        rho = self.scaled_exp(n * self.A)
        if self.flat:
            return AxisLevel(n, j, alpha, beta, un, rho, rho, True)
        h = un if self.t == 0 else self.scaled_exp(n * (self.axis.log_base + self.t))
        m = n
        while self.unit(m) > rho:
            m += 1
            if m > self.G:
                raise _InvalidLevel("unit too coarse for division")
        um = self.unit(m)
        j2 = 0
        while gmpy2.mpz(b) ** j2 * um < SEPARATION * rho:
            j2 += 1
        if m - n - j2 < 0:
            raise _InvalidLevel("no room for separated division balls")
        S_j2 = self.lam * (b ** j2 - 1) // (b - 1)
        alpha2 = gmpy2.mpz(b) ** j2 * um
        beta2 = S_j2 * um + self.zero_tail(m) - self.x_offset(n)
        fam2 = AffineWordFamily(self.counter, m - n - j2, alpha2, beta2)
        lo, hi = -h + rho, h - rho
        D = int(fam2.count(lo, hi))
        if D < 1:
            raise _InvalidLevel("shrunk rectangle holds no division ball")
        d_first = int(fam2.first_index(lo))
        return AxisLevel(n, j, alpha, beta, un, h, rho, False, m, j2, alpha2, beta2, d_first, D,
                         fam2.position(d_first), fam2.position(d_first + D - 1))

    # ---- families
    def big_family(self, k: int) -> AffineWordFamily:
        L = self.levels[k]
        return AffineWordFamily(self.counter, L.q_big, L.alpha, L.beta)

    def div_family(self, k: int) -> AffineWordFamily | None:
        L = self.levels[k]
        if L.flat:
            return None
        return AffineWordFamily(self.counter, L.q_div, L.alpha2, L.beta2)

    def window(self, k: int, c, R):
        """Range of resonant points allowed inside the parent node of level k."""
        if k == 0:
            return gmpy2.mpz(0), self.U
        return c - R // 2, c + R // 2

    def root(self):
        return self.U // 2, self.U // 2

    def n_big(self, k: int, c, R):
        lo, hi = self.window(k, c, R)
        return self.big_family(k).count(lo, hi)

    def children(self, k: int, c, R, limit: int = 10 ** 5):
        """Explicit (big centre, [leaf centres]) list for a node at level k."""
        lo, hi = self.window(k, c, R)
        fam = self.big_family(k)
        bigs = fam.items(lo, hi, limit)
        L = self.levels[k]
        fam2 = self.div_family(k)
        if fam2 is None:
            offs = [gmpy2.mpz(0)]
        else:
            if L.D > limit:
                raise BudgetExceededError(f"{L.D} division balls exceed the limit {limit}")
            offs = [fam2.position(L.d_first + i) for i in range(L.D)]
        return [(x, [x + o for o in offs]) for x in bigs]

    # ---- sampling and mass
    def sample_leaf(self, rng: random.Random):
        c, R = self.root()
        path = []
        for k, L in enumerate(self.levels):
            lo, hi = self.window(k, c, R)
            fam = self.big_family(k)
            nb = fam.count(lo, hi)
            if nb == 0:
                raise VerificationError(f"node at level {k} has no children")
            x = fam.position(fam.first_index(lo) + rng.randrange(int(nb)))
            if L.flat:
                y = x
            else:
                y = x + self.div_family(k).position(L.d_first + rng.randrange(L.D))
            path.append((x, y, nb))
            c, R = y, L.rho
        return path

    def mass_in(self, lo, hi, rel_tol: float = 1e-9):
        """(lower, upper) bounds on the mass of the interval [lo, hi] (units).

        The upper bound counts every deepest-level leaf meeting the interval;
        partial nodes whose mass is negligible next to the mass already found
        are counted whole instead of being refined.
        """
        c, R = self.root()
        return self._mass_in(0, c, R, Fraction(1), gmpy2.mpz(lo), gmpy2.mpz(hi), rel_tol)

    def _mass_in(self, k, c, R, mu, lo, hi, rel_tol):
        L = self.levels[k]
        wlo, whi = self.window(k, c, R)
        fam = self.big_family(k)
        nb = fam.count(wlo, whi)
        if nb == 0:
            return Fraction(0), Fraction(0)
        leaf_mu = mu / (int(nb) * L.D)
        rho = L.rho
        # bigs whose leaves all lie inside [lo, hi]
        f_lo, f_hi = max(wlo, lo - L.off_lo + rho), min(whi, hi - L.off_hi - rho)
        full = fam.count(f_lo, f_hi) if f_lo <= f_hi else 0
        # bigs with at least one leaf meeting (lo, hi)
        t_lo, t_hi = max(wlo, lo - L.off_hi - rho + 1), min(whi, hi - L.off_lo + rho - 1)
        border = []
        if t_lo <= t_hi:
            if f_lo <= f_hi:
                if t_lo <= f_lo - 1:
                    border += fam.items(t_lo, f_lo - 1)
                if f_hi + 1 <= t_hi:
                    border += fam.items(f_hi + 1, t_hi)
            else:
                border += fam.items(t_lo, t_hi)
        inside = int(full) * L.D
        partial = []
        fam2 = self.div_family(k)
        for x in border:
            if fam2 is None:
                if lo <= x - rho and x + rho <= hi:
                    inside += 1
                else:
                    partial.append(x)
                continue
            i_lo, i_hi = max(lo + rho - x, L.off_lo), min(hi - rho - x, L.off_hi)
            n_in = int(fam2.count(i_lo, i_hi)) if i_lo <= i_hi else 0
            inside += n_in
            seen = set()
            for e in (lo, hi):
                # leaves straddling an endpoint; separation leaves at most one per endpoint
                p_lo, p_hi = max(e - rho + 1 - x, L.off_lo), min(e + rho - 1 - x, L.off_hi)
                if p_lo <= p_hi:
                    for y in fam2.items(p_lo, p_hi):
                        if y not in seen and not (i_lo <= y <= i_hi):
                            seen.add(y)
                            partial.append(x + y)
        lower = inside * leaf_mu
        upper = lower
        last = k + 1 == len(self.levels)
        for y in partial:
            if last or (lower > 0 and leaf_mu * len(partial) <= rel_tol * lower):
                upper += leaf_mu
            else:
                sl, su = self._mass_in(k + 1, y, rho, leaf_mu, lo, hi, rel_tol)
                lower += sl
                upper += su
        return lower, upper


def _auto_growth(space, profile, target_gap: float) -> tuple[int, float]:
    s = compute_s(space, profile).value
    gap = space.total - s
    if gap <= 1e-12:
        return 4, s
    return max(4, math.ceil(gap / target_gap) + 2), s


@dataclass
class HolderReport:
    s: float
    epsilon: float
    samples: int
    slope: float
    constant: float
    passed: bool
    bins: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"s": self.s, "epsilon": self.epsilon, "samples": self.samples, "slope": self.slope,
                "constant": self.constant, "passed": self.passed,
                "bins": [{"log_r": a, "max_log_ratio": b, "count": c} for a, b, c in self.bins]}


@dataclass
class ConservationReport:
    nodes_checked: int
    max_error: float
    explicit_families: int
    separation_ok: bool
    containment_ok: bool

    @property
    def ok(self) -> bool:
        return self.max_error <= 1e-12 and self.separation_ok and self.containment_ok

    def as_dict(self) -> dict:
        return {"nodes_checked": self.nodes_checked, "max_error": self.max_error,
                "explicit_families": self.explicit_families, "separation_ok": self.separation_ok,
                "containment_ok": self.containment_ok, "ok": self.ok}


class MassTree:
    """Product of per-direction lazy trees with uniform sibling masses.

    Sibling big rectangles under one ball have equal Lebesgue measure, so the
    mass rule 'proportional to m(R~)' makes them equal; each big rectangle has
    one shrunk rectangle, whose mass is split evenly over its balls.
    """

    def __init__(self, axes: Sequence[CantorAxisSpec], t: Sequence[float], ns: Sequence[int],
                 growth: float, anchor=None, s_formula: float | None = None):
        self.axes = tuple(axes)
        self.t = tuple(float(x) for x in t)
        self.ns = tuple(int(n) for n in ns)
        self.growth = growth
        self.A = max(ax.log_base + ti for ax, ti in zip(self.axes, self.t))
        anchor = anchor or [()] * len(self.axes)
        self.anchor = tuple(tuple(a) for a in anchor)
        self.s_formula = s_formula
        self.trees = [AxisTree(ax, ti, self.A, self.ns, an) for ax, ti, an in zip(self.axes, self.t, self.anchor)]
        self._check_containment()

    @property
    def depth(self) -> int:
        return len(self.ns)

    @property
    def d(self) -> int:
        return len(self.axes)

    @property
    def total_delta(self) -> float:
        return math.fsum(ax.delta for ax in self.axes)

    def deepest_log_radius(self) -> float:
        return -self.ns[-1] * self.A

    def _check_containment(self):
        for tr in self.trees:
            for L in tr.levels:
                if L.h > L.big_r or (not L.flat and (L.off_lo - L.rho < -L.h or L.off_hi + L.rho > L.h)):
                    raise VerificationError("a ball escapes its shrunk rectangle")
            for prev, L in zip(tr.levels, tr.levels[1:]):
                if CONTAINMENT * L.big_r > prev.rho:
                    raise VerificationError(f"level n={L.n} is not nested in level n={prev.n}")

    def level_info(self) -> list[dict]:
        out = []
        for k, n in enumerate(self.ns):
            rows = []
            for tr in self.trees:
                L = tr.levels[k]
                rows.append({"n": L.n, "j": L.j, "flat": L.flat, "m": L.m, "j2": L.j2, "D": L.D})
            out.append({"level": k + 1, "n": n, "log_radius": -n * self.A, "axes": rows})
        return out

    def division_count(self, k: int) -> int:
        return math.prod(tr.levels[k].D for tr in self.trees)

    def log_division_formula(self, k: int) -> float:
        """Log of the predicted ball count per shrunk rectangle, prod (r^(a_i+t_i) / r^A)^delta_i, r = e^-n."""
        n = self.ns[k]
        return math.fsum(ax.delta * n * (self.A - ax.log_base - ti) for ax, ti in zip(self.axes, self.t))

    def log_division_formula_thinned(self, k: int) -> float:
        """Same prediction after thinning: every direction keeps 1 of K^j2 division centres."""
        f = self.log_division_formula(k)
        for tr in self.trees:
            L = tr.levels[k]
            if not L.flat:
                f -= L.j2 * math.log(tr.axis.k)
        return f

    # ---- masses and tests
    def sample_point(self, rng: random.Random):
        """A deepest-level ball centre per direction, drawn according to the mass."""
        return [tr.sample_leaf(rng)[-1][1] for tr in self.trees]

    def ball_mass(self, center, log_r: float, rel_tol: float = 1e-9) -> tuple[Fraction, Fraction]:
        lo_tot, hi_tot = Fraction(1), Fraction(1)
        for tr, c in zip(self.trees, center):
            r = tr.scaled_exp(-log_r)
            lo, hi = tr.mass_in(c - r, c + r, rel_tol)
            lo_tot *= lo
            hi_tot *= hi
        return lo_tot, hi_tot

    def check_conservation(self, paths: int = 32, seed: int = 0, explicit_limit: int = 4096) -> ConservationReport:
        """Re-derive child masses along random root-to-leaf paths and compare with parents.

        Where a node has at most ``explicit_limit`` children their masses are
        listed one by one through :func:`proportional_masses` (weights are the
        Lebesgue measures of the big rectangles); otherwise the count identity
        is used.  Separation and nesting are asserted on every visited family.
        """
        rng = random.Random(seed)
        nodes, explicit, worst = 0, 0, Fraction(0)
        sep_ok, cont_ok = True, True
        for _ in range(paths):
            cur = [tr.root() for tr in self.trees]
            mu = Fraction(1)
            for k in range(self.depth):
                nbs = [tr.n_big(k, c, R) for tr, (c, R) in zip(self.trees, cur)]
                Ds = [tr.levels[k].D for tr in self.trees]
                n_child = math.prod(int(x) for x in nbs)
                leaf_mu = mu / (n_child * math.prod(Ds))
                if n_child * math.prod(Ds) <= explicit_limit:
                    fams = [tr.children(k, c, R) for tr, (c, R) in zip(self.trees, cur)]
                    vols = [math.prod(int(2 * tr.levels[k].big_r) for tr in self.trees)] * n_child
                    big_mu = proportional_masses(mu, vols)
                    total = Fraction(0)
                    for bm in big_mu:
                        total += sum(proportional_masses(bm, [1] * math.prod(Ds)))
                    worst = max(worst, abs(total - mu))
                    explicit += 1
                    for tr, fam, (c, R) in zip(self.trees, fams, cur):
                        L = tr.levels[k]
                        xs = [x for x, _ in fam]
                        if any(b - a < SEPARATION * L.big_r for a, b in zip(xs, xs[1:])):
                            sep_ok = False
                        if k > 0 and any(abs(x - c) + L.big_r >= R for x in xs):
                            cont_ok = False
                        for x, ys in fam:
                            if any(b - a < SEPARATION * L.rho for a, b in zip(ys, ys[1:])):
                                sep_ok = False
                            if any(abs(y - x) + L.rho > L.h for y in ys):
                                cont_ok = False
                else:
                    worst = max(worst, abs(leaf_mu * n_child * math.prod(Ds) - mu))
                    for tr in self.trees:
                        L = tr.levels[k]
                        if L.alpha < SEPARATION * L.big_r or (not L.flat and L.alpha2 < SEPARATION * L.rho):
                            sep_ok = False
                nodes += 1
                nxt = []
                for tr, (c, R) in zip(self.trees, cur):
                    L = tr.levels[k]
                    lo, hi = tr.window(k, c, R)
                    fam = tr.big_family(k)
                    x = fam.position(fam.first_index(lo) + rng.randrange(int(fam.count(lo, hi))))
                    if k > 0 and abs(x - c) + L.big_r >= R:
                        cont_ok = False
                    y = x if L.flat else x + tr.div_family(k).position(L.d_first + rng.randrange(L.D))
                    nxt.append((y, L.rho))
                cur, mu = nxt, leaf_mu
        return ConservationReport(nodes, float(worst), explicit, sep_ok, cont_ok)

    def materialize(self, max_nodes: int = 20000) -> list[dict]:
        """Every node as a record (id, parent, level, kind, center, radii, mu); small trees only."""
        nodes = [{"id": 0, "parent": None, "level": 0, "kind": "root",
                  "center": [0.5] * self.d, "radii": [0.5] * self.d, "mu": 1.0, "mu_exact": "1"}]
        frontier = [(0, [tr.root() for tr in self.trees], Fraction(1))]
        for k in range(self.depth):
            nxt = []
            for pid, cur, mu in frontier:
                try:
                    fams = [tr.children(k, c, R, limit=max_nodes) for tr, (c, R) in zip(self.trees, cur)]
                except ValueError as exc:
                    raise BudgetExceededError(f"materialising more than {max_nodes} nodes") from exc
                combos = list(itertools.product(*fams))
                if len(nodes) + 2 * len(combos) > max_nodes:
                    raise BudgetExceededError(f"materialising more than {max_nodes} nodes")
                vols = [math.prod(int(2 * tr.levels[k].big_r) for tr in self.trees)] * len(combos)
                for combo, bm in zip(combos, proportional_masses(mu, vols) if combos else []):
                    big_id = len(nodes)
                    xs = [x for x, _ in combo]
                    nodes.append(self._record(big_id, pid, k + 1, "big", xs, [tr.levels[k].big_r for tr in self.trees], bm))
                    sh_id = len(nodes)
                    nodes.append(self._record(sh_id, big_id, k + 1, "shrunk", xs, [tr.levels[k].h for tr in self.trees], bm))
                    leaves = list(itertools.product(*[ys for _, ys in combo]))
                    if len(nodes) + len(leaves) > max_nodes:
                        raise BudgetExceededError(f"materialising more than {max_nodes} nodes")
                    for ys, lm in zip(leaves, proportional_masses(bm, [1] * len(leaves))):
                        lid = len(nodes)
                        nodes.append(self._record(lid, sh_id, k + 1, "ball", ys, [tr.levels[k].rho for tr in self.trees], lm))
                        nxt.append((lid, [(y, tr.levels[k].rho) for y, tr in zip(ys, self.trees)], lm))
            frontier = nxt
        return nodes

    def _record(self, nid, parent, level, kind, centers, radii, mu: Fraction) -> dict:
        return {"id": nid, "parent": parent, "level": level, "kind": kind,
                "center": [int(c) / int(tr.U) for c, tr in zip(centers, self.trees)],
                "radii": [int(r) / int(tr.U) for r, tr in zip(radii, self.trees)],
                "mu": float(mu), "mu_exact": f"{mu.numerator}/{mu.denominator}" if mu.denominator != 1 else str(mu.numerator)}

    def to_json(self, max_nodes: int = 20000) -> dict:
        return {"schema": "rectdim.mass_tree/1",
                "axes": [ax.as_dict() for ax in self.axes], "t": list(self.t), "n": list(self.ns),
                "growth": self.growth, "levels": self.level_info(), "nodes": self.materialize(max_nodes)}


def build_mass_tree(axes: Sequence[CantorAxisSpec], t: Sequence[float], depth: int = 4,
                    growth: float | None = None, target_gap: float = 0.05, anchor=None,
                    n1: int | None = None, max_n: int = 200000) -> MassTree:
    """Choose the level schedule n_1 < ... < n_K and build the lazy tree.

    n_1 is the smallest level at which every direction admits separated
    cylinders and at least one division ball; each later n_k is the smallest
    level >= growth * n_{k-1} at which child big rectangles nest in the
    parent balls.  ``growth=None`` picks it from the gap between the
    ambient dimension and the target exponent.
    """
    axes = tuple(axes)
    t = tuple(float(x) for x in t)
    if not axes or len(axes) != len(t):
        raise ValidationError("need one shrink exponent per axis")
    if any(x < 0 or not math.isfinite(x) for x in t):
        raise ValidationError("shrink exponents must be non-negative and finite")
    if depth < 1:
        raise ValidationError("depth must be at least 1")
    if target_gap <= 0:
        raise ValidationError("target_gap must be positive")
    space = ProductSpaceSpec(tuple(ax.delta for ax in axes))
    profile = ExponentProfile(tuple(ax.log_base for ax in axes), t)
    auto_R, s = _auto_growth(space, profile, target_gap)
    R = auto_R if growth is None else float(growth)
    if R <= 1:
        raise ValidationError("growth must exceed 1")
    A = max(ax.log_base + ti for ax, ti in zip(axes, t))
    anchor = anchor or [()] * len(axes)

    def ok(n, prev_n):
        for ax, ti, an in zip(axes, t, anchor):
            try:
                tr = AxisTree(ax, ti, A, [n] + ([prev_n] if prev_n else []), an)
            except _InvalidLevel:
                return False
            if prev_n and CONTAINMENT * tr.levels[0].big_r > tr.levels[1].rho:
                return False
        return True

    ns = []
    n = n1 if n1 is not None else 1
    while not ok(n, None):
        if n1 is not None:
            raise ValidationError(f"n1={n1} does not admit a valid first level")
        n += 1
        if n > max_n:
            raise BudgetExceededError("no admissible first level")
    ns.append(n)
    for _ in range(depth - 1):
        n = max(ns[-1] + 1, math.ceil(R * ns[-1]))
        while not ok(n, ns[-1]):
            n += 1
        if n > max_n:
            raise BudgetExceededError(f"level n={n} exceeds the budget {max_n}")
        ns.append(n)
    return MassTree(axes, t, ns, R, anchor, s)


def assign_mass(tree: MassTree, max_nodes: int = 20000) -> list[dict]:
    """Materialised nodes with masses assigned top-down by the proportional rule."""
    return tree.materialize(max_nodes)


def _sample_balls(tree: MassTree, samples: int, seed: int, rel_tol: float):
    """(log r, log mu(B(x, r))) for seeded random balls; cached on the tree since s does not enter."""
    key = (samples, seed, rel_tol)
    cache = tree.__dict__.setdefault("_ball_cache", {})
    if key in cache:
        return cache[key]
    rng = random.Random(seed)
    log_lo = tree.deepest_log_radius()
    logs_r = np.empty(samples)
    log_mu = np.empty(samples)
    for i in range(samples):
        center = tree.sample_point(rng)
        lr = rng.uniform(log_lo, 0.0)
        _, up = tree.ball_mass(center, lr, rel_tol)
        if up <= 0:
            raise VerificationError("a ball about a support point has zero mass")
        logs_r[i] = lr
        log_mu[i] = math.log(up.numerator) - math.log(up.denominator)
    cache[key] = (logs_r, log_mu)
    return logs_r, log_mu


def holder_test(tree: MassTree, s: float, epsilon: float = 0.05, samples: int = 10000,
                seed: int = 0, bins: int = 16, rel_tol: float = 1e-9) -> HolderReport:
    """Empirical check of mu(B(x, r)) <= C r^s over radii from the deepest ball radius to 1.

    Radii are log-uniform; for every log-radius bin the largest log ratio
    log mu(B) - s log r is kept, and the test fails when these maxima trend
    upward as r decreases (slope below -epsilon).
    """
    if tree.depth < 1:
        raise ValidationError("empty tree")
    if samples < bins:
        raise ValidationError("need at least one sample per bin")
    log_lo = tree.deepest_log_radius()
    logs_r, log_mu = _sample_balls(tree, samples, seed, rel_tol)
    ratios = log_mu - s * logs_r
    edges = np.linspace(log_lo, 0.0, bins + 1)
    idx = np.clip(np.digitize(logs_r, edges) - 1, 0, bins - 1)
    rows = []
    for b_ in range(bins):
        sel = idx == b_
        if sel.any():
            rows.append((float(0.5 * (edges[b_] + edges[b_ + 1])), float(ratios[sel].max()), int(sel.sum())))
    xs = np.array([r[0] for r in rows])
    ys = np.array([r[1] for r in rows])
    slope = float(np.polyfit(xs, ys, 1)[0]) if len(rows) > 1 else 0.0
    const = float(ratios.max())
    return HolderReport(float(s), float(epsilon), samples, slope, const, slope >= -epsilon, rows)


def tree_json(tree: MassTree, max_nodes: int = 20000) -> str:
    return json.dumps(tree.to_json(max_nodes), indent=1)
