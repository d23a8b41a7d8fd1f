"""Dimensional number of a limsup set of shrunk rectangles.

The number is a minimum over a finite alphabet of candidate covering
exponents A.  For each A the directions split into three groups: those where a
ball of radius rho^A is larger than the big rectangle (K1), smaller than the
shrunk rectangle (K2), or in between (K3).  Indices are 0-based throughout.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import EmptyCandidatesError, InvalidProfileError, ValidationError


class TiePolicy(str, enum.Enum):
    DEFAULT = "default"
    STRICT_K1 = "strict_k1"
    MERGE_EQUAL_INTO_K2 = "merge_equal_into_k2"


@dataclass(frozen=True)
class ProductSpaceSpec:
    """Ambient product space: Ahlfors exponents per factor plus the scaling parameter."""

    deltas: tuple[float, ...]
    kappa: float = 0.0

    def __post_init__(self):
        deltas = tuple(float(x) for x in self.deltas)
        object.__setattr__(self, "deltas", deltas)
        object.__setattr__(self, "kappa", float(self.kappa))
        if len(deltas) < 1:
            raise ValidationError("need at least one factor space")
        if any(not (x > 0) or not math.isfinite(x) for x in deltas):
            raise ValidationError(f"Ahlfors exponents must be positive and finite, got {deltas}")
        if not (0.0 <= self.kappa < 1.0):
            raise ValidationError(f"kappa must lie in [0, 1), got {self.kappa}")

    @property
    def d(self) -> int:
        return len(self.deltas)

    @property
    def total(self) -> float:
        return math.fsum(self.deltas)


@dataclass(frozen=True)
class ExponentProfile:
    """Big-rectangle exponents ``a`` and shrink exponents ``t``."""

    a: tuple[float, ...]
    t: tuple[float, ...]

    def __post_init__(self):
        a = tuple(float(x) for x in self.a)
        t = tuple(float(x) for x in self.t)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "t", t)
        if len(a) != len(t) or not a:
            raise InvalidProfileError(f"a and t must be non-empty and of equal length ({len(a)} vs {len(t)})")
        if any(not (x > 0) or not math.isfinite(x) for x in a):
            raise InvalidProfileError(f"every a_i must be positive and finite, got {a}")
        if any(not (x >= 0) or not math.isfinite(x) for x in t):
            raise InvalidProfileError(f"every t_i must be non-negative and finite, got {t}")

    @property
    def d(self) -> int:
        return len(self.a)

    @property
    def shrunk(self) -> tuple[float, ...]:
        return tuple(x + y for x, y in zip(self.a, self.t))


@dataclass(frozen=True)
class Alphabet:
    entries: tuple[float, ...]
    hat_entries: tuple[float, ...]


@dataclass(frozen=True)
class Partition:
    candidate: float
    k1: frozenset
    k2: frozenset
    k3: frozenset

    def as_dict(self) -> dict:
        return {"A": self.candidate, "k1": sorted(self.k1), "k2": sorted(self.k2), "k3": sorted(self.k3)}


@dataclass(frozen=True)
class CandidateRow:
    candidate: float
    partition: Partition
    value: float


@dataclass
class DimensionReport:
    """Result of a dimension computation.

    ``details`` holds solver-specific extras (permutations, closed-form
    values, annotations); it never influences ``value``.
    """

    value: float
    argmin: float
    partition: Partition
    table: tuple[CandidateRow, ...]
    full_measure: bool = False
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "argmin": self.argmin,
            "partition": self.partition.as_dict(),
            "table": [{"A": r.candidate, "value": r.value, **{k: v for k, v in r.partition.as_dict().items() if k != "A"}}
                      for r in self.table],
            "full_measure": self.full_measure,
        }


def _check_dims(space: ProductSpaceSpec, profile: ExponentProfile):
    if space.d != profile.d:
        raise InvalidProfileError(f"space has d={space.d} but profile has d={profile.d}")


def build_alphabet(profile: ExponentProfile) -> Alphabet:
    entries = tuple(sorted(set(profile.a) | set(profile.shrunk)))
    hat = tuple(sorted(set(profile.shrunk)))
    return Alphabet(entries, hat)


def partition_for(A: float, profile: ExponentProfile, tie_policy: TiePolicy | str = TiePolicy.DEFAULT) -> Partition:
    if not (A > 0):
        raise ValidationError(f"candidate exponent must be positive, got {A}")
    policy = TiePolicy(tie_policy)
    a, s = profile.a, profile.shrunk
    idx = range(profile.d)
    if policy is TiePolicy.STRICT_K1:
        k1 = {k for k in idx if a[k] > A}
    else:
        k1 = {k for k in idx if a[k] >= A}
    k2 = {k for k in idx if s[k] <= A} - k1
    if policy is TiePolicy.MERGE_EQUAL_INTO_K2:
        moved = {k for k in k1 if a[k] == A and s[k] == A}
        k1 -= moved
        k2 |= moved
    k3 = set(idx) - k1 - k2
    return Partition(float(A), frozenset(k1), frozenset(k2), frozenset(k3))


def _value(A: float, part: Partition, space: ProductSpaceSpec, profile: ExponentProfile) -> float:
    dl, kap = space.deltas, space.kappa
    a, t = profile.a, profile.t
    base = math.fsum(dl[k] for k in part.k1) + math.fsum(dl[k] for k in part.k2)
    base += kap * math.fsum(dl[k] for k in part.k3)
    frac = math.fsum(a[k] * dl[k] for k in part.k3) - math.fsum(t[k] * dl[k] for k in part.k2)
    return base + (1.0 - kap) * frac / A


def candidate_dim(A: float, space: ProductSpaceSpec, profile: ExponentProfile,
                  tie_policy: TiePolicy | str = TiePolicy.DEFAULT) -> float:
    """Value of the bracketed expression at one candidate exponent ``A``.

    Any positive ``A`` is accepted; the dimension only looks at alphabet
    entries but the cover model in coverlab evaluates in between as well.
    """
    _check_dims(space, profile)
    return _value(A, partition_for(A, profile, tie_policy), space, profile)


def _minimize(candidates, space, profile, tie_policy) -> DimensionReport:
    _check_dims(space, profile)
    rows = []
    best = None
    for A in candidates:
        part = partition_for(A, profile, tie_policy)
        row = CandidateRow(A, part, _value(A, part, space, profile))
        rows.append(row)
        # candidates are ascending, so strict < keeps the smallest A on ties
        if best is None or row.value < best.value:
            best = row
    value = best.value
    total = space.total
    # the exact minimum lies in [0, sum(delta)]; clip rounding noise only
    if value > total:
        value = total
    if value < 0.0:
        value = 0.0
    return DimensionReport(value, best.candidate, best.partition, tuple(rows))


def compute_s(space: ProductSpaceSpec, profile: ExponentProfile,
              tie_policy: TiePolicy | str = TiePolicy.DEFAULT) -> DimensionReport:
    """Minimum of :func:`candidate_dim` over the full alphabet."""
    return _minimize(build_alphabet(profile).entries, space, profile, tie_policy)


def compute_s_hat(space: ProductSpaceSpec, profile: ExponentProfile,
                  tie_policy: TiePolicy | str = TiePolicy.DEFAULT) -> DimensionReport:
    """Same minimum restricted to the shrunk-side exponents a_i + t_i."""
    return _minimize(build_alphabet(profile).hat_entries, space, profile, tie_policy)


def sup_over_candidates(space: ProductSpaceSpec, profiles: Sequence[ExponentProfile]) -> tuple[float, int]:
    """Largest dimension over a finite list of exponent profiles; first index wins ties."""
    if len(profiles) == 0:
        raise EmptyCandidatesError("candidate set is empty")
    best, best_i = -math.inf, -1
    for i, p in enumerate(profiles):
        v = compute_s(space, p).value
        if v > best:
            best, best_i = v, i
    return best, best_i
