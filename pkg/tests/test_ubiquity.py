import math
from fractions import Fraction

import numpy as np
import pytest

from rectdim.cantor import CantorAxisSpec
from rectdim.errors import BudgetExceededError, ValidationError
from rectdim.verify.ubiquity import UbiquitySystemSpec, _arc_fraction_rationals, ubiquity_coverage


@pytest.fixture
def sim1():
    return UbiquitySystemSpec("simultaneous", m=1, a=(2,), M=32)


def test_levels_and_thresholds(sim1):
    assert sim1.window(2) == (32, 1024)
    assert sim1.min_compliant_level(0.5) == 2
    assert sim1.min_compliant_level(0.03) == 3
    assert not sim1.compliance(2, 0.48)
    with pytest.raises(ValidationError):
        UbiquitySystemSpec("simultaneous", m=1, a=(2,), M=16)
    with pytest.raises(ValidationError):
        UbiquitySystemSpec("linear_forms", m=1, n=2, a=(3,), M=15)
    with pytest.raises(ValidationError):
        UbiquitySystemSpec("simultaneous", m=2, a=(1.5, 1.0), M=256)


def test_shrinking_fraction_exactly_one(shrink_instance):
    axes, _ = shrink_instance
    spec = UbiquitySystemSpec("shrinking", axes=tuple(axes))
    rng = np.random.default_rng(4)
    for n in range(1, 7):
        c = rng.uniform(0, 1, 2)
        # centre each ball on a Cantor point so it has positive measure
        c[1] = float(Fraction(2, 3) + Fraction(2, 27))
        rep = ubiquity_coverage(spec, list(c), float(rng.uniform(0.01, 0.4)), n)
        assert rep.exact == "1/1" and rep.fraction == 1.0


def test_degenerate_ball(sim1):
    rep = ubiquity_coverage(sim1, [0.3], 0.0, 2)
    assert rep.degenerate and rep.fraction == 0.0


def test_exact_matches_monte_carlo(sim1):
    exact = ubiquity_coverage(sim1, [0.3], 0.1, 2)
    # independent check: sample points and test them against every p/q directly
    rng = np.random.default_rng(11)
    x = 0.3 + rng.uniform(-0.1, 0.1, 4000)
    qs = np.arange(32, 1025)
    d = np.abs(x[:, None] * qs[None, :] - np.rint(x[:, None] * qs[None, :]))
    hit = (d < qs[None, :] * 32 / 1024 ** 2).any(axis=1)
    se = math.sqrt(exact.fraction * (1 - exact.fraction) / 4000) + 1e-3
    assert abs(hit.mean() - exact.fraction) < 4 * se
    mc = ubiquity_coverage(sim1, [0.3], 0.1, 2, method="monte_carlo", samples=4000, seed=11)
    assert mc.fraction == pytest.approx(hit.mean())


def test_chunking_is_exact():
    eps = Fraction(32, 1024 ** 2)
    a = _arc_fraction_rationals(Fraction(1, 3), Fraction(1, 5), 32, 1024, eps, 10 ** 8)
    b = _arc_fraction_rationals(Fraction(1, 3), Fraction(1, 5), 32, 1024, eps, 10 ** 8, chunk_points=5000)
    assert a == b


def test_monte_carlo_seeded_and_m2():
    spec = UbiquitySystemSpec("simultaneous", m=2, a=(1.5, 1.5), M=256)
    r1 = ubiquity_coverage(spec, [0.5, 0.5], 0.5, 2, method="monte_carlo", samples=300, seed=5)
    r2 = ubiquity_coverage(spec, [0.5, 0.5], 0.5, 2, method="monte_carlo", samples=300, seed=5)
    assert r1.fraction == r2.fraction and r1.fraction >= 0.45
    with pytest.raises(ValidationError):
        ubiquity_coverage(spec, [0.5, 0.5], 0.5, 2, method="monte_carlo", samples=10)


def test_linear_forms_monte_carlo():
    spec = UbiquitySystemSpec("linear_forms", m=1, n=2, a=(3,), M=16)
    rep = ubiquity_coverage(spec, [0.5, 0.5], 0.5, 2, method="monte_carlo", samples=300, seed=2)
    assert rep.fraction >= 0.45 and rep.as_dict()["method"] == "monte_carlo"


def test_budget(sim1):
    with pytest.raises(BudgetExceededError):
        ubiquity_coverage(sim1, [0.5], 0.5, 4, max_points=10 ** 6)
