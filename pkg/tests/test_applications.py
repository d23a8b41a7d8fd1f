import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rectdim.applications import (LinearFormsInstance, Regime, SimultaneousInstance, classify_regime,
                                  exponent_orbit, linear_forms_closed_form, linear_forms_dim,
                                  linear_forms_exponent_choice, liminf_rate, mult_closed_form, mult_dim,
                                  mult_pair_dim, mult_profile, shrinking_target_dim, simultaneous_dim,
                                  simultaneous_exponent_choice, simultaneous_sup)
from rectdim.cantor import CantorAxisSpec
from rectdim.errors import EmptyCandidatesError, ValidationError


def test_simultaneous_examples():
    assert simultaneous_dim(SimultaneousInstance((2.0,))).value == pytest.approx(2 / 3, abs=1e-12)
    rep = simultaneous_dim(SimultaneousInstance((2.0, 1.0)))
    assert rep.value == pytest.approx(4 / 3, abs=1e-12)
    assert rep.details["argmin_i"] == 1


def test_simultaneous_exponent_choice_sums():
    prof = simultaneous_exponent_choice(SimultaneousInstance((2.0, 0.3)))
    assert prof.a == pytest.approx((1.7, 1.3))
    assert prof.t == pytest.approx((1.3, 0.0))
    assert sum(prof.a) == pytest.approx(3.0)


def test_simultaneous_full_measure():
    rep = simultaneous_dim(SimultaneousInstance((0.5, 0.5)))
    assert rep.full_measure and rep.value == 2


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(0.0, 4.0), min_size=1, max_size=5))
def test_simultaneous_routes_agree(tau):
    # the solver itself raises if the closed form and the generic route disagree
    rep = simultaneous_dim(SimultaneousInstance(tuple(tau)))
    assert 0 <= rep.value <= len(tau) + 1e-12


def test_linear_forms_examples():
    assert linear_forms_dim(LinearFormsInstance(1, 2, (4.0,))).value == pytest.approx(1.75, abs=1e-12)
    assert linear_forms_dim(LinearFormsInstance(2, 1, (3.0, 2.0))).value == pytest.approx(4 / 3, abs=1e-12)
    assert linear_forms_dim(LinearFormsInstance(1, 2, (3.0,))).full_measure


def test_linear_forms_profile_sums_to_m_plus_n():
    inst = LinearFormsInstance(3, 2, (6.0, 1.2, 1.1))
    prof = linear_forms_exponent_choice(inst)
    assert sum(prof.a) == pytest.approx(5.0)
    assert [a + t for a, t in zip(prof.a, prof.t)] == pytest.approx([6.0, 1.2, 1.1])


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 4), st.integers(1, 3), st.data())
def test_linear_forms_routes_agree(m, n, data):
    lam = data.draw(st.lists(st.floats(1.0, 6.0), min_size=m, max_size=m))
    rep = linear_forms_dim(LinearFormsInstance(m, n, tuple(lam)))
    assert 0 <= rep.value <= m * n + 1e-12
    if not rep.full_measure:
        closed, _ = linear_forms_closed_form(sorted(lam, reverse=True), m, n)
        assert rep.details["generic_value"] == pytest.approx(closed, abs=1e-10)


def test_shrinking_target(shrink_instance):
    axes, t = shrink_instance
    rep = shrinking_target_dim(axes, t)
    assert rep.value == pytest.approx(1.1309297535714573, abs=1e-12)
    assert rep.details["hausdorff_measure"] == "infinite"
    rep0 = shrinking_target_dim(axes, [0.0, 0.0])
    assert rep0.full_measure and rep0.value == pytest.approx(sum(ax.delta for ax in axes))


def test_shrinking_one_axis_closed_form():
    ax = CantorAxisSpec(3, (0, 2))
    for t in (0.1, 0.5, 2.0):
        expect = ax.delta * ax.log_base / (ax.log_base + t)
        assert shrinking_target_dim([ax], [t]).value == pytest.approx(expect, abs=1e-12)


def test_mult_pair_case_i_instance():
    # log a = 2, log b = 1 with full measure exponents 1 via the closed form directly
    val, case = mult_closed_form(2.0, 1.0, 1.0, 1.0, 2.0, 0.5)
    assert case == "i" and val == pytest.approx(1.375, abs=1e-12)


def test_mult_pair_dim_symmetric_order():
    a, b = CantorAxisSpec.full(16), CantorAxisSpec(4, (0, 3))
    r1 = mult_pair_dim(a, b, 0.4, 0.6)
    r2 = mult_pair_dim(b, a, 0.6, 0.4)
    assert r1.value == pytest.approx(r2.value, abs=1e-14)


def test_mult_exceptional_regime():
    a, b = CantorAxisSpec.full(16), CantorAxisSpec(4, (0, 3))
    res = mult_dim(a, b, 1.0)
    assert res.regime is Regime.FORMULA_FAILS
    assert res.formula_value + 1e-3 <= res.dim <= res.covering_upper - 1e-3
    assert 0 < res.that_t2 < 1
    assert res.details["derivative_left"] > 0 > res.details["derivative_right"]


def test_mult_regimes_formula_holds():
    a, b = CantorAxisSpec.full(2), CantorAxisSpec.full(2)
    res = mult_dim(a, b, math.log(2))
    assert res.regime is Regime.FORMULA_HOLDS and res.dim == pytest.approx(1.5)
    res0 = mult_dim(CantorAxisSpec.full(16), CantorAxisSpec(4, (0, 3)), 0.0)
    assert res0.dim == pytest.approx(1.5)
    assert classify_regime(CantorAxisSpec.full(3), CantorAxisSpec.full(5), 1.0) is Regime.FORMULA_HOLDS


def test_mult_profile_interior_max_only_when_formula_fails():
    a, b = CantorAxisSpec.full(16), CantorAxisSpec(4, (0, 3))
    grid, vals = mult_profile(a, b, 1.0, points=401)
    i = int(np.argmax(vals))
    assert 0 < i < len(grid) - 1
    grid, vals = mult_profile(CantorAxisSpec.full(4), CantorAxisSpec.full(2), 1.0, points=401)
    i = int(np.argmax(vals))
    assert i in (0, len(grid) - 1) or vals[i] - max(vals[0], vals[-1]) < 1e-9


def test_mult_threads_match():
    a, b = CantorAxisSpec.full(16), CantorAxisSpec(4, (0, 3))
    assert mult_dim(a, b, 1.0, threads=3).dim == mult_dim(a, b, 1.0).dim


def test_orbit_recovers_exponents():
    ns = np.arange(2, 400)
    rows = np.column_stack([ns, ns ** -2.0, ns ** -1.0])
    res = exponent_orbit(rows, "inverse")
    assert len(res.candidates) == 1
    assert res.candidates[0] == pytest.approx((2.0, 1.0), abs=1e-9)
    val, idx = simultaneous_sup(res.candidates)
    assert val == pytest.approx(4 / 3) and idx == 0


def test_orbit_two_accumulation_points():
    ns = np.arange(1, 2001)
    tau = np.where(ns % 2 == 0, 2.0, 3.0)
    rows = np.column_stack([ns + 1, (ns + 1.0) ** -tau])
    res = exponent_orbit(rows, "inverse", eps=0.05)
    assert sorted(round(c[0], 6) for c in res.candidates) == [2.0, 3.0]


def test_liminf_rate_and_errors():
    ns = np.arange(1, 200)
    assert liminf_rate(np.column_stack([ns, np.exp(-1.5 * ns)])) == pytest.approx(1.5)
    with pytest.raises(ValidationError):
        exponent_orbit(np.array([[1.0, 2.0]]), "exp")
    with pytest.raises(EmptyCandidatesError):
        simultaneous_sup([])
