import math

import pytest
from hypothesis import given, settings, strategies as st

from rectdim.dimcore import (ExponentProfile, ProductSpaceSpec, TiePolicy, build_alphabet, candidate_dim, compute_s,
                             compute_s_hat, partition_for, sup_over_candidates)
from rectdim.errors import EmptyCandidatesError, InvalidProfileError, ValidationError


def instances(max_d=6):
    return st.integers(1, max_d).flatmap(lambda d: st.tuples(
        st.lists(st.floats(0.05, 3.0), min_size=d, max_size=d),
        st.floats(0.0, 0.9),
        st.lists(st.floats(0.05, 5.0), min_size=d, max_size=d),
        st.lists(st.floats(0.0, 5.0), min_size=d, max_size=d)))


def test_partition_groups():
    prof = ExponentProfile((1.0, 2.0, 3.0), (1.0, 0.5, 0.0))
    p = partition_for(2.0, prof)
    assert p.k1 == {1, 2} and p.k2 == {0} and p.k3 == set()
    p = partition_for(1.5, prof)
    assert p.k1 == {1, 2} and p.k3 == {0}


def test_tie_policies_differ_only_on_ties():
    prof = ExponentProfile((2.0, 1.0), (0.0, 1.0))
    assert partition_for(2.0, prof).k1 == {0}
    assert partition_for(2.0, prof, TiePolicy.STRICT_K1).k2 == {0, 1}
    assert partition_for(2.0, prof, "merge_equal_into_k2").k2 == {0, 1}


def test_t_zero_gives_ambient_dimension():
    space = ProductSpaceSpec((1.0, 0.5, 2.0), 0.3)
    rep = compute_s(space, ExponentProfile((1.0, 2.0, 0.7), (0.0, 0.0, 0.0)))
    assert rep.value == pytest.approx(space.total, abs=1e-12)


def test_single_direction_closed_form():
    # d = 1: delta * a / (a + t)
    space = ProductSpaceSpec((1.0,))
    assert compute_s(space, ExponentProfile((1.0,), (1.0,))).value == pytest.approx(0.5)
    assert compute_s(space, ExponentProfile((2.0,), (3.0,))).value == pytest.approx(0.4)


def test_shrinking_instance_value(shrink_instance):
    axes, t = shrink_instance
    space = ProductSpaceSpec(tuple(ax.delta for ax in axes))
    rep = compute_s(space, ExponentProfile(tuple(ax.log_base for ax in axes), t))
    assert rep.value == pytest.approx(1.1309297535714573, abs=1e-12)
    assert rep.argmin == pytest.approx(2 * math.log(2))


def test_alphabet_sorted_and_deduplicated():
    alph = build_alphabet(ExponentProfile((1.0, 1.0, 2.0), (1.0, 0.0, 0.0)))
    assert alph.entries == (1.0, 2.0)
    assert alph.hat_entries == (1.0, 2.0)


@settings(max_examples=300, deadline=None)
@given(instances())
def test_hat_equality_property(inst):
    dl, kap, a, t = inst
    space, prof = ProductSpaceSpec(tuple(dl), kap), ExponentProfile(tuple(a), tuple(t))
    assert abs(compute_s(space, prof).value - compute_s_hat(space, prof).value) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(instances(), st.floats(0.01, 2.0))
def test_value_in_range_and_continuous_in_t(inst, bump):
    dl, kap, a, t = inst
    space = ProductSpaceSpec(tuple(dl), kap)
    v = compute_s(space, ExponentProfile(tuple(a), tuple(t))).value
    assert 0.0 <= v <= space.total + 1e-12
    # small perturbation of t moves the value by a small amount
    t2 = tuple(x + 1e-9 * bump for x in t)
    assert abs(compute_s(space, ExponentProfile(tuple(a), t2)).value - v) < 1e-6


@settings(max_examples=200, deadline=None)
@given(instances(), st.data())
def test_monotone_in_t(inst, data):
    dl, kap, a, t = inst
    space = ProductSpaceSpec(tuple(dl), kap)
    extra = data.draw(st.lists(st.floats(0.0, 2.0), min_size=len(t), max_size=len(t)))
    big = tuple(x + y for x, y in zip(t, extra))
    assert compute_s(space, ExponentProfile(tuple(a), tuple(t))).value >= \
        compute_s(space, ExponentProfile(tuple(a), big)).value - 1e-12


def test_candidate_dim_off_alphabet_is_above_minimum():
    space = ProductSpaceSpec((1.0, 1.0))
    prof = ExponentProfile((1.0, 2.0), (1.0, 0.5))
    s = compute_s(space, prof).value
    for A in (0.3, 1.2, 1.9, 2.7, 4.0):
        assert candidate_dim(A, space, prof) >= s - 1e-12


def test_validation_errors():
    with pytest.raises(ValidationError):
        ProductSpaceSpec((1.0, -1.0))
    with pytest.raises(ValidationError):
        ProductSpaceSpec((1.0,), 1.0)
    with pytest.raises(InvalidProfileError):
        ExponentProfile((1.0,), (-0.1,))
    with pytest.raises(InvalidProfileError):
        ExponentProfile((1.0, 2.0), (0.0,))
    with pytest.raises(InvalidProfileError):
        compute_s(ProductSpaceSpec((1.0,)), ExponentProfile((1.0, 1.0), (0.0, 0.0)))
    with pytest.raises(ValidationError):
        partition_for(0.0, ExponentProfile((1.0,), (0.0,)))


def test_sup_over_candidates():
    space = ProductSpaceSpec((1.0, 1.0))
    profs = [ExponentProfile((1.5, 1.5), (1.5, 0.5)), ExponentProfile((1.5, 1.5), (0.0, 0.0)),
             ExponentProfile((1.5, 1.5), (0.0, 0.0))]
    val, idx = sup_over_candidates(space, profs)
    assert val == pytest.approx(2.0) and idx == 1
    with pytest.raises(EmptyCandidatesError):
        sup_over_candidates(space, [])
