from __future__ import annotations

import random

import pytest
from hypothesis import given, strategies as st

from aliascert.annot import (
    C0,
    U0,
    Calc,
    Finite,
    FrameMismatch,
    ImmutableValue,
    NonPositiveFrame,
    NotStackLike,
    Offsets,
    OutOfBounds,
    ReadBeforeWrite,
    Rep,
    TypeVar,
    Uncalc,
    calc,
    check_read,
    pop_frame,
    push_frame,
    rep,
    record_write,
    uncalc,
)


# -- push_frame -------------------------------------------------------------

def test_push_onto_frame_with_writes_resets_offsets():
    t = calc(48, offs=[0, 4, 8])
    assert push_frame(t, 32) == calc(32, 48)


def test_push_onto_empty_frame():
    assert push_frame(calc(0), 32) == calc(32, 0)


def test_push_zero_frame_rejected():
    with pytest.raises(NonPositiveFrame):
        push_frame(calc(0), 0)


def test_push_needs_finite_stack_type():
    with pytest.raises(NotStackLike):
        push_frame(rep(1), 8)
    with pytest.raises(NotStackLike):
        push_frame(uncalc(8), 8)
    with pytest.raises(NotStackLike):
        push_frame(TypeVar("x"), 8)


# -- pop_frame --------------------------------------------------------------

def test_pop_restores_enclosing_frame():
    assert pop_frame(calc(32, 0, offs=[16, 24, 28]), 32) == calc(0)


def test_pop_string_step_keeps_offsets():
    assert pop_frame(rep(1, offs=[0]), 1) == rep(1, offs=[0])


def test_pop_wrong_size_rejected():
    with pytest.raises(FrameMismatch):
        pop_frame(calc(32, 0), 16)
    with pytest.raises(FrameMismatch):
        pop_frame(rep(2), 1)


def test_pop_sole_frame_rejected():
    with pytest.raises(FrameMismatch):
        pop_frame(calc(32), 32)


# -- record_write / check_read -----------------------------------------------

def test_write_within_frame():
    assert record_write(calc(32, 0), 28, 4) == calc(32, 0, offs=[28])


def test_write_byte_to_unit_array():
    assert record_write(uncalc(1), 0, 1) == uncalc(1, offs=[0])


def test_write_to_empty_frame_rejected():
    with pytest.raises(OutOfBounds):
        record_write(calc(0), 0, 4)


def test_write_to_u0_rejected():
    with pytest.raises(ImmutableValue):
        record_write(U0, 0, 1)
    with pytest.raises(ImmutableValue):
        record_write(TypeVar("x"), 0, 4)


def test_read_after_write_ok():
    t = calc(32, 0, offs=[16, 24, 28])
    assert check_read(t, 16, 4) is None


def test_read_before_write_rejected():
    with pytest.raises(ReadBeforeWrite):
        check_read(uncalc(8, offs=[0]), 4, 4)


def test_read_out_of_bounds_rejected():
    with pytest.raises(OutOfBounds):
        check_read(calc(32, 0, offs=[16]), 40, 4)


# -- algebraic laws ----------------------------------------------------------

towers = st.one_of(
    st.lists(st.integers(0, 64).map(lambda n: n * 4), min_size=1, max_size=4)
      .map(lambda fs: Finite(tuple(fs))),
    st.integers(1, 16).map(Rep),
)
ground_types = st.one_of(
    st.builds(Calc, towers, st.sets(st.integers(0, 60)).map(
        lambda s: Offsets(frozenset(s)))),
    st.builds(Uncalc, st.integers(0, 64), st.sets(st.integers(0, 60)).map(
        lambda s: Offsets(frozenset(s)))),
)


@given(ground_types, st.integers(1, 64))
def test_pop_undoes_push_modulo_offsets(t, n):
    try:
        pushed = push_frame(t, n)
    except NotStackLike:
        return
    popped = pop_frame(pushed, n)
    assert popped == Calc(t.tower, Offsets(frozenset()))


@given(ground_types, st.integers(0, 70), st.sampled_from([1, 4]))
def test_write_never_grows_bound_and_permits_readback(t, k, w):
    try:
        out = record_write(t, k, w)
    except (OutOfBounds, ImmutableValue):
        return
    if isinstance(t, Uncalc):
        assert out.size == t.size
    else:
        assert out.tower == t.tower
    assert check_read(out, k, w) is None


def test_bound_matches_bruteforce_enumeration():
    # the admissible write offsets are exactly [0, bound - w]
    rng = random.Random(0)
    for _ in range(200):
        bound = rng.randrange(0, 40)
        t = rng.choice([
            calc(bound), rep(bound) if bound >= 1 else calc(bound), uncalc(bound)])
        w = rng.choice([1, 4])
        admitted = set()
        for k in range(0, bound + 5):
            try:
                record_write(t, k, w)
                admitted.add(k)
            except (OutOfBounds, ImmutableValue):
                pass
        if isinstance(t, Uncalc) and t.size == 0:
            assert admitted == set()
        else:
            assert admitted == set(range(0, max(bound - w, -1) + 1))


def test_c0_and_u0_are_accessless():
    with pytest.raises(OutOfBounds):
        record_write(C0, 0, 1)
    with pytest.raises(ImmutableValue):
        check_read(U0, 0, 1)
