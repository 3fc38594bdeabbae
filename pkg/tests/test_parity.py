"""The compiled interpreter core must match the pure-Python reference
outcome-for-outcome, including tags, faults, and step counts."""

from __future__ import annotations

import pytest

from aliascert import _simpure
from aliascert.machine import build_image
from aliascert.quickgen import generate_program

from conftest import load

_simcore = pytest.importorskip("aliascert._simcore")


def _same(a, b):
    assert a.regs == b.regs
    assert a.output == b.output
    assert a.halted == b.halted
    assert a.steps == b.steps
    assert a.error == b.error
    assert a.error_pc == b.error_pc
    assert [(f.kind, f.pc, f.addr) for f in a.faults] == \
        [(f.kind, f.pc, f.addr) for f in b.faults]


@pytest.mark.parametrize("name", [
    "hello.s", "foo_good.s", "foo_bad_caller.s",
    "table2_left.s", "table2_middle.s", "table2_right.s",
])
def test_corpus_parity(name):
    image = build_image(load(name))
    _same(_simpure.run_clean_image(image, 10**6),
          _simcore.run_clean_image(image, 10**6))
    for seed in (1, 7, 999):
        _same(_simpure.run_alias_image(image, 10**6, seed),
              _simcore.run_alias_image(image, 10**6, seed))


def test_generated_parity():
    for seed in range(40):
        image = build_image(generate_program(seed))
        _same(_simpure.run_clean_image(image, 10**5),
              _simcore.run_clean_image(image, 10**5))
        _same(_simpure.run_alias_image(image, 10**5, seed + 1),
              _simcore.run_alias_image(image, 10**5, seed + 1))
