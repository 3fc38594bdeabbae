"""The hardware-aliasing interpreter and the differential harness.

A value is a :class:`SaltedWord`: its 32-bit arithmetic word plus a
32-bit tag recording *how* it was calculated.  Copies, loads, and stores
preserve both halves; every arithmetic step re-tags the result.  Memory
is keyed by (tag, address), so a read through a differently calculated
alias of a written address misses its cell and faults.  Comparisons and
device decoding see the arithmetic word only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from ._salt import T_ADDIU, T_ADDU, T_EA, T_INIT, T_JAL, T_LI, T_NAND, pack, tag
from .isa import Program
from .machine import build_image
from .simdefs import (
    DEFAULT_FUEL,
    DEFAULT_STACK_BASE,
    DeviceConfig,
    M32,
    RunOutcome,
)


class SaltedWord(NamedTuple):
    lo: int  # arithmetic value
    hi: int  # calculation tag


@dataclass(frozen=True)
class AliasConfig:
    seed: int = 0
    device: DeviceConfig = DeviceConfig()
    stack_base: int = DEFAULT_STACK_BASE


def alu_result(op: str, inputs: tuple[SaltedWord, ...], imm: int | None,
               cfg: AliasConfig) -> SaltedWord:
    """Tagged result of an arithmetic operation or address formation.

    Register copies and word loads/stores are not arithmetic: they pass
    (lo, hi) through verbatim and never come through here.
    """
    seed = cfg.seed
    if op == "li":
        return SaltedWord(imm & M32, tag(seed, T_LI, imm & M32))
    if op == "addiu":
        (x,) = inputs
        return SaltedWord((x.lo + imm) & M32, tag(seed, T_ADDIU, pack(x.hi, x.lo), imm))
    if op == "addu":
        x, y = inputs
        return SaltedWord((x.lo + y.lo) & M32,
                          tag(seed, T_ADDU, pack(x.hi, x.lo), pack(y.hi, y.lo)))
    if op == "nand":
        x, y = inputs
        return SaltedWord(~(x.lo & y.lo) & M32,
                          tag(seed, T_NAND, pack(x.hi, x.lo), pack(y.hi, y.lo)))
    if op in ("lw", "sw", "lb", "sb", "ea"):
        (x,) = inputs
        return SaltedWord((x.lo + imm) & M32, tag(seed, T_EA, pack(x.hi, x.lo), imm))
    if op == "jal":
        return SaltedWord(imm & M32, tag(seed, T_JAL, imm & M32))
    if op == "init":
        return SaltedWord(0, tag(seed, T_INIT, imm))
    raise ValueError(f"{op!r} is not an arithmetic operation")


def run_aliased(program: Program, cfg: AliasConfig = AliasConfig(),
                fuel: int = DEFAULT_FUEL, entry: str | None = None) -> RunOutcome:
    """Run under the aliasing model; the fault log records reads that hit
    an arithmetically matching but differently calculated cell."""
    from ._engine import run_alias_image

    image = build_image(program, entry, cfg.device, cfg.stack_base)
    return run_alias_image(image, fuel, cfg.seed)


@dataclass
class Divergence:
    seed: int
    reason: str


@dataclass
class DiffReport:
    seeds: int
    clean: RunOutcome
    divergences: list[Divergence]

    @property
    def ok(self) -> bool:
        return not self.divergences


def compare_runs(clean: RunOutcome, aliased: RunOutcome, seed: int) -> Divergence | None:
    """First observable difference between a clean and an aliased run."""
    if aliased.faults:
        return Divergence(seed, f"{aliased.faults[0]}")
    if clean.error != aliased.error:
        return Divergence(seed, f"error {aliased.error!r} vs clean {clean.error!r}")
    if clean.output != aliased.output:
        return Divergence(seed, f"output {aliased.output!r} vs clean {clean.output!r}")
    if clean.halted != aliased.halted:
        return Divergence(seed, f"halted={aliased.halted} vs clean {clean.halted}")
    for r in range(32):
        if clean.regs[r] != aliased.regs[r]:
            return Divergence(
                seed, f"register {r} ends 0x{aliased.regs[r]:08x} vs clean 0x{clean.regs[r]:08x}")
    return None


def diff_runs(program: Program, seeds: int = 100, fuel: int = DEFAULT_FUEL,
              entry: str | None = None, device: DeviceConfig = DeviceConfig(),
              stack_base: int = DEFAULT_STACK_BASE,
              first_seed: int = 1) -> DiffReport:
    """Clean-vs-aliased sweep over ``seeds`` seeds; the clean run must
    complete without error first."""
    from ._engine import run_alias_image, run_clean_image

    image = build_image(program, entry, device, stack_base)
    clean = run_clean_image(image, fuel)
    if not clean.ok:
        raise ValueError(f"clean run fails ({clean.error} at pc="
                         f"{clean.error_pc:#x}); nothing to compare against")
    divergences = []
    for seed in range(first_seed, first_seed + seeds):
        aliased = run_alias_image(image, fuel, seed)
        d = compare_runs(clean, aliased, seed)
        if d is not None:
            divergences.append(d)
    return DiffReport(seeds=seeds, clean=clean, divergences=divergences)
