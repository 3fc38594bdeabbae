"""Deterministic alias tags for calculated values.

Every arithmetic result carries a 32-bit tag mixed from the seed, the
operation, and the full (tag, value) representation of its inputs: the
same calculation always yields the same tag, while distinct calculations
of an arithmetically equal value disagree with overwhelming probability.
Copies and loads/stores preserve tags verbatim and do not pass through
here.  The compiled core reimplements this mix bit-for-bit.
"""

from __future__ import annotations

M64 = 0xFFFFFFFFFFFFFFFF

# tag domains, one per way a value can be produced
T_LI = 0x11
T_ADDIU = 0x22
T_ADDU = 0x33
T_NAND = 0x44
T_JAL = 0x55
T_EA = 0x66
T_INIT = 0x77


def sm64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & M64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & M64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & M64
    z ^= z >> 31
    return z


def tag(seed: int, domain: int, *vals: int) -> int:
    h = sm64((seed & M64) ^ domain)
    for v in vals:
        h = sm64(h ^ (v & M64))
    return h & 0xFFFFFFFF


def pack(hi: int, lo: int) -> int:
    return ((hi & 0xFFFFFFFF) << 32) | (lo & 0xFFFFFFFF)
