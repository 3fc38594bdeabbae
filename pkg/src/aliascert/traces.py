"""Independent dataflow-trace checker for certified theories.

Values flow through registers and stack slots; instructions attach
*events* to specific locations (a write mark, a read mark, a frame shift,
an introduction).  Folding the events along each flow with the equations
below rebinds an annotated type at every point, and a theory is accepted
only if every guard holds, every revisited point sees identical types
across paths, and every routine hands its stack back intact.  This
checker shares no rule machinery with the certifier: it re-derives
everything from the event algebra.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .annot import (
    NO_OFFSETS,
    U0,
    AnnotatedType,
    C0,
    Calc,
    Finite,
    Offsets,
    Rep,
    TypeVar,
    Uncalc,
)
from .annotation import Annotation
from .certifier import RoutineCert, Theory
from .disasm import StackInstr
from .isa import RA, reg_name

# --------------------------------------------------------------------------
# events


@dataclass(frozen=True)
class Write:
    k: int
    w: int = 4


@dataclass(frozen=True)
class Read:
    k: int
    w: int = 4


@dataclass(frozen=True)
class IntroArray:
    n: int
    offs: frozenset[int] = frozenset()


@dataclass(frozen=True)
class IntroString:
    n: int
    offs: frozenset[int] = frozenset()


@dataclass(frozen=True)
class IntroHyp:
    t: AnnotatedType


@dataclass(frozen=True)
class Arith:
    pass


@dataclass(frozen=True)
class FrameUp:
    n: int


@dataclass(frozen=True)
class FrameDown:
    n: int | None = None  # None: whatever frame is current


@dataclass(frozen=True)
class Copy:
    pass


Event = object


@dataclass(frozen=True)
class TraceViolation:
    equation: str
    detail: str
    addr: int | None = None

    def __str__(self) -> str:
        where = f" at 0x{self.addr:08x}" if self.addr is not None else ""
        return f"{self.equation}{where}: {self.detail}"


def fold_event(t: AnnotatedType, e: Event) -> AnnotatedType | TraceViolation:
    """One step of the running-type calculation along a trace.

    Returns the rebound type when the matching equation's guard holds, or
    a violation naming the equation/constraint that failed.  ``t`` must be
    ground except under Copy.
    """
    if isinstance(e, Copy):
        return t
    if isinstance(e, (IntroArray, IntroString, IntroHyp, Arith)):
        # introductions start traces; landing mid-trace breaks the
        # only-shifts discipline
        return TraceViolation("(d)", f"introduction event on live value {t}")
    if isinstance(t, TypeVar):
        return TraceViolation("(d)", f"event {e} on unresolved hypothesis {t}")

    if isinstance(t, Uncalc):
        X = t.offs.members
        if isinstance(e, Write):
            if t.size - e.w >= e.k >= 0:
                return Uncalc(t.size, Offsets(X | {e.k}))
            return TraceViolation("eq1", f"write {e.k} outside [0, {t.size}-{e.w}]")
        if isinstance(e, Read):
            if e.k in X and e.k >= 0:
                return t
            return TraceViolation("eq2", f"read {e.k} not in written set {t.offs}")
        return TraceViolation("(c)", f"array pointers admit no frame shifts: {e} on {t}")

    if isinstance(t.tower, Rep):
        n, X = t.tower.step, t.offs.members
        if isinstance(e, FrameDown):
            if e.n is None or e.n == n:
                # the same written pattern recurs at every increment
                return Calc(t.tower, t.offs)
            return TraceViolation("eq3", f"step {e.n} != string increment {n}")
        if isinstance(e, Write):
            if n - e.w >= e.k >= 0:
                return Calc(t.tower, Offsets(X | {e.k}))
            return TraceViolation("eq4", f"write {e.k} outside [0, {n}-{e.w}]")
        if isinstance(e, Read):
            if e.k in X and e.k >= 0:
                return t
            return TraceViolation("eq5", f"read {e.k} not in written set {t.offs}")
        return TraceViolation("(d)", f"string pointers only step down: {e} on {t}")

    frames = t.tower.frames
    X = t.offs.members
    if isinstance(e, FrameUp):
        if e.n > 0:
            return Calc(Finite((e.n,) + frames), NO_OFFSETS)
        return TraceViolation("eq6", f"frame size {e.n} must be positive")
    if isinstance(e, FrameDown):
        n = frames[0] if e.n is None else e.n
        if frames[0] == n and len(frames) > 1:
            return Calc(Finite(frames[1:]), NO_OFFSETS)
        return TraceViolation("eq7", f"cannot pop {n} from tower {t.tower}")
    if isinstance(e, Write):
        if frames[0] - e.w >= e.k >= 0:
            return Calc(t.tower, Offsets(X | {e.k}))
        return TraceViolation("eq8", f"write {e.k} outside [0, {frames[0]}-{e.w}]")
    if isinstance(e, Read):
        if e.k in X and e.k >= 0:
            return t
        return TraceViolation("eq9", f"read {e.k} not in written set {t.offs}")
    return TraceViolation("(d)", f"unhandled event {e} on {t}")


# --------------------------------------------------------------------------
# per-instruction located events


@dataclass(frozen=True)
class Located:
    """An event attached to a location, or a plain copy between two."""

    event: Event
    at: tuple  # ("sp",) | ("reg", r) | ("slot", k)
    src: tuple | None = None  # for Copy: value flows src -> at


SPL = ("sp",)


def _r(r: int) -> tuple:
    return ("reg", r)


def _s(k: int) -> tuple:
    return ("slot", k)


def events_of(s: StackInstr) -> list[Located]:
    """Events a stack instruction attaches, on the locations it names.

    Control transfers, calls, and returns carry no located events; the
    walker enforces their conditions directly.
    """
    op = s.op
    if op == "put":
        return [Located(Write(s.n, 4), SPL), Located(Copy(), _s(s.n), src=_r(s.rd))]
    if op == "putb":
        return [Located(Write(s.n, 1), SPL), Located(Arith(), _s(s.n))]
    if op == "get":
        return [Located(Read(s.n, 4), SPL), Located(Copy(), _r(s.rd), src=_s(s.n))]
    if op == "getb":
        return [Located(Read(s.n, 1), SPL), Located(Arith(), _r(s.rd))]
    if op in ("putx", "swth", "putbx", "sbth"):
        return [Located(Write(s.n, s.width()), _r(s.rs))]
    if op in ("getx", "lwfh", "getbx", "lbfh"):
        return [Located(Read(s.n, s.width()), _r(s.rs)), Located(Arith(), _r(s.rd))]
    if op == "push":
        return [Located(FrameUp(s.n), SPL)]
    if op == "stepx":
        return [Located(FrameDown(s.n), _r(s.rd))]
    if op == "rspf":
        return [Located(FrameDown(None), SPL), Located(Copy(), SPL, src=_r(s.rs))]
    if op == "cspf":
        return [Located(Copy(), SPL, src=_r(s.rs))]
    if op == "cspt":
        return [Located(Copy(), _r(s.rd), src=SPL)]
    if op == "mov":
        return [Located(Copy(), _r(s.rd), src=_r(s.rs))]
    if op == "newx":
        return [Located(IntroString(s.n, s.offs), _r(s.rd))]
    if op == "newh":
        return [Located(IntroArray(s.n, s.offs), _r(s.rd))]
    if op in ("addaiu", "nandop", "addop"):
        return [Located(Arith(), _r(s.rd))]
    return []


# --------------------------------------------------------------------------
# whole-theory checking


@dataclass
class _State:
    star: int | None
    regs: dict[int, AnnotatedType]
    slots: dict[int, AnnotatedType]

    def copy(self) -> "_State":
        return _State(self.star, dict(self.regs), dict(self.slots))

    def snapshot(self):
        return (self.star, tuple(sorted(self.regs.items())),
                tuple(sorted(self.slots.items())))


def _state_of(a: Annotation) -> _State:
    return _State(a.star, a.reg_map(), a.slot_map())


class _Walker:
    def __init__(self, theory: Theory):
        self.theory = theory
        self.program = theory.program
        self.violations: list[TraceViolation] = []

    def bad(self, addr: int | None, equation: str, detail: str):
        self.violations.append(TraceViolation(equation, detail, addr))

    def check_routine(self, cert: RoutineCert):
        state = _state_of(cert.entry)
        seen: dict[int, tuple] = {}
        exits: list[tuple] = []
        self._walk(cert, cert.entry_addr, state, seen, exits)
        if cert.exit_ann is not None and exits:
            expected = _state_of(cert.exit_ann).snapshot()
            for snap in exits:
                if snap != expected:
                    self.bad(cert.entry_addr, "(*)",
                             f"{cert.label}: exit state differs from recorded exit")

    def _walk(self, cert: RoutineCert, addr: int, state: _State,
              seen: dict[int, tuple], exits: list[tuple]):
        while True:
            snap = state.snapshot()
            if addr in seen:
                if seen[addr] != snap:
                    self.bad(addr, "(*)",
                             f"types differ across traces converging at 0x{addr:08x}")
                return
            seen[addr] = snap
            row = cert.rows.get(addr)
            if row is None:
                self.bad(addr, "coverage", "reachable address has no annotation")
                return
            if _state_of(row.pre).snapshot() != snap:
                self.bad(addr, "theory",
                         f"recorded annotation disagrees with event fold: "
                         f"recorded {row.pre}; folded {_render(state)}")
            s = row.chosen
            op = s.op

            if op == "return":
                t = state.regs.get(s.rd)
                if t != U0:
                    self.bad(addr, "return",
                             f"jump register {reg_name(s.rd)} holds {t}, not u^0")
                exits.append(snap)
                return
            if op in ("ifnz", "ifeq"):
                for r in (s.rd, s.rs) if op == "ifeq" else (s.rd,):
                    t = state.regs.get(r)
                    if not isinstance(t, Calc):
                        self.bad(addr, "branch",
                                 f"tested register {reg_name(r)} is {t}, not calculated")
                self._walk(cert, self.program.resolve(s.target), state.copy(), seen, exits)
                addr += 4
                continue
            if op == "goto":
                addr = self.program.resolve(s.target)
                continue
            if op == "gosub":
                if not self._apply_call(addr, row, state):
                    return
                addr += 4
                continue

            if not self._apply_events(addr, s, state):
                return
            addr += 4

    # -- event application ------------------------------------------------

    def _loc_get(self, state: _State, loc: tuple, addr: int):
        if loc == SPL:
            if state.star is None:
                self.bad(addr, "(d)", "no stack pointer register")
                return None
            return state.regs.get(state.star)
        if loc[0] == "reg":
            return state.regs.get(loc[1])
        return state.slots.get(loc[1])

    def _loc_set(self, state: _State, loc: tuple, t: AnnotatedType):
        if loc == SPL:
            state.regs[state.star] = t
        elif loc[0] == "reg":
            state.regs[loc[1]] = t
        else:
            state.slots[loc[1]] = t

    def _apply_events(self, addr: int, s: StackInstr, state: _State) -> bool:
        op = s.op
        old_sp = state.regs.get(state.star) if state.star is not None else None
        for ev in events_of(s):
            if isinstance(ev.event, Copy):
                src = self._loc_get(state, ev.src, addr)
                if src is None:
                    self.bad(addr, "flow", f"copy from unbound {ev.src}")
                    return False
                if ev.at == SPL:
                    # stack-pointer discipline: an installed copy must agree
                    # with the shift algebra applied to the old value
                    folded = state.regs.get(state.star)
                    if not (isinstance(src, Calc) and isinstance(src.tower, Finite)
                            and isinstance(folded, Calc) and src.tower == folded.tower):
                        self.bad(addr, "(c)",
                                 f"copy {src} into the stack pointer does not match "
                                 f"its tower {getattr(folded, 'tower', None)}")
                        return False
                self._loc_set(state, ev.at, src)
            elif isinstance(ev.event, IntroString):
                self._loc_set(state, ev.at, Calc(Rep(ev.event.n), Offsets(ev.event.offs)))
            elif isinstance(ev.event, IntroArray):
                self._loc_set(state, ev.at, Uncalc(ev.event.n, Offsets(ev.event.offs)))
            elif isinstance(ev.event, Arith):
                self._loc_set(state, ev.at, C0)
            else:
                t = self._loc_get(state, ev.at, addr)
                if t is None:
                    self.bad(addr, "flow", f"event {ev.event} on unbound {ev.at}")
                    return False
                out = fold_event(t, ev.event)
                if isinstance(out, TraceViolation):
                    self.bad(addr, out.equation, out.detail)
                    return False
                self._loc_set(state, ev.at, out)
        # frame bookkeeping for slots
        if op == "push":
            state.slots.clear()
        elif op == "rspf":
            state.slots.clear()
        elif op == "cspf":
            t = state.regs.get(state.star)
            keep = t.offs.members if isinstance(t.offs, Offsets) else frozenset()
            state.slots = {k: v for k, v in state.slots.items() if k in keep}
        del old_sp
        return True

    def _apply_call(self, addr: int, row, state: _State) -> bool:
        if row.callee is None or row.callee not in self.theory.routines:
            self.bad(addr, "call", "gosub row lacks a certified callee")
            return False
        callee = self.theory.routines[row.callee]
        if state.star is None:
            self.bad(addr, "call", "calls need a stack pointer register")
            return False
        handed = state.copy()
        handed.regs[RA] = U0
        handed.regs[state.star] = C0  # the callee builds its own frame
        handed.slots = {}
        if handed.snapshot() != _state_of(callee.entry).snapshot():
            self.bad(addr, "call",
                     f"call-site state does not match {callee.label} entry summary")
            return False
        if callee.exit_ann is None:
            self.bad(addr, "call", f"{callee.label} never returns")
            return False
        exit_state = _state_of(callee.exit_ann)
        if exit_state.star != state.star or exit_state.regs.get(state.star) != C0:
            self.bad(addr, "call",
                     f"{callee.label} does not hand the empty frame back in "
                     f"{reg_name(state.star)}")
            return False
        caller_sp = state.regs[state.star]
        caller_slots = state.slots
        state.regs = dict(exit_state.regs)
        state.regs[state.star] = caller_sp
        state.slots = caller_slots
        return True


def _render(state: _State) -> str:
    regs = ", ".join(f"{reg_name(r)}{'*' if r == state.star else ''}={t}"
                     for r, t in sorted(state.regs.items()))
    slots = ", ".join(f"({k})={t}" for k, t in sorted(state.slots.items()))
    return ", ".join(p for p in (regs, slots) if p)


def check_program(theory: Theory) -> list[TraceViolation]:
    """Fold dataflow events over every routine of a theory.  Empty result:
    all equation guards hold, converging traces agree, and every call
    honors the frame convention."""
    walker = _Walker(theory)
    for cert in theory.routines.values():
        walker.check_routine(cert)
    return walker.violations
