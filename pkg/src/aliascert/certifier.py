"""Annotation inference over whole programs.

A depth-first search over disassembly choices drives the per-instruction
rules along the control-flow graph.  The first arrival at an address
records its annotation; every later arrival must unify with it exactly
(no widening), which realizes the loop/branch convergence requirement.
Subroutine calls certify the callee per call site in a fresh theory,
under the convention that a routine builds and destroys its own frame and
hands the stack pointer back in the register it arrived in, with an empty
frame.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .annot import C0, U0, Calc, Rep, Subst, UnifyMismatch, Uncalc, apply_subst
from .annotation import Annotation, unify_annotations
from .disasm import (
    ARRAY_ACCESS,
    BYTE_OPS,
    READ_OPS,
    STACK_ACCESS,
    StackInstr,
    WRITE_OPS,
    raw_alternatives,
)
from .isa import RA, ZERO, Instruction, Program, reg_name
from .smallstep import PatternMismatch, apply_smallstep

BYTE_POLICIES = ("forbid", "small-structs", "permissive")
DEFAULT_POLICY = "small-structs"

SAFE, UNSAFE, UNSUPPORTED = "SAFE", "UNSAFE", "UNSUPPORTED"


@dataclass(frozen=True)
class Failure:
    addr: int | None
    rule: str | None
    kind: str
    detail: str

    def __str__(self) -> str:
        where = f"0x{self.addr:08x}" if self.addr is not None else "<program>"
        rule = f" [{self.rule}]" if self.rule else ""
        return f"{self.kind} at {where}{rule}: {self.detail}"


class CertError(Exception):
    def __init__(self, failure: Failure):
        super().__init__(str(failure))
        self.failure = failure


@dataclass
class Row:
    pre: Annotation
    chosen: StackInstr
    post: Annotation
    callee: str | None = None  # routine key for gosub rows


@dataclass
class RoutineCert:
    key: str
    label: str
    entry_addr: int
    entry: Annotation
    rows: dict[int, Row]
    exit_ann: Annotation | None


@dataclass
class Theory:
    program: Program
    entry_key: str | None = None
    routines: dict[str, RoutineCert] = field(default_factory=dict)

    def call_summaries(self) -> dict[tuple[int, str], tuple[Annotation, Annotation]]:
        out = {}
        for cert in self.routines.values():
            for addr, row in cert.rows.items():
                if row.callee is not None:
                    callee = self.routines[row.callee]
                    out[(addr, callee.label)] = (callee.entry, callee.exit_ann)
        return out


@dataclass
class CertReport:
    verdict: str
    theory: Theory | None
    failures: list[Failure]

    @property
    def safe(self) -> bool:
        return self.verdict == SAFE


@dataclass(frozen=True)
class Violation:
    addr: int
    rule: str
    kind: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind} at 0x{self.addr:08x} [{self.rule}]: {self.detail}"


def default_entry_annotation() -> Annotation:
    from .isa import SP

    return Annotation.make(star=SP, regs={SP: C0, RA: U0, ZERO: C0})


def entry_annotation_for(program: Program, label: str) -> Annotation:
    assumed = program.assume_for(label)
    if assumed is None:
        return default_entry_annotation()
    regs = assumed.reg_map()
    regs.setdefault(ZERO, C0)  # conventionally holds the zero word
    return Annotation.make(star=assumed.star, regs=regs, slots=assumed.slot_map())


class _Engine:
    def __init__(self, program: Program, policy: str):
        if policy not in BYTE_POLICIES:
            raise ValueError(f"unknown byte policy {policy!r}")
        self.program = program
        self.policy = policy
        self.theory = Theory(program)
        self.memo: dict[tuple[int, Annotation], RoutineCert | CertError] = {}
        self.deepest: tuple[int, Failure] | None = None

    # -- failure bookkeeping ------------------------------------------------

    def _record(self, depth: int, failure: Failure) -> CertError:
        if self.deepest is None or depth >= self.deepest[0]:
            self.deepest = (depth, failure)
        return CertError(failure)

    # -- routine certification ------------------------------------------------

    def certify_routine(self, entry_addr: int, entry: Annotation,
                        call_stack: tuple[int, ...]) -> RoutineCert:
        key = (entry_addr, entry)
        hit = self.memo.get(key)
        if hit is not None:
            if isinstance(hit, CertError):
                raise hit
            return hit
        label = self.program.label_at(entry_addr) or f"0x{entry_addr:08x}"
        try:
            rows, subst, exit_ann = self._walk(entry_addr, entry, {}, {}, None,
                                               call_stack + (entry_addr,))
        except CertError as e:
            self.memo[key] = e
            raise
        if subst:
            rows = {a: Row(r.pre.substituted(subst), r.chosen,
                           r.post.substituted(subst), r.callee)
                    for a, r in rows.items()}
            entry = entry.substituted(subst)
            if exit_ann is not None:
                exit_ann = exit_ann.substituted(subst)
        digest = hashlib.sha1(str(entry).encode()).hexdigest()[:8]
        cert = RoutineCert(f"{label}@{digest}", label, entry_addr, entry, rows, exit_ann)
        self.theory.routines[cert.key] = cert
        self.memo[key] = cert
        return cert

    def _walk(self, addr: int, ann: Annotation, rows: dict, subst: Subst,
              exit_ann: Annotation | None, call_stack: tuple[int, ...]):
        """Certify from ``addr`` under ``ann``; returns (rows, subst, exit)."""
        if subst:
            ann = ann.substituted(subst)
        if addr in rows:
            # convergence: a revisited address must carry the same annotation
            try:
                subst = unify_annotations(rows[addr].pre, ann, subst)
            except UnifyMismatch as e:
                label = self.program.label_at(addr)
                raise self._record(len(rows), Failure(
                    addr, None, "AnnotationMismatch",
                    f"join at {label or hex(addr)}: {e} "
                    f"(recorded: {rows[addr].pre}; incoming: {ann})"))
            return rows, subst, exit_ann

        instr = self.program.instruction_at(addr)
        if instr is None:
            raise self._record(len(rows), Failure(
                addr, None, "NoInstruction", "control flow left the code segment"))

        alts = raw_alternatives(instr, ann.star, self.program.blobs)
        alts = [s for s in alts if self._policy_allows(s, ann)]
        reasons: list[str] = []
        last_err: CertError | None = None
        for s in alts:
            try:
                result = self._try_alternative(s, instr, addr, ann, rows, subst,
                                               exit_ann, call_stack)
            except PatternMismatch as e:
                reasons.append(str(e))
                continue
            except CertError as e:
                last_err = e
                continue
            return result
        if last_err is not None:
            raise last_err
        detail = "; ".join(reasons) if reasons else "no stack-machine reading exists"
        raise self._record(len(rows), Failure(addr, str(instr), "NoDisassembly", detail))

    def _try_alternative(self, s: StackInstr, instr: Instruction, addr: int,
                         ann: Annotation, rows: dict, subst: Subst,
                         exit_ann: Annotation | None, call_stack: tuple[int, ...]):
        op = s.op
        rows = dict(rows)

        if op == "gosub":
            post, callee_key = self._handle_call(addr, s, ann, rows, subst, call_stack)
            rows[addr] = Row(ann, s, post, callee=callee_key)
            return self._walk(addr + 4, post, rows, subst, exit_ann, call_stack)

        if op == "return":
            t = ann.reg(s.rd)
            if t is not None:
                t = apply_subst(t, subst)
            if t != U0:
                raise self._record(len(rows), Failure(
                    addr, str(s), "ReturnRegisterNotU0",
                    f"{reg_name(s.rd)} holds {t}, not a return address"))
            rows[addr] = Row(ann, s, ann)
            if exit_ann is None:
                return rows, subst, ann
            try:
                subst = unify_annotations(exit_ann, ann, subst)
            except UnifyMismatch as e:
                raise self._record(len(rows), Failure(
                    addr, str(s), "AnnotationMismatch", f"exit annotations differ: {e}"))
            return rows, subst, exit_ann

        post = apply_smallstep(s, ann)  # may raise PatternMismatch
        rows[addr] = Row(ann, s, post)

        if op == "goto":
            return self._walk(self.program.resolve(s.target), post, rows, subst,
                              exit_ann, call_stack)
        if op in ("ifnz", "ifeq"):
            rows, subst, exit_ann = self._walk(self.program.resolve(s.target), post,
                                               rows, subst, exit_ann, call_stack)
            return self._walk(addr + 4, post, rows, subst, exit_ann, call_stack)
        return self._walk(addr + 4, post, rows, subst, exit_ann, call_stack)

    # -- the refined calling convention ---------------------------------------

    def _handle_call(self, site: int, s: StackInstr, ann: Annotation,
                     rows: dict, subst: Subst, call_stack: tuple[int, ...]):
        star = ann.star
        caller_star_type = ann.star_type()
        callee_addr = self.program.resolve(s.target)
        label = s.target if isinstance(s.target, str) else (
            self.program.label_at(callee_addr) or hex(callee_addr))
        if callee_addr in call_stack:
            raise self._record(len(rows), Failure(
                site, str(s), "RecursionUnsupported",
                f"call cycle through {label}"))
        # the callee sees the caller's registers, a fresh return address, and
        # an empty local frame in the same stack-pointer register
        entry = ann.set_reg(RA, U0).set_reg(star, C0).with_slots({})
        if subst:
            entry = entry.substituted(subst)
        try:
            cert = self.certify_routine(callee_addr, entry, call_stack)
        except CertError as e:
            raise self._record(len(rows), Failure(
                site, str(s), "CalleeUnsafe",
                f"{label}: {e.failure}")) from e
        if cert.exit_ann is None:
            raise self._record(len(rows), Failure(
                site, str(s), "CalleeUnsafe", f"{label} never returns"))
        exit_ann = cert.exit_ann
        if exit_ann.star != star or exit_ann.star_type() != C0:
            raise self._record(len(rows), Failure(
                site, str(s), "StackNotRestored",
                f"{label} hands back {exit_ann.star_type()} in "
                f"{reg_name(exit_ann.star) if exit_ann.star is not None else '?'}"))
        # callee exit registers flow to the caller; the caller's own frame
        # and slot bindings come back untouched
        post = exit_ann.set_reg(star, caller_star_type).with_slots(ann.slot_map())
        return post, cert.key

    # -- byte-access policy ----------------------------------------------------

    def _policy_allows(self, s: StackInstr, ann: Annotation) -> bool:
        if s.op not in BYTE_OPS or self.policy == "permissive":
            return True
        if self.policy == "forbid":
            return False
        return _small_struct_ok(s, ann)


def _small_struct_ok(s: StackInstr, ann: Annotation) -> bool:
    # byte access only on structures too small for word access to reach
    if s.op in ("getb", "putb"):
        return False
    base = ann.reg(s.rs)
    if s.op in ("getbx", "putbx"):
        return isinstance(base, Calc) and isinstance(base.tower, Rep) and base.tower.step < 4
    if s.op in ("lbfh", "sbth"):
        return isinstance(base, Uncalc) and base.size < 4
    return True


def handle_call(program: Program, site: int, callee: str, ann: Annotation,
                policy: str = DEFAULT_POLICY) -> Annotation:
    """Certify one call in isolation and produce the caller's continuation
    annotation.  Raises :class:`CertError` on any calling-convention or
    callee failure."""
    engine = _Engine(program, policy)
    s = StackInstr("gosub", target=callee)
    post, _ = engine._handle_call(site, s, ann, {}, {}, ())
    return post


def certify_program(program: Program, entry: str | None = None,
                    policy: str = DEFAULT_POLICY) -> CertReport:
    """Infer a covering theory for ``program`` from its entry label."""
    label = entry or program.entry_label()
    if label is None:
        return CertReport(UNSUPPORTED, None,
                          [Failure(None, None, "UnreachableEntry",
                                   "no entry pragma and no --entry given")])
    if label not in program.labels:
        return CertReport(UNSUPPORTED, None,
                          [Failure(None, None, "UnreachableEntry",
                                   f"entry label {label!r} is not defined")])
    engine = _Engine(program, policy)
    entry_ann = entry_annotation_for(program, label)
    theory = engine.theory
    try:
        cert = engine.certify_routine(program.labels[label], entry_ann, ())
    except CertError as e:
        failure = engine.deepest[1] if engine.deepest else e.failure
        verdict = UNSUPPORTED if _is_unsupported(failure, e.failure) else UNSAFE
        return CertReport(verdict, theory, [failure])
    theory.entry_key = cert.key
    return CertReport(SAFE, theory, [])


def _is_unsupported(*failures: Failure) -> bool:
    return any(f.kind == "RecursionUnsupported" or "RecursionUnsupported" in f.detail
               for f in failures)


# --------------------------------------------------------------------------
# post-hoc safety re-validation


def check_safety(theory: Theory, policy: str = DEFAULT_POLICY) -> list[Violation]:
    """Re-walk every chosen stack/heap access in a theory, confirming the
    write-bound and read-after-write guards against the recorded
    pre-annotations and enforcing the byte policy.  An empty result means
    the theory exhibits only single-calculation addressing."""
    from .annot import AnnotError, check_read, record_write

    out: list[Violation] = []
    for cert in theory.routines.values():
        for addr, row in sorted(cert.rows.items()):
            s = row.chosen
            if s.op in BYTE_OPS:
                out.extend(_byte_policy_violations(addr, s, row.pre, policy))
            if s.op not in READ_OPS and s.op not in WRITE_OPS:
                continue
            if s.op in STACK_ACCESS:
                base = row.pre.star_type()
            else:
                base = row.pre.reg(s.rs)
            if base is None:
                out.append(Violation(addr, str(s), "MissingBase",
                                     "no type for the base register"))
                continue
            try:
                if s.op in WRITE_OPS:
                    record_write(base, s.n, s.width())
                else:
                    check_read(base, s.n, s.width())
            except AnnotError as e:
                kind = type(e).__name__
                out.append(Violation(addr, str(s), kind, str(e)))
    return out


def _byte_policy_violations(addr: int, s: StackInstr, pre: Annotation,
                            policy: str) -> list[Violation]:
    if policy == "permissive":
        return []
    if policy == "forbid":
        return [Violation(addr, str(s), "BytePolicyForbidden",
                          "byte access is disabled by policy")]
    if s.op in ("getb", "putb"):
        return [Violation(addr, str(s), "BytePolicyForbidden",
                          "byte access to the word-written stack")]
    base = pre.reg(s.rs)
    if s.op in ("getbx", "putbx"):
        if isinstance(base, Calc) and isinstance(base.tower, Rep) and base.tower.step < 4:
            return []
        return [Violation(addr, str(s), "BytePolicyForbidden",
                          f"string step must be < 4 for byte access, base {base}")]
    if isinstance(base, Uncalc) and base.size < 4:
        return []
    return [Violation(addr, str(s), "BytePolicyForbidden",
                      f"array size must be < 4 for byte access, base {base}")]
