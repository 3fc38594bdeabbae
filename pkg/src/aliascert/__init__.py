"""aliascert: certify machine code safe against hardware aliasing.

Disassembles a small machine-code dialect onto an abstract stack machine,
infers annotated types over registers and stack slots, re-validates the
result with an independent dataflow-trace oracle, and differentially
tests certified programs on a clean interpreter versus one that models
calculation-dependent address aliasing.
"""

from .aliasing import AliasConfig, SaltedWord, alu_result, diff_runs, run_aliased
from .annot import (
    AnnotatedType,
    Calc,
    Finite,
    Offsets,
    Rep,
    SetVar,
    TypeVar,
    Uncalc,
    check_read,
    pop_frame,
    push_frame,
    record_write,
    unify,
)
from .annotation import Annotation, unify_annotations
from .certifier import (
    CertReport,
    Failure,
    Theory,
    Violation,
    certify_program,
    check_safety,
    handle_call,
)
from .disasm import StackInstr, candidates, location_candidates, render_machine
from .frontend import (
    AsmSyntaxError,
    DuplicateLabel,
    parse_annotation,
    parse_program,
    parse_type,
    serialize_annotation,
    serialize_type,
)
from .isa import DataBlob, Instruction, Pragma, Program
from .machine import MachineState, build_image, run, step
from .simdefs import DeviceConfig, RunOutcome
from .smallstep import PatternMismatch, apply_smallstep
from .traces import Event, TraceViolation, check_program, events_of, fold_event

__version__ = "0.1.0"

__all__ = [
    "AliasConfig", "SaltedWord", "alu_result", "diff_runs", "run_aliased",
    "AnnotatedType", "Calc", "Finite", "Offsets", "Rep", "SetVar", "TypeVar",
    "Uncalc", "check_read", "pop_frame", "push_frame", "record_write", "unify",
    "Annotation", "unify_annotations",
    "CertReport", "Failure", "Theory", "Violation", "certify_program",
    "check_safety", "handle_call",
    "StackInstr", "candidates", "location_candidates", "render_machine",
    "AsmSyntaxError", "DuplicateLabel", "parse_annotation", "parse_program",
    "parse_type", "serialize_annotation", "serialize_type",
    "DataBlob", "Instruction", "Pragma", "Program",
    "MachineState", "build_image", "run", "step",
    "DeviceConfig", "RunOutcome",
    "PatternMismatch", "apply_smallstep",
    "Event", "TraceViolation", "check_program", "events_of", "fold_event",
]
