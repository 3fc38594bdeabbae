"""Command-line driver: certify, run, and differential sweeps."""

from __future__ import annotations

import argparse
import json
import sys

from .aliasing import AliasConfig, diff_runs, run_aliased
from .certifier import (
    DEFAULT_POLICY,
    BYTE_POLICIES,
    CertReport,
    Theory,
    certify_program,
    check_safety,
)
from .frontend import AsmSyntaxError, DuplicateLabel, parse_program, serialize_annotation
from .isa import Program, reg_name
from .machine import run as run_clean
from .simdefs import (
    DEFAULT_DEVICE_BASE,
    DEFAULT_FUEL,
    DEFAULT_HALT_OFFSET,
    DeviceConfig,
    RunOutcome,
)
from .traces import check_program

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

REPORT_SCHEMA = "aliascert-report/1"


def _load(path: str) -> Program:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_program(fh.read())


def _device(args) -> DeviceConfig:
    return DeviceConfig(base=args.device_base, halt_offset=args.halt_offset)


def build_report(path: str, entry: str | None, policy: str, report: CertReport) -> dict:
    """Machine-readable report; rows mirror the annotated-listing layout."""
    theory = report.theory
    out = {
        "schema": REPORT_SCHEMA,
        "file": path,
        "entry": entry,
        "byte_policy": policy,
        "verdict": report.verdict,
        "failures": [
            {"address": f.addr, "rule": f.rule, "kind": f.kind, "detail": f.detail}
            for f in report.failures
        ],
        "routines": [],
        "calls": [],
        "oracle": None,
        "safety": None,
    }
    if theory is None:
        return out
    for cert in sorted(theory.routines.values(), key=lambda c: (c.entry_addr, c.key)):
        rows = []
        for addr in sorted(cert.rows):
            row = cert.rows[addr]
            rows.append({
                "address": addr,
                "label": theory.program.label_at(addr),
                "machine": theory.program.source_lines.get(addr, ""),
                "stack": str(row.chosen),
                "pre": serialize_annotation(row.pre),
                "post": serialize_annotation(row.post),
            })
        out["routines"].append({
            "key": cert.key,
            "label": cert.label,
            "entry_address": cert.entry_addr,
            "entry": serialize_annotation(cert.entry),
            "exit": serialize_annotation(cert.exit_ann) if cert.exit_ann else None,
            "rows": rows,
        })
    for (site, callee), (entry_ann, exit_ann) in sorted(theory.call_summaries().items()):
        out["calls"].append({
            "site": site,
            "callee": callee,
            "entry": serialize_annotation(entry_ann),
            "exit": serialize_annotation(exit_ann) if exit_ann else None,
        })
    if report.safe:
        violations = check_program(theory)
        out["oracle"] = {"ok": not violations, "violations": [str(v) for v in violations]}
        safety = check_safety(theory, policy)
        out["safety"] = {"ok": not safety, "violations": [str(v) for v in safety]}
    return out


def _print_report(rep: dict) -> None:
    for routine in rep["routines"]:
        print(f"\n{routine['label']} @ 0x{routine['entry_address']:08x}")
        print(f"  entry: {routine['entry']}")
        for row in routine["rows"]:
            label = f"{row['label']}:" if row["label"] else ""
            print(f"  {label:<12}0x{row['address']:08x}  {row['machine']:<20} "
                  f"{row['stack']:<22} | {row['post']}")
        if routine["exit"] is not None:
            print(f"  exit:  {routine['exit']}")
    for f in rep["failures"]:
        addr = f["address"]
        where = f"0x{addr:08x}" if addr is not None else "<program>"
        rule = f" [{f['rule']}]" if f["rule"] else ""
        print(f"failure: {f['kind']} at {where}{rule}: {f['detail']}")
    if rep["oracle"] is not None:
        status = "ok" if rep["oracle"]["ok"] else "VIOLATIONS"
        print(f"\ntrace oracle: {status}")
        for v in rep["oracle"]["violations"]:
            print(f"  {v}")
    if rep["safety"] is not None:
        status = "ok" if rep["safety"]["ok"] else "VIOLATIONS"
        print(f"safety re-check ({rep['byte_policy']}): {status}")
        for v in rep["safety"]["violations"]:
            print(f"  {v}")
    print(f"\nverdict: {rep['verdict']}")


def cmd_certify(args) -> int:
    try:
        program = _load(args.file)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (AsmSyntaxError, DuplicateLabel) as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_USAGE
    report = certify_program(program, entry=args.entry, policy=args.byte_policy)
    rep = build_report(args.file, args.entry or program.entry_label(),
                       args.byte_policy, report)
    _print_report(rep)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(rep, fh, indent=2)
    clean = (report.safe
             and rep["oracle"] is not None and rep["oracle"]["ok"]
             and rep["safety"] is not None and rep["safety"]["ok"])
    return EXIT_OK if clean else EXIT_FAIL


def _print_outcome(out: RunOutcome, aliased: bool) -> None:
    print(f"output: {out.output!r}")
    print(f"halted: {out.halted}" + (f" ({out.exit_reason})" if out.exit_reason else ""))
    print(f"steps:  {out.steps}")
    if out.error:
        where = f" at pc=0x{out.error_pc:08x}" if out.error_pc is not None else ""
        print(f"error:  {out.error}{where}")
    if aliased:
        for f in out.faults:
            print(f"fault:  {f}")
    regs = ", ".join(f"{reg_name(r)}=0x{out.regs[r]:08x}"
                     for r in range(32) if out.regs[r])
    print(f"regs:   {regs or '(all zero)'}")


def cmd_run(args) -> int:
    try:
        program = _load(args.file)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (AsmSyntaxError, DuplicateLabel) as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_USAGE
    device = _device(args)
    try:
        if args.mode == "clean":
            out = run_clean(program, fuel=args.fuel, entry=args.entry, device=device)
        else:
            cfg = AliasConfig(seed=args.seed, device=device)
            out = run_aliased(program, cfg, fuel=args.fuel, entry=args.entry)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    _print_outcome(out, args.mode == "alias")
    sys.stdout.flush()
    return EXIT_OK if out.ok else EXIT_FAIL


def cmd_diff(args) -> int:
    try:
        program = _load(args.file)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (AsmSyntaxError, DuplicateLabel) as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_USAGE
    device = _device(args)
    try:
        rep = diff_runs(program, seeds=args.seeds, fuel=args.fuel,
                        entry=args.entry, device=device)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    print(f"clean output: {rep.clean.output!r}")
    print(f"divergences: {len(rep.divergences)}/{rep.seeds}")
    for d in rep.divergences[:10]:
        print(f"  seed {d.seed}: {d.reason}")
    if len(rep.divergences) > 10:
        print(f"  ... and {len(rep.divergences) - 10} more")
    return EXIT_OK if rep.ok else EXIT_FAIL


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="aliascert",
        description="Certify machine code safe against hardware aliasing, "
                    "and simulate it on clean and aliasing machines.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("file", help="assembly source file")
        sp.add_argument("--entry", default=None, help="entry label (overrides pragma)")
        sp.add_argument("--device-base", type=lambda s: int(s, 0),
                        default=DEFAULT_DEVICE_BASE)
        sp.add_argument("--halt-offset", type=lambda s: int(s, 0),
                        default=DEFAULT_HALT_OFFSET)

    c = sub.add_parser("certify", help="infer an annotated theory and a verdict")
    common(c)
    c.add_argument("--byte-policy", choices=BYTE_POLICIES, default=DEFAULT_POLICY)
    c.add_argument("--json", default=None, help="write the report as JSON to PATH")
    c.set_defaults(func=cmd_certify)

    r = sub.add_parser("run", help="run on the clean or aliasing machine")
    common(r)
    r.add_argument("--mode", choices=("clean", "alias"), default="clean")
    r.add_argument("--seed", type=int, default=1)
    r.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    r.set_defaults(func=cmd_run)

    d = sub.add_parser("diff", help="sweep seeds and compare aliased runs to clean")
    common(d)
    d.add_argument("--seeds", type=int, default=100)
    d.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    d.set_defaults(func=cmd_diff)
    return p


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
