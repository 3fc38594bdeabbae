from __future__ import annotations

import json

import pytest

from aliascert.cli import main

from conftest import corpus_path


def test_certify_safe_exit_zero(capsys, tmp_path):
    out = tmp_path / "report.json"
    code = main(["certify", str(corpus_path("hello.s")), "--json", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "verdict: SAFE" in text
    rep = json.loads(out.read_text())
    assert rep["verdict"] == "SAFE"
    assert rep["schema"] == "aliascert-report/1"


def test_report_row_for_the_frame_pointer_store(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["certify", str(corpus_path("hello.s")), "--json", str(out)]) == 0
    capsys.readouterr()
    rep = json.loads(out.read_text())
    main_routine = next(r for r in rep["routines"] if r["label"] == "main")
    row = next(r for r in main_routine["rows"] if r["machine"] == "sw gp 16(sp)")
    assert row["stack"] == "put gp 16"
    assert "sp*=c^[32,0]!{16,24,28}" in row["post"]
    assert "(16)=c^[0]" in row["post"]


def test_human_table_and_json_agree(tmp_path, capsys):
    out = tmp_path / "report.json"
    main(["certify", str(corpus_path("hello.s")), "--json", str(out)])
    text = capsys.readouterr().out
    rep = json.loads(out.read_text())
    for routine in rep["routines"]:
        assert routine["entry"] in text
        for row in routine["rows"]:
            assert row["machine"] in text
            assert row["stack"] in text
            assert row["post"] in text
    for f in rep["failures"]:
        assert f["kind"] in text


def test_certify_unsafe_exit_one(capsys):
    code = main(["certify", str(corpus_path("foo_bad.s"))])
    assert code == 1
    text = capsys.readouterr().out
    assert "verdict: UNSAFE" in text
    assert "NoDisassembly" in text and "addiu sp sp 32" in text


def test_missing_file_exit_two(capsys):
    assert main(["certify", "does_not_exist.s"]) == 2


def test_parse_error_exit_two(tmp_path, capsys):
    bad = tmp_path / "bad.s"
    bad.write_text("lwz r1 0(sp)\n")
    assert main(["certify", str(bad)]) == 2
    assert "parse error" in capsys.readouterr().err


def test_run_clean_prints_output(capsys):
    code = main(["run", str(corpus_path("hello.s")), "--mode", "clean"])
    assert code == 0
    assert "b'Hi'" in capsys.readouterr().out


def test_run_alias_clean_program(capsys):
    code = main(["run", str(corpus_path("hello.s")), "--mode", "alias", "--seed", "7"])
    assert code == 0
    assert "b'Hi'" in capsys.readouterr().out


def test_run_alias_bad_program_faults(capsys):
    code = main(["run", str(corpus_path("foo_bad_caller.s")),
                 "--mode", "alias", "--seed", "7"])
    assert code == 1
    assert "AliasFault" in capsys.readouterr().out


def test_diff_exit_codes(capsys):
    assert main(["diff", str(corpus_path("hello.s")), "--seeds", "10"]) == 0
    assert "divergences: 0/10" in capsys.readouterr().out
    assert main(["diff", str(corpus_path("foo_bad_caller.s")), "--seeds", "10"]) == 1
    assert "divergences: 10/10" in capsys.readouterr().out


def test_custom_device_addresses(capsys, tmp_path):
    src = tmp_path / "dev.s"
    src.write_text(
        "#@ entry main\n#@ assume main: ra=u^0\n"
        "main:\n  li v1 0xc0000020\n  sb zero 0(v1)\n  jr ra\n")
    code = main(["run", str(src), "--mode", "clean",
                 "--device-base", "0xc0000000", "--halt-offset", "0x20"])
    assert code == 0
    assert "halt-device" in capsys.readouterr().out
