import json
import shutil
import subprocess

import pytest

from modriscv import programs
from modriscv.frontend import config_from_flags
from modriscv.harness import (Equal, FirstDivergence, RunFailure, bench, bench_main, diff_main, difftest,
                              format_bench_table, size_main, size_report, standard_binaries)
from modriscv.loader import UsageError

from conftest import needs_native


def cfg(flags, elf):
    return config_from_flags(flags, elf)


def test_monolithic_vs_dynamic_m(elf_of, m_plugin):
    elf = elf_of("m_div")
    verdict = difftest(cfg("--monolithic", elf), cfg(f"--module {m_plugin}", elf))
    assert isinstance(verdict, Equal) and verdict and verdict.exit_code == 0


def test_module_isolation(elf_of):
    elf = elf_of("base_sieve")
    assert difftest(cfg("", elf), cfg("--module builtin:m", elf))


def test_missing_module_diverges_at_first_m_instruction(elf_of):
    elf = elf_of("m_mul")
    verdict = difftest(cfg("--module builtin:m", elf), cfg("", elf))
    assert isinstance(verdict, FirstDivergence) and not verdict
    assert verdict.reason == "trace"
    assert " W x" in verdict.ref_line and " T cause=2 " in verdict.dut_line
    assert verdict.ref_line.split()[1] == str(verdict.seq)
    mnemonic = verdict.ref_line.split('"')[1].split()[0]
    assert mnemonic in ("mul", "mulh", "mulhsu", "mulhu")


@pytest.mark.parametrize("flags", ["", "--monolithic", "--module builtin:m --module builtin:zbb",
                                   "--backend python --module builtin:m"])
def test_reflexive(flags, elf_of):
    elf = elf_of("m_gcd")
    assert difftest(cfg(flags, elf), cfg(flags, elf))


def test_exit_code_divergence(tmp_path, elf_of):
    # same trace up to the cap, different exit status
    elf = elf_of("base_fib")
    verdict = difftest(cfg("--max-insns 50", elf), cfg("--max-insns 50 --module builtin:m", elf))
    assert verdict
    full = difftest(cfg("", elf), cfg("--max-insns 50", elf))
    assert not full and full.reason == "trace"


def test_parallel_mode(elf_of, m_plugin, zbb_plugin):
    elf = elf_of("zbb_rotate")
    assert difftest(cfg("--monolithic", elf), cfg(f"--module {m_plugin} --module {zbb_plugin}", elf), parallel=True)


def test_run_failure_names_configuration(elf_of):
    elf = elf_of("m_mul")
    with pytest.raises(RunFailure) as info:
        difftest(cfg("", elf), cfg("--module /nonexistent.so", elf))
    assert info.value.role == "dut" and "/nonexistent.so" in str(info.value)


def test_layout_mismatch_rejected(elf_of):
    elf = elf_of("m_mul")
    with pytest.raises(UsageError):
        difftest(cfg("", elf), cfg("--mem-size 1048576", elf))


def test_moddiff_cli(elf_of, capsys):
    elf = str(elf_of("m_edges"))
    assert diff_main(["--ref", "--monolithic", "--dut", "--module builtin:m --module builtin:zbb", elf]) == 0
    assert capsys.readouterr().out.startswith("EQUAL")
    assert diff_main(["--ref", "--module builtin:m", "--dut", "", elf]) == 1
    assert "DIVERGE at seq" in capsys.readouterr().out
    with pytest.raises(SystemExit) as info:
        diff_main(["--ref", "", elf])
    assert info.value.code == 64


@pytest.fixture(scope="module")
def small_bench(tmp_path_factory):
    d = tmp_path_factory.mktemp("bench")
    return programs.bench_base_alu(200_000).write(d)


def test_bench_rows(small_bench):
    rows = bench([(n, cfg(f, small_bench)) for n, f in
                  (("mono", "--monolithic"), ("static", "--module builtin:m"), ("dyn", "--module builtin:zbb"))],
                 repeats=3)
    assert [r.name for r in rows] == ["mono", "static", "dyn"]
    for r in rows:
        assert 200_000 <= r.insns < 200_100 and r.repeats == 3 and r.exit_code == 0
        assert 0 < r.min_ns <= r.median_ns and r.ips > 0
    assert len(format_bench_table(rows).splitlines()) == 2 + 3


def test_same_config_twice(small_bench):
    rows = bench([("a", cfg("--monolithic", small_bench)), ("a", cfg("--monolithic", small_bench))], repeats=5)
    assert len(rows) == 2
    assert 0.33 < rows[0].ips / rows[1].ips < 3


def test_bench_empty_and_bad_repeats(small_bench):
    assert bench([], repeats=3) == []
    with pytest.raises(UsageError):
        bench([("a", cfg("", small_bench))], repeats=2)


def test_modbench_cli(small_bench, capsys, tmp_path):
    records = tmp_path / "r.jsonl"
    assert bench_main(["--config", "mono=--monolithic", "--config", "none=", "--repeats", "3",
                       "--records", str(records), str(small_bench)]) == 0
    out = capsys.readouterr().out
    assert "mono" in out and "none" in out
    recs = [json.loads(line) for line in records.read_text().splitlines()]
    assert [r["name"] for r in recs] == ["mono", "none"]
    assert {"name", "insns", "median_ns", "ips"} <= set(recs[0])
    assert bench_main(["--repeats", "3", str(small_bench)]) == 0


@needs_native
def test_size_report_rows():
    binaries = dict(standard_binaries())
    rows = size_report([binaries["monolithic host"], binaries["base-only host"], binaries["m plugin"]])
    assert len(rows) == 3 and not any(r.error for r in rows)
    mono, base, plugin = rows
    assert base.file_size < mono.file_size and base.text < mono.text
    assert plugin.text > 0


def test_size_report_errors(tmp_path):
    assert size_report([]) == []
    junk = tmp_path / "junk"
    junk.write_text("x")
    rows = size_report(["/nonexistent", junk])
    assert rows[0].error == "no such file" and rows[0].file_size is None
    assert rows[1].error and rows[1].file_size == 1


@needs_native
def test_modsize_cli(capsys):
    assert size_main(["--hosts"]) == 0
    out = capsys.readouterr().out
    for label in ("monolithic host", "static-modular host", "base-only host", "m plugin", "zbb plugin"):
        assert label in out
    assert size_main(["/nonexistent"]) == 1
    assert "ERROR" in capsys.readouterr().out
    assert size_main([]) == 0


@pytest.mark.skipif(shutil.which("modsize") is None, reason="console scripts not installed")
def test_console_scripts_exist():
    for tool in ("modsim", "moddiff", "modbench", "modsize"):
        assert subprocess.run([tool, "--help"], capture_output=True).returncode == 0
