"""Differential testing, benchmarking and binary-size reporting.

``moddiff`` compares two modsim configurations on one ELF by trace bytes,
exit code and final state digest. ``modbench`` times named configurations.
``modsize`` reports file and section sizes of host and module binaries.
"""

from __future__ import annotations

import argparse
import json
import os
import statistics
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

from elftools.common.exceptions import ELFError
from elftools.elf.elffile import ELFFile

from .errors import ModriscvError
from .frontend import RunConfig, RunReport, config_from_flags, execute
from .loader import UsageError

EXIT_USAGE = 64


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _glue(argv, options) -> list[str]:
    """Turn ``--opt VALUE`` into ``--opt=VALUE`` so values may themselves start with ``--``."""
    argv = list(sys.argv[1:] if argv is None else argv)
    out, i = [], 0
    while i < len(argv):
        if argv[i] in options and i + 1 < len(argv):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


class RunFailure(ModriscvError):
    """A difftest or bench run could not complete; names the configuration."""

    def __init__(self, role: str, cfg: RunConfig, cause: BaseException):
        self.role, self.cfg, self.cause = role, cfg, cause
        super().__init__(f"{role} run failed ({_describe(cfg)}): {cause}")


def _describe(cfg: RunConfig) -> str:
    parts = ["--monolithic"] if cfg.monolithic else [f"--module {m}" for m in cfg.modules]
    return " ".join(parts) or "no modules"


# -- difftest -----------------------------------------------------------------

@dataclass(frozen=True)
class Equal:
    steps: int
    exit_code: int

    def __bool__(self):
        return True

    def __str__(self):
        return f"EQUAL ({self.steps} trace lines, exit {self.exit_code})"


@dataclass(frozen=True)
class FirstDivergence:
    seq: int | None
    ref_line: str | None
    dut_line: str | None
    reason: str = "trace"

    def __bool__(self):
        return False

    def __str__(self):
        where = f"seq {self.seq}" if self.seq is not None else "end of run"
        return f"DIVERGE at {where} ({self.reason})\n  ref: {self.ref_line}\n  dut: {self.dut_line}"


@dataclass(frozen=True)
class _Traced:
    report: RunReport
    trace: bytes


def _traced_run(cfg: RunConfig, role: str) -> _Traced:
    with tempfile.TemporaryDirectory(prefix="moddiff-") as tmp:
        path = os.path.join(tmp, f"{role}.trace")
        try:
            report = execute(_with_trace(cfg, path))
        except Exception as exc:
            raise RunFailure(role, cfg, exc) from exc
        return _Traced(report, Path(path).read_bytes())


def _with_trace(cfg: RunConfig, path: str) -> RunConfig:
    fields = dict(cfg.__dict__)
    fields["trace"] = path
    return RunConfig(**fields)


def _first_divergence(ref: bytes, dut: bytes) -> FirstDivergence | None:
    if ref == dut:
        return None
    ref_lines, dut_lines = ref.splitlines(), dut.splitlines()
    for i in range(max(len(ref_lines), len(dut_lines))):
        a = ref_lines[i] if i < len(ref_lines) else None
        b = dut_lines[i] if i < len(dut_lines) else None
        if a != b:
            line = a if a is not None else b
            seq = int(line.split()[1]) if line.startswith(b"S ") else i
            return FirstDivergence(seq, a and a.decode(errors="replace"), b and b.decode(errors="replace"))
    # same lines, different bytes (e.g. a missing final newline)
    return FirstDivergence(None, repr(ref[-40:]), repr(dut[-40:]), "trailing bytes")


def compare(ref: _Traced, dut: _Traced):
    div = _first_divergence(ref.trace, dut.trace)
    if div is not None:
        return div
    if ref.report.exit_code != dut.report.exit_code:
        return FirstDivergence(None, f"exit {ref.report.exit_code}", f"exit {dut.report.exit_code}", "exit code")
    if ref.report.digest != dut.report.digest:
        return FirstDivergence(None, ref.report.digest, dut.report.digest, "state digest")
    return Equal(ref.trace.count(b"\n"), ref.report.exit_code)


def difftest(ref_cfg: RunConfig, dut_cfg: RunConfig, elf=None, *, parallel: bool = False):
    """Run both configurations and return :class:`Equal` or :class:`FirstDivergence`."""
    if elf is not None:
        ref_cfg, dut_cfg = (RunConfig(**{**c.__dict__, "elf_path": str(elf)}) for c in (ref_cfg, dut_cfg))
    if (ref_cfg.mem_base, ref_cfg.mem_size) != (dut_cfg.mem_base, dut_cfg.mem_size):
        raise UsageError("difftest configurations must share the memory layout")
    if parallel:
        with ProcessPoolExecutor(max_workers=2) as pool:
            fr = pool.submit(_traced_run, ref_cfg, "ref")
            fd = pool.submit(_traced_run, dut_cfg, "dut")
            ref, dut = fr.result(), fd.result()
    else:
        ref, dut = _traced_run(ref_cfg, "ref"), _traced_run(dut_cfg, "dut")
    return compare(ref, dut)


def diff_main(argv=None) -> int:
    p = _ArgumentParser(prog="moddiff", description="Compare two modsim configurations on one ELF.")
    p.add_argument("--ref", required=True, metavar="FLAGS", help="modsim flags of the reference run")
    p.add_argument("--dut", required=True, metavar="FLAGS", help="modsim flags of the run under test")
    p.add_argument("--parallel", action="store_true", help="run the two configurations in separate processes")
    p.add_argument("elf")
    args = p.parse_args(_glue(argv, ("--ref", "--dut")))
    try:
        ref_cfg = config_from_flags(args.ref, args.elf)
        dut_cfg = config_from_flags(args.dut, args.elf)
        verdict = difftest(ref_cfg, dut_cfg, parallel=args.parallel)
    except (UsageError, RunFailure, ModriscvError) as exc:
        print(f"moddiff: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(verdict)
    return 0 if verdict else 1


# -- bench --------------------------------------------------------------------

@dataclass(frozen=True)
class BenchRow:
    name: str
    insns: int
    median_ns: int
    min_ns: int
    ips: float
    exit_code: int
    repeats: int

    def record(self) -> str:
        return json.dumps(asdict(self), sort_keys=False)


def bench(cfgs, elf=None, repeats: int = 5) -> list[BenchRow]:
    """Time each named configuration ``repeats`` times; ``cfgs`` is a list of (name, RunConfig).

    Repeats are interleaved across configurations so a burst of machine noise
    lands on all of them rather than on whichever one happened to be running.
    """
    if repeats < 3:
        raise UsageError("repeats must be at least 3")
    cfgs = [(name, cfg if elf is None else RunConfig(**{**cfg.__dict__, "elf_path": str(elf)}))
            for name, cfg in cfgs]
    times = {name: [] for name, _ in cfgs}
    last = {}
    for _ in range(repeats):
        for name, cfg in cfgs:
            try:
                report = execute(cfg)
            except Exception as exc:
                raise RunFailure(name, cfg, exc) from exc
            times[name].append(int(report.seconds * 1e9))
            last[name] = report
    rows = []
    for name, _ in cfgs:
        median_ns = int(statistics.median(times[name]))
        insns = last[name].retired
        ips = insns / (median_ns / 1e9) if median_ns else 0.0
        rows.append(BenchRow(name, insns, median_ns, min(times[name]), ips, last[name].exit_code, repeats))
    return rows


def format_bench_table(rows) -> str:
    rows = list(rows)
    w = max([20, *(len(r.name) for r in rows)])
    header = f"{'config':<{w}} {'insns':>12} {'median ms':>11} {'min ms':>11} {'Minsn/s':>9} {'exit':>5}"
    lines = [header, "-" * len(header)]
    for r in rows:
        lines.append(f"{r.name:<{w}} {r.insns:>12} {r.median_ns / 1e6:>11.2f} {r.min_ns / 1e6:>11.2f} "
                     f"{r.ips / 1e6:>9.2f} {r.exit_code:>5}")
    return "\n".join(lines)


def _named_config(text: str):
    name, sep, flags = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected NAME=\"<modsim flags>\", got {text!r}")
    return name, flags


def bench_main(argv=None) -> int:
    p = _ArgumentParser(prog="modbench", description="Time modsim configurations on one ELF.")
    p.add_argument("--config", action="append", default=[], type=_named_config, metavar='NAME="FLAGS"')
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--records", metavar="PATH",
                   help="also write one JSON record per configuration to PATH ('-' for stdout)")
    p.add_argument("elf")
    args = p.parse_args(_glue(argv, ("--config",)))
    try:
        cfgs = [(name, config_from_flags(flags, args.elf)) for name, flags in args.config]
        rows = bench(cfgs, repeats=args.repeats)
    except (UsageError, RunFailure, ModriscvError) as exc:
        print(f"modbench: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(format_bench_table(rows))
    if args.records:
        text = "".join(r.record() + "\n" for r in rows)
        if args.records == "-":
            sys.stdout.write(text)
        else:
            Path(args.records).write_text(text)
    return 0


# -- size ---------------------------------------------------------------------

@dataclass(frozen=True)
class SizeRow:
    path: str
    file_size: int | None = None
    text: int | None = None
    data: int | None = None
    bss: int | None = None
    error: str | None = None


SHF_WRITE, SHF_ALLOC, SHF_EXECINSTR = 0x1, 0x2, 0x4


def section_sizes(path) -> tuple[int, int, int]:
    """``size``-style text/data/bss: read-only allocated, writable allocated, and NOBITS."""
    text = data = bss = 0
    with open(path, "rb") as f:
        for sec in ELFFile(f).iter_sections():
            flags = sec["sh_flags"]
            if not flags & SHF_ALLOC:
                continue
            if sec["sh_type"] == "SHT_NOBITS":
                bss += sec["sh_size"]
            elif flags & SHF_WRITE:
                data += sec["sh_size"]
            else:
                text += sec["sh_size"]
    return text, data, bss


def size_report(paths) -> list[SizeRow]:
    rows = []
    for p in paths:
        p = str(p)
        if not os.path.isfile(p):
            rows.append(SizeRow(p, error="no such file"))
            continue
        size = os.path.getsize(p)
        try:
            text, data, bss = section_sizes(p)
        except (ELFError, OSError) as exc:
            rows.append(SizeRow(p, size, error=f"not an ELF object ({exc})"))
            continue
        rows.append(SizeRow(p, size, text, data, bss))
    return rows


def standard_binaries() -> list[tuple[str, str]]:
    """(label, path) for the three hosts and the bundled module libraries."""
    from . import _host_base, _host_mono, _host_static
    from .loader import plugin_path
    return [("monolithic host", _host_mono.__file__), ("static-modular host", _host_static.__file__),
            ("base-only host", _host_base.__file__), ("m plugin", str(plugin_path("m"))),
            ("zbb plugin", str(plugin_path("zbb")))]


def format_size_table(rows, labels=None) -> str:
    labels = labels or {}
    header = f"{'binary':<24} {'file':>10} {'text':>10} {'data':>8} {'bss':>8}  path"
    lines = [header, "-" * len(header)]
    for r in rows:
        label = labels.get(r.path, Path(r.path).name)
        if r.error and r.file_size is None:
            lines.append(f"{label:<24} {'ERROR':>10} {'-':>10} {'-':>8} {'-':>8}  {r.path}: {r.error}")
        elif r.error:
            lines.append(f"{label:<24} {r.file_size:>10} {'-':>10} {'-':>8} {'-':>8}  {r.path}: {r.error}")
        else:
            lines.append(f"{label:<24} {r.file_size:>10} {r.text:>10} {r.data:>8} {r.bss:>8}  {r.path}")
    return "\n".join(lines)


def size_main(argv=None) -> int:
    p = _ArgumentParser(prog="modsize", description="File and section sizes of host and module binaries.")
    p.add_argument("--hosts", action="store_true", help="include the built hosts and bundled module libraries")
    p.add_argument("--json", action="store_true", help="one JSON record per binary instead of a table")
    p.add_argument("paths", nargs="*")
    args = p.parse_args(argv)
    labels = {}
    paths = list(args.paths)
    if args.hosts:
        for label, path in standard_binaries():
            labels[path] = label
            paths.append(path)
    rows = size_report(paths)
    if args.json:
        for r in rows:
            print(json.dumps({"label": labels.get(r.path, Path(r.path).name), **asdict(r)}))
    else:
        print(format_size_table(rows, labels))
    return 1 if any(r.error for r in rows) else 0


__all__ = [
    "BenchRow", "Equal", "FirstDivergence", "RunFailure", "SizeRow", "bench", "bench_main", "compare",
    "diff_main", "difftest", "format_bench_table", "format_size_table", "section_sizes", "size_main",
    "size_report", "standard_binaries",
]
