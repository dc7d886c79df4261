"""The ``modsim`` executable: load an ELF, bind modules, run, trace.

Exit status is the HTIF code on a tohost halt, otherwise one of the codes
below.
"""

from __future__ import annotations

import argparse
import contextlib
import os
import shlex
import sys
import time
from dataclasses import dataclass, field

from .arch import DEFAULT_MEM_BASE, DEFAULT_MEM_SIZE, FATAL_TRAP_EXIT
from .elf import load_elf
from .emulator import Emulator, RunStatus, TraceIOError, make_emulator
from .errors import ElfError, LoadError, ModriscvError, ModuleContractError, OverlapError, RegistrationError
from .loader import LoadRequest, UsageError

EXIT_USAGE = 64
EXIT_CONTRACT = 70
EXIT_FATAL_TRAP = FATAL_TRAP_EXIT
EXIT_INSN_CAP = 134
EXIT_TRACE_IO = 135

UNLIMITED = (1 << 64) - 1


@dataclass
class RunConfig:
    elf_path: str | None
    modules: list[LoadRequest] = field(default_factory=list)
    max_insns: int = UNLIMITED
    # None: no trace; "-": standard output; anything else is a file path
    trace: str | None = None
    strict_overlap: bool = False
    mem_base: int = DEFAULT_MEM_BASE
    mem_size: int = DEFAULT_MEM_SIZE
    monolithic: bool = False
    backend: str = "auto"
    dispatch_cache: bool = True
    list_modules: bool = False

    def __post_init__(self):
        if self.max_insns <= 0:
            raise UsageError("--max-insns must be positive")
        if self.mem_size <= 0:
            raise UsageError("--mem-size must be positive")
        if self.monolithic and self.modules:
            raise UsageError("--monolithic cannot be combined with --module")

    def build(self) -> Emulator:
        modules = [req.load() for req in self.modules]
        return make_emulator(modules, backend=self.backend, monolithic=self.monolithic,
                             strict_overlap=self.strict_overlap, mem_base=self.mem_base, mem_size=self.mem_size,
                             dispatch_cache=self.dispatch_cache)


@dataclass(frozen=True)
class RunReport:
    exit_code: int
    retired: int
    steps: int
    seconds: float
    digest: str | None
    message: str = ""

    @property
    def ips(self) -> float:
        return self.retired / self.seconds if self.seconds > 0 else 0.0


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int(text: str) -> int:
    try:
        return int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None


def _hex(text: str) -> int:
    try:
        return int(text, 16)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid hex address {text!r}") from None


def build_parser(prog: str = "modsim") -> argparse.ArgumentParser:
    p = _ArgumentParser(prog=prog, description="Modular RV64 emulator with loadable ISA extension modules.")
    p.add_argument("--module", action="append", default=[], metavar="builtin:NAME|PATH",
                   help="bind an extension module; repeatable, dispatch order follows flag order")
    p.add_argument("--trace", metavar="PATH|-", help="write one trace line per step ('-' for stdout)")
    p.add_argument("--max-insns", type=_int, default=UNLIMITED, metavar="N", help="step cap (exit 134)")
    p.add_argument("--strict-overlap", action="store_true",
                   help="probe every decoder and fail if more than one claims a word")
    p.add_argument("--mem-base", type=_hex, default=DEFAULT_MEM_BASE, metavar="HEX")
    p.add_argument("--mem-size", type=_int, default=DEFAULT_MEM_SIZE, metavar="BYTES")
    p.add_argument("--list-modules", action="store_true", help="print the bound modules and exit")
    p.add_argument("--monolithic", action="store_true", help="use the host with M and Zbb compiled in")
    p.add_argument("--backend", choices=("auto", "native", "python"), default="auto")
    p.add_argument("--no-dispatch-cache", action="store_true",
                   help="disable the native host's per-word decoder-claim memo")
    p.add_argument("elf", nargs="?", metavar="ELF")
    return p


def parse_args(argv) -> RunConfig:
    """Parse modsim flags into a :class:`RunConfig`; raises :class:`UsageError`."""
    argv = [os.fspath(a) if isinstance(a, os.PathLike) else a for a in argv]
    if "--module" in argv[-1:]:
        raise UsageError("--module requires a value (builtin:NAME or a library path)")
    ns = build_parser().parse_args(argv)
    try:
        modules = [LoadRequest.parse(v) for v in ns.module]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if ns.elf is None and not ns.list_modules:
        raise UsageError("missing ELF argument")
    return RunConfig(
        elf_path=ns.elf, modules=modules, max_insns=ns.max_insns, trace=ns.trace,
        strict_overlap=ns.strict_overlap, mem_base=ns.mem_base, mem_size=ns.mem_size, monolithic=ns.monolithic,
        backend=ns.backend, dispatch_cache=not ns.no_dispatch_cache, list_modules=ns.list_modules,
    )


def config_from_flags(flags: str, elf_path) -> RunConfig:
    """A :class:`RunConfig` from a modsim flag string (as used by moddiff and modbench)."""
    return parse_args([*shlex.split(flags), str(elf_path)])


def list_lines(emu: Emulator) -> list[str]:
    return [f"{d.name}\tv{d.abi_version}\t{d.isa_letters}\t{d.origin_label}" for d in emu.listed_modules]


@contextlib.contextmanager
def _trace_sink(spec):
    if spec is None:
        yield None
    elif spec == "-":
        sys.stdout.flush()
        out = os.fdopen(os.dup(sys.stdout.fileno()), "wb")
        try:
            yield out
        finally:
            with contextlib.suppress(OSError):
                out.close()
    else:
        try:
            f = open(spec, "wb")
        except OSError as exc:
            raise TraceIOError(f"cannot open trace file {spec}: {exc}") from None
        try:
            yield f
        finally:
            with contextlib.suppress(OSError):
                f.close()


def execute(cfg: RunConfig, emu: Emulator | None = None) -> RunReport:
    """Run ``cfg`` to completion. Raises for usage-class failures (bad ELF, load errors)."""
    emu = emu or cfg.build()
    try:
        image = load_elf(cfg.elf_path, cfg.mem_base, cfg.mem_size)
        emu.load_image(image)
        start = time.perf_counter()
        try:
            with _trace_sink(cfg.trace) as sink:
                result = emu.run(cfg.max_insns, sink)
        except TraceIOError as exc:
            return RunReport(EXIT_TRACE_IO, emu.csrs["minstret"], 0, time.perf_counter() - start, None,
                             f"trace I/O failure: {exc}")
        except (OverlapError, ModuleContractError) as exc:
            return RunReport(EXIT_CONTRACT, emu.csrs["minstret"], 0, time.perf_counter() - start, None, str(exc))
        seconds = time.perf_counter() - start
        if result.status is RunStatus.CAP:
            code, message = EXIT_INSN_CAP, f"instruction cap of {cfg.max_insns} reached"
        else:
            code = result.exit_code
            message = "fatal trap" if code == EXIT_FATAL_TRAP and emu.csrs["mtvec"] == 0 else ""
        return RunReport(code, emu.csrs["minstret"], result.steps, seconds, emu.snapshot(), message)
    finally:
        emu.fini()


def run(cfg: RunConfig) -> int:
    return execute(cfg).exit_code


def _process_code(code: int) -> int:
    return code if 0 <= code <= 255 else 255


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args(argv)
        emu = cfg.build()
    except (UsageError, LoadError, RegistrationError, ModriscvError) as exc:
        print(f"modsim: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if cfg.list_modules:
        for line in list_lines(emu):
            print(line)
        emu.fini()
        if cfg.elf_path is None:
            return 0
    try:
        report = execute(cfg, emu)
    except ElfError as exc:
        print(f"modsim: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if report.message:
        print(f"modsim: {report.message}", file=sys.stderr)
    print(f"modsim: {report.retired} instructions retired in {report.seconds:.3f} s "
          f"({report.ips:,.0f} instructions/s), exit {report.exit_code}", file=sys.stderr)
    return _process_code(report.exit_code)


if __name__ == "__main__":
    sys.exit(main())
