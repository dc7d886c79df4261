"""Emulator instances over the native host or the pure-Python host.

The native backend (compiled hosts) is used whenever it imports and
``MODRISCV_BACKEND`` is not ``python``. Both backends produce byte-identical
traces and digests.
"""

from __future__ import annotations

import enum
import os
import types
from dataclasses import dataclass

from . import abi
from .abi import BASE, ModuleDescriptor, Origin, Registry, StepKind, StepOutcome, check_registration
from .arch import (DEFAULT_MEM_BASE, DEFAULT_MEM_SIZE, MASK64, AccessFault, ArchState, Retired, Trap, TrapCause,
                   misa_for, snapshot)
from .base_isa import decode_base, disasm_base, execute_base, word_directive
from .errors import ModriscvError, ModuleContractError, OverlapError
from .ext_m import m_alu, m_decode, m_disasm
from .ext_zbb import zbb_alu, zbb_decode, zbb_disasm
from .trace import TraceRecord, format_record

try:
    from . import _host_base, _host_mono, _host_static
except ImportError:  # pragma: no cover - exercised only on installs without a compiler
    _host_base = _host_mono = _host_static = None

NATIVE_AVAILABLE = _host_base is not None

MONOLITHIC_LETTERS = "MB"


class Backend(str, enum.Enum):
    NATIVE = "native"
    PYTHON = "python"


def default_backend() -> Backend:
    forced = os.environ.get("MODRISCV_BACKEND", "").strip().lower()
    if forced == "python" or not NATIVE_AVAILABLE:
        return Backend.PYTHON
    return Backend.NATIVE


def resolve_backend(name: str | Backend | None) -> Backend:
    if name in (None, "auto"):
        return default_backend()
    backend = Backend(name)
    if backend is Backend.NATIVE and not NATIVE_AVAILABLE:
        raise ModriscvError("the native backend is not built; reinstall with a C compiler")
    return backend


class TraceIOError(ModriscvError):
    """Writing the trace sink failed."""


class RunStatus(enum.Enum):
    HALTED = "halted"
    CAP = "cap"


@dataclass(frozen=True)
class RunResult:
    status: RunStatus
    steps: int
    exit_code: int | None


def monolithic_modules() -> list[ModuleDescriptor]:
    """Descriptors describing what the monolithic host has compiled in, for listing only."""
    from .loader import load_static
    return [load_static(name, Origin.BUILTIN) for name in ("m", "zbb")]


class Emulator:
    """Common surface of both backends."""

    backend: Backend

    def __init__(self, modules=(), *, monolithic=False, strict_overlap=False, mem_base=DEFAULT_MEM_BASE,
                 mem_size=DEFAULT_MEM_SIZE, dispatch_cache=True):
        if monolithic and modules:
            raise ModriscvError("the monolithic host has no module registry")
        self.monolithic = monolithic
        self.strict_overlap = strict_overlap
        self.mem_base = mem_base
        self.mem_size = mem_size
        self.modules: list[ModuleDescriptor] = []

    @property
    def listed_modules(self) -> list[ModuleDescriptor]:
        return monolithic_modules() if self.monolithic else list(self.modules)

    def snapshot(self) -> str:
        return snapshot(types.SimpleNamespace(pc=self.pc, gprs=self.gprs,
                                              csrs=types.SimpleNamespace(**self.csrs)))

    def load_image(self, image) -> None:
        """Copy an :class:`~modriscv.elf.ElfImage` into memory and reset to its entry."""
        for addr, data in image.segments:
            self.load(addr, data)
        self.set_tohost(image.tohost)
        self.reset(image.entry)


class NativeEmulator(Emulator):
    backend = Backend.NATIVE

    def __init__(self, modules=(), *, monolithic=False, strict_overlap=False, mem_base=DEFAULT_MEM_BASE,
                 mem_size=DEFAULT_MEM_SIZE, dispatch_cache=True):
        super().__init__(modules, monolithic=monolithic, strict_overlap=strict_overlap, mem_base=mem_base,
                         mem_size=mem_size, dispatch_cache=dispatch_cache)
        if not NATIVE_AVAILABLE:
            raise ModriscvError("the native backend is not built")
        modules = list(modules)
        if monolithic:
            hostmod = _host_mono
        elif any(d.origin is not Origin.DYNAMIC for d in modules):
            hostmod = _host_static
        else:
            hostmod = _host_base
        for d in modules:
            if d.native is None:
                raise ModriscvError(f"module {d.name!r} has no native code; use the python backend")
        self.host_binary = hostmod.__file__
        self._h = hostmod.Host(mem_base, mem_size, strict_overlap, dispatch_cache)
        for d in modules:
            self.register(d)

    def register(self, d: ModuleDescriptor) -> None:
        check_registration(self.modules, d)
        self._h.register(d.native)
        self.modules.append(d)

    def load(self, addr: int, data: bytes) -> None:
        self._h.load(addr, data)

    def read(self, addr: int, n: int) -> bytes:
        return self._h.read(addr, n)

    def reset(self, entry: int) -> None:
        self._h.reset(entry)

    def set_tohost(self, addr) -> None:
        self._h.set_tohost(addr)

    @property
    def pc(self) -> int:
        return self._h.pc

    @property
    def gprs(self) -> list[int]:
        return self._h.gprs

    def set_gpr(self, idx: int, value: int) -> None:
        self._h.set_gpr(idx, value & MASK64)

    @property
    def csrs(self) -> dict:
        return self._h.csr_values()

    def set_mtvec(self, value: int) -> None:
        self._h.set_mtvec(value)

    @property
    def halted(self) -> bool:
        return self._h.halted

    @property
    def exit_code(self) -> int | None:
        return self._h.exit_code if self._h.halted else None

    def _error(self, status: int) -> ModriscvError:
        if status == -1:
            word, claims = self._h.overlap()
            names = [BASE if i < 0 else self.modules[i].name for i in claims]
            return OverlapError(word, names)
        if status == -2:
            return ModuleContractError(self._h.error_message)
        return TraceIOError("trace write failed")

    def step(self) -> StepOutcome:
        status, fields = self._h.step()
        if status < 0:
            raise self._error(status)
        rec = TraceRecord(*fields)
        if self._h.halted:
            return StepOutcome(StepKind.HALTED, rec, self._h.exit_code)
        return StepOutcome(StepKind.TRAPPED if status else StepKind.RETIRED, rec)

    def run(self, max_steps: int, trace=None) -> RunResult:
        """Run until halted or ``max_steps`` steps; ``trace`` is a binary file or ``None``."""
        fd = -1
        if trace is not None:
            try:
                trace.flush()
            except OSError as exc:
                raise TraceIOError(str(exc)) from None
            fd = trace.fileno()
        status, steps = self._h.run(min(max_steps, MASK64), fd)
        if status < 0:
            raise self._error(status)
        if status == 0:
            return RunResult(RunStatus.HALTED, steps, self._h.exit_code)
        return RunResult(RunStatus.CAP, steps, None)

    def fini(self) -> None:
        self._h.fini_modules()
        self.modules = []


class PythonEmulator(Emulator):
    backend = Backend.PYTHON

    def __init__(self, modules=(), *, monolithic=False, strict_overlap=False, mem_base=DEFAULT_MEM_BASE,
                 mem_size=DEFAULT_MEM_SIZE, dispatch_cache=True):
        super().__init__(modules, monolithic=monolithic, strict_overlap=strict_overlap, mem_base=mem_base,
                         mem_size=mem_size, dispatch_cache=dispatch_cache)
        self.state = ArchState(mem_base, mem_size)
        self.registry = Registry(self.state, strict_overlap)
        self.modules = self.registry.modules
        if monolithic:
            self.state.csrs.misa = misa_for(MONOLITHIC_LETTERS)
        for d in modules:
            self.register(d)

    def register(self, d: ModuleDescriptor) -> None:
        abi.register_module(self.registry, d)

    def load(self, addr: int, data: bytes) -> None:
        try:
            self.state.write_bytes(addr, bytes(data))
        except Exception:
            raise ValueError(f"0x{addr:x}+{len(data)} outside guest memory") from None

    def read(self, addr: int, n: int) -> bytes:
        return self.state.read_bytes(addr, n)

    def reset(self, entry: int) -> None:
        self.state.reset(entry)

    def set_tohost(self, addr) -> None:
        self.state.tohost = addr

    @property
    def pc(self) -> int:
        return self.state.pc

    @property
    def gprs(self) -> list[int]:
        return [0] + self.state.gprs[1:]

    def set_gpr(self, idx: int, value: int) -> None:
        if idx:
            self.state.gprs[idx] = value & MASK64

    @property
    def csrs(self) -> dict:
        c = self.state.csrs
        return {"misa": c.misa, "mhartid": c.mhartid, "mtvec": c.mtvec, "mepc": c.mepc, "mcause": c.mcause,
                "mtval": c.mtval, "mcycle": c.minstret, "minstret": c.minstret}

    def set_mtvec(self, value: int) -> None:
        self.state.csrs.mtvec = value & ~3 & MASK64

    @property
    def halted(self) -> bool:
        return self.state.halted is not None

    @property
    def exit_code(self) -> int | None:
        return self.state.halted

    def step(self) -> StepOutcome:
        if self.monolithic:
            return step_monolithic(self.state)
        return abi.step(self.state, self.registry)

    def run(self, max_steps: int, trace=None) -> RunResult:
        n = 0
        stepper = self.step
        s = self.state
        try:
            while n < max_steps and s.halted is None:
                out = stepper()
                n += 1
                if trace is not None:
                    trace.write(format_record(out.record).encode())
            if trace is not None:
                trace.flush()
        except OSError as exc:
            raise TraceIOError(str(exc)) from None
        if s.halted is not None:
            return RunResult(RunStatus.HALTED, n, s.halted)
        return RunResult(RunStatus.CAP, n, None)

    def fini(self) -> None:
        abi.host_fini(self.registry)
        self.modules = self.registry.modules


def step_monolithic(s: ArchState) -> StepOutcome:
    """One step with M and Zbb decoded inline ahead of the base, no registry."""
    pc = s.pc
    seq = s.steps
    s.steps += 1
    s.writeback = None
    try:
        word = s.load(pc, 4)
    except AccessFault:
        s.raise_trap(Trap(TrapCause.LoadAccessFault, pc))
        rec = TraceRecord(seq, pc, 0, abi.FETCH_FAULT_TEXT, trap=(s.csrs.mcause, s.csrs.mtval))
        return abi._outcome(s, rec, Retired.RETIRE_TRAP)
    m = m_decode(word)
    if not m.illegal:
        s.gpr_write(m.rd, m_alu(m.op, s.gpr_read(m.rs1), s.gpr_read(m.rs2)))
        s.pc = (pc + 4) & MASK64
        result, text = Retired.RETIRE_SUCCESS, m_disasm(m)
    else:
        z = zbb_decode(word)
        if not z.illegal:
            b = z.shamt if z.op == "rori" else s.gpr_read(z.rs2)
            s.gpr_write(z.rd, zbb_alu(z.op, s.gpr_read(z.rs1), b))
            s.pc = (pc + 4) & MASK64
            result, text = Retired.RETIRE_SUCCESS, zbb_disasm(z)
        else:
            ast = decode_base(word)
            if ast.illegal:
                s.raise_trap(Trap(TrapCause.IllegalInstruction, word))
                result, text = Retired.RETIRE_TRAP, word_directive(word)
            else:
                result, text = execute_base(ast, s), disasm_base(ast)
    if result is Retired.RETIRE_SUCCESS:
        s.retire()
        rec = TraceRecord(seq, pc, word, text, writeback=s.writeback)
    else:
        rec = TraceRecord(seq, pc, word, text, trap=(s.csrs.mcause, s.csrs.mtval))
    return abi._outcome(s, rec, result)


def make_emulator(modules=(), *, backend=None, **kwargs) -> Emulator:
    cls = NativeEmulator if resolve_backend(backend) is Backend.NATIVE else PythonEmulator
    return cls(modules, **kwargs)


__all__ = [
    "Backend", "Emulator", "NATIVE_AVAILABLE", "NativeEmulator", "PythonEmulator", "RunResult", "RunStatus",
    "TraceIOError", "default_backend", "make_emulator", "monolithic_modules", "resolve_backend",
    "step_monolithic",
]
