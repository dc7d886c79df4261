"""Extension-module interface, registry and the step function's dispatch chain.

Extension decoders are consulted in registration order before the base
decoder; the first claim wins. Shared state reaches a module only through a
:class:`StateAccess` table.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Callable

from .arch import MASK64, AccessFault, ArchState, Retired, Trap, TrapCause, misa_for
from .base_isa import Illegal, decode_base, disasm_base, execute_base, word_directive
from .errors import AbiVersionError, DuplicateName, LetterConflict, LoadError, ModuleContractError, OverlapError
from .trace import TraceRecord

ABI_VERSION = 1

ENTRY_POINT_NAMES = ("decode", "execute", "print_insn", "ast_create", "ast_kill", "init", "fini", "isa_letters")


@dataclass(frozen=True)
class EntryPointTable:
    """The eight module entry points.

    ``decode(handle, word)`` fills a handle obtained from ``ast_create`` and
    returns whether the module claims the word. The handle is released with
    ``ast_kill`` before the step ends.
    """

    decode: Callable[[Any, int], bool]
    execute: Callable[[Any, "StateAccess"], Retired]
    print_insn: Callable[[Any], str]
    ast_create: Callable[[], Any]
    ast_kill: Callable[[Any], None]
    init: Callable[["StateAccess"], None]
    fini: Callable[[], None]
    isa_letters: Callable[[], str]


class Origin(str, enum.Enum):
    BUILTIN = "builtin"
    STATIC = "static_registered"
    DYNAMIC = "dynamic"


@dataclass(frozen=True)
class ModuleDescriptor:
    name: str
    abi_version: int
    isa_letters: str
    entry_points: EntryPointTable
    origin: Origin
    path: str | None = None
    # address of the C ``modriscv_ext_info`` when the module is native code
    native: int | None = None
    library: Any = field(default=None, compare=False, repr=False)

    @property
    def origin_label(self) -> str:
        if self.origin is Origin.DYNAMIC:
            return f"dynamic({self.path})"
        return self.origin.value


def validate_descriptor(d: ModuleDescriptor, where=None) -> None:
    where = where or d.path or d.name
    if d.abi_version != ABI_VERSION:
        raise AbiVersionError(where, d.abi_version, ABI_VERSION)
    if not d.name:
        raise LoadError(where, "empty module name")
    if not d.isa_letters or not all("A" <= c <= "Z" for c in d.isa_letters):
        raise LoadError(where, f"invalid ISA letters {d.isa_letters!r}")
    missing = [n for n in ENTRY_POINT_NAMES if not callable(getattr(d.entry_points, n, None))]
    if missing:
        raise LoadError(where, f"incomplete entry-point table (missing {', '.join(missing)})")


@dataclass
class StateAccess:
    """Accessor table handed to modules; ``state`` is opaque to them.

    ``mem_load`` returns ``None`` and ``mem_store`` returns ``False`` on an
    access fault; the module must then call ``raise_trap`` itself.
    """

    state: Any
    read_gpr: Callable[[int], int]
    write_gpr: Callable[[int, int], None]
    read_pc: Callable[[], int]
    write_pc: Callable[[int], None]
    mem_load: Callable[[int, int], "int | None"]
    mem_store: Callable[[int, int, int], bool]
    raise_trap: Callable[[int, int], None]
    read_csr: Callable[[int], "int | None"]
    write_csr: Callable[[int, int], bool]


class HostAccess:
    """Builds the :class:`StateAccess` for an :class:`ArchState` and tracks per-step effects."""

    def __init__(self, s: ArchState):
        self.s = s
        self.next_pc: int | None = None
        self.traps = 0
        self.table = StateAccess(
            state=s,
            read_gpr=s.gpr_read,
            write_gpr=s.gpr_write,
            read_pc=lambda: s.pc,
            write_pc=self._write_pc,
            mem_load=self._mem_load,
            mem_store=self._mem_store,
            raise_trap=self._raise_trap,
            read_csr=s.csr_read,
            write_csr=s.csr_write,
        )

    def begin(self) -> None:
        self.next_pc = None
        self.traps = 0

    def _write_pc(self, value: int) -> None:
        self.next_pc = value & MASK64

    def _mem_load(self, addr: int, size: int):
        try:
            return self.s.load(addr & MASK64, size)
        except AccessFault:
            return None

    def _mem_store(self, addr: int, size: int, value: int) -> bool:
        try:
            self.s.store(addr & MASK64, size, value)
        except AccessFault:
            return False
        return True

    def _raise_trap(self, cause: int, tval: int) -> None:
        self.traps += 1
        self.s.raise_trap(Trap(TrapCause(cause), tval))


class Registry:
    """Ordered set of registered modules bound to one architectural state."""

    def __init__(self, state: ArchState, strict_overlap: bool = False):
        self.state = state
        self.strict_overlap = strict_overlap
        self.modules: list[ModuleDescriptor] = []
        self.access = HostAccess(state)

    def letters(self) -> str:
        return "".join(d.isa_letters for d in self.modules)

    def __iter__(self):
        return iter(self.modules)

    def __len__(self) -> int:
        return len(self.modules)


def check_registration(modules, d: ModuleDescriptor) -> None:
    """Raise if ``d`` cannot join ``modules`` (shared by every host)."""
    validate_descriptor(d)
    for other in modules:
        if other.name == d.name:
            raise DuplicateName(d.name)
    for other in modules:
        for letter in d.isa_letters:
            if letter in other.isa_letters:
                raise LetterConflict(d.name, letter, other.name)


def register_module(reg: Registry, d: ModuleDescriptor) -> None:
    check_registration(reg.modules, d)
    reg.modules.append(d)
    reg.state.csrs.misa = misa_for(reg.letters())
    d.entry_points.init(reg.access.table)


def isa_query(reg: Registry, letter: str) -> bool:
    return letter == "I" or any(letter in d.isa_letters for d in reg.modules)


def host_fini(reg: Registry) -> None:
    """Call every module's ``fini`` in reverse registration order, then empty ``reg``."""
    modules, reg.modules = reg.modules, []
    for d in reversed(modules):
        d.entry_points.fini()
    reg.state.csrs.misa = misa_for("")


BASE = "base"


@dataclass(frozen=True)
class Dispatch:
    """Result of :func:`dispatch_decode`.

    ``owner`` is a :class:`ModuleDescriptor`, :data:`BASE` or ``None``. For a
    module owner ``ast`` is a live handle the caller must pass to ``ast_kill``.
    """

    owner: Any
    ast: Any


def dispatch_decode(reg: Registry, word: int) -> Dispatch:
    if reg.strict_overlap:
        return _dispatch_strict(reg, word)
    for d in reg.modules:
        ep = d.entry_points
        handle = ep.ast_create()
        if ep.decode(handle, word):
            return Dispatch(d, handle)
        ep.ast_kill(handle)
    ast = decode_base(word)
    if not ast.illegal:
        return Dispatch(BASE, ast)
    return Dispatch(None, ast)


def _dispatch_strict(reg: Registry, word: int) -> Dispatch:
    claims = []
    for d in reg.modules:
        ep = d.entry_points
        handle = ep.ast_create()
        if ep.decode(handle, word):
            claims.append((d, handle))
        else:
            ep.ast_kill(handle)
    base = decode_base(word)
    names = [d.name for d, _ in claims] + ([BASE] if not base.illegal else [])
    if len(names) > 1:
        for d, handle in claims:
            d.entry_points.ast_kill(handle)
        raise OverlapError(word, names)
    if claims:
        return Dispatch(*claims[0])
    return Dispatch(BASE if not base.illegal else None, base)


class StepKind(enum.Enum):
    RETIRED = "retired"
    TRAPPED = "trapped"
    HALTED = "halted"


@dataclass(frozen=True)
class StepOutcome:
    kind: StepKind
    record: TraceRecord | None
    exit_code: int | None = None


FETCH_FAULT_TEXT = "<fetch fault>"


def step(s: ArchState, reg: Registry) -> StepOutcome:
    """Fetch, dispatch, execute and (if requested by tracing) print one instruction."""
    assert s.halted is None, "step on a halted hart"
    pc = s.pc
    seq = s.steps
    s.steps += 1
    s.writeback = None
    try:
        word = s.load(pc, 4)
    except AccessFault:
        s.raise_trap(Trap(TrapCause.LoadAccessFault, pc))
        return _outcome(s, TraceRecord(seq, pc, 0, FETCH_FAULT_TEXT, trap=_trap_of(s)), Retired.RETIRE_TRAP)
    found = dispatch_decode(reg, word)
    owner = found.owner
    if owner is None:
        s.raise_trap(Trap(TrapCause.IllegalInstruction, word))
        result, text = Retired.RETIRE_TRAP, word_directive(word)
    elif owner is BASE:
        result = execute_base(found.ast, s)
        text = disasm_base(found.ast)
    else:
        ep = owner.entry_points
        access = reg.access
        access.begin()
        try:
            raw_result = ep.execute(found.ast, access.table)
            text = ep.print_insn(found.ast)
        finally:
            ep.ast_kill(found.ast)
        try:
            result = Retired(raw_result)
        except ValueError:
            raise ModuleContractError(f"module {owner.name!r} returned {raw_result!r} from execute") from None
        if result is Retired.RETIRE_TRAP:
            if access.traps != 1:
                raise ModuleContractError(
                    f"module {owner.name!r} returned RETIRE_TRAP after {access.traps} raise_trap calls")
        else:
            if access.traps:
                raise ModuleContractError(f"module {owner.name!r} raised a trap but reported success")
            s.pc = access.next_pc if access.next_pc is not None else (pc + 4) & MASK64
    if result is Retired.RETIRE_SUCCESS:
        s.retire()
        rec = TraceRecord(seq, pc, word, text, writeback=s.writeback)
    else:
        rec = TraceRecord(seq, pc, word, text, trap=_trap_of(s))
    return _outcome(s, rec, result)


def _trap_of(s: ArchState) -> tuple[int, int]:
    return (s.csrs.mcause, s.csrs.mtval)


def _outcome(s: ArchState, rec: TraceRecord, result: Retired) -> StepOutcome:
    if s.halted is not None:
        return StepOutcome(StepKind.HALTED, rec, s.halted)
    if result is Retired.RETIRE_SUCCESS:
        return StepOutcome(StepKind.RETIRED, rec)
    return StepOutcome(StepKind.TRAPPED, rec)


__all__ = [
    "ABI_VERSION", "BASE", "Dispatch", "EntryPointTable", "HostAccess", "ModuleDescriptor", "Origin",
    "Registry", "StateAccess", "StepKind", "StepOutcome", "check_registration", "dispatch_decode",
    "host_fini", "isa_query", "register_module", "step", "validate_descriptor", "Illegal",
]
