"""M extension (multiply/divide) as a pure-Python extension module."""

from __future__ import annotations

from dataclasses import dataclass

from .abi import ABI_VERSION, EntryPointTable, ModuleDescriptor, Origin, StateAccess
from .arch import Retired
from .base_isa import word_directive
from .bits import MASK64, funct3, funct7, opcode, rd, rs1, rs2, sext, sext32

NAME = "m"
LETTERS = "M"

_OPS = {
    (0x33, 0): "mul", (0x33, 1): "mulh", (0x33, 2): "mulhsu", (0x33, 3): "mulhu",
    (0x33, 4): "div", (0x33, 5): "divu", (0x33, 6): "rem", (0x33, 7): "remu",
    (0x3B, 0): "mulw", (0x3B, 4): "divw", (0x3B, 5): "divuw", (0x3B, 6): "remw", (0x3B, 7): "remuw",
}
OPS = tuple(_OPS.values())


@dataclass(frozen=True, slots=True)
class MAst:
    op: str
    rd: int = 0
    rs1: int = 0
    rs2: int = 0
    raw: int = 0

    @property
    def illegal(self) -> bool:
        return self.op == "illegal"


def m_decode(word: int) -> MAst:
    w = word & 0xFFFFFFFF
    if funct7(w) == 1:
        op = _OPS.get((opcode(w), funct3(w)))
        if op is not None:
            return MAst(op, rd(w), rs1(w), rs2(w), w)
    return MAst("illegal", raw=w)


def _quot(a: int, b: int) -> int:
    # truncating division of signed Python ints, b != 0
    q = abs(a) // abs(b)
    return -q if (a < 0) != (b < 0) else q


def m_alu(op: str, a: int, b: int) -> int:
    """Result of ``op`` on unsigned 64-bit register values ``a`` and ``b``."""
    if op.endswith("w"):
        a32, b32 = a & 0xFFFFFFFF, b & 0xFFFFFFFF
        sa, sb = sext(a32, 32), sext(b32, 32)
        if op == "mulw":
            return sext32(a32 * b32)
        if op == "divw":
            if sb == 0:
                return MASK64
            if sa == -(1 << 31) and sb == -1:
                return sext32(sa)
            return sext32(_quot(sa, sb))
        if op == "divuw":
            return MASK64 if b32 == 0 else sext32(a32 // b32)
        if op == "remw":
            if sb == 0:
                return sext32(sa)
            if sa == -(1 << 31) and sb == -1:
                return 0
            return sext32(sa - sb * _quot(sa, sb))
        if op == "remuw":
            return sext32(a32) if b32 == 0 else sext32(a32 % b32)
        raise AssertionError(op)
    sa, sb = sext(a, 64), sext(b, 64)
    if op == "mul":
        return (a * b) & MASK64
    if op == "mulh":
        return ((sa * sb) >> 64) & MASK64
    if op == "mulhsu":
        return ((sa * b) >> 64) & MASK64
    if op == "mulhu":
        return (a * b) >> 64
    if op == "div":
        if b == 0:
            return MASK64
        if sa == -(1 << 63) and sb == -1:
            return a
        return _quot(sa, sb) & MASK64
    if op == "divu":
        return MASK64 if b == 0 else a // b
    if op == "rem":
        if b == 0:
            return a
        if sa == -(1 << 63) and sb == -1:
            return 0
        return (sa - sb * _quot(sa, sb)) & MASK64
    if op == "remu":
        return a if b == 0 else a % b
    raise AssertionError(op)


def m_execute(ast: MAst, sa: StateAccess) -> Retired:
    assert not ast.illegal
    sa.write_gpr(ast.rd, m_alu(ast.op, sa.read_gpr(ast.rs1), sa.read_gpr(ast.rs2)))
    return Retired.RETIRE_SUCCESS


def m_disasm(ast: MAst) -> str:
    if ast.illegal:
        return word_directive(ast.raw)
    return f"{ast.op} x{ast.rd}, x{ast.rs1}, x{ast.rs2}"


class _Slot:
    __slots__ = ("ast",)

    def __init__(self):
        self.ast = None


def _decode_into(slot: _Slot, word: int) -> bool:
    slot.ast = m_decode(word)
    return not slot.ast.illegal


def entry_points() -> EntryPointTable:
    return EntryPointTable(
        decode=_decode_into,
        execute=lambda slot, sa: m_execute(slot.ast, sa),
        print_insn=lambda slot: m_disasm(slot.ast),
        ast_create=_Slot,
        ast_kill=lambda slot: None,
        init=lambda sa: None,
        fini=lambda: None,
        isa_letters=lambda: LETTERS,
    )


def descriptor(origin: Origin = Origin.STATIC) -> ModuleDescriptor:
    return ModuleDescriptor(NAME, ABI_VERSION, LETTERS, entry_points(), origin)
