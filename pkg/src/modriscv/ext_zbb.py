"""Zbb bit-manipulation subset as a pure-Python extension module (ISA letter B)."""

from __future__ import annotations

from dataclasses import dataclass

from .abi import ABI_VERSION, EntryPointTable, ModuleDescriptor, Origin, StateAccess
from .arch import Retired
from .base_isa import word_directive
from .bits import MASK64, funct3, funct7, opcode, rd, rs1, rs2, sext

NAME = "zbb"
LETTERS = "B"

_REG = {
    (0x20, 7): "andn", (0x20, 6): "orn", (0x20, 4): "xnor",
    (0x05, 4): "min", (0x05, 5): "minu", (0x05, 6): "max", (0x05, 7): "maxu",
    (0x30, 1): "rol", (0x30, 5): "ror",
}
_UNARY = {0x600: "clz", 0x601: "ctz", 0x602: "cpop", 0x604: "sext.b", 0x605: "sext.h"}
UNARY_OPS = ("clz", "ctz", "cpop", "sext.b", "sext.h", "zext.h", "rev8", "orc.b")
BINARY_OPS = tuple(_REG.values())
OPS = BINARY_OPS + UNARY_OPS + ("rori",)


@dataclass(frozen=True, slots=True)
class ZbbAst:
    op: str
    rd: int = 0
    rs1: int = 0
    rs2: int = 0
    shamt: int = 0
    raw: int = 0

    @property
    def illegal(self) -> bool:
        return self.op == "illegal"


def zbb_decode(word: int) -> ZbbAst:
    w = word & 0xFFFFFFFF
    op, f3 = opcode(w), funct3(w)
    if op == 0x33:
        name = _REG.get((funct7(w), f3))
        if name:
            return ZbbAst(name, rd(w), rs1(w), rs2(w), raw=w)
    elif op == 0x13:
        imm = w >> 20
        if f3 == 1 and imm in _UNARY:
            return ZbbAst(_UNARY[imm], rd(w), rs1(w), raw=w)
        if f3 == 5:
            if imm >> 6 == 0x18:
                return ZbbAst("rori", rd(w), rs1(w), shamt=imm & 0x3F, raw=w)
            if imm == 0x6B8:
                return ZbbAst("rev8", rd(w), rs1(w), raw=w)
            if imm == 0x287:
                return ZbbAst("orc.b", rd(w), rs1(w), raw=w)
    elif op == 0x3B and f3 == 4 and w >> 20 == 0x080:
        return ZbbAst("zext.h", rd(w), rs1(w), raw=w)
    return ZbbAst("illegal", raw=w)


def _rotl(x: int, k: int) -> int:
    k &= 63
    return ((x << k) | (x >> (64 - k))) & MASK64 if k else x


def zbb_alu(op: str, a: int, b: int = 0) -> int:
    """Result of ``op`` on unsigned 64-bit ``a`` (and ``b``, or the shift amount for rori)."""
    if op == "andn":
        return a & ~b & MASK64
    if op == "orn":
        return (a | ~b) & MASK64
    if op == "xnor":
        return ~(a ^ b) & MASK64
    if op == "min":
        return a if sext(a, 64) < sext(b, 64) else b
    if op == "max":
        return a if sext(a, 64) > sext(b, 64) else b
    if op == "minu":
        return min(a, b)
    if op == "maxu":
        return max(a, b)
    if op == "rol":
        return _rotl(a, b)
    if op in ("ror", "rori"):
        return _rotl(a, 64 - (b & 63))
    if op == "clz":
        return 64 - a.bit_length()
    if op == "ctz":
        return (a & -a).bit_length() - 1 if a else 64
    if op == "cpop":
        return bin(a).count("1")
    if op == "sext.b":
        return sext(a, 8) & MASK64
    if op == "sext.h":
        return sext(a, 16) & MASK64
    if op == "zext.h":
        return a & 0xFFFF
    if op == "rev8":
        return int.from_bytes(a.to_bytes(8, "little"), "big")
    if op == "orc.b":
        return int.from_bytes(bytes(0xFF if c else 0 for c in a.to_bytes(8, "little")), "little")
    raise AssertionError(op)


def zbb_execute(ast: ZbbAst, sa: StateAccess) -> Retired:
    assert not ast.illegal
    a = sa.read_gpr(ast.rs1)
    if ast.op == "rori":
        b = ast.shamt
    elif ast.op in BINARY_OPS:
        b = sa.read_gpr(ast.rs2)
    else:
        b = 0
    sa.write_gpr(ast.rd, zbb_alu(ast.op, a, b))
    return Retired.RETIRE_SUCCESS


def zbb_disasm(ast: ZbbAst) -> str:
    if ast.illegal:
        return word_directive(ast.raw)
    if ast.op == "rori":
        return f"rori x{ast.rd}, x{ast.rs1}, {ast.shamt}"
    if ast.op in BINARY_OPS:
        return f"{ast.op} x{ast.rd}, x{ast.rs1}, x{ast.rs2}"
    return f"{ast.op} x{ast.rd}, x{ast.rs1}"


class _Slot:
    __slots__ = ("ast",)

    def __init__(self):
        self.ast = None


def _decode_into(slot: _Slot, word: int) -> bool:
    slot.ast = zbb_decode(word)
    return not slot.ast.illegal


def entry_points() -> EntryPointTable:
    return EntryPointTable(
        decode=_decode_into,
        execute=lambda slot, sa: zbb_execute(slot.ast, sa),
        print_insn=lambda slot: zbb_disasm(slot.ast),
        ast_create=_Slot,
        ast_kill=lambda slot: None,
        init=lambda sa: None,
        fini=lambda: None,
        isa_letters=lambda: LETTERS,
    )


def descriptor(origin: Origin = Origin.STATIC) -> ModuleDescriptor:
    return ModuleDescriptor(NAME, ABI_VERSION, LETTERS, entry_points(), origin)
