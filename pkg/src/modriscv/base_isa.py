"""RV64I plus the Zicsr subset: decode, execute and disassemble.

This is the base emulator. Extension modules supply everything else and
cannot run without it.
"""

from __future__ import annotations

from dataclasses import dataclass

from .arch import AccessFault, ArchState, Retired, Trap, TrapCause
from .bits import (MASK64, funct3, funct7, imm_b, imm_i, imm_j, imm_s, imm_u, opcode, rd, rs1, rs2,
                   sext, sext32)


@dataclass(frozen=True, slots=True)
class BaseAst:
    """One decoded base instruction; ``op == "illegal"`` for undecodable words.

    ``imm`` holds the sign-extended immediate (shift amount for shifts, the
    5-bit zero-extended value for the CSR immediate forms).
    """

    op: str
    rd: int = 0
    rs1: int = 0
    rs2: int = 0
    imm: int = 0
    csr: int = 0
    raw: int = 0

    @property
    def illegal(self) -> bool:
        return self.op == "illegal"


def Illegal(word: int) -> BaseAst:
    return BaseAst("illegal", raw=word)


_BRANCH = {0: "beq", 1: "bne", 4: "blt", 5: "bge", 6: "bltu", 7: "bgeu"}
_LOAD = {0: "lb", 1: "lh", 2: "lw", 3: "ld", 4: "lbu", 5: "lhu", 6: "lwu"}
_STORE = {0: "sb", 1: "sh", 2: "sw", 3: "sd"}
_OPIMM = {0: "addi", 2: "slti", 3: "sltiu", 4: "xori", 6: "ori", 7: "andi"}
_OP = {
    (0x00, 0): "add", (0x20, 0): "sub", (0x00, 1): "sll", (0x00, 2): "slt", (0x00, 3): "sltu",
    (0x00, 4): "xor", (0x00, 5): "srl", (0x20, 5): "sra", (0x00, 6): "or", (0x00, 7): "and",
}
_OP32 = {(0x00, 0): "addw", (0x20, 0): "subw", (0x00, 1): "sllw", (0x00, 5): "srlw", (0x20, 5): "sraw"}
_CSR = {1: "csrrw", 2: "csrrs", 3: "csrrc", 5: "csrrwi", 6: "csrrsi", 7: "csrrci"}


def decode_base(word: int) -> BaseAst:
    """Decode a 32-bit word; anything that is not RV64I/Zicsr yields Illegal."""
    w = word & 0xFFFFFFFF
    op, f3 = opcode(w), funct3(w)
    if w & 3 != 3:
        return Illegal(w)
    if op == 0x37:
        return BaseAst("lui", rd=rd(w), imm=imm_u(w), raw=w)
    if op == 0x17:
        return BaseAst("auipc", rd=rd(w), imm=imm_u(w), raw=w)
    if op == 0x6F:
        return BaseAst("jal", rd=rd(w), imm=imm_j(w), raw=w)
    if op == 0x67:
        if f3 == 0:
            return BaseAst("jalr", rd=rd(w), rs1=rs1(w), imm=imm_i(w), raw=w)
    elif op == 0x63:
        if f3 in _BRANCH:
            return BaseAst(_BRANCH[f3], rs1=rs1(w), rs2=rs2(w), imm=imm_b(w), raw=w)
    elif op == 0x03:
        if f3 in _LOAD:
            return BaseAst(_LOAD[f3], rd=rd(w), rs1=rs1(w), imm=imm_i(w), raw=w)
    elif op == 0x23:
        if f3 in _STORE:
            return BaseAst(_STORE[f3], rs1=rs1(w), rs2=rs2(w), imm=imm_s(w), raw=w)
    elif op == 0x13:
        if f3 in _OPIMM:
            return BaseAst(_OPIMM[f3], rd=rd(w), rs1=rs1(w), imm=imm_i(w), raw=w)
        top6 = w >> 26
        shamt = (w >> 20) & 0x3F
        if f3 == 1 and top6 == 0:
            return BaseAst("slli", rd=rd(w), rs1=rs1(w), imm=shamt, raw=w)
        if f3 == 5 and top6 == 0:
            return BaseAst("srli", rd=rd(w), rs1=rs1(w), imm=shamt, raw=w)
        if f3 == 5 and top6 == 0x10:
            return BaseAst("srai", rd=rd(w), rs1=rs1(w), imm=shamt, raw=w)
    elif op == 0x1B:
        shamt = (w >> 20) & 0x1F
        f7 = funct7(w)
        if f3 == 0:
            return BaseAst("addiw", rd=rd(w), rs1=rs1(w), imm=imm_i(w), raw=w)
        if f3 == 1 and f7 == 0:
            return BaseAst("slliw", rd=rd(w), rs1=rs1(w), imm=shamt, raw=w)
        if f3 == 5 and f7 == 0:
            return BaseAst("srliw", rd=rd(w), rs1=rs1(w), imm=shamt, raw=w)
        if f3 == 5 and f7 == 0x20:
            return BaseAst("sraiw", rd=rd(w), rs1=rs1(w), imm=shamt, raw=w)
    elif op == 0x33:
        name = _OP.get((funct7(w), f3))
        if name:
            return BaseAst(name, rd=rd(w), rs1=rs1(w), rs2=rs2(w), raw=w)
    elif op == 0x3B:
        name = _OP32.get((funct7(w), f3))
        if name:
            return BaseAst(name, rd=rd(w), rs1=rs1(w), rs2=rs2(w), raw=w)
    elif op == 0x0F:
        if f3 == 0 and rd(w) == 0 and rs1(w) == 0:
            return BaseAst("fence", imm=w >> 20, raw=w)
        if w == 0x0000100F:
            return BaseAst("fence.i", raw=w)
    elif op == 0x73:
        if w == 0x00000073:
            return BaseAst("ecall", raw=w)
        if w == 0x00100073:
            return BaseAst("ebreak", raw=w)
        if f3 in _CSR:
            csr = w >> 20
            if f3 >= 5:
                return BaseAst(_CSR[f3], rd=rd(w), imm=rs1(w), csr=csr, raw=w)
            return BaseAst(_CSR[f3], rd=rd(w), rs1=rs1(w), csr=csr, raw=w)
    return Illegal(w)


# -- execute -----------------------------------------------------------------

def _lt_signed(a: int, b: int) -> bool:
    return sext(a, 64) < sext(b, 64)


def _alu(op: str, a: int, b: int) -> int:
    if op in ("add", "addi"):
        return (a + b) & MASK64
    if op == "sub":
        return (a - b) & MASK64
    if op in ("xor", "xori"):
        return (a ^ b) & MASK64
    if op in ("or", "ori"):
        return (a | b) & MASK64
    if op in ("and", "andi"):
        return a & b & MASK64
    if op in ("slt", "slti"):
        return int(_lt_signed(a, b & MASK64))
    if op in ("sltu", "sltiu"):
        return int(a < (b & MASK64))
    if op in ("sll", "slli"):
        return (a << (b & 63)) & MASK64
    if op in ("srl", "srli"):
        return a >> (b & 63)
    if op in ("sra", "srai"):
        return (sext(a, 64) >> (b & 63)) & MASK64
    if op in ("addw", "addiw"):
        return sext32(a + b)
    if op == "subw":
        return sext32(a - b)
    if op in ("sllw", "slliw"):
        return sext32((a & 0xFFFFFFFF) << (b & 31))
    if op in ("srlw", "srliw"):
        return sext32((a & 0xFFFFFFFF) >> (b & 31))
    if op in ("sraw", "sraiw"):
        return sext32(sext(a, 32) >> (b & 31))
    raise AssertionError(op)


_REG_REG = frozenset(_OP.values()) | frozenset(_OP32.values())
_REG_IMM = frozenset(_OPIMM.values()) | {"slli", "srli", "srai", "addiw", "slliw", "srliw", "sraiw"}
_BRANCH_TEST = {
    "beq": lambda a, b: a == b,
    "bne": lambda a, b: a != b,
    "blt": _lt_signed,
    "bge": lambda a, b: not _lt_signed(a, b),
    "bltu": lambda a, b: a < b,
    "bgeu": lambda a, b: a >= b,
}
_LOAD_SIZE = {"lb": (1, True), "lh": (2, True), "lw": (4, True), "ld": (8, False),
              "lbu": (1, False), "lhu": (2, False), "lwu": (4, False)}
_STORE_SIZE = {"sb": 1, "sh": 2, "sw": 4, "sd": 8}


def _csr_op(ast: BaseAst, s: ArchState) -> Retired:
    old = s.csr_read(ast.csr)
    if old is None:
        s.raise_trap(Trap(TrapCause.IllegalInstruction, ast.raw))
        return Retired.RETIRE_TRAP
    kind = ast.op[3:5]
    if ast.op.endswith("i"):
        src, writes = ast.imm, ast.op == "csrrwi" or ast.imm != 0
    else:
        src, writes = s.gpr_read(ast.rs1), ast.op == "csrrw" or ast.rs1 != 0
    if writes:
        if kind == "rw":
            new = src
        elif kind == "rs":
            new = old | src
        else:
            new = old & ~src & MASK64
        if not s.csr_write(ast.csr, new):
            s.raise_trap(Trap(TrapCause.IllegalInstruction, ast.raw))
            return Retired.RETIRE_TRAP
    s.gpr_write(ast.rd, old)
    s.pc = (s.pc + 4) & MASK64
    return Retired.RETIRE_SUCCESS


def execute_base(ast: BaseAst, s: ArchState) -> Retired:
    """Apply one base instruction to ``s``, including the pc update."""
    assert not ast.illegal, "illegal instructions are never executed"
    op, pc = ast.op, s.pc
    next_pc = (pc + 4) & MASK64
    if op in _REG_REG:
        s.gpr_write(ast.rd, _alu(op, s.gpr_read(ast.rs1), s.gpr_read(ast.rs2)))
    elif op in _REG_IMM:
        s.gpr_write(ast.rd, _alu(op, s.gpr_read(ast.rs1), ast.imm))
    elif op in _BRANCH_TEST:
        if _BRANCH_TEST[op](s.gpr_read(ast.rs1), s.gpr_read(ast.rs2)):
            next_pc = (pc + ast.imm) & MASK64
    elif op in _LOAD_SIZE:
        size, signed = _LOAD_SIZE[op]
        try:
            value = s.load((s.gpr_read(ast.rs1) + ast.imm) & MASK64, size)
        except AccessFault as fault:
            s.raise_trap(fault.trap)
            return Retired.RETIRE_TRAP
        s.gpr_write(ast.rd, sext(value, 8 * size) & MASK64 if signed else value)
    elif op in _STORE_SIZE:
        try:
            s.store((s.gpr_read(ast.rs1) + ast.imm) & MASK64, _STORE_SIZE[op], s.gpr_read(ast.rs2))
        except AccessFault as fault:
            s.raise_trap(fault.trap)
            return Retired.RETIRE_TRAP
    elif op == "lui":
        s.gpr_write(ast.rd, ast.imm & MASK64)
    elif op == "auipc":
        s.gpr_write(ast.rd, (pc + ast.imm) & MASK64)
    elif op == "jal":
        s.gpr_write(ast.rd, next_pc)
        next_pc = (pc + ast.imm) & MASK64
    elif op == "jalr":
        target = (s.gpr_read(ast.rs1) + ast.imm) & MASK64 & ~1
        s.gpr_write(ast.rd, next_pc)
        next_pc = target
    elif op in ("fence", "fence.i"):
        pass
    elif op == "ecall":
        s.raise_trap(Trap(TrapCause.EnvCallFromM, 0))
        return Retired.RETIRE_TRAP
    elif op == "ebreak":
        s.raise_trap(Trap(TrapCause.Breakpoint, pc))
        return Retired.RETIRE_TRAP
    elif op.startswith("csr"):
        return _csr_op(ast, s)
    else:
        raise AssertionError(f"unhandled base op {op}")
    s.pc = next_pc
    return Retired.RETIRE_SUCCESS


# -- disassembly --------------------------------------------------------------

def word_directive(raw: int) -> str:
    return f".word 0x{raw & 0xFFFFFFFF:08x}"


def disasm_base(ast: BaseAst) -> str:
    op = ast.op
    if op == "illegal":
        return word_directive(ast.raw)
    if op in _REG_REG:
        return f"{op} x{ast.rd}, x{ast.rs1}, x{ast.rs2}"
    if op in _REG_IMM:
        return f"{op} x{ast.rd}, x{ast.rs1}, {ast.imm}"
    if op in _BRANCH_TEST:
        return f"{op} x{ast.rs1}, x{ast.rs2}, {ast.imm}"
    if op in _LOAD_SIZE or op == "jalr":
        return f"{op} x{ast.rd}, {ast.imm}(x{ast.rs1})"
    if op in _STORE_SIZE:
        return f"{op} x{ast.rs2}, {ast.imm}(x{ast.rs1})"
    if op in ("lui", "auipc"):
        return f"{op} x{ast.rd}, {ast.imm >> 12}"
    if op == "jal":
        return f"jal x{ast.rd}, {ast.imm}"
    if op in ("csrrw", "csrrs", "csrrc"):
        return f"{op} x{ast.rd}, 0x{ast.csr:03x}, x{ast.rs1}"
    if op in ("csrrwi", "csrrsi", "csrrci"):
        return f"{op} x{ast.rd}, 0x{ast.csr:03x}, {ast.imm}"
    return op
