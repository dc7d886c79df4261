"""A small two-pass RV64IM+Zbb assembler for generated test programs.

Supports labels, ``#`` comments, the base/M/Zbb/Zicsr instructions, a handful
of pseudo-instructions (``li``, ``la``, ``mv``, ``j``, ``call``, ``ret``, ...)
and the directives ``.word``, ``.dword``, ``.zero`` and ``.align``.
"""

from __future__ import annotations

import re

from .arch import CSR_NAMES, MASK64
from .bits import sext

REG_ALIASES = {
    "zero": 0, "ra": 1, "sp": 2, "gp": 3, "tp": 4, "t0": 5, "t1": 6, "t2": 7, "s0": 8, "fp": 8, "s1": 9,
    **{f"a{i}": 10 + i for i in range(8)},
    **{f"s{i}": 16 + i for i in range(2, 12)},
    **{f"t{i}": 25 + i for i in range(3, 7)},
}
# the assembler also knows a few standard CSRs the hart does not implement
CSR_BY_NAME = {"mstatus": 0x300, "mie": 0x304, "mscratch": 0x340, "mip": 0x344,
               **{name: idx for idx, name in CSR_NAMES.items()}}


class AsmError(ValueError):
    pass


def reg(tok: str) -> int:
    tok = tok.strip()
    if tok in REG_ALIASES:
        return REG_ALIASES[tok]
    m = re.fullmatch(r"x(\d+)", tok)
    if m and int(m.group(1)) < 32:
        return int(m.group(1))
    raise AsmError(f"bad register {tok!r}")


def _fits(value: int, bits: int) -> bool:
    return -(1 << (bits - 1)) <= value < (1 << (bits - 1))


# -- encoders -------------------------------------------------------------------

def enc_r(opcode, f3, f7, rd, rs1, rs2):
    return f7 << 25 | rs2 << 20 | rs1 << 15 | f3 << 12 | rd << 7 | opcode


def enc_i(opcode, f3, rd, rs1, imm):
    if not _fits(imm, 12):
        raise AsmError(f"immediate {imm} out of 12-bit range")
    return (imm & 0xFFF) << 20 | rs1 << 15 | f3 << 12 | rd << 7 | opcode


def enc_s(opcode, f3, rs1, rs2, imm):
    if not _fits(imm, 12):
        raise AsmError(f"store offset {imm} out of range")
    imm &= 0xFFF
    return (imm >> 5) << 25 | rs2 << 20 | rs1 << 15 | f3 << 12 | (imm & 31) << 7 | opcode


def enc_b(f3, rs1, rs2, off):
    if off & 1 or not _fits(off, 13):
        raise AsmError(f"branch offset {off} out of range")
    o = off & 0x1FFF
    return ((o >> 12) << 31 | ((o >> 5) & 0x3F) << 25 | rs2 << 20 | rs1 << 15 | f3 << 12
            | ((o >> 1) & 0xF) << 8 | ((o >> 11) & 1) << 7 | 0x63)


def enc_u(opcode, rd, imm20):
    if not 0 <= imm20 < (1 << 20):
        raise AsmError(f"upper immediate {imm20} out of range")
    return imm20 << 12 | rd << 7 | opcode


def enc_j(rd, off):
    if off & 1 or not _fits(off, 21):
        raise AsmError(f"jump offset {off} out of range")
    o = off & 0x1FFFFF
    return ((o >> 20) << 31 | ((o >> 1) & 0x3FF) << 21 | ((o >> 11) & 1) << 20 | ((o >> 12) & 0xFF) << 12
            | rd << 7 | 0x6F)


R_OPS = {
    "add": (0x33, 0, 0x00), "sub": (0x33, 0, 0x20), "sll": (0x33, 1, 0x00), "slt": (0x33, 2, 0x00),
    "sltu": (0x33, 3, 0x00), "xor": (0x33, 4, 0x00), "srl": (0x33, 5, 0x00), "sra": (0x33, 5, 0x20),
    "or": (0x33, 6, 0x00), "and": (0x33, 7, 0x00),
    "addw": (0x3B, 0, 0x00), "subw": (0x3B, 0, 0x20), "sllw": (0x3B, 1, 0x00), "srlw": (0x3B, 5, 0x00),
    "sraw": (0x3B, 5, 0x20),
    "mul": (0x33, 0, 1), "mulh": (0x33, 1, 1), "mulhsu": (0x33, 2, 1), "mulhu": (0x33, 3, 1),
    "div": (0x33, 4, 1), "divu": (0x33, 5, 1), "rem": (0x33, 6, 1), "remu": (0x33, 7, 1),
    "mulw": (0x3B, 0, 1), "divw": (0x3B, 4, 1), "divuw": (0x3B, 5, 1), "remw": (0x3B, 6, 1),
    "remuw": (0x3B, 7, 1),
    "andn": (0x33, 7, 0x20), "orn": (0x33, 6, 0x20), "xnor": (0x33, 4, 0x20),
    "min": (0x33, 4, 0x05), "minu": (0x33, 5, 0x05), "max": (0x33, 6, 0x05), "maxu": (0x33, 7, 0x05),
    "rol": (0x33, 1, 0x30), "ror": (0x33, 5, 0x30),
}
# unary Zbb: full word minus rd/rs1
UNARY_OPS = {
    "clz": 0x60001013, "ctz": 0x60101013, "cpop": 0x60201013, "sext.b": 0x60401013,
    "sext.h": 0x60501013, "rev8": 0x6B805013, "orc.b": 0x28705013, "zext.h": 0x0800403B,
}
I_OPS = {"addi": 0, "slti": 2, "sltiu": 3, "xori": 4, "ori": 6, "andi": 7}
SHIFT_OPS = {"slli": (0x13, 1, 0x00, 6), "srli": (0x13, 5, 0x00, 6), "srai": (0x13, 5, 0x10, 6),
             "slliw": (0x1B, 1, 0x00, 5), "srliw": (0x1B, 5, 0x00, 5), "sraiw": (0x1B, 5, 0x20, 5),
             "rori": (0x13, 5, 0x18, 6)}
LOAD_OPS = {"lb": 0, "lh": 1, "lw": 2, "ld": 3, "lbu": 4, "lhu": 5, "lwu": 6}
STORE_OPS = {"sb": 0, "sh": 1, "sw": 2, "sd": 3}
BRANCH_OPS = {"beq": 0, "bne": 1, "blt": 4, "bge": 5, "bltu": 6, "bgeu": 7}
CSR_OPS = {"csrrw": 1, "csrrs": 2, "csrrc": 3, "csrrwi": 5, "csrrsi": 6, "csrrci": 7}
FIXED = {"ecall": 0x00000073, "ebreak": 0x00100073, "fence": 0x0FF0000F, "fence.i": 0x0000100F,
         "nop": 0x00000013}


def _li_impl(rd: int, v: int) -> list[tuple]:
    # v is signed 64-bit
    if _fits(v, 32):
        hi20 = ((v + 0x800) >> 12) & 0xFFFFF
        lo = sext(v & 0xFFF, 12)
        seq = [("lui", rd, hi20)] if hi20 else []
        if lo or not hi20:
            seq.append(("addiw" if hi20 else "addi", rd, rd if hi20 else 0, lo))
        return seq
    lo = sext(v & 0xFFF, 12)
    hi = ((v + 0x800) & MASK64) >> 12
    shift = 12 + ((hi & -hi).bit_length() - 1)
    hi = sext(hi >> (shift - 12), 64 - shift)
    # a smaller shift can leave a value LUI builds on its own
    if shift > 12 and not _fits(hi, 12) and _fits(sext((hi << 12) & MASK64, 64), 32):
        shift -= 12
        hi = sext((hi << 12) & MASK64, 64)
    seq = _li_impl(rd, hi) + [("slli", rd, rd, shift)]
    if lo:
        seq.append(("addi", rd, rd, lo))
    return seq


def li_sequence(rd: int, value: int) -> list[tuple]:
    """Instruction tuples loading the 64-bit ``value`` into ``rd``, in LLVM's order of preference."""
    v = sext(value & MASK64, 64)
    seq = _li_impl(rd, v)
    if v > 0 and len(seq) > 2:
        lz = 64 - v.bit_length()
        shifted = ((v << lz) & MASK64) | ((1 << lz) - 1)
        for candidate in (shifted, shifted & ~((1 << lz) - 1)):
            alt = _li_impl(rd, sext(candidate, 64)) + [("srli", rd, rd, lz)]
            if len(alt) < len(seq):
                seq = alt
                if len(seq) <= 2:
                    break
    return seq


def _parse_int(tok: str) -> int:
    try:
        return int(tok.strip(), 0)
    except ValueError:
        raise AsmError(f"bad integer {tok!r}") from None


_MEM = re.compile(r"^\s*(-?(?:0x[0-9a-fA-F]+|\d+))?\s*\(\s*(\w+)\s*\)\s*$")


def _mem(tok: str) -> tuple[int, int]:
    m = _MEM.match(tok)
    if not m:
        raise AsmError(f"bad memory operand {tok!r}")
    return (int(m.group(1), 0) if m.group(1) else 0), reg(m.group(2))


class Assembler:
    def __init__(self, base: int):
        self.base = base

    def assemble(self, source: str) -> tuple[bytes, dict[str, int]]:
        """Returns (image bytes, label addresses)."""
        stmts = self._parse(source)
        labels: dict[str, int] = {}
        pc = self.base
        for kind, payload, _ in stmts:
            if kind == "label":
                if payload in labels:
                    raise AsmError(f"duplicate label {payload!r}")
                labels[payload] = pc
            else:
                pc += self._size(payload, pc)
        out = bytearray()
        pc = self.base
        for kind, payload, lineno in stmts:
            if kind == "label":
                continue
            try:
                chunk = self._emit(payload, pc, labels)
            except AsmError as exc:
                raise AsmError(f"line {lineno}: {exc}") from None
            out += chunk
            pc += len(chunk)
        return bytes(out), labels

    @staticmethod
    def _parse(source: str):
        stmts = []
        for lineno, line in enumerate(source.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            while True:
                m = re.match(r"^([A-Za-z_.][\w.]*):\s*", line)
                if not m:
                    break
                stmts.append(("label", m.group(1), lineno))
                line = line[m.end():]
            if not line:
                continue
            parts = line.split(None, 1)
            ops = [o.strip() for o in parts[1].split(",")] if len(parts) > 1 else []
            stmts.append(("insn", (parts[0].lower(), ops), lineno))
        return stmts

    def _size(self, insn, pc) -> int:
        name, ops = insn
        if name == ".align":
            align = 1 << _parse_int(ops[0])
            return -pc % align
        if name == ".zero":
            return _parse_int(ops[0])
        if name == ".word":
            return 4 * len(ops)
        if name == ".dword":
            return 8 * len(ops)
        if name == "li":
            return 4 * len(li_sequence(reg(ops[0]), _parse_int(ops[1])))
        if name == "la":
            return 8
        return 4

    def _target(self, tok: str, pc: int, labels) -> int:
        tok = tok.strip()
        if tok in labels:
            return labels[tok] - pc
        if re.fullmatch(r"-?(0x[0-9a-fA-F]+|\d+)", tok):
            return int(tok, 0)
        raise AsmError(f"unknown label {tok!r}")

    def _emit(self, insn, pc, labels) -> bytes:
        name, ops = insn
        if name == ".align":
            return bytes(self._size(insn, pc))
        if name == ".zero":
            return bytes(_parse_int(ops[0]))
        if name == ".word":
            return b"".join((_value(o, labels) & 0xFFFFFFFF).to_bytes(4, "little") for o in ops)
        if name == ".dword":
            return b"".join((_value(o, labels) & ((1 << 64) - 1)).to_bytes(8, "little") for o in ops)
        words = [encode(t) for t in self._expand(name, ops, pc, labels)]
        return b"".join(w.to_bytes(4, "little") for w in words)

    def _expand(self, name, ops, pc, labels) -> list[tuple]:
        n = len(ops)
        if name == "li":
            return li_sequence(reg(ops[0]), _parse_int(ops[1]))
        if name == "la":
            off = self._target(ops[1], pc, labels)
            lo = sext(off & 0xFFF, 12)
            rd = reg(ops[0])
            return [("auipc", rd, ((off - lo) >> 12) & 0xFFFFF), ("addi", rd, rd, lo)]
        if name == "mv":
            return [("addi", reg(ops[0]), reg(ops[1]), 0)]
        if name == "not":
            return [("xori", reg(ops[0]), reg(ops[1]), -1)]
        if name == "neg":
            return [("sub", reg(ops[0]), 0, reg(ops[1]))]
        if name == "j":
            return [("jal", 0, self._target(ops[0], pc, labels))]
        if name == "jal" and n == 1:
            return [("jal", 1, self._target(ops[0], pc, labels))]
        if name == "call":
            return [("jal", 1, self._target(ops[0], pc, labels))]
        if name == "jr":
            return [("jalr", 0, reg(ops[0]), 0)]
        if name == "ret":
            return [("jalr", 0, 1, 0)]
        if name in ("beqz", "bnez", "bltz", "bgez"):
            real = {"beqz": "beq", "bnez": "bne", "bltz": "blt", "bgez": "bge"}[name]
            return [(real, reg(ops[0]), 0, self._target(ops[1], pc, labels))]
        if name in ("bgt", "ble", "bgtu", "bleu"):
            real = {"bgt": "blt", "ble": "bge", "bgtu": "bltu", "bleu": "bgeu"}[name]
            return [(real, reg(ops[1]), reg(ops[0]), self._target(ops[2], pc, labels))]
        if name == "csrr":
            return [("csrrs", reg(ops[0]), _csr(ops[1]), 0)]
        if name == "csrw":
            return [("csrrw", 0, _csr(ops[0]), reg(ops[1]))]
        if name == "csrwi":
            return [("csrrwi", 0, _csr(ops[0]), _parse_int(ops[1]))]
        if name == "sext.w":
            return [("addiw", reg(ops[0]), reg(ops[1]), 0)]
        if name in FIXED:
            return [(name,)]
        if name in R_OPS:
            _arity(name, ops, 3)
            return [(name, reg(ops[0]), reg(ops[1]), reg(ops[2]))]
        if name in UNARY_OPS:
            _arity(name, ops, 2)
            return [(name, reg(ops[0]), reg(ops[1]))]
        if name in I_OPS or name in SHIFT_OPS or name == "addiw":
            _arity(name, ops, 3)
            return [(name, reg(ops[0]), reg(ops[1]), _parse_int(ops[2]))]
        if name in LOAD_OPS or name == "jalr":
            if name == "jalr" and n == 3:
                return [("jalr", reg(ops[0]), reg(ops[1]), _parse_int(ops[2]))]
            _arity(name, ops, 2)
            off, base = _mem(ops[1])
            return [(name, reg(ops[0]), base, off)]
        if name in STORE_OPS:
            _arity(name, ops, 2)
            off, base = _mem(ops[1])
            return [(name, reg(ops[0]), base, off)]
        if name in BRANCH_OPS:
            _arity(name, ops, 3)
            return [(name, reg(ops[0]), reg(ops[1]), self._target(ops[2], pc, labels))]
        if name == "jal":
            _arity(name, ops, 2)
            return [("jal", reg(ops[0]), self._target(ops[1], pc, labels))]
        if name in ("lui", "auipc"):
            _arity(name, ops, 2)
            return [(name, reg(ops[0]), _parse_int(ops[1]))]
        if name in CSR_OPS:
            _arity(name, ops, 3)
            src = _parse_int(ops[2]) if name.endswith("i") else reg(ops[2])
            return [(name, reg(ops[0]), _csr(ops[1]), src)]
        raise AsmError(f"unknown instruction {name!r}")


def _arity(name, ops, n):
    if len(ops) != n:
        raise AsmError(f"{name} takes {n} operands, got {len(ops)}")


def _csr(tok: str) -> int:
    tok = tok.strip()
    if tok in CSR_BY_NAME:
        return CSR_BY_NAME[tok]
    return _parse_int(tok)


def _value(tok: str, labels) -> int:
    tok = tok.strip()
    return labels[tok] if tok in labels else _parse_int(tok)


def encode(t: tuple) -> int:
    """Encode one instruction tuple ``(name, operands...)``."""
    name, *a = t
    if name in FIXED:
        return FIXED[name]
    if name in R_OPS:
        op, f3, f7 = R_OPS[name]
        return enc_r(op, f3, f7, a[0], a[1], a[2])
    if name in UNARY_OPS:
        return UNARY_OPS[name] | a[1] << 15 | a[0] << 7
    if name in I_OPS:
        return enc_i(0x13, I_OPS[name], a[0], a[1], a[2])
    if name == "addiw":
        return enc_i(0x1B, 0, a[0], a[1], a[2])
    if name in SHIFT_OPS:
        op, f3, top, width = SHIFT_OPS[name]
        if not 0 <= a[2] < (1 << width):
            raise AsmError(f"shift amount {a[2]} out of range for {name}")
        hi = top << 26 if width == 6 else top << 25
        return hi | a[2] << 20 | a[1] << 15 | f3 << 12 | a[0] << 7 | op
    if name in LOAD_OPS:
        return enc_i(0x03, LOAD_OPS[name], a[0], a[1], a[2])
    if name == "jalr":
        return enc_i(0x67, 0, a[0], a[1], a[2])
    if name in STORE_OPS:
        return enc_s(0x23, STORE_OPS[name], a[1], a[0], a[2])
    if name in BRANCH_OPS:
        return enc_b(BRANCH_OPS[name], a[0], a[1], a[2])
    if name == "jal":
        return enc_j(a[0], a[1])
    if name == "lui":
        return enc_u(0x37, a[0], a[1])
    if name == "auipc":
        return enc_u(0x17, a[0], a[1])
    if name in CSR_OPS:
        if not 0 <= a[1] < 4096:
            raise AsmError(f"bad CSR index {a[1]}")
        if name.endswith("i") and not 0 <= a[2] < 32:
            raise AsmError(f"CSR immediate {a[2]} out of range")
        return a[1] << 20 | a[2] << 15 | CSR_OPS[name] << 12 | a[0] << 7 | 0x73
    raise AsmError(f"cannot encode {name!r}")


def assemble(source: str, base: int) -> tuple[bytes, dict[str, int]]:
    return Assembler(base).assemble(source)
