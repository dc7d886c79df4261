"""Self-checking test programs and benchmark workloads.

Every test program ends by storing to ``tohost``: 1 on success, or
``(id << 1) | 1`` where ``id`` numbers the first failing check. Expected
values are computed here with plain Python arithmetic, independently of the
emulator's own ALU code. Base programs contain no M or Zbb encodings and do
not read misa, so they behave identically with or without modules loaded.

``python -m modriscv.programs OUTDIR`` writes every ELF to ``OUTDIR``.
"""

from __future__ import annotations

import math
import random
import sys
from dataclasses import dataclass
from pathlib import Path

from .arch import DEFAULT_MEM_BASE
from .asm import assemble
from .elf import build_elf

M64 = (1 << 64) - 1
M32 = (1 << 32) - 1


def s64(x: int) -> int:
    x &= M64
    return x - (1 << 64) if x >> 63 else x


def s32(x: int) -> int:
    x &= M32
    return x - (1 << 32) if x >> 31 else x


def sx32(x: int) -> int:
    return s32(x) & M64


def tdiv(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


# -- reference semantics (plain Python, used only to compute expected values) --

def _div(a, b, signed, bits):
    mask = (1 << bits) - 1
    if signed:
        sa = a - (1 << bits) if a >> (bits - 1) else a
        sb = b - (1 << bits) if b >> (bits - 1) else b
        if sb == 0:
            return mask, a
        if sa == -(1 << (bits - 1)) and sb == -1:
            return a, 0
        q = tdiv(sa, sb)
        return q & mask, (sa - q * sb) & mask
    if b == 0:
        return mask, a
    return a // b, a % b


def ref_m(op: str, a: int, b: int) -> int:
    if op == "mul":
        return (a * b) & M64
    if op == "mulh":
        return ((s64(a) * s64(b)) >> 64) & M64
    if op == "mulhsu":
        return ((s64(a) * b) >> 64) & M64
    if op == "mulhu":
        return (a * b) >> 64
    if op in ("div", "divu", "rem", "remu"):
        q, r = _div(a, b, op in ("div", "rem"), 64)
        return q if op.startswith("div") else r
    a32, b32 = a & M32, b & M32
    if op == "mulw":
        return sx32(a32 * b32)
    q, r = _div(a32, b32, op in ("divw", "remw"), 32)
    return sx32(q if op.startswith("div") else r)


def ref_zbb(op: str, a: int, b: int = 0) -> int:
    if op == "andn":
        return a & ~b & M64
    if op == "orn":
        return (a | ~b) & M64
    if op == "xnor":
        return ~(a ^ b) & M64
    if op == "min":
        return a if s64(a) < s64(b) else b
    if op == "max":
        return a if s64(a) > s64(b) else b
    if op == "minu":
        return min(a, b)
    if op == "maxu":
        return max(a, b)
    if op in ("rol", "ror", "rori"):
        k = b & 63
        if op == "rol":
            k = -k % 64
        return ((a >> k) | (a << (64 - k))) & M64
    if op == "clz":
        return 64 - a.bit_length()
    if op == "ctz":
        return 64 if a == 0 else (a & -a).bit_length() - 1
    if op == "cpop":
        return bin(a).count("1")
    if op == "sext.b":
        return (a & 0xFF) - (0x100 if a & 0x80 else 0) & M64
    if op == "sext.h":
        return (a & 0xFFFF) - (0x10000 if a & 0x8000 else 0) & M64
    if op == "zext.h":
        return a & 0xFFFF
    if op == "rev8":
        return int.from_bytes(a.to_bytes(8, "little"), "big")
    if op == "orc.b":
        return int.from_bytes(bytes(0xFF if c else 0 for c in a.to_bytes(8, "little")), "little")
    raise KeyError(op)


def ref_base(op: str, a: int, b: int) -> int:
    """Register/immediate ALU ops; ``b`` is the (sign-extended) second operand."""
    b &= M64
    table = {
        "add": lambda: (a + b) & M64, "sub": lambda: (a - b) & M64,
        "sll": lambda: (a << (b & 63)) & M64, "srl": lambda: a >> (b & 63),
        "sra": lambda: (s64(a) >> (b & 63)) & M64,
        "slt": lambda: int(s64(a) < s64(b)), "sltu": lambda: int(a < b),
        "xor": lambda: a ^ b, "or": lambda: a | b, "and": lambda: a & b,
        "addw": lambda: sx32(a + b), "subw": lambda: sx32(a - b),
        "sllw": lambda: sx32(a << (b & 31)), "srlw": lambda: sx32((a & M32) >> (b & 31)),
        "sraw": lambda: (s32(a) >> (b & 31)) & M64,
    }
    return table[op]()


IMM_FORMS = {"addi": "add", "slti": "slt", "sltiu": "sltu", "xori": "xor", "ori": "or", "andi": "and",
             "slli": "sll", "srli": "srl", "srai": "sra", "slliw": "sllw", "srliw": "srlw", "sraiw": "sraw"}

INTERESTING = [0, 1, 2, 3, 7, 0x7F, 0x80, 0xFF, 0x7FFF, 0x8000, 0xFFFF, 0x7FFFFFFF, 0x80000000, 0xFFFFFFFF,
               0x100000000, 0x7FFFFFFFFFFFFFFF, 0x8000000000000000, M64, M64 - 1, 0x5555555555555555,
               0xAAAAAAAAAAAAAAAA, 0x0123456789ABCDEF, 0xFEDCBA9876543210]


def operand(rng: random.Random) -> int:
    pick = rng.random()
    if pick < 0.3:
        return rng.choice(INTERESTING)
    if pick < 0.45:
        return rng.getrandbits(rng.choice((8, 16, 32)))
    if pick < 0.55:
        return (-rng.getrandbits(16)) & M64
    return rng.getrandbits(64)


# -- program builder ------------------------------------------------------------

PROLOGUE = """
_start:
"""

EPILOGUE = """
pass:
    li t0, 1
    la t1, tohost
    sd t0, 0(t1)
pass_spin:
    j pass_spin
fail:
    slli a0, a0, 1
    ori a0, a0, 1
    la t1, tohost
    sd a0, 0(t1)
fail_spin:
    j fail_spin
    .align 3
tohost:
    .dword 0
"""


@dataclass(frozen=True)
class Program:
    name: str
    category: str  # "base", "m", "zbb" or "bench"
    source: str

    def image(self, base: int = DEFAULT_MEM_BASE) -> bytes:
        payload, labels = assemble(self.source, base)
        return build_elf(base, payload, entry=labels["_start"], symbols={"tohost": labels["tohost"]},
                         bss=0x1000)

    def write(self, directory) -> Path:
        path = Path(directory) / f"{self.name}.elf"
        path.write_bytes(self.image())
        return path


class _Builder:
    def __init__(self, name: str, category: str):
        self.name = name
        self.category = category
        self.lines: list[str] = []
        self.data: list[str] = []
        self.checks = 0

    def __call__(self, *lines: str) -> "_Builder":
        self.lines.extend(lines)
        return self

    def check(self, reg: str, expected: int) -> None:
        """Fail unless ``reg`` holds ``expected``; uses a0 and t6."""
        self.checks += 1
        ok = f"ok_{self.checks}"
        self(f"li a0, {self.checks}", f"li t6, {expected & M64}", f"beq {reg}, t6, {ok}", "j fail", f"{ok}:")

    def binop(self, op: str, a: int, b: int, expected: int) -> None:
        self(f"li s1, {a}", f"li s2, {b}", f"{op} s3, s1, s2")
        self.check("s3", expected)

    def program(self) -> Program:
        body = "\n".join("    " + ln if not ln.endswith(":") else ln for ln in self.lines)
        data = "\n".join(self.data)
        return Program(self.name, self.category, PROLOGUE + body + EPILOGUE + data + "\n")


# -- base programs ----------------------------------------------------------------

def base_alu() -> Program:
    p, rng = _Builder("base_alu", "base"), random.Random(11)
    ops = ["add", "sub", "slt", "sltu", "xor", "or", "and"]
    for _ in range(80):
        op, a, b = rng.choice(ops), operand(rng), operand(rng)
        p.binop(op, a, b, ref_base(op, a, b))
    for op in ("addi", "slti", "sltiu", "xori", "ori", "andi"):
        for _ in range(8):
            a, imm = operand(rng), rng.randint(-2048, 2047)
            p(f"li s1, {a}", f"{op} s3, s1, {imm}")
            p.check("s3", ref_base(IMM_FORMS[op], a, imm))
    p("add x0, x1, x2", "addi x0, x0, 77")
    p.check("x0", 0)
    return p.program()


def base_shift() -> Program:
    p, rng = _Builder("base_shift", "base"), random.Random(12)
    for op in ("sll", "srl", "sra", "sllw", "srlw", "sraw"):
        for _ in range(10):
            a, b = operand(rng), rng.choice([0, 1, 31, 32, 63, 64, 65, rng.getrandbits(64)])
            p.binop(op, a, b, ref_base(op, a, b))
    for op, width in (("slli", 64), ("srli", 64), ("srai", 64), ("slliw", 32), ("srliw", 32), ("sraiw", 32)):
        for sh in (0, 1, width // 2, width - 1, rng.randrange(width)):
            a = operand(rng)
            p(f"li s1, {a}", f"{op} s3, s1, {sh}")
            p.check("s3", ref_base(IMM_FORMS[op], a, sh))
    return p.program()


def base_word() -> Program:
    p, rng = _Builder("base_word", "base"), random.Random(13)
    for op in ("addw", "subw"):
        for _ in range(12):
            a, b = operand(rng), operand(rng)
            p.binop(op, a, b, ref_base(op, a, b))
    for _ in range(12):
        a, imm = operand(rng), rng.randint(-2048, 2047)
        p(f"li s1, {a}", f"addiw s3, s1, {imm}")
        p.check("s3", sx32(a + imm))
    for imm20 in (0, 1, 0x7FFFF, 0x80000, 0xFFFFF, 0x12345):
        p(f"lui s3, {imm20}")
        p.check("s3", sx32(imm20 << 12))
    p("here:", "auipc s3, 0", "la s4, here", "sub s3, s3, s4")
    p.check("s3", 0)
    p("there:", "auipc s3, 1", "la s4, there", "sub s3, s3, s4")
    p.check("s3", 0x1000)
    return p.program()


def base_branch() -> Program:
    p, rng = _Builder("base_branch", "base"), random.Random(14)
    vals = [operand(rng) for _ in range(24)] + [0, 1, M64, 0x8000000000000000]
    p.data += ["    .align 3", "branch_vals:"] + [f"    .dword {v}" for v in vals]
    conds = {
        "beq": lambda a, b: a == b, "bne": lambda a, b: a != b,
        "blt": lambda a, b: s64(a) < s64(b), "bge": lambda a, b: s64(a) >= s64(b),
        "bltu": lambda a, b: a < b, "bgeu": lambda a, b: a >= b,
    }
    # for each branch kind count taken branches over all ordered pairs
    for op, fn in conds.items():
        expected = sum(fn(a, b) for a in vals for b in vals)
        lbl = f"{op}_"
        p("la s1, branch_vals", "li s5, 0", "li s6, 0",
          f"{lbl}outer:", "la s2, branch_vals", "li s7, 0", "ld s3, 0(s1)",
          f"{lbl}inner:", "ld s4, 0(s2)", f"{op} s3, s4, {lbl}taken", f"j {lbl}next",
          f"{lbl}taken:", "addi s5, s5, 1",
          f"{lbl}next:", "addi s2, s2, 8", "addi s7, s7, 1", f"li t0, {len(vals)}", f"blt s7, t0, {lbl}inner",
          "addi s1, s1, 8", "addi s6, s6, 1", f"blt s6, t0, {lbl}outer")
        p.check("s5", expected)
    # jal/jalr link values
    p("jal s8, jl_target", "jl_back:", "j jl_done", "jl_target:", "la t0, jl_back", "sub s7, s8, t0",
      "jalr s9, 0(s8)", "jl_done:")
    p.check("s7", 0)
    return p.program()


def base_memory() -> Program:
    p, rng = _Builder("base_memory", "base"), random.Random(15)
    p.data += ["    .align 3", "buf:", "    .zero 256"]
    values = [operand(rng) for _ in range(16)]
    mem = bytearray(256)
    for i, v in enumerate(values):
        off = 8 * i
        p(f"li s1, {v}", "la s2, buf", f"sd s1, {off}(s2)")
        mem[off:off + 8] = v.to_bytes(8, "little")
    loads = {"lb": (1, True), "lh": (2, True), "lw": (4, True), "ld": (8, False),
             "lbu": (1, False), "lhu": (2, False), "lwu": (4, False)}
    for _ in range(60):
        op = rng.choice(list(loads))
        size, signed = loads[op]
        off = rng.randrange(0, 128 - size)  # misaligned offsets included
        raw = int.from_bytes(mem[off:off + size], "little")
        if signed and raw >> (8 * size - 1):
            raw -= 1 << (8 * size)
        p("la s2, buf", f"{op} s3, {off}(s2)")
        p.check("s3", raw)
    for _ in range(30):
        op, size = rng.choice([("sb", 1), ("sh", 2), ("sw", 4), ("sd", 8)])
        off, v = rng.randrange(128, 256 - size), operand(rng)
        p(f"li s1, {v}", "la s2, buf", f"{op} s1, {off}(s2)")
        mem[off:off + size] = (v & ((1 << (8 * size)) - 1)).to_bytes(size, "little")
    for off in range(128, 256, 8):
        p("la s2, buf", f"ld s3, {off}(s2)")
        p.check("s3", int.from_bytes(mem[off:off + 8], "little"))
    # negative offsets
    p("la s2, buf", "addi s2, s2, 64", "ld s3, -64(s2)")
    p.check("s3", values[0])
    return p.program()


def base_fib() -> Program:
    p = _Builder("base_fib", "base")
    n = 16
    p("la sp, stack_top", f"li a1, {n}", "call fib")
    p.check("a2", _fib(n))
    p("j fib_end",
      "fib:",  # a1 -> a2, clobbers t0
      "li t0, 2", "bltu a1, t0, fib_base",
      "addi sp, sp, -24", "sd ra, 0(sp)", "sd a1, 8(sp)",
      "addi a1, a1, -1", "call fib", "sd a2, 16(sp)",
      "ld a1, 8(sp)", "addi a1, a1, -2", "call fib",
      "ld t0, 16(sp)", "add a2, a2, t0", "ld ra, 0(sp)", "addi sp, sp, 24", "ret",
      "fib_base:", "mv a2, a1", "ret",
      "fib_end:")
    p.data += ["    .align 4", "stack:", "    .zero 4096", "stack_top:"]
    return p.program()


def _fib(n: int) -> int:
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def base_sort() -> Program:
    p, rng = _Builder("base_sort", "base"), random.Random(16)
    vals = [operand(rng) for _ in range(40)]
    p.data += ["    .align 3", "sort_arr:"] + [f"    .dword {v}" for v in vals]
    n = len(vals)
    # insertion sort, signed comparison
    p("la s1, sort_arr", "li s2, 1", f"li s9, {n}",
      "sort_outer:", "bge s2, s9, sort_done",
      "slli t0, s2, 3", "add t0, s1, t0", "ld s3, 0(t0)", "addi s4, s2, -1",
      "sort_inner:", "blt s4, zero, sort_place",
      "slli t1, s4, 3", "add t1, s1, t1", "ld s5, 0(t1)", "bge s3, s5, sort_place",
      "sd s5, 8(t1)", "addi s4, s4, -1", "j sort_inner",
      "sort_place:", "slli t1, s4, 3", "add t1, s1, t1", "sd s3, 8(t1)",
      "addi s2, s2, 1", "j sort_outer",
      "sort_done:")
    ordered = sorted(vals, key=s64)
    k = 0x9E3779B97F4A7C15
    checksum = sum(v ^ (i * k & M64) for i, v in enumerate(ordered)) & M64
    # sum of a[i] ^ (i * k), with i * k built by repeated addition
    p("li s6, 0", "li s2, 0", "li s7, 0", f"li s8, {k}",
      "sum_loop:", "slli t0, s2, 3", "add t0, s1, t0", "ld t1, 0(t0)", "xor t1, t1, s7", "add s6, s6, t1",
      "add s7, s7, s8", "addi s2, s2, 1", "blt s2, s9, sum_loop")
    p.check("s6", checksum)
    return p.program()


def base_sieve() -> Program:
    p = _Builder("base_sieve", "base")
    n = 2000
    p.data += ["sieve:", f"    .zero {n}"]
    p("la s1, sieve", "li s2, 2", f"li s9, {n}", "li s5, 0",
      "sv_outer:", "bge s2, s9, sv_done", "add t0, s1, s2", "lbu t1, 0(t0)", "bnez t1, sv_next",
      "addi s5, s5, 1", "add s3, s2, s2",
      "sv_mark:", "bge s3, s9, sv_next", "add t0, s1, s3", "li t1, 1", "sb t1, 0(t0)", "add s3, s3, s2",
      "j sv_mark",
      "sv_next:", "addi s2, s2, 1", "j sv_outer",
      "sv_done:")
    p.check("s5", sum(1 for k in range(2, n) if all(k % d for d in range(2, math.isqrt(k) + 1))))
    return p.program()


def base_csr() -> Program:
    p = _Builder("base_csr", "base")
    p("li s1, 0x80001003", "csrrw s2, mtvec, s1", "csrr s3, mtvec")
    p.check("s2", 0)
    p.check("s3", 0x80001000)
    p("li s1, 0xff", "csrrs s2, mepc, s1", "csrr s3, mepc")
    p.check("s3", 0xFC)
    p("li s1, 0x0f", "csrrc s2, mepc, s1", "csrr s3, mepc")
    p.check("s2", 0xFC)
    p.check("s3", 0xF0)
    p("csrrwi s2, mcause, 21", "csrrsi s2, mcause, 8", "csrrci s3, mcause, 1", "csrr s4, mcause")
    p.check("s2", 21)
    p.check("s3", 29)
    p.check("s4", 28)
    p("li s1, -1", "csrw mtval, s1", "csrr s3, mtval")
    p.check("s3", M64)
    p("csrr s3, mhartid")
    p.check("s3", 0)
    # minstret counts exactly the instructions between two reads
    p("csrr s4, minstret", "addi x0, x0, 0", "addi x0, x0, 0", "csrr s5, minstret", "sub s3, s5, s4")
    p.check("s3", 3)
    p("csrr s4, mcycle", "csrr s5, minstret", "sub s3, s5, s4")
    p.check("s3", 1)
    # writes to the counters are ignored; rs1=x0 set/clear forms never write
    p("csrr s4, minstret", "csrw minstret, zero", "csrr s5, minstret", "sub s3, s5, s4")
    p.check("s3", 2)
    p("csrrs s3, mhartid, x0")
    p.check("s3", 0)
    p("csrw mtvec, zero")
    return p.program()


def base_trap() -> Program:
    p = _Builder("base_trap", "base")
    p.data += ["    .align 3", "trap_log:", "    .zero 128"]
    # handler appends (mcause) to trap_log and resumes at mepc + 4
    p("la t0, handler", "csrw mtvec, t0", "la s10, trap_log", "li s11, 0", "j body",
      ".align 2", "handler:",
      "csrr t3, mcause", "sd t3, 0(s10)", "csrr t3, mtval", "sd t3, 8(s10)", "addi s10, s10, 16",
      "addi s11, s11, 1", "csrr t3, mepc", "addi t3, t3, 4", "jr t3",
      "body:",
      "ecall", "ebreak", ".word 0xffffffff", ".word 0x00000000",
      "li t0, 0x10", "ld t1, 0(t0)",  # load access fault
      "li t0, -8", "sd t1, 0(t0)",  # store access fault
      "csrr t1, 0x7c0",  # unimplemented CSR
      "csrrw t1, 0xf14, zero",  # write to a read-only CSR
      ".word 0x0000100b")  # custom-0 opcode, unclaimed
    p.check("s11", 9)
    expected = [(11, 0), (3, None), (2, 0xFFFFFFFF), (2, 0), (5, 0x10), (7, M64 - 7),
                (2, 0x7C002373), (2, 0xF1401373), (2, 0x0000100B)]
    for i, (cause, _) in enumerate(expected):
        p("la t0, trap_log", f"ld s3, {16 * i}(t0)")
        p.check("s3", cause)
    for i, (_, tval) in enumerate(expected):
        if isinstance(tval, int):
            p("la t0, trap_log", f"ld s3, {16 * i + 8}(t0)")
            p.check("s3", tval)
    p("csrw mtvec, zero")
    return p.program()


# -- M programs -----------------------------------------------------------------

M_OPS = ("mul", "mulh", "mulhsu", "mulhu", "div", "divu", "rem", "remu", "mulw", "divw", "divuw", "remw", "remuw")


def _m_random(name: str, ops, seed: int, per_op: int) -> Program:
    p, rng = _Builder(name, "m"), random.Random(seed)
    for op in ops:
        for _ in range(per_op):
            a, b = operand(rng), operand(rng)
            if rng.random() < 0.1:
                b = 0
            p.binop(op, a, b, ref_m(op, a, b))
    return p.program()


def m_mul() -> Program:
    return _m_random("m_mul", ("mul", "mulh", "mulhsu", "mulhu"), 21, 30)


def m_div() -> Program:
    return _m_random("m_div", ("div", "divu", "rem", "remu"), 22, 30)


def m_word() -> Program:
    return _m_random("m_word", ("mulw", "divw", "divuw", "remw", "remuw"), 23, 24)


def m_edges() -> Program:
    p = _Builder("m_edges", "m")
    min64, min32 = 1 << 63, 0xFFFFFFFF80000000
    cases = []
    for x in (0, 1, 12345, M64, min64):
        cases += [("div", x, 0), ("divu", x, 0), ("rem", x, 0), ("remu", x, 0),
                  ("divw", x, 0), ("divuw", x, 0), ("remw", x, 0), ("remuw", x, 0)]
    cases += [("div", min64, M64), ("rem", min64, M64), ("divw", min32, M64), ("remw", min32, M64),
              ("divw", 0x80000000, 0xFFFFFFFF), ("mulh", M64, M64), ("mulhu", M64, M64), ("mulhsu", M64, M64),
              ("mulhsu", 1, M64), ("mul", min64, M64), ("mulw", 0x7FFFFFFF, 2), ("divu", M64, 1),
              ("remu", M64, 1), ("mul", M64, 1)]
    for op, a, b in cases:
        p.binop(op, a, b, ref_m(op, a, b))
    # rd aliasing a source
    p("li s1, 7", "li s2, 6", "mul s1, s1, s2")
    p.check("s1", 42)
    p("li s1, 5", "mul x0, s1, s1")
    p.check("x0", 0)
    return p.program()


def m_factorial() -> Program:
    p = _Builder("m_factorial", "m")
    p("li s1, 1", "li s2, 1", "li s3, 21",
      "fact_loop:", "mul s1, s1, s2", "addi s2, s2, 1", "blt s2, s3, fact_loop")
    p.check("s1", math.factorial(20) & M64)
    p("li s2, 20", "fact_down:", "divu s1, s1, s2", "addi s2, s2, -1", "bnez s2, fact_down")
    p.check("s1", 1)
    return p.program()


def m_gcd() -> Program:
    p, rng = _Builder("m_gcd", "m"), random.Random(25)
    pairs = [(rng.getrandbits(64) | 1, rng.getrandbits(40) | 1) for _ in range(12)]
    pairs += [(rng.getrandbits(20) * 9699690, rng.getrandbits(20) * 9699690) for _ in range(6)]
    for i, (a, b) in enumerate(pairs):
        p(f"li s1, {a}", f"li s2, {b}",
          f"gcd{i}:", f"beqz s2, gcd{i}_done", "remu t0, s1, s2", "mv s1, s2", "mv s2, t0", f"j gcd{i}",
          f"gcd{i}_done:")
        p.check("s1", math.gcd(a, b))
    return p.program()


def m_bigmul() -> Program:
    """256-bit = 128 x 128 schoolbook multiply with mul/mulhu and carries."""
    p, rng = _Builder("m_bigmul", "m"), random.Random(26)
    for _ in range(6):
        a, b = rng.getrandbits(128), rng.getrandbits(128)
        prod = a * b
        a0, a1, b0, b1 = a & M64, a >> 64, b & M64, b >> 64
        p(f"li s1, {a0}", f"li s2, {a1}", f"li s3, {b0}", f"li s4, {b1}",
          # r0..r3 in s5..s8
          "mul s5, s1, s3", "mulhu s6, s1, s3", "li s7, 0", "li s8, 0",
          "mul t0, s1, s4", "mulhu t1, s1, s4",
          "add s6, s6, t0", "sltu t2, s6, t0", "add s7, s7, t1", "add s7, s7, t2", "sltu t2, s7, t1",
          "add s8, s8, t2",
          "mul t0, s2, s3", "mulhu t1, s2, s3",
          "add s6, s6, t0", "sltu t2, s6, t0", "add t1, t1, t2", "sltu t3, t1, t2", "add s7, s7, t1",
          "sltu t2, s7, t1", "add s8, s8, t2", "add s8, s8, t3",
          "mul t0, s2, s4", "mulhu t1, s2, s4",
          "add s7, s7, t0", "sltu t2, s7, t0", "add s8, s8, t1", "add s8, s8, t2")
        for reg, k in (("s5", 0), ("s6", 1), ("s7", 2), ("s8", 3)):
            p.check(reg, (prod >> (64 * k)) & M64)
    return p.program()


def m_modexp() -> Program:
    p, rng = _Builder("m_modexp", "m"), random.Random(27)
    for i in range(8):
        base, exp, mod = rng.getrandbits(31), rng.getrandbits(32), rng.getrandbits(31) | (1 << 30)
        p(f"li s1, {base}", f"li s2, {exp}", f"li s3, {mod}", "li s4, 1", "remu s1, s1, s3",
          f"mx{i}:", f"beqz s2, mx{i}_done", "andi t0, s2, 1", f"beqz t0, mx{i}_sq",
          "mul s4, s4, s1", "remu s4, s4, s3",
          f"mx{i}_sq:", "mul s1, s1, s1", "remu s1, s1, s3", "srli s2, s2, 1", f"j mx{i}",
          f"mx{i}_done:")
        p.check("s4", pow(base, exp, mod))
    return p.program()


def m_matmul() -> Program:
    p, rng = _Builder("m_matmul", "m"), random.Random(28)
    n = 6
    a = [[s64(operand(rng)) for _ in range(n)] for _ in range(n)]
    b = [[s64(operand(rng)) for _ in range(n)] for _ in range(n)]
    p.data += ["    .align 3", "mat_a:"] + [f"    .dword {v & M64}" for row in a for v in row]
    p.data += ["mat_b:"] + [f"    .dword {v & M64}" for row in b for v in row]
    p.data += ["mat_c:", f"    .zero {8 * n * n}"]
    p(f"li s9, {n}", "li s1, 0",
      "mm_i:", "li s2, 0",
      "mm_j:", "li s3, 0", "li s4, 0",
      "mm_k:",
      "mul t0, s1, s9", "add t0, t0, s3", "slli t0, t0, 3", "la t1, mat_a", "add t0, t0, t1", "ld t2, 0(t0)",
      "mul t0, s3, s9", "add t0, t0, s2", "slli t0, t0, 3", "la t1, mat_b", "add t0, t0, t1", "ld t3, 0(t0)",
      "mul t4, t2, t3", "mulh t5, t2, t3", "add s4, s4, t4", "xor s4, s4, t5",
      "addi s3, s3, 1", "blt s3, s9, mm_k",
      "mul t0, s1, s9", "add t0, t0, s2", "slli t0, t0, 3", "la t1, mat_c", "add t0, t0, t1", "sd s4, 0(t0)",
      "addi s2, s2, 1", "blt s2, s9, mm_j",
      "addi s1, s1, 1", "blt s1, s9, mm_i")
    for i in range(n):
        for j in range(n):
            acc = 0
            for k in range(n):
                prod = a[i][k] * b[k][j]
                acc = ((acc + (prod & M64)) & M64) ^ ((prod >> 64) & M64)
            p("la t0, mat_c", f"ld s3, {8 * (i * n + j)}(t0)")
            p.check("s3", acc)
    return p.program()


def m_hash() -> Program:
    p, rng = _Builder("m_hash", "m"), random.Random(29)
    data = bytes(rng.getrandbits(8) for _ in range(512))
    p.data += ["hash_data:"] + [f"    .word {int.from_bytes(data[i:i + 4], 'little')}" for i in range(0, 512, 4)]
    prime, h = 0x100000001B3, 0xCBF29CE484222325
    for c in data:
        h = ((h ^ c) * prime) & M64
    p(f"li s1, {0xCBF29CE484222325}", f"li s2, {prime}", "la s3, hash_data", "li s4, 512",
      "fnv:", "lbu t0, 0(s3)", "xor s1, s1, t0", "mul s1, s1, s2", "addi s3, s3, 1", "addi s4, s4, -1",
      "bnez s4, fnv")
    p.check("s1", h)
    # digit sum of the hash via repeated divu/remu by 10
    p("li s5, 0", "li s6, 10", "dsum:", "remu t0, s1, s6", "add s5, s5, t0", "divu s1, s1, s6", "bnez s1, dsum")
    p.check("s5", sum(int(d) for d in str(h)))
    return p.program()


# -- Zbb programs -------------------------------------------------------------------

def _zbb_random(name: str, binary, unary, seed: int, per_op: int) -> Program:
    p, rng = _Builder(name, "zbb"), random.Random(seed)
    for op in binary:
        for _ in range(per_op):
            a, b = operand(rng), operand(rng)
            if op in ("rol", "ror") and rng.random() < 0.5:
                b = rng.choice([0, 1, 63, 64, 65])
            p.binop(op, a, b, ref_zbb(op, a, b))
    for op in unary:
        for _ in range(per_op):
            a = operand(rng)
            p(f"li s1, {a}", f"{op} s3, s1")
            p.check("s3", ref_zbb(op, a))
    return p.program()


def zbb_count() -> Program:
    return _zbb_random("zbb_count", (), ("clz", "ctz", "cpop"), 31, 30)


def zbb_logic() -> Program:
    return _zbb_random("zbb_logic", ("andn", "orn", "xnor", "min", "max", "minu", "maxu"), (), 32, 16)


def zbb_rotate() -> Program:
    p, rng = _Builder("zbb_rotate", "zbb"), random.Random(33)
    for op in ("rol", "ror"):
        for _ in range(25):
            a, b = operand(rng), rng.choice([0, 1, 63, 64, 65, rng.getrandbits(64)])
            p.binop(op, a, b, ref_zbb(op, a, b))
    for sh in (0, 1, 13, 32, 63) + tuple(rng.randrange(64) for _ in range(10)):
        a = operand(rng)
        p(f"li s1, {a}", f"rori s3, s1, {sh}")
        p.check("s3", ref_zbb("rori", a, sh))
    return p.program()


def zbb_bytes() -> Program:
    return _zbb_random("zbb_bytes", (), ("rev8", "orc.b", "sext.b", "sext.h", "zext.h"), 35, 16)


def zbb_strlen() -> Program:
    """Word-at-a-time string length with orc.b, ctz and cpop."""
    p, rng = _Builder("zbb_strlen", "zbb"), random.Random(36)
    lengths = [0, 1, 7, 8, 9, 31, 64, 100]
    for i, n in enumerate(lengths):
        s = bytes(rng.randrange(1, 256) for _ in range(n)) + b"\0"
        s += bytes(-len(s) % 8 + 8)
        p.data += ["    .align 3", f"str{i}:"] + [f"    .dword {int.from_bytes(s[j:j + 8], 'little')}"
                                                    for j in range(0, len(s), 8)]
        p(f"la s1, str{i}", "mv s2, s1", "li s6, -1",
          f"sl{i}:", "ld t0, 0(s2)", "orc.b t1, t0", f"bne t1, s6, sl{i}_end", "addi s2, s2, 8", f"j sl{i}",
          f"sl{i}_end:", "not t1, t1", "ctz t2, t1", "srli t2, t2, 3", "sub s3, s2, s1", "add s3, s3, t2")
        p.check("s3", n)
    # total popcount of a table
    words = [operand(rng) for _ in range(32)]
    p.data += ["    .align 3", "pop_tab:"] + [f"    .dword {w}" for w in words]
    p("la s1, pop_tab", "li s2, 32", "li s3, 0",
      "pop_loop:", "ld t0, 0(s1)", "cpop t0, t0", "add s3, s3, t0", "addi s1, s1, 8", "addi s2, s2, -1",
      "bnez s2, pop_loop")
    p.check("s3", sum(bin(w).count("1") for w in words))
    return p.program()


BASE_PROGRAMS = (base_alu, base_shift, base_word, base_branch, base_memory, base_fib, base_sort, base_sieve,
                 base_csr, base_trap)
M_PROGRAMS = (m_mul, m_div, m_word, m_edges, m_factorial, m_gcd, m_bigmul, m_modexp, m_matmul, m_hash)
ZBB_PROGRAMS = (zbb_count, zbb_logic, zbb_rotate, zbb_bytes, zbb_strlen)


def test_suite() -> list[Program]:
    return [f() for f in BASE_PROGRAMS + M_PROGRAMS + ZBB_PROGRAMS]


# -- benchmark workloads -------------------------------------------------------------

BENCH_RETIREMENTS = 10_000_000


def _bench(name: str, body: list[str], seeds: dict[str, int], retirements: int) -> Program:
    per_iter = len(body) + 2  # plus the counter decrement and the branch
    iters = retirements // per_iter
    p = _Builder(name, "bench")
    for reg, v in seeds.items():
        p(f"li {reg}, {v}")
    p(f"li s11, {iters}", "bench_loop:", *body, "addi s11, s11, -1", "bnez s11, bench_loop",
      "la t0, bench_result", "sd s1, 0(t0)", "sd s2, 8(t0)")
    p.data += ["    .align 3", "bench_result:", "    .zero 16"]
    return p.program()


_BENCH_SEEDS = {"s1": 0x0123456789ABCDEF, "s2": 0x0F1E2D3C4B5A6978, "s3": 0x1357, "s4": 0x2468ACE,
                "s5": 0x7FFFFFFF, "s6": 0x9E3779B97F4A7C15}

_ALU_BODY = [
    "add s1, s1, s2", "xor s2, s2, s1", "slli t0, s1, 7", "srli t1, s2, 3", "or s3, t0, t1", "sub s4, s3, s2",
    "and t2, s4, s6", "addi s5, s5, 13", "sltu t3, s1, s2", "add s1, s1, t3", "sra t4, s4, s3", "addw s2, s2, t4",
    "xori s3, s3, 0x55", "andi t5, s1, 0x3f", "sll s4, s4, t5", "or s2, s2, t2", "srliw t0, s5, 5",
    "add s1, s1, t0", "slt t1, s4, s3", "sub s2, s2, t1",
]
_M_BODY = [
    "mul t0, s1, s6", "add s1, s1, t0", "mulhu t1, s2, s6", "xor s2, s2, t1", "ori t2, s3, 1",
    "divu t3, s1, t2", "remu t4, s2, t2", "add s1, s1, t3", "add s2, s2, t4", "mulw s4, s4, s5",
    "mulh t5, s1, s2", "xor s3, s3, t5", "div t0, s2, t2", "rem t1, s1, t2", "add s4, s4, t0",
    "sub s5, s5, t1", "divuw t2, s4, s5", "remw t3, s2, s5", "add s1, s1, t2", "xor s2, s2, t3",
]
_ZBB_BODY = [
    "clz t0, s1", "ctz t1, s2", "cpop t2, s3", "rol s1, s1, t0", "ror s2, s2, t1", "rori s3, s3, 7",
    "andn t3, s1, s2", "orn t4, s2, s3", "xnor t5, s3, s1", "add s1, s1, t3", "add s2, s2, t4",
    "add s3, s3, t5", "min t0, s1, s2", "maxu t1, s2, s3", "rev8 s4, s4", "orc.b t2, s4", "sext.b t3, s1",
    "zext.h t4, s2", "xor s1, s1, t2", "add s2, s2, t3",
]


def bench_base_alu(retirements: int = BENCH_RETIREMENTS) -> Program:
    return _bench("bench_base_alu", _ALU_BODY, _BENCH_SEEDS, retirements)


def bench_m_heavy(retirements: int = BENCH_RETIREMENTS) -> Program:
    return _bench("bench_m_heavy", _M_BODY, _BENCH_SEEDS, retirements)


def bench_zbb_heavy(retirements: int = BENCH_RETIREMENTS) -> Program:
    return _bench("bench_zbb_heavy", _ZBB_BODY, _BENCH_SEEDS, retirements)


def bench_workloads(retirements: int = BENCH_RETIREMENTS) -> list[Program]:
    return [bench_base_alu(retirements), bench_m_heavy(retirements), bench_zbb_heavy(retirements)]


def write_all(directory, programs=None) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    programs = programs if programs is not None else test_suite() + bench_workloads()
    return [prog.write(directory) for prog in programs]


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        print("usage: python3 -m modriscv.programs OUTDIR", file=sys.stderr)
        return 64
    for path in write_all(argv[0]):
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
