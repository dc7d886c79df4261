import pytest
from hypothesis import given, strategies as st

from modriscv.arch import ArchState, Retired
from modriscv.asm import assemble
from modriscv.base_isa import decode_base, disasm_base, execute_base

from reference_encodings import BASE, M, ZBB

ENTRY = 0x80000000
CSR_HEX = {"mtvec": "0x305", "mepc": "0x341", "mcause": "0x342", "mtval": "0x343", "mscratch": "0x340"}


def printed_form(src: str) -> str:
    for name, idx in CSR_HEX.items():
        src = src.replace(f" {name},", f" {idx},")
    return src


@pytest.fixture
def s():
    a = ArchState(ENTRY, 1 << 16)
    a.reset(ENTRY)
    return a


def run(s, word):
    return execute_base(decode_base(word), s)


def test_decode_addi():
    ast = decode_base(0x00500093)
    assert (ast.op, ast.rd, ast.rs1, ast.imm) == ("addi", 1, 0, 5)


def test_zero_word_is_illegal():
    assert decode_base(0).illegal
    assert disasm_base(decode_base(0)) == ".word 0x00000000"


def test_mul_is_not_base():
    ast = decode_base(0x02208233)
    assert ast.illegal and ast.raw == 0x02208233


@pytest.mark.parametrize("src,word", M + ZBB)
def test_extension_words_are_illegal_to_base(src, word):
    assert decode_base(word).illegal


@pytest.mark.parametrize("src,word", BASE)
def test_decode_and_print_reference_encodings(src, word):
    ast = decode_base(word)
    assert not ast.illegal
    assert disasm_base(ast) == printed_form(src)


@pytest.mark.parametrize("src,word", BASE)
def test_print_reassembles_to_same_word(src, word):
    text = disasm_base(decode_base(word))
    code, _ = assemble(text, ENTRY)
    assert int.from_bytes(code[:4], "little") == word


def test_jal_backwards_prints_negative():
    assert disasm_base(decode_base(0xFFDFF06F)) == "jal x0, -4"


def test_compressed_words_are_illegal():
    for w in (0x4505, 0x00500091, 0x00500092):
        assert decode_base(w).illegal


@given(st.integers(0, 0xFFFFFFFF))
def test_decode_is_total_and_pure(w):
    a, b = decode_base(w), decode_base(w)
    assert a == b
    assert isinstance(disasm_base(a), str)


def test_addi_on_reset(s):
    assert run(s, 0x00500093) is Retired.RETIRE_SUCCESS
    assert s.gpr_read(1) == 5 and s.pc == ENTRY + 4


def test_beq_always_taken(s):
    before = list(s.gprs)
    run(s, 0x00000463)
    assert s.pc == ENTRY + 8 and s.gprs == before


def test_ecall_traps_to_mtvec(s):
    s.csrs.mtvec = 0x80001000
    assert run(s, 0x00000073) is Retired.RETIRE_TRAP
    assert (s.csrs.mcause, s.csrs.mtval, s.csrs.mepc, s.pc) == (11, 0, ENTRY, 0x80001000)


def test_ebreak_tval_is_pc(s):
    s.csrs.mtvec = 0x80001000
    run(s, 0x00100073)
    assert (s.csrs.mcause, s.csrs.mtval) == (3, ENTRY)


def test_trap_leaves_gprs(s):
    s.csrs.mtvec = 0x80001000
    s.gpr_write(7, 123)
    before = list(s.gprs)
    run(s, 0x00000073)
    assert s.gprs == before


def test_loads_sign_and_zero_extend(s):
    s.store(ENTRY + 0x100, 8, 0x8899AABBCCDDEEFF)
    s.gpr_write(2, ENTRY + 0x101)
    run(s, 0xFFF10083)  # lb x1, -1(x2)
    assert s.gpr_read(1) == 0xFFFFFFFFFFFFFFFF
    s.gpr_write(10, ENTRY + 0x0FF)
    run(s, 0x00154483)  # lbu x9, 1(x10)
    assert s.gpr_read(9) == 0xFF
    s.gpr_write(6, ENTRY + 0x100 - 4)
    run(s, 0x00432283)  # lw x5, 4(x6)
    assert s.gpr_read(5) == 0xFFFFFFFFCCDDEEFF


def test_load_fault_traps_with_address(s):
    s.csrs.mtvec = 0x80001000
    s.gpr_write(8, 0x10)
    assert run(s, 0xFF843383) is Retired.RETIRE_TRAP  # ld x7, -8(x8)
    assert (s.csrs.mcause, s.csrs.mtval) == (5, 8)


def test_store_fault_traps_with_address(s):
    s.csrs.mtvec = 0x80001000
    s.gpr_write(8, 0x20)
    assert run(s, 0x00743823) is Retired.RETIRE_TRAP  # sd x7, 16(x8)
    assert (s.csrs.mcause, s.csrs.mtval) == (7, 0x30)


def test_jalr_links_and_clears_bit0(s):
    s.gpr_write(2, ENTRY + 0x41)
    run(s, 0x008100E7)  # jalr x1, 8(x2)
    assert s.pc == ENTRY + 0x48 and s.gpr_read(1) == ENTRY + 4


def test_word_shifts_sign_extend(s):
    s.gpr_write(21, 1)
    run(s, 0x01FA9A1B)  # slliw x20, x21, 31
    assert s.gpr_read(20) == 0xFFFFFFFF80000000


def test_srai_uses_six_bit_shamt(s):
    s.gpr_write(17, 1 << 63)
    run(s, 0x4218D813)  # srai x16, x17, 33
    assert s.gpr_read(16) == 0xFFFFFFFFC0000000


def test_fence_is_a_noop(s):
    before = list(s.gprs)
    assert run(s, 0x0FF0000F) is Retired.RETIRE_SUCCESS
    assert run(s, 0x0000100F) is Retired.RETIRE_SUCCESS
    assert s.gprs == before and s.pc == ENTRY + 8


def test_csr_swap(s):
    s.gpr_write(2, 0x80002001)
    run(s, 0x305110F3)  # csrrw x1, mtvec, x2
    assert s.gpr_read(1) == 0 and s.csrs.mtvec == 0x80002000


def test_unimplemented_csr_is_illegal(s):
    s.csrs.mtvec = 0x80001000
    assert run(s, 0x3400E3F3) is Retired.RETIRE_TRAP  # csrrsi x7, mscratch, 1
    assert (s.csrs.mcause, s.csrs.mtval) == (2, 0x3400E3F3)


def test_write_to_read_only_csr_is_illegal(s):
    s.csrs.mtvec = 0x80001000
    w = 0xF1411073  # csrrw x0, mhartid, x2
    assert run(s, w) is Retired.RETIRE_TRAP
    assert s.csrs.mtval == w


def test_csrrs_x0_reads_read_only_csr(s):
    w = 0xF14020F3  # csrrs x1, mhartid, x0
    assert run(s, w) is Retired.RETIRE_SUCCESS
    assert s.gpr_read(1) == 0


def test_mcycle_reads_minstret(s):
    s.retire()
    s.retire()
    run(s, 0xB00020F3)  # csrrs x1, mcycle, x0
    assert s.gpr_read(1) == 2
