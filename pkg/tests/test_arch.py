import pytest
from hypothesis import given, strategies as st

from modriscv.arch import (CSR_MCYCLE, CSR_MEPC, CSR_MINSTRET, CSR_MISA, CSR_MTVEC, FATAL_TRAP_EXIT, AccessFault,
                           ArchState, Trap, TrapCause, misa_for, snapshot)
from modriscv.base_isa import decode_base, execute_base

BASE = 0x80000000
u64 = st.integers(0, (1 << 64) - 1)


@pytest.fixture
def s():
    st_ = ArchState(BASE, 4096)
    st_.reset(BASE)
    return st_


def test_x0_is_hardwired(s):
    s.gpr_write(0, 42)
    assert s.gpr_read(0) == 0


def test_gpr_read_after_write(s):
    s.gpr_write(5, 0xDEADBEEF)
    assert s.gpr_read(5) == 0x00000000DEADBEEF
    s.gpr_write(31, (1 << 64) - 1)
    assert s.gpr_read(31) == 0xFFFFFFFFFFFFFFFF
    assert s.gpr_read(17) == 0


def test_addi_writes_x1(s):
    execute_base(decode_base(0x00500093), s)
    assert s.gpr_read(1) == 5


@given(idx=st.integers(0, 31), v=u64)
def test_gpr_roundtrip_property(idx, v):
    a = ArchState(BASE, 64)
    a.gpr_write(idx, v)
    assert a.gpr_read(idx) == (v if idx else 0)


def test_memory_roundtrip_and_misaligned(s):
    s.mem_access(0x80000000, 4, "store", 0x02208233)
    assert s.mem_access(0x80000000, 4, "load") == 0x02208233
    s.mem_access(0x80000001, 4, "store", 0xAABBCCDD)
    assert s.mem_access(0x80000001, 4, "load") == 0xAABBCCDD


def test_one_past_end_faults(s):
    with pytest.raises(AccessFault) as info:
        s.mem_access(BASE + 4096, 1, "load")
    assert info.value.trap == Trap(TrapCause.LoadAccessFault, BASE + 4096)
    with pytest.raises(AccessFault) as info:
        s.mem_access(BASE + 4093, 4, "store", 0)
    assert info.value.trap.cause is TrapCause.StoreAccessFault


def test_bad_access_size(s):
    with pytest.raises(ValueError):
        s.mem_access(BASE, 3, "load")


@given(off=st.integers(0, 4096 - 8), size=st.sampled_from([1, 2, 4, 8]), v=u64)
def test_load_store_property(off, size, v):
    a = ArchState(BASE, 4096)
    a.mem_access(BASE + off, size, "store", v)
    assert a.mem_access(BASE + off, size, "load") == v % (1 << (8 * size))


def test_trap_to_mtvec(s):
    s.csrs.mtvec = 0x80001000
    s.pc = 0x80000004
    s.gpr_write(3, 9)
    s.raise_trap(Trap(TrapCause.IllegalInstruction, 0xFFFFFFFF))
    assert (s.csrs.mepc, s.csrs.mcause, s.csrs.mtval, s.pc) == (0x80000004, 2, 0xFFFFFFFF, 0x80001000)
    assert s.halted is None and s.gpr_read(3) == 9


def test_trap_without_handler_is_fatal(s):
    s.raise_trap(Trap(TrapCause.EnvCallFromM))
    assert s.halted == FATAL_TRAP_EXIT == 133
    assert s.csrs.mcause == 11


def test_second_trap_overwrites(s):
    s.csrs.mtvec = 0x80001000
    s.pc = 0x80000010
    s.raise_trap(Trap(TrapCause.Breakpoint, 1))
    s.raise_trap(Trap(TrapCause.StoreAccessFault, 2))
    assert (s.csrs.mepc, s.csrs.mcause, s.csrs.mtval) == (0x80001000, 7, 2)


def test_cause_codes():
    assert [int(c) for c in TrapCause] == [2, 3, 5, 7, 11]


def test_misa_letters():
    v = misa_for("M")
    assert v >> 62 == 2
    assert v & (1 << 8) and v & (1 << 12)
    assert not misa_for("") & (1 << 12)


def test_csr_write_rules(s):
    assert s.csr_write(CSR_MTVEC, 0x80001003)
    assert s.csrs.mtvec == 0x80001000
    assert s.csr_write(CSR_MEPC, 0x80000007)
    assert s.csrs.mepc == 0x80000004
    misa = s.csrs.misa
    assert s.csr_write(CSR_MISA, 0)
    assert s.csrs.misa == misa
    assert s.csr_write(CSR_MINSTRET, 99) and s.csrs.minstret == 0
    assert s.csr_write(CSR_MCYCLE, 99) and s.csrs.mcycle == 0
    assert not s.csr_write(0x7C0, 1)
    assert s.csr_read(0x7C0) is None
    assert not s.csr_write(0xF14, 1)


def test_minstret_counts_retirements(s):
    for _ in range(7):
        s.retire()
    assert s.minstret == 7 and s.csrs.mcycle == 7


def test_snapshot():
    a, b = ArchState(BASE, 64), ArchState(BASE, 64)
    assert snapshot(a) == snapshot(b)
    b.gpr_write(1, 1)
    assert snapshot(a) != snapshot(b)


def test_snapshot_ignores_misa_and_memory():
    a, b = ArchState(BASE, 64), ArchState(BASE, 64)
    b.csrs.misa = misa_for("MB")
    b.mem[0] = 1
    assert snapshot(a) == snapshot(b)


def test_reset_keeps_misa_and_memory(s):
    s.csrs.misa = misa_for("M")
    s.mem[5] = 7
    s.gpr_write(3, 3)
    s.reset(BASE + 8)
    assert s.csrs.misa == misa_for("M") and s.mem[5] == 7
    assert s.gpr_read(3) == 0 and s.pc == BASE + 8


def test_nonpositive_memory_rejected():
    with pytest.raises(ValueError):
        ArchState(BASE, 0)
