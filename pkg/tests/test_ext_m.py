import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from modriscv.abi import HostAccess
from modriscv.arch import ArchState, Retired
from modriscv.ext_m import OPS, m_alu, m_decode, m_disasm, m_execute
from modriscv.loader import load_dynamic, load_static, plugin_path

from conftest import needs_native
from helpers import native_batch, operands
from oracles import M_EDGES, m_oracle, signed
from reference_encodings import BASE, M, ZBB

U64 = (1 << 64) - 1
u64 = st.integers(0, U64)
SRC = {op: f"{op} x5, x6, x7" for op in OPS}


def test_decode_examples():
    a = m_decode(0x02208233)
    assert (a.op, a.rd, a.rs1, a.rs2) == ("mul", 4, 1, 2)
    b = m_decode(0x02C5D533)
    assert (b.op, b.rd, b.rs1, b.rs2) == ("divu", 10, 11, 12)
    assert m_decode(0x00500093).illegal


@pytest.mark.parametrize("src,word", M)
def test_claims_every_m_encoding(src, word):
    assert m_disasm(m_decode(word)) == src


@pytest.mark.parametrize("src,word", BASE + ZBB)
def test_claims_nothing_else(src, word):
    assert m_decode(word).illegal


@given(st.integers(0, 0xFFFFFFFF))
def test_claims_exactly_the_m_pattern(w):
    is_m = (w & 0x7F) in (0x33, 0x3B) and (w >> 25) == 1
    if (w & 0x7F) == 0x3B:
        is_m = is_m and ((w >> 12) & 7) in (0, 4, 5, 6, 7)
    assert (not m_decode(w).illegal) == is_m


def test_disasm():
    assert m_disasm(m_decode(0x02208233)) == "mul x4, x1, x2"
    assert m_disasm(m_decode(0x02C5D53B)) == "divuw x10, x11, x12"
    assert m_disasm(m_decode(0x00500093)) == ".word 0x00500093"


def test_execute_via_state_access():
    s = ArchState(0x80000000, 64)
    s.gpr_write(1, 2)
    s.gpr_write(2, 3)
    acc = HostAccess(s)
    assert m_execute(m_decode(0x02208233), acc.table) is Retired.RETIRE_SUCCESS
    assert s.gpr_read(4) == 6


def test_stated_examples():
    assert m_alu("mulh", U64, U64) == 0
    assert m_alu("div", 12345, 0) == U64
    assert m_alu("div", 1 << 63, U64) == 1 << 63
    assert m_alu("rem", 1 << 63, U64) == 0


@pytest.mark.parametrize("op,a,b,expected", M_EDGES)
def test_edge_table_python(op, a, b, expected):
    assert m_oracle(op, a, b) == expected
    assert m_alu(op, a, b) == expected


@pytest.mark.parametrize("op", OPS)
def test_python_matches_oracle(op):
    rng = np.random.default_rng(OPS.index(op))
    a, b = operands(rng, 3000), operands(rng, 3000)
    for x, y in zip(a.tolist(), b.tolist()):
        assert m_alu(op, x, y) == m_oracle(op, x, y), (op, hex(x), hex(y))


@needs_native
@pytest.mark.parametrize("binding", ["static", "dynamic"])
def test_native_matches_oracle(binding):
    info = load_static("m").native if binding == "static" else load_dynamic(plugin_path("m")).native
    rng = np.random.default_rng(11)
    a, b = operands(rng, 5000), operands(rng, 5000)
    for op in OPS:
        got = native_batch(info, SRC[op], a, b).tolist()
        want = [m_oracle(op, x, y) for x, y in zip(a.tolist(), b.tolist())]
        assert got == want, op
    for op, x, y, expected in M_EDGES:
        assert native_batch(info, SRC[op], [x], [y])[0] == expected, (op, x, y)


@given(u64)
def test_identities(x):
    assert m_alu("mul", x, 1) == x
    assert m_alu("divu", x, 1) == x
    assert m_alu("remu", x, 1) == 0


@given(u64, u64)
def test_division_ring(x1, x2):
    assume(x2 != 0)
    assume(not (x1 == 1 << 63 and x2 == U64))
    q, r = signed(m_alu("div", x1, x2)), signed(m_alu("rem", x1, x2))
    assert (q * signed(x2) + r) & U64 == x1
    qu, ru = m_alu("divu", x1, x2), m_alu("remu", x1, x2)
    assert (qu * x2 + ru) & U64 == x1


@given(st.sampled_from([op for op in OPS if op.endswith("w")]), u64, u64)
def test_word_forms_are_sign_extended(op, a, b):
    r = m_alu(op, a, b)
    assert r == (signed(r & 0xFFFFFFFF, 32) & U64)
