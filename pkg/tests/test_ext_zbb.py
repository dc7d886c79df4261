import numpy as np
import pytest
from hypothesis import given, strategies as st

from modriscv.abi import HostAccess
from modriscv.arch import ArchState, Retired
from modriscv.ext_zbb import BINARY_OPS, OPS, UNARY_OPS, zbb_alu, zbb_decode, zbb_disasm, zbb_execute
from modriscv.loader import load_dynamic, load_static, plugin_path

from conftest import needs_native
from helpers import native_batch, operands
from oracles import replicated_patterns, zbb_oracle
from reference_encodings import BASE, M, ZBB

U64 = (1 << 64) - 1
u64 = st.integers(0, U64)


def src_for(op: str, shamt: int = 0) -> str:
    if op == "rori":
        return f"rori x5, x6, {shamt}"
    if op in BINARY_OPS:
        return f"{op} x5, x6, x7"
    return f"{op} x5, x6"


def test_decode_examples():
    a = zbb_decode(0x407372B3)
    assert (a.op, a.rd, a.rs1, a.rs2) == ("andn", 5, 6, 7)
    c = zbb_decode(0x60031293)
    assert (c.op, c.rd, c.rs1) == ("clz", 5, 6)
    assert zbb_decode(0x02208233).illegal


@pytest.mark.parametrize("src,word", ZBB)
def test_claims_listed_encodings(src, word):
    assert zbb_disasm(zbb_decode(word)) == src


@pytest.mark.parametrize("src,word", BASE + M)
def test_claims_nothing_else(src, word):
    assert zbb_decode(word).illegal


def test_near_misses_are_illegal():
    # rv32 rev8 immediate, zext.h with rs2=1, orc.b-like 0x286, unassigned count op 0x606
    for w in (0x69885793, 0x081443BB, 0x28695893, 0x60631293):
        assert zbb_decode(w).illegal, hex(w)


def test_disasm_examples():
    assert zbb_disasm(zbb_decode(0x407372B3)) == "andn x5, x6, x7"
    assert zbb_disasm(zbb_decode(0x60D15093)) == "rori x1, x2, 13"
    assert zbb_disasm(zbb_decode(0x60421193)) == "sext.b x3, x4"


def test_stated_examples():
    assert zbb_alu("cpop", 0) == 0
    assert zbb_alu("clz", 0) == 64
    assert zbb_alu("ctz", 0) == 64
    assert zbb_alu("andn", 0b1100, 0b1010) == 0b0100


def test_execute_rori_uses_shamt():
    s = ArchState(0x80000000, 64)
    s.gpr_write(2, 1)
    assert zbb_execute(zbb_decode(0x60D15093), HostAccess(s).table) is Retired.RETIRE_SUCCESS
    assert s.gpr_read(1) == 1 << 51


@pytest.mark.parametrize("op", OPS)
def test_python_matches_oracle(op):
    rng = np.random.default_rng(OPS.index(op))
    a = np.concatenate([replicated_patterns()[::16], operands(rng, 2000)])
    b = operands(rng, len(a)) if op in BINARY_OPS else None
    if op == "rori":
        b = rng.integers(0, 64, size=len(a), dtype=np.uint64)
    want = zbb_oracle(op, a, b).tolist()
    bs = b.tolist() if b is not None else [0] * len(a)
    got = [zbb_alu(op, x, y) for x, y in zip(a.tolist(), bs)]
    assert got == want


@needs_native
@pytest.mark.parametrize("binding", ["static", "dynamic"])
def test_native_matches_oracle(binding):
    info = load_static("zbb").native if binding == "static" else load_dynamic(plugin_path("zbb")).native
    rng = np.random.default_rng(5)
    a = np.concatenate([replicated_patterns()[::8], operands(rng, 4000)])
    b = operands(rng, len(a))
    for op in OPS:
        if op == "rori":
            for k in (0, 1, 13, 32, 63):
                assert native_batch(info, src_for(op, k), a).tolist() == \
                    zbb_oracle(op, a, np.full(len(a), k, np.uint64)).tolist()
            continue
        got = native_batch(info, src_for(op), a, b)
        assert got.tolist() == zbb_oracle(op, a, b if op in BINARY_OPS else None).tolist(), op


@given(u64, st.integers(0, 63))
def test_rol_ror_duality(x, k):
    assert zbb_alu("rol", x, k) == zbb_alu("ror", x, (64 - k) % 64)
    assert zbb_alu("rori", x, k) == zbb_alu("ror", x, k)


@given(u64)
def test_rev8_involution_and_orcb_idempotence(x):
    assert zbb_alu("rev8", zbb_alu("rev8", x)) == x
    once = zbb_alu("orc.b", x)
    assert zbb_alu("orc.b", once) == once


@given(u64, u64)
def test_min_max_partition(a, b):
    for lo, hi in (("min", "max"), ("minu", "maxu")):
        assert {zbb_alu(lo, a, b), zbb_alu(hi, a, b)} == {a, b}


def test_unary_ops_ignore_rs2():
    for op in UNARY_OPS:
        assert zbb_alu(op, 0x1234, 0) == zbb_alu(op, 0x1234, U64)
