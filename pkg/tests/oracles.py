"""Reference models used only by the tests.

The M oracle works on unbounded Python integers: full 128-bit products and
division with the corner cases spelled out. The Zbb oracle walks bits and
bytes one at a time over numpy uint64 arrays. Neither shares code with the
package.
"""

from __future__ import annotations

import numpy as np

U64 = (1 << 64) - 1
U32 = (1 << 32) - 1


def signed(x: int, bits: int = 64) -> int:
    x &= (1 << bits) - 1
    return x - (1 << bits) if x >> (bits - 1) else x


def _sext32(x: int) -> int:
    return signed(x, 32) & U64


def _div(a: int, b: int, bits: int, is_signed: bool) -> tuple[int, int]:
    """(quotient, remainder) with RISC-V's divide-by-zero and overflow rules, as raw bit patterns."""
    mask = (1 << bits) - 1
    if is_signed:
        a, b = signed(a, bits), signed(b, bits)
    else:
        a, b = a & mask, b & mask
    if b == 0:
        return mask, a & mask
    if is_signed and a == -(1 << (bits - 1)) and b == -1:
        return a & mask, 0
    q = abs(a) // abs(b)
    if (a < 0) != (b < 0):
        q = -q
    return q & mask, (a - q * b) & mask


def m_oracle(op: str, a: int, b: int) -> int:
    a &= U64
    b &= U64
    if op == "mul":
        return (a * b) & U64
    if op == "mulh":
        return ((signed(a) * signed(b)) >> 64) & U64
    if op == "mulhsu":
        return ((signed(a) * b) >> 64) & U64
    if op == "mulhu":
        return (a * b) >> 64
    if op in ("div", "rem", "divu", "remu"):
        q, r = _div(a, b, 64, not op.endswith("u"))
        return q if op.startswith("div") else r
    if op == "mulw":
        return _sext32(a * b)
    if op in ("divw", "remw", "divuw", "remuw"):
        q, r = _div(a & U32, b & U32, 32, not op.endswith("uw"))
        return _sext32(q if op.startswith("div") else r)
    raise KeyError(op)


# fixed edge table: (op, a, b, expected)
MIN64 = 1 << 63
MIN32_X = 0xFFFFFFFF80000000
M_EDGES = [
    ("div", 5, 0, U64),
    ("div", MIN64, 0, U64),
    ("divu", 5, 0, U64),
    ("rem", 5, 0, 5),
    ("rem", MIN64, 0, MIN64),
    ("remu", 0xDEADBEEF, 0, 0xDEADBEEF),
    ("div", MIN64, U64, MIN64),
    ("rem", MIN64, U64, 0),
    ("divw", 5, 0, U64),
    ("divuw", 5, 0, U64),
    ("remw", 0xFFFFFFFF00000007, 0, 7),
    ("remuw", 0x1234567887654321, 0, 0xFFFFFFFF87654321),
    ("divw", 0x80000000, U64, MIN32_X),
    ("remw", 0x80000000, U64, 0),
    ("mulh", U64, U64, 0),
    ("mulhu", U64, U64, U64 - 1),
    ("mulhsu", U64, U64, U64),
    ("mul", MIN64, U64, MIN64),
    ("mulw", 0x7FFFFFFF, 2, U64 - 1),
]


# -- Zbb ----------------------------------------------------------------------

def _bit(x: np.ndarray, i: int) -> np.ndarray:
    return (x >> np.uint64(i)) & np.uint64(1)


def _clz(x):
    out = np.zeros_like(x)
    done = np.zeros(x.shape, dtype=bool)
    for i in range(63, -1, -1):
        done |= _bit(x, i).astype(bool)
        out += (~done).astype(np.uint64)
    return out


def _ctz(x):
    out = np.zeros_like(x)
    done = np.zeros(x.shape, dtype=bool)
    for i in range(64):
        done |= _bit(x, i).astype(bool)
        out += (~done).astype(np.uint64)
    return out


def _cpop(x):
    out = np.zeros_like(x)
    for i in range(64):
        out += _bit(x, i)
    return out


def _byte(x, i):
    return (x >> np.uint64(8 * i)) & np.uint64(0xFF)


def _rev8(x):
    out = np.zeros_like(x)
    for i in range(8):
        out |= _byte(x, i) << np.uint64(8 * (7 - i))
    return out


def _orcb(x):
    out = np.zeros_like(x)
    for i in range(8):
        out |= np.where(_byte(x, i) != 0, np.uint64(0xFF), np.uint64(0)) << np.uint64(8 * i)
    return out


def _sext_from(x, bits):
    out = np.zeros_like(x)
    sign = _bit(x, bits - 1)
    for i in range(64):
        src = _bit(x, i) if i < bits else sign
        out |= src << np.uint64(i)
    return out


def _rotate(x, k, left):
    out = np.zeros_like(x)
    k = k & np.uint64(63)
    for i in range(64):
        # bit i of the result comes from bit (i - k) mod 64 for a left rotate
        if left:
            src = (np.uint64(i) - k) & np.uint64(63)
        else:
            src = (np.uint64(i) + k) & np.uint64(63)
        out |= ((x >> src) & np.uint64(1)) << np.uint64(i)
    return out


def _lt_signed(a, b):
    return a.view(np.int64) < b.view(np.int64)


def zbb_oracle(op: str, a: np.ndarray, b: np.ndarray | None = None) -> np.ndarray:
    """Vectorized over uint64 arrays; ``b`` is the rs2 value, or the shamt for rori."""
    a = np.asarray(a, dtype=np.uint64)
    if b is not None:
        b = np.asarray(b, dtype=np.uint64)
    if op == "andn":
        return a & ~b
    if op == "orn":
        return a | ~b
    if op == "xnor":
        return ~(a ^ b)
    if op == "min":
        return np.where(_lt_signed(a, b), a, b)
    if op == "max":
        return np.where(_lt_signed(a, b), b, a)
    if op == "minu":
        return np.where(a < b, a, b)
    if op == "maxu":
        return np.where(a < b, b, a)
    if op == "rol":
        return _rotate(a, b, left=True)
    if op in ("ror", "rori"):
        return _rotate(a, b, left=False)
    if op == "clz":
        return _clz(a)
    if op == "ctz":
        return _ctz(a)
    if op == "cpop":
        return _cpop(a)
    if op == "sext.b":
        return _sext_from(a, 8)
    if op == "sext.h":
        return _sext_from(a, 16)
    if op == "zext.h":
        return a & np.uint64(0xFFFF)
    if op == "rev8":
        return _rev8(a)
    if op == "orc.b":
        return _orcb(a)
    raise KeyError(op)


def replicated_patterns() -> np.ndarray:
    """All 2^16 16-bit patterns, each repeated four times across a 64-bit word."""
    p = np.arange(1 << 16, dtype=np.uint64)
    return p | (p << np.uint64(16)) | (p << np.uint64(32)) | (p << np.uint64(48))
