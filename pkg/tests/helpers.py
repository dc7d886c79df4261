from __future__ import annotations

import numpy as np

from modriscv.asm import assemble
from modriscv.emulator import NATIVE_AVAILABLE


def word_for(src: str) -> int:
    code, _ = assemble(src, 0x80000000)
    return int.from_bytes(code[:4], "little")


def native_batch(info: int, src: str, a, b=None) -> np.ndarray:
    """Run one module instruction per operand pair through the module's C entry points."""
    from modriscv import _host_base

    a = np.ascontiguousarray(a, dtype=np.uint64)
    b = np.ascontiguousarray(a if b is None else b, dtype=np.uint64)
    out = np.empty_like(a)
    _host_base.exec_batch(info, word_for(src), a, b, out)
    return out


def operands(rng: np.random.Generator, n: int) -> np.ndarray:
    """Random 64-bit values with extra weight on small, extreme and sign-boundary values."""
    x = rng.integers(0, 1 << 64, size=n, dtype=np.uint64, endpoint=False)
    special = np.array([0, 1, 2, (1 << 64) - 1, (1 << 64) - 2, 1 << 63, (1 << 63) - 1, 1 << 31, (1 << 31) - 1,
                        0xFFFFFFFF, 0xFFFFFFFF80000000, 0x80000000], dtype=np.uint64)
    pick = rng.random(n) < 0.1
    x[pick] = rng.choice(special, size=int(pick.sum()))
    small = rng.random(n) < 0.1
    x[small] = rng.integers(0, 64, size=int(small.sum()), dtype=np.uint64)
    return x


__all__ = ["NATIVE_AVAILABLE", "native_batch", "operands", "word_for"]
