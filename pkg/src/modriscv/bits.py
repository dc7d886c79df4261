"""Field extraction and integer helpers shared by the decoders."""

MASK32 = 0xFFFFFFFF
MASK64 = (1 << 64) - 1


def sext(value: int, bits: int) -> int:
    """Interpret the low ``bits`` of ``value`` as two's complement."""
    value &= (1 << bits) - 1
    return value - (1 << bits) if value >> (bits - 1) else value


def to_signed(value: int) -> int:
    return sext(value, 64)


def sext32(value: int) -> int:
    """Sign-extend the low 32 bits of ``value`` to an unsigned 64-bit value."""
    return sext(value, 32) & MASK64


def opcode(w: int) -> int:
    return w & 0x7F


def rd(w: int) -> int:
    return (w >> 7) & 0x1F


def funct3(w: int) -> int:
    return (w >> 12) & 0x7


def rs1(w: int) -> int:
    return (w >> 15) & 0x1F


def rs2(w: int) -> int:
    return (w >> 20) & 0x1F


def funct7(w: int) -> int:
    return w >> 25


def imm_i(w: int) -> int:
    return sext(w >> 20, 12)


def imm_s(w: int) -> int:
    return sext(((w >> 25) << 5) | ((w >> 7) & 0x1F), 12)


def imm_b(w: int) -> int:
    v = (((w >> 31) & 1) << 12) | (((w >> 7) & 1) << 11) | (((w >> 25) & 0x3F) << 5) | (((w >> 8) & 0xF) << 1)
    return sext(v, 13)


def imm_u(w: int) -> int:
    return sext(w & 0xFFFFF000, 32)


def imm_j(w: int) -> int:
    v = (((w >> 31) & 1) << 20) | (((w >> 12) & 0xFF) << 12) | (((w >> 20) & 1) << 11) | (((w >> 21) & 0x3FF) << 1)
    return sext(v, 21)
