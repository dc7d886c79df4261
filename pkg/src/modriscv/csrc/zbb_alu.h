/* Zbb subset decode and arithmetic, shared by the Zbb module and the monolithic host. */
#ifndef MODRISCV_ZBB_ALU_H
#define MODRISCV_ZBB_ALU_H

#include <stdint.h>

enum zbb_op {
    ZBB_ANDN, ZBB_ORN, ZBB_XNOR, ZBB_MIN, ZBB_MINU, ZBB_MAX, ZBB_MAXU, ZBB_ROL, ZBB_ROR,
    ZBB_CLZ, ZBB_CTZ, ZBB_CPOP, ZBB_SEXT_B, ZBB_SEXT_H, ZBB_ZEXT_H, ZBB_REV8, ZBB_ORC_B,
    ZBB_RORI,
    ZBB_NUM_OPS
};

static const char *const zbb_op_names[ZBB_NUM_OPS] = {
    "andn", "orn", "xnor", "min", "minu", "max", "maxu", "rol", "ror",
    "clz", "ctz", "cpop", "sext.b", "sext.h", "zext.h", "rev8", "orc.b",
    "rori",
};

/* ops reading rs2 */
static inline int zbb_is_binary(int op)
{
    return op <= ZBB_ROR;
}

/* op index for a Zbb-subset encoding, -1 otherwise */
static inline int zbb_decode_op(uint32_t w)
{
    uint32_t f3 = (w >> 12) & 7, f7 = w >> 25, imm = w >> 20;
    switch (w & 0x7f) {
    case 0x33:
        if (f7 == 0x20)
            return f3 == 7 ? ZBB_ANDN : f3 == 6 ? ZBB_ORN : f3 == 4 ? ZBB_XNOR : -1;
        if (f7 == 0x05)
            return f3 == 4 ? ZBB_MIN : f3 == 5 ? ZBB_MINU : f3 == 6 ? ZBB_MAX : f3 == 7 ? ZBB_MAXU : -1;
        if (f7 == 0x30)
            return f3 == 1 ? ZBB_ROL : f3 == 5 ? ZBB_ROR : -1;
        return -1;
    case 0x13:
        if (f3 == 1) {
            switch (imm) {
            case 0x600: return ZBB_CLZ;
            case 0x601: return ZBB_CTZ;
            case 0x602: return ZBB_CPOP;
            case 0x604: return ZBB_SEXT_B;
            case 0x605: return ZBB_SEXT_H;
            }
            return -1;
        }
        if (f3 == 5) {
            if ((imm >> 6) == 0x18)
                return ZBB_RORI;
            if (imm == 0x6b8)
                return ZBB_REV8;
            if (imm == 0x287)
                return ZBB_ORC_B;
        }
        return -1;
    case 0x3b:
        return (f3 == 4 && imm == 0x080) ? ZBB_ZEXT_H : -1;
    }
    return -1;
}

static inline uint64_t zbb_rotl(uint64_t x, unsigned k)
{
    k &= 63;
    return k ? (x << k) | (x >> (64 - k)) : x;
}

/* b is rs2 for binary ops and the shift amount for rori */
static inline uint64_t zbb_compute(int op, uint64_t a, uint64_t b)
{
    switch (op) {
    case ZBB_ANDN: return a & ~b;
    case ZBB_ORN: return a | ~b;
    case ZBB_XNOR: return ~(a ^ b);
    case ZBB_MIN: return (int64_t)a < (int64_t)b ? a : b;
    case ZBB_MAX: return (int64_t)a > (int64_t)b ? a : b;
    case ZBB_MINU: return a < b ? a : b;
    case ZBB_MAXU: return a > b ? a : b;
    case ZBB_ROL: return zbb_rotl(a, (unsigned)(b & 63));
    case ZBB_ROR:
    case ZBB_RORI: return zbb_rotl(a, (unsigned)((64 - (b & 63)) & 63));
    case ZBB_CLZ: return a ? (uint64_t)__builtin_clzll(a) : 64;
    case ZBB_CTZ: return a ? (uint64_t)__builtin_ctzll(a) : 64;
    case ZBB_CPOP: return (uint64_t)__builtin_popcountll(a);
    case ZBB_SEXT_B: return (uint64_t)(int64_t)(int8_t)a;
    case ZBB_SEXT_H: return (uint64_t)(int64_t)(int16_t)a;
    case ZBB_ZEXT_H: return a & 0xffff;
    case ZBB_REV8: return __builtin_bswap64(a);
    case ZBB_ORC_B: {
        uint64_t r = 0;
        for (int i = 0; i < 64; i += 8)
            if ((a >> i) & 0xff)
                r |= (uint64_t)0xff << i;
        return r;
    }
    }
    return 0;
}

#endif
