/* M extension decode and arithmetic, shared by the M module and the monolithic host. */
#ifndef MODRISCV_M_ALU_H
#define MODRISCV_M_ALU_H

#include <stdint.h>

enum m_op {
    M_MUL, M_MULH, M_MULHSU, M_MULHU, M_DIV, M_DIVU, M_REM, M_REMU,
    M_MULW, M_DIVW, M_DIVUW, M_REMW, M_REMUW,
    M_NUM_OPS
};

static const char *const m_op_names[M_NUM_OPS] = {
    "mul", "mulh", "mulhsu", "mulhu", "div", "divu", "rem", "remu",
    "mulw", "divw", "divuw", "remw", "remuw",
};

/* op index for an M encoding, -1 otherwise */
static inline int m_decode_op(uint32_t w)
{
    static const int8_t op32[8] = {M_MULW, -1, -1, -1, M_DIVW, M_DIVUW, M_REMW, M_REMUW};
    if ((w >> 25) != 1)
        return -1;
    switch (w & 0x7f) {
    case 0x33:
        return (int)((w >> 12) & 7);
    case 0x3b:
        return op32[(w >> 12) & 7];
    default:
        return -1;
    }
}

static inline uint64_t m_sext32(uint32_t v)
{
    return (uint64_t)(int64_t)(int32_t)v;
}

static inline uint64_t m_compute(int op, uint64_t a, uint64_t b)
{
    int64_t sa = (int64_t)a, sb = (int64_t)b;
    int32_t a32 = (int32_t)a, b32 = (int32_t)b;
    switch (op) {
    case M_MUL:
        return a * b;
    case M_MULH:
        return (uint64_t)(((__int128)sa * (__int128)sb) >> 64);
    case M_MULHSU:
        return (uint64_t)(((__int128)sa * (__int128)(unsigned __int128)b) >> 64);
    case M_MULHU:
        return (uint64_t)(((unsigned __int128)a * (unsigned __int128)b) >> 64);
    case M_DIV:
        if (b == 0)
            return UINT64_MAX;
        if (sa == INT64_MIN && sb == -1)
            return a;
        return (uint64_t)(sa / sb);
    case M_DIVU:
        return b == 0 ? UINT64_MAX : a / b;
    case M_REM:
        if (b == 0)
            return a;
        if (sa == INT64_MIN && sb == -1)
            return 0;
        return (uint64_t)(sa % sb);
    case M_REMU:
        return b == 0 ? a : a % b;
    case M_MULW:
        return m_sext32((uint32_t)a * (uint32_t)b);
    case M_DIVW:
        if (b32 == 0)
            return UINT64_MAX;
        if (a32 == INT32_MIN && b32 == -1)
            return m_sext32((uint32_t)a32);
        return m_sext32((uint32_t)(a32 / b32));
    case M_DIVUW:
        if ((uint32_t)b == 0)
            return UINT64_MAX;
        return m_sext32((uint32_t)a / (uint32_t)b);
    case M_REMW:
        if (b32 == 0)
            return m_sext32((uint32_t)a32);
        if (a32 == INT32_MIN && b32 == -1)
            return 0;
        return m_sext32((uint32_t)(a32 % b32));
    case M_REMUW:
        if ((uint32_t)b == 0)
            return m_sext32((uint32_t)a);
        return m_sext32((uint32_t)a % (uint32_t)b);
    }
    return 0;
}

#endif
