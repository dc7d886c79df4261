#include "host.h"

#include <stdlib.h>
#include <string.h>

#ifdef MODSIM_MONOLITHIC
#include "m_alu.h"
#include "zbb_alu.h"
#endif

#if __BYTE_ORDER__ != __ORDER_LITTLE_ENDIAN__
#error "host memory access assumes a little-endian machine"
#endif

enum {
    OP_ILLEGAL,
    OP_LUI, OP_AUIPC, OP_JAL, OP_JALR,
    OP_BEQ, OP_BNE, OP_BLT, OP_BGE, OP_BLTU, OP_BGEU,
    OP_LB, OP_LH, OP_LW, OP_LD, OP_LBU, OP_LHU, OP_LWU,
    OP_SB, OP_SH, OP_SW, OP_SD,
    OP_ADDI, OP_SLTI, OP_SLTIU, OP_XORI, OP_ORI, OP_ANDI, OP_SLLI, OP_SRLI, OP_SRAI,
    OP_ADDIW, OP_SLLIW, OP_SRLIW, OP_SRAIW,
    OP_ADD, OP_SUB, OP_SLL, OP_SLT, OP_SLTU, OP_XOR, OP_SRL, OP_SRA, OP_OR, OP_AND,
    OP_ADDW, OP_SUBW, OP_SLLW, OP_SRLW, OP_SRAW,
    OP_FENCE, OP_FENCE_I, OP_ECALL, OP_EBREAK,
    OP_CSRRW, OP_CSRRS, OP_CSRRC, OP_CSRRWI, OP_CSRRSI, OP_CSRRCI,
    OP_MEXT, OP_ZBB,
    OP_COUNT
};

static const char *const op_names[OP_COUNT] = {
    "illegal",
    "lui", "auipc", "jal", "jalr",
    "beq", "bne", "blt", "bge", "bltu", "bgeu",
    "lb", "lh", "lw", "ld", "lbu", "lhu", "lwu",
    "sb", "sh", "sw", "sd",
    "addi", "slti", "sltiu", "xori", "ori", "andi", "slli", "srli", "srai",
    "addiw", "slliw", "srliw", "sraiw",
    "add", "sub", "sll", "slt", "sltu", "xor", "srl", "sra", "or", "and",
    "addw", "subw", "sllw", "srlw", "sraw",
    "fence", "fence.i", "ecall", "ebreak",
    "csrrw", "csrrs", "csrrc", "csrrwi", "csrrsi", "csrrci",
    "<m>", "<zbb>",
};

typedef struct inst {
    int op;
    int sub; /* M / Zbb operation for the monolithic build */
    uint32_t rd, rs1, rs2, csr;
    int64_t imm;
} inst;

#define RD(w) (((w) >> 7) & 31)
#define RS1(w) (((w) >> 15) & 31)
#define RS2(w) (((w) >> 20) & 31)
#define F3(w) (((w) >> 12) & 7)
#define F7(w) ((w) >> 25)

static inline int64_t imm_i(uint32_t w) { return (int64_t)(int32_t)w >> 20; }
static inline int64_t imm_s(uint32_t w) { return (int64_t)(((int32_t)w >> 25) * 32) | ((w >> 7) & 31); }
static inline int64_t imm_u(uint32_t w) { return (int64_t)(int32_t)(w & 0xfffff000u); }

static inline int64_t imm_b(uint32_t w)
{
    int64_t v = ((int64_t)(int32_t)w >> 31) * 4096;
    return v | ((w >> 7) & 1) << 11 | ((w >> 25) & 0x3f) << 5 | ((w >> 8) & 0xf) << 1;
}

static inline int64_t imm_j(uint32_t w)
{
    int64_t v = ((int64_t)(int32_t)w >> 31) * (1 << 20);
    return v | (w & 0xff000) | ((w >> 20) & 1) << 11 | ((w >> 21) & 0x3ff) << 1;
}

static inline int decode(uint32_t w, inst *d)
{
    uint32_t f3 = F3(w), f7 = F7(w);
    d->rd = RD(w);
    d->rs1 = RS1(w);
    d->rs2 = RS2(w);
    d->imm = 0;
    d->op = OP_ILLEGAL;
#ifdef MODSIM_MONOLITHIC
    {
        int sub = m_decode_op(w);
        if (sub >= 0) {
            d->sub = sub;
            return d->op = OP_MEXT;
        }
        sub = zbb_decode_op(w);
        if (sub >= 0) {
            d->sub = sub;
            d->imm = (w >> 20) & 63;
            return d->op = OP_ZBB;
        }
    }
#endif
    switch (w & 0x7f) {
    case 0x37:
        d->imm = imm_u(w);
        return d->op = OP_LUI;
    case 0x17:
        d->imm = imm_u(w);
        return d->op = OP_AUIPC;
    case 0x6f:
        d->imm = imm_j(w);
        return d->op = OP_JAL;
    case 0x67:
        if (f3 == 0) {
            d->imm = imm_i(w);
            d->op = OP_JALR;
        }
        return d->op;
    case 0x63: {
        static const int8_t br[8] = {OP_BEQ, OP_BNE, 0, 0, OP_BLT, OP_BGE, OP_BLTU, OP_BGEU};
        d->imm = imm_b(w);
        return d->op = br[f3];
    }
    case 0x03: {
        static const int8_t ld[8] = {OP_LB, OP_LH, OP_LW, OP_LD, OP_LBU, OP_LHU, OP_LWU, 0};
        d->imm = imm_i(w);
        return d->op = ld[f3];
    }
    case 0x23:
        d->imm = imm_s(w);
        return d->op = f3 < 4 ? OP_SB + (int)f3 : OP_ILLEGAL;
    case 0x13: {
        static const int8_t alu[8] = {OP_ADDI, 0, OP_SLTI, OP_SLTIU, OP_XORI, 0, OP_ORI, OP_ANDI};
        uint32_t top6 = w >> 26;
        if (alu[f3]) {
            d->imm = imm_i(w);
            return d->op = alu[f3];
        }
        d->imm = (w >> 20) & 63;
        if (f3 == 1 && top6 == 0)
            return d->op = OP_SLLI;
        if (f3 == 5 && top6 == 0)
            return d->op = OP_SRLI;
        if (f3 == 5 && top6 == 0x10)
            return d->op = OP_SRAI;
        return d->op;
    }
    case 0x1b:
        if (f3 == 0) {
            d->imm = imm_i(w);
            return d->op = OP_ADDIW;
        }
        d->imm = (w >> 20) & 31;
        if (f3 == 1 && f7 == 0)
            return d->op = OP_SLLIW;
        if (f3 == 5 && f7 == 0)
            return d->op = OP_SRLIW;
        if (f3 == 5 && f7 == 0x20)
            return d->op = OP_SRAIW;
        return d->op;
    case 0x33:
        if (f7 == 0) {
            static const int8_t r[8] = {OP_ADD, OP_SLL, OP_SLT, OP_SLTU, OP_XOR, OP_SRL, OP_OR, OP_AND};
            return d->op = r[f3];
        }
        if (f7 == 0x20) {
            if (f3 == 0)
                return d->op = OP_SUB;
            if (f3 == 5)
                return d->op = OP_SRA;
        }
        return d->op;
    case 0x3b:
        if (f7 == 0) {
            if (f3 == 0)
                return d->op = OP_ADDW;
            if (f3 == 1)
                return d->op = OP_SLLW;
            if (f3 == 5)
                return d->op = OP_SRLW;
        } else if (f7 == 0x20) {
            if (f3 == 0)
                return d->op = OP_SUBW;
            if (f3 == 5)
                return d->op = OP_SRAW;
        }
        return d->op;
    case 0x0f:
        if (f3 == 0 && d->rd == 0 && d->rs1 == 0)
            return d->op = OP_FENCE;
        if (w == 0x0000100f)
            return d->op = OP_FENCE_I;
        return d->op;
    case 0x73:
        if (w == 0x00000073)
            return d->op = OP_ECALL;
        if (w == 0x00100073)
            return d->op = OP_EBREAK;
        if (f3 == 0 || f3 == 4)
            return d->op;
        d->csr = w >> 20;
        if (f3 >= 5) {
            d->imm = d->rs1;
            d->rs1 = 0;
            return d->op = OP_CSRRWI + (int)(f3 - 5);
        }
        return d->op = OP_CSRRW + (int)(f3 - 1);
    }
    return d->op;
}

int modsim_base_legal(uint32_t w)
{
    inst d;
    if ((w & 3) != 3)
        return 0;
    return decode(w, &d) != OP_ILLEGAL;
}

#ifndef MODSIM_BUILTINS
const modriscv_ext_info *modsim_builtin(const char *name)
{
    (void)name;
    return NULL;
}
#endif

int modsim_monolithic(void)
{
#ifdef MODSIM_MONOLITHIC
    return 1;
#else
    return 0;
#endif
}

/* ---- state ---------------------------------------------------------------- */

uint64_t modsim_misa(const char *letters)
{
    uint64_t v = (uint64_t)2 << 62 | (uint64_t)1 << ('I' - 'A');
    for (; letters && *letters; letters++)
        if (*letters >= 'A' && *letters <= 'Z')
            v |= (uint64_t)1 << (*letters - 'A');
    return v;
}

static uint64_t sa_read_gpr(void *s, uint32_t i)
{
    return ((modsim_host *)s)->x[i & 31];
}

static inline void write_gpr(modsim_host *h, uint32_t i, uint64_t v)
{
    if (i) {
        h->x[i] = v;
        h->has_wb = 1;
        h->wb_rd = i;
        h->wb_val = v;
    }
}

static void sa_write_gpr(void *s, uint32_t i, uint64_t v)
{
    write_gpr(s, i & 31, v);
}

static uint64_t sa_read_pc(void *s)
{
    return ((modsim_host *)s)->pc;
}

static void sa_write_pc(void *s, uint64_t pc)
{
    modsim_host *h = s;
    h->next_pc = pc;
    h->pc_written = 1;
}

static inline int in_bounds(const modsim_host *h, uint64_t addr, uint32_t size)
{
    uint64_t off = addr - h->mem_base;
    return off <= h->mem_size && h->mem_size - off >= size;
}

int modsim_mem_load(modsim_host *h, uint64_t addr, uint32_t size, uint64_t *out)
{
    uint64_t v = 0;
    if (!in_bounds(h, addr, size))
        return 1;
    memcpy(&v, h->mem + (addr - h->mem_base), size);
    *out = v;
    return 0;
}

int modsim_mem_store(modsim_host *h, uint64_t addr, uint32_t size, uint64_t v)
{
    if (!in_bounds(h, addr, size))
        return 1;
    memcpy(h->mem + (addr - h->mem_base), &v, size);
    if (size == 8 && h->has_tohost && addr == h->tohost && (v & 1)) {
        h->halted = 1;
        h->exit_code = v >> 1;
    }
    return 0;
}

static int sa_mem_load(void *s, uint64_t addr, uint32_t size, uint64_t *out)
{
    if (size != 1 && size != 2 && size != 4 && size != 8)
        return 1;
    return modsim_mem_load(s, addr, size, out);
}

static int sa_mem_store(void *s, uint64_t addr, uint32_t size, uint64_t v)
{
    if (size != 1 && size != 2 && size != 4 && size != 8)
        return 1;
    return modsim_mem_store(s, addr, size, v);
}

void modsim_raise_trap(modsim_host *h, uint32_t cause, uint64_t tval)
{
    h->traps++;
    h->mepc = h->pc;
    h->mcause = cause;
    h->mtval = tval;
    if (h->mtvec == 0) {
        h->halted = 1;
        h->exit_code = MODSIM_FATAL_TRAP_EXIT;
        h->next_pc = h->pc;
    } else {
        h->next_pc = h->mtvec;
    }
}

static void sa_raise_trap(void *s, uint32_t cause, uint64_t tval)
{
    modsim_raise_trap(s, cause, tval);
}

int modsim_csr_read(modsim_host *h, uint32_t csr, uint64_t *out)
{
    switch (csr) {
    case 0x301: *out = h->misa; return 0;
    case 0xf14: *out = 0; return 0;
    case 0x305: *out = h->mtvec; return 0;
    case 0x341: *out = h->mepc; return 0;
    case 0x342: *out = h->mcause; return 0;
    case 0x343: *out = h->mtval; return 0;
    case 0xb00:
    case 0xb02: *out = h->minstret; return 0;
    }
    return 1;
}

int modsim_csr_write(modsim_host *h, uint32_t csr, uint64_t v)
{
    switch (csr) {
    case 0x301:
    case 0xb00:
    case 0xb02: return 0;
    case 0x305: h->mtvec = v & ~(uint64_t)3; return 0;
    case 0x341: h->mepc = v & ~(uint64_t)3; return 0;
    case 0x342: h->mcause = v; return 0;
    case 0x343: h->mtval = v; return 0;
    }
    return 1;
}

static int sa_read_csr(void *s, uint32_t csr, uint64_t *out)
{
    return modsim_csr_read(s, csr, out);
}

static int sa_write_csr(void *s, uint32_t csr, uint64_t v)
{
    return modsim_csr_write(s, csr, v);
}

int modsim_init(modsim_host *h, uint64_t mem_base, uint64_t mem_size)
{
    memset(h, 0, sizeof *h);
    h->mem = calloc(1, mem_size ? mem_size : 1);
    if (!h->mem)
        return -1;
    h->mem_base = mem_base;
    h->mem_size = mem_size;
    h->misa = modsim_misa(modsim_monolithic() ? "MB" : "");
    h->pc = mem_base;
    h->use_cache = 1;
    h->sa.state = h;
    h->sa.read_gpr = sa_read_gpr;
    h->sa.write_gpr = sa_write_gpr;
    h->sa.read_pc = sa_read_pc;
    h->sa.write_pc = sa_write_pc;
    h->sa.mem_load = sa_mem_load;
    h->sa.mem_store = sa_mem_store;
    h->sa.raise_trap = sa_raise_trap;
    h->sa.read_csr = sa_read_csr;
    h->sa.write_csr = sa_write_csr;
    return 0;
}

void modsim_free(modsim_host *h)
{
    free(h->mem);
    h->mem = NULL;
}

void modsim_reset(modsim_host *h, uint64_t entry)
{
    memset(h->x, 0, sizeof h->x);
    h->mtvec = h->mepc = h->mcause = h->mtval = h->minstret = 0;
    h->pc = entry;
    h->halted = 0;
    h->exit_code = 0;
    h->seq = 0;
}

/* ---- registry ------------------------------------------------------------- */

int modsim_register(modsim_host *h, const modriscv_ext_info *info)
{
    char letters[64];
    size_t n = 0;
    if (modsim_monolithic()) {
        snprintf(h->err_msg, sizeof h->err_msg, "the monolithic host has no module registry");
        return -1;
    }
    if (h->nmods >= MODSIM_MAX_MODULES) {
        snprintf(h->err_msg, sizeof h->err_msg, "too many modules");
        return -1;
    }
    h->mods[h->nmods++] = info;
    for (int i = 0; i < h->nmods; i++)
        for (const char *c = h->mods[i]->isa_letters; *c && n + 1 < sizeof letters; c++)
            letters[n++] = *c;
    letters[n] = 0;
    h->misa = modsim_misa(letters);
    memset(h->cache, 0, sizeof h->cache);
    info->entry.init(&h->sa);
    return 0;
}

void modsim_fini_modules(modsim_host *h)
{
    while (h->nmods > 0) {
        const modriscv_ext_info *info = h->mods[--h->nmods];
        info->entry.fini();
    }
    h->misa = modsim_misa(modsim_monolithic() ? "MB" : "");
    memset(h->cache, 0, sizeof h->cache);
}

#define OWNER_NONE (-2)
#define OWNER_BASE (-1)
#define OWNER_OVERLAP (-3)

static inline size_t cache_slot(uint32_t w)
{
    return (w ^ (w >> 12) ^ (w >> 20)) & (MODSIM_CACHE_SIZE - 1);
}

/* Probe every decoder; returns the owner or OWNER_OVERLAP. *handle holds the claimant's AST. */
static int dispatch_strict(modsim_host *h, uint32_t w, modriscv_ast *handle)
{
    int owner = OWNER_NONE;
    h->err_nclaims = 0;
    for (int i = 0; i < h->nmods; i++) {
        const modriscv_entry_points *ep = &h->mods[i]->entry;
        modriscv_ast a = ep->ast_create();
        if (ep->decode(a, w)) {
            h->err_claims[h->err_nclaims++] = i;
            if (owner == OWNER_NONE) {
                owner = i;
                *handle = a;
                continue;
            }
        }
        ep->ast_kill(a);
    }
    if (modsim_base_legal(w)) {
        h->err_claims[h->err_nclaims++] = -1;
        if (owner == OWNER_NONE)
            owner = OWNER_BASE;
    }
    if (h->err_nclaims > 1) {
        if (owner >= 0)
            h->mods[owner]->entry.ast_kill(*handle);
        h->err_word = w;
        return OWNER_OVERLAP;
    }
    return owner;
}

static inline int dispatch(modsim_host *h, uint32_t w, modriscv_ast *handle)
{
    uint64_t *slot = NULL;
    if (h->use_cache) {
        slot = &h->cache[cache_slot(w)];
        if ((*slot >> 63) && (uint32_t)*slot == w) {
            int owner = (int)((*slot >> 32) & 0xff) - 8;
            if (owner >= 0) {
                const modriscv_entry_points *ep = &h->mods[owner]->entry;
                *handle = ep->ast_create();
                ep->decode(*handle, w);
            }
            return owner;
        }
    }
    int owner = OWNER_BASE;
    if (h->strict_overlap) {
        owner = dispatch_strict(h, w, handle);
        if (owner == OWNER_OVERLAP)
            return owner;
    } else {
        for (int i = 0; i < h->nmods; i++) {
            const modriscv_entry_points *ep = &h->mods[i]->entry;
            modriscv_ast a = ep->ast_create();
            if (ep->decode(a, w)) {
                *handle = a;
                owner = i;
                break;
            }
            ep->ast_kill(a);
        }
        if (owner == OWNER_BASE && !modsim_base_legal(w))
            owner = OWNER_NONE;
    }
    if (slot)
        *slot = (uint64_t)1 << 63 | (uint64_t)(owner + 8) << 32 | w;
    return owner;
}

/* ---- execute -------------------------------------------------------------- */

static inline int csr_op(modsim_host *h, const inst *d, uint32_t w)
{
    uint64_t old, src, nv = 0;
    int writes;
    if (modsim_csr_read(h, d->csr, &old)) {
        modsim_raise_trap(h, MODRISCV_CAUSE_ILLEGAL_INSTRUCTION, w);
        return MODSIM_STEP_TRAPPED;
    }
    if (d->op >= OP_CSRRWI) {
        src = (uint64_t)d->imm;
        writes = d->op == OP_CSRRWI || src != 0;
    } else {
        src = h->x[d->rs1];
        writes = d->op == OP_CSRRW || d->rs1 != 0;
    }
    if (writes) {
        switch (d->op) {
        case OP_CSRRW: case OP_CSRRWI: nv = src; break;
        case OP_CSRRS: case OP_CSRRSI: nv = old | src; break;
        default: nv = old & ~src; break;
        }
        if ((d->csr >> 10) == 3 || modsim_csr_write(h, d->csr, nv)) {
            modsim_raise_trap(h, MODRISCV_CAUSE_ILLEGAL_INSTRUCTION, w);
            return MODSIM_STEP_TRAPPED;
        }
    }
    write_gpr(h, d->rd, old);
    return MODSIM_STEP_RETIRED;
}

#define LOAD(sz, type)                                                              \
    do {                                                                            \
        uint64_t addr = h->x[d->rs1] + (uint64_t)d->imm;                            \
        if (!in_bounds(h, addr, sz)) {                                              \
            modsim_raise_trap(h, MODRISCV_CAUSE_LOAD_ACCESS_FAULT, addr);           \
            return MODSIM_STEP_TRAPPED;                                             \
        }                                                                           \
        type v_;                                                                    \
        memcpy(&v_, h->mem + (addr - h->mem_base), sz);                             \
        write_gpr(h, d->rd, (uint64_t)v_);                                          \
    } while (0)

#define STORE(sz)                                                                   \
    do {                                                                            \
        uint64_t addr = h->x[d->rs1] + (uint64_t)d->imm;                            \
        if (modsim_mem_store(h, addr, sz, h->x[d->rs2])) {                          \
            modsim_raise_trap(h, MODRISCV_CAUSE_STORE_ACCESS_FAULT, addr);          \
            return MODSIM_STEP_TRAPPED;                                             \
        }                                                                           \
    } while (0)

static inline uint64_t sx32(uint64_t v) { return (uint64_t)(int64_t)(int32_t)v; }

/* d->op is never OP_ILLEGAL here */
static inline int execute(modsim_host *h, const inst *d, uint32_t w)
{
    const uint64_t a = h->x[d->rs1], b = h->x[d->rs2];
    const uint64_t imm = (uint64_t)d->imm;
    const uint64_t pc = h->pc;
    switch (d->op) {
    case OP_LUI: write_gpr(h, d->rd, imm); break;
    case OP_AUIPC: write_gpr(h, d->rd, pc + imm); break;
    case OP_JAL:
        write_gpr(h, d->rd, pc + 4);
        h->next_pc = pc + imm;
        break;
    case OP_JALR:
        write_gpr(h, d->rd, pc + 4);
        h->next_pc = (a + imm) & ~(uint64_t)1;
        break;
    case OP_BEQ: if (a == b) h->next_pc = pc + imm; break;
    case OP_BNE: if (a != b) h->next_pc = pc + imm; break;
    case OP_BLT: if ((int64_t)a < (int64_t)b) h->next_pc = pc + imm; break;
    case OP_BGE: if ((int64_t)a >= (int64_t)b) h->next_pc = pc + imm; break;
    case OP_BLTU: if (a < b) h->next_pc = pc + imm; break;
    case OP_BGEU: if (a >= b) h->next_pc = pc + imm; break;
    case OP_LB: LOAD(1, int8_t); break;
    case OP_LH: LOAD(2, int16_t); break;
    case OP_LW: LOAD(4, int32_t); break;
    case OP_LD: LOAD(8, uint64_t); break;
    case OP_LBU: LOAD(1, uint8_t); break;
    case OP_LHU: LOAD(2, uint16_t); break;
    case OP_LWU: LOAD(4, uint32_t); break;
    case OP_SB: STORE(1); break;
    case OP_SH: STORE(2); break;
    case OP_SW: STORE(4); break;
    case OP_SD: STORE(8); break;
    case OP_ADDI: write_gpr(h, d->rd, a + imm); break;
    case OP_SLTI: write_gpr(h, d->rd, (int64_t)a < (int64_t)imm); break;
    case OP_SLTIU: write_gpr(h, d->rd, a < imm); break;
    case OP_XORI: write_gpr(h, d->rd, a ^ imm); break;
    case OP_ORI: write_gpr(h, d->rd, a | imm); break;
    case OP_ANDI: write_gpr(h, d->rd, a & imm); break;
    case OP_SLLI: write_gpr(h, d->rd, a << imm); break;
    case OP_SRLI: write_gpr(h, d->rd, a >> imm); break;
    case OP_SRAI: write_gpr(h, d->rd, (uint64_t)((int64_t)a >> imm)); break;
    case OP_ADDIW: write_gpr(h, d->rd, sx32(a + imm)); break;
    case OP_SLLIW: write_gpr(h, d->rd, sx32((uint32_t)a << imm)); break;
    case OP_SRLIW: write_gpr(h, d->rd, sx32((uint32_t)a >> imm)); break;
    case OP_SRAIW: write_gpr(h, d->rd, (uint64_t)(int64_t)((int32_t)a >> imm)); break;
    case OP_ADD: write_gpr(h, d->rd, a + b); break;
    case OP_SUB: write_gpr(h, d->rd, a - b); break;
    case OP_SLL: write_gpr(h, d->rd, a << (b & 63)); break;
    case OP_SLT: write_gpr(h, d->rd, (int64_t)a < (int64_t)b); break;
    case OP_SLTU: write_gpr(h, d->rd, a < b); break;
    case OP_XOR: write_gpr(h, d->rd, a ^ b); break;
    case OP_SRL: write_gpr(h, d->rd, a >> (b & 63)); break;
    case OP_SRA: write_gpr(h, d->rd, (uint64_t)((int64_t)a >> (b & 63))); break;
    case OP_OR: write_gpr(h, d->rd, a | b); break;
    case OP_AND: write_gpr(h, d->rd, a & b); break;
    case OP_ADDW: write_gpr(h, d->rd, sx32(a + b)); break;
    case OP_SUBW: write_gpr(h, d->rd, sx32(a - b)); break;
    case OP_SLLW: write_gpr(h, d->rd, sx32((uint32_t)a << (b & 31))); break;
    case OP_SRLW: write_gpr(h, d->rd, sx32((uint32_t)a >> (b & 31))); break;
    case OP_SRAW: write_gpr(h, d->rd, (uint64_t)(int64_t)((int32_t)a >> (b & 31))); break;
    case OP_FENCE:
    case OP_FENCE_I: break;
    case OP_ECALL:
        modsim_raise_trap(h, MODRISCV_CAUSE_ECALL_M, 0);
        return MODSIM_STEP_TRAPPED;
    case OP_EBREAK:
        modsim_raise_trap(h, MODRISCV_CAUSE_BREAKPOINT, pc);
        return MODSIM_STEP_TRAPPED;
    case OP_CSRRW: case OP_CSRRS: case OP_CSRRC:
    case OP_CSRRWI: case OP_CSRRSI: case OP_CSRRCI:
        return csr_op(h, d, w);
#ifdef MODSIM_MONOLITHIC
    case OP_MEXT: write_gpr(h, d->rd, m_compute(d->sub, a, b)); break;
    case OP_ZBB:
        write_gpr(h, d->rd, zbb_compute(d->sub, a, d->sub == ZBB_RORI ? imm : b));
        break;
#endif
    }
    return MODSIM_STEP_RETIRED;
}

/* ---- disassembly ---------------------------------------------------------- */

static int disasm_inst(const inst *d, uint32_t w, char *buf, size_t len)
{
    const char *n = op_names[d->op];
    switch (d->op) {
    case OP_ILLEGAL:
        return snprintf(buf, len, ".word 0x%08x", w);
#ifdef MODSIM_MONOLITHIC
    case OP_MEXT:
        return snprintf(buf, len, "%s x%u, x%u, x%u", m_op_names[d->sub], d->rd, d->rs1, d->rs2);
    case OP_ZBB:
        if (d->sub == ZBB_RORI)
            return snprintf(buf, len, "rori x%u, x%u, %lld", d->rd, d->rs1, (long long)d->imm);
        if (zbb_is_binary(d->sub))
            return snprintf(buf, len, "%s x%u, x%u, x%u", zbb_op_names[d->sub], d->rd, d->rs1, d->rs2);
        return snprintf(buf, len, "%s x%u, x%u", zbb_op_names[d->sub], d->rd, d->rs1);
#endif
    case OP_LUI: case OP_AUIPC:
        return snprintf(buf, len, "%s x%u, %lld", n, d->rd, (long long)(d->imm >> 12));
    case OP_JAL:
        return snprintf(buf, len, "jal x%u, %lld", d->rd, (long long)d->imm);
    case OP_JALR: case OP_LB: case OP_LH: case OP_LW: case OP_LD: case OP_LBU: case OP_LHU: case OP_LWU:
        return snprintf(buf, len, "%s x%u, %lld(x%u)", n, d->rd, (long long)d->imm, d->rs1);
    case OP_SB: case OP_SH: case OP_SW: case OP_SD:
        return snprintf(buf, len, "%s x%u, %lld(x%u)", n, d->rs2, (long long)d->imm, d->rs1);
    case OP_BEQ: case OP_BNE: case OP_BLT: case OP_BGE: case OP_BLTU: case OP_BGEU:
        return snprintf(buf, len, "%s x%u, x%u, %lld", n, d->rs1, d->rs2, (long long)d->imm);
    case OP_FENCE: case OP_FENCE_I: case OP_ECALL: case OP_EBREAK:
        return snprintf(buf, len, "%s", n);
    case OP_CSRRW: case OP_CSRRS: case OP_CSRRC:
        return snprintf(buf, len, "%s x%u, 0x%03x, x%u", n, d->rd, d->csr, d->rs1);
    case OP_CSRRWI: case OP_CSRRSI: case OP_CSRRCI:
        return snprintf(buf, len, "%s x%u, 0x%03x, %lld", n, d->rd, d->csr, (long long)d->imm);
    }
    if (d->op >= OP_ADD && d->op <= OP_SRAW)
        return snprintf(buf, len, "%s x%u, x%u, x%u", n, d->rd, d->rs1, d->rs2);
    return snprintf(buf, len, "%s x%u, x%u, %lld", n, d->rd, d->rs1, (long long)d->imm);
}

int modsim_base_disasm(uint32_t w, char *buf, size_t len)
{
    inst d;
    if ((w & 3) != 3)
        d.op = OP_ILLEGAL;
    else
        decode(w, &d);
    return disasm_inst(&d, w, buf, len);
}

/* ---- step and run --------------------------------------------------------- */

int modsim_step(modsim_host *h, modsim_record *rec)
{
    const uint64_t pc = h->pc;
    uint32_t w = 0;
    int result;
    inst d;

    h->next_pc = pc + 4;
    h->has_wb = 0;
    h->traps = 0;
    h->pc_written = 0;
    if (rec) {
        rec->seq = h->seq;
        rec->pc = pc;
    }
    h->seq++;

    if (!in_bounds(h, pc, 4)) {
        modsim_raise_trap(h, MODRISCV_CAUSE_LOAD_ACCESS_FAULT, pc);
        result = MODSIM_STEP_TRAPPED;
        if (rec)
            snprintf(rec->disasm, sizeof rec->disasm, "<fetch fault>");
        goto commit;
    }
    memcpy(&w, h->mem + (pc - h->mem_base), 4);

    if (h->nmods) {
        modriscv_ast handle = NULL;
        int owner = dispatch(h, w, &handle);
        if (owner == OWNER_OVERLAP) {
            snprintf(h->err_msg, sizeof h->err_msg, "word 0x%08x has %d claimants", w, h->err_nclaims);
            h->seq--;
            return MODSIM_ERR_OVERLAP;
        }
        if (owner >= 0) {
            const modriscv_entry_points *ep = &h->mods[owner]->entry;
            int r = ep->execute(handle, &h->sa);
            if (rec)
                ep->print_insn(handle, rec->disasm, sizeof rec->disasm);
            ep->ast_kill(handle);
            if ((r == MODRISCV_RETIRE_TRAP) != (h->traps == 1) || (r != MODRISCV_RETIRE_TRAP && h->traps)) {
                snprintf(h->err_msg, sizeof h->err_msg,
                         "module '%s' returned %d after %d raise_trap calls", h->mods[owner]->name, r, h->traps);
                return MODSIM_ERR_CONTRACT;
            }
            result = r == MODRISCV_RETIRE_TRAP ? MODSIM_STEP_TRAPPED : MODSIM_STEP_RETIRED;
            goto commit;
        }
        if (owner == OWNER_NONE) {
            modsim_raise_trap(h, MODRISCV_CAUSE_ILLEGAL_INSTRUCTION, w);
            result = MODSIM_STEP_TRAPPED;
            if (rec)
                snprintf(rec->disasm, sizeof rec->disasm, ".word 0x%08x", w);
            goto commit;
        }
    }

    if ((w & 3) != 3 || decode(w, &d) == OP_ILLEGAL) {
        modsim_raise_trap(h, MODRISCV_CAUSE_ILLEGAL_INSTRUCTION, w);
        result = MODSIM_STEP_TRAPPED;
        if (rec)
            snprintf(rec->disasm, sizeof rec->disasm, ".word 0x%08x", w);
        goto commit;
    }
    result = execute(h, &d, w);
    if (rec)
        disasm_inst(&d, w, rec->disasm, sizeof rec->disasm);

commit:
    if (result == MODSIM_STEP_RETIRED)
        h->minstret++;
    h->pc = h->next_pc;
    if (rec) {
        rec->raw = w;
        rec->trapped = result == MODSIM_STEP_TRAPPED;
        rec->has_wb = h->has_wb;
        rec->wb_rd = h->wb_rd;
        rec->wb_val = h->wb_val;
        rec->cause = h->mcause;
        rec->tval = h->mtval;
    }
    return result;
}

int modsim_format_record(const modsim_record *r, char *buf, size_t len)
{
    int n = snprintf(buf, len, "S %llu PC 0x%016llx I 0x%08x \"%s\"", (unsigned long long)r->seq,
                     (unsigned long long)r->pc, r->raw, r->disasm);
    if (n < 0 || (size_t)n >= len)
        return n;
    if (r->trapped)
        n += snprintf(buf + n, len - n, " T cause=%llu tval=0x%016llx\n", (unsigned long long)r->cause,
                      (unsigned long long)r->tval);
    else if (r->has_wb)
        n += snprintf(buf + n, len - n, " W x%u=0x%016llx\n", r->wb_rd, (unsigned long long)r->wb_val);
    else
        n += snprintf(buf + n, len - n, "\n");
    return n;
}

int modsim_run(modsim_host *h, uint64_t max_steps, FILE *trace, uint64_t *steps)
{
    uint64_t n = 0;
    int status = MODSIM_RUN_CAP;
    if (trace) {
        modsim_record rec;
        char line[256];
        while (n < max_steps && !h->halted) {
            int r = modsim_step(h, &rec);
            if (r < 0) {
                status = r;
                goto out;
            }
            n++;
            int len = modsim_format_record(&rec, line, sizeof line);
            if (len < 0 || fwrite(line, 1, (size_t)len, trace) != (size_t)len) {
                status = MODSIM_RUN_TRACE_IO;
                goto out;
            }
        }
        if (fflush(trace) != 0 || ferror(trace)) {
            status = MODSIM_RUN_TRACE_IO;
            goto out;
        }
    } else {
        while (n < max_steps && !h->halted) {
            int r = modsim_step(h, NULL);
            if (r < 0) {
                status = r;
                goto out;
            }
            n++;
        }
    }
    if (h->halted)
        status = MODSIM_RUN_HALTED;
out:
    if (steps)
        *steps = n;
    return status;
}

/* ---- kernel test hook ----------------------------------------------------- */

int modsim_exec_batch(const modriscv_ext_info *info, uint32_t word, const uint64_t *a, const uint64_t *b,
                      uint64_t *out, size_t n)
{
    modsim_host h;
    const modriscv_entry_points *ep = &info->entry;
    uint32_t rd = RD(word), rs1 = RS1(word), rs2 = RS2(word);
    if (modsim_init(&h, 0x80000000u, 4096))
        return -1;
    for (size_t i = 0; i < n; i++) {
        modriscv_ast ast = ep->ast_create();
        if (!ep->decode(ast, word)) {
            ep->ast_kill(ast);
            modsim_free(&h);
            return -2;
        }
        h.x[rs1] = a[i];
        if (rs2 != rs1)
            h.x[rs2] = b[i];
        h.x[0] = 0;
        ep->execute(ast, &h.sa);
        ep->ast_kill(ast);
        out[i] = h.x[rd];
    }
    modsim_free(&h);
    return 0;
}
