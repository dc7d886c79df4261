/* Zbb subset module (claims ISA letter B). Same dual build as ext_m.c. */
#include <stdio.h>
#include <stdlib.h>

#include "modriscv_ext.h"
#include "zbb_alu.h"

#ifndef MODRISCV_EXT_ENTRY
#define MODRISCV_EXT_ENTRY modriscv_ext_entry
#define MODRISCV_EXT_EXPORT __attribute__((visibility("default")))
#endif

typedef struct zbb_ast {
    int op;
    uint32_t rd, rs1, rs2, shamt;
    uint32_t raw;
    int in_pool;
} zbb_ast;

static zbb_ast zbb_pool[2];
static int zbb_pool_used[2];

static modriscv_ast zbb_ast_create(void)
{
    for (int i = 0; i < 2; i++) {
        if (!zbb_pool_used[i]) {
            zbb_pool_used[i] = 1;
            zbb_pool[i].in_pool = 1;
            return &zbb_pool[i];
        }
    }
    return calloc(1, sizeof(zbb_ast));
}

static void zbb_ast_kill(modriscv_ast h)
{
    zbb_ast *a = h;
    if (!a)
        return;
    if (a->in_pool)
        zbb_pool_used[a - zbb_pool] = 0;
    else
        free(a);
}

static int zbb_decode(modriscv_ast h, uint32_t word)
{
    zbb_ast *a = h;
    a->raw = word;
    a->op = zbb_decode_op(word);
    if (a->op < 0)
        return 0;
    a->rd = (word >> 7) & 31;
    a->rs1 = (word >> 15) & 31;
    a->rs2 = (word >> 20) & 31;
    a->shamt = (word >> 20) & 63;
    return 1;
}

static int zbb_execute(modriscv_ast h, const modriscv_state_access *sa)
{
    const zbb_ast *a = h;
    uint64_t x = sa->read_gpr(sa->state, a->rs1);
    uint64_t y = 0;
    if (a->op == ZBB_RORI)
        y = a->shamt;
    else if (zbb_is_binary(a->op))
        y = sa->read_gpr(sa->state, a->rs2);
    sa->write_gpr(sa->state, a->rd, zbb_compute(a->op, x, y));
    return MODRISCV_RETIRE_SUCCESS;
}

static int zbb_print_insn(modriscv_ast h, char *buf, size_t len)
{
    const zbb_ast *a = h;
    if (a->op < 0)
        return snprintf(buf, len, ".word 0x%08x", a->raw);
    if (a->op == ZBB_RORI)
        return snprintf(buf, len, "rori x%u, x%u, %u", a->rd, a->rs1, a->shamt);
    if (zbb_is_binary(a->op))
        return snprintf(buf, len, "%s x%u, x%u, x%u", zbb_op_names[a->op], a->rd, a->rs1, a->rs2);
    return snprintf(buf, len, "%s x%u, x%u", zbb_op_names[a->op], a->rd, a->rs1);
}

static void zbb_init(const modriscv_state_access *sa)
{
    (void)sa;
    zbb_pool_used[0] = zbb_pool_used[1] = 0;
}

static void zbb_fini(void)
{
}

static const char *zbb_isa_letters(void)
{
    return "B";
}

static const modriscv_ext_info zbb_info = {
    MODRISCV_ABI_VERSION,
    "zbb",
    "B",
    {zbb_decode, zbb_execute, zbb_print_insn, zbb_ast_create, zbb_ast_kill, zbb_init, zbb_fini,
     zbb_isa_letters},
};

#ifdef MODRISCV_EXT_EXPORT
MODRISCV_EXT_EXPORT
#endif
const modriscv_ext_info *MODRISCV_EXT_ENTRY(void)
{
    return &zbb_info;
}
