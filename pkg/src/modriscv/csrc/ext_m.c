/*
 * M extension module. Built as a standalone shared library and, through
 * builtins.c, linked into the static-modular host under another entry name.
 */
#include <stdio.h>
#include <stdlib.h>

#include "modriscv_ext.h"
#include "m_alu.h"

#ifndef MODRISCV_EXT_ENTRY
#define MODRISCV_EXT_ENTRY modriscv_ext_entry
#define MODRISCV_EXT_EXPORT __attribute__((visibility("default")))
#endif

typedef struct m_ast {
    int op;
    uint32_t rd, rs1, rs2;
    uint32_t raw;
    int in_pool;
} m_ast;

/* handles never outlive a step, so two pooled slots cover normal and strict dispatch */
static m_ast m_pool[2];
static int m_pool_used[2];

static modriscv_ast m_ast_create(void)
{
    for (int i = 0; i < 2; i++) {
        if (!m_pool_used[i]) {
            m_pool_used[i] = 1;
            m_pool[i].in_pool = 1;
            return &m_pool[i];
        }
    }
    m_ast *a = calloc(1, sizeof *a);
    return a;
}

static void m_ast_kill(modriscv_ast h)
{
    m_ast *a = h;
    if (!a)
        return;
    if (a->in_pool)
        m_pool_used[a - m_pool] = 0;
    else
        free(a);
}

static int m_decode(modriscv_ast h, uint32_t word)
{
    m_ast *a = h;
    a->raw = word;
    a->op = m_decode_op(word);
    if (a->op < 0)
        return 0;
    a->rd = (word >> 7) & 31;
    a->rs1 = (word >> 15) & 31;
    a->rs2 = (word >> 20) & 31;
    return 1;
}

static int m_execute(modriscv_ast h, const modriscv_state_access *sa)
{
    const m_ast *a = h;
    uint64_t x = sa->read_gpr(sa->state, a->rs1);
    uint64_t y = sa->read_gpr(sa->state, a->rs2);
    sa->write_gpr(sa->state, a->rd, m_compute(a->op, x, y));
    return MODRISCV_RETIRE_SUCCESS;
}

static int m_print_insn(modriscv_ast h, char *buf, size_t len)
{
    const m_ast *a = h;
    if (a->op < 0)
        return snprintf(buf, len, ".word 0x%08x", a->raw);
    return snprintf(buf, len, "%s x%u, x%u, x%u", m_op_names[a->op], a->rd, a->rs1, a->rs2);
}

static void m_init(const modriscv_state_access *sa)
{
    (void)sa;
    m_pool_used[0] = m_pool_used[1] = 0;
}

static void m_fini(void)
{
}

static const char *m_isa_letters(void)
{
    return "M";
}

static const modriscv_ext_info m_info = {
    MODRISCV_ABI_VERSION,
    "m",
    "M",
    {m_decode, m_execute, m_print_insn, m_ast_create, m_ast_kill, m_init, m_fini, m_isa_letters},
};

#ifdef MODRISCV_EXT_EXPORT
MODRISCV_EXT_EXPORT
#endif
const modriscv_ext_info *MODRISCV_EXT_ENTRY(void)
{
    return &m_info;
}
