/*
 * Configurable test module. Compile-time knobs:
 *   TESTMOD_VERSION   abi_version to report (default MODRISCV_ABI_VERSION)
 *   TESTMOD_NAME, TESTMOD_LETTERS
 *   TESTMOD_MASK, TESTMOD_MATCH   claims words with (w & MASK) == MATCH
 *   TESTMOD_BAD_TRAP  execute returns RETIRE_TRAP without raising a trap
 * A claimed word writes 0x5a5a into rd.
 */
#include <stdio.h>

#include "modriscv_ext.h"

#ifndef TESTMOD_VERSION
#define TESTMOD_VERSION MODRISCV_ABI_VERSION
#endif
#ifndef TESTMOD_NAME
#define TESTMOD_NAME "testmod"
#endif
#ifndef TESTMOD_LETTERS
#define TESTMOD_LETTERS "X"
#endif
#ifndef TESTMOD_MASK
#define TESTMOD_MASK 0xfe00707fu
#endif
#ifndef TESTMOD_MATCH
#define TESTMOD_MATCH 0x02000033u /* MUL */
#endif

static uint32_t slot;

static modriscv_ast t_create(void) { return &slot; }
static void t_kill(modriscv_ast a) { (void)a; }

static int t_decode(modriscv_ast a, uint32_t w)
{
    *(uint32_t *)a = w;
    return (w & TESTMOD_MASK) == TESTMOD_MATCH;
}

static int t_execute(modriscv_ast a, const modriscv_state_access *sa)
{
#ifdef TESTMOD_BAD_TRAP
    (void)a;
    (void)sa;
    return MODRISCV_RETIRE_TRAP;
#else
    sa->write_gpr(sa->state, (*(uint32_t *)a >> 7) & 31, 0x5a5a);
    return MODRISCV_RETIRE_SUCCESS;
#endif
}

static int t_print(modriscv_ast a, char *buf, size_t len)
{
    return snprintf(buf, len, "%s.op x%u", TESTMOD_NAME, (*(uint32_t *)a >> 7) & 31);
}

static void t_init(const modriscv_state_access *sa) { (void)sa; }
static void t_fini(void) {}
static const char *t_letters(void) { return TESTMOD_LETTERS; }

static const modriscv_ext_info info = {
    TESTMOD_VERSION, TESTMOD_NAME, TESTMOD_LETTERS,
    {t_decode, t_execute, t_print, t_create, t_kill, t_init, t_fini, t_letters},
};

__attribute__((visibility("default"))) const modriscv_ext_info *modriscv_ext_entry(void)
{
    return &info;
}
