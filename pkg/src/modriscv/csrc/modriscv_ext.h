/*
 * Binary interface between the modriscv host and an extension module.
 *
 * A module is a shared library exporting
 *
 *     const modriscv_ext_info *modriscv_ext_entry(void);
 *
 * The returned record must stay valid until the library is unloaded.
 * abi_version is compared for equality with MODRISCV_ABI_VERSION.
 *
 * Per step the host calls ast_create, then decode. If decode returns 0 the
 * handle is killed immediately. Otherwise the host calls execute, optionally
 * print_insn, then ast_kill; no handle outlives a step. Module entry points
 * are never called concurrently and need not be reentrant.
 *
 * All architectural state lives in the host and is reached only through the
 * modriscv_state_access table. A module that returns MODRISCV_RETIRE_TRAP
 * must have called raise_trap exactly once during that execute call. On
 * MODRISCV_RETIRE_SUCCESS the host advances pc by 4 unless write_pc was
 * called.
 *
 * decode must be a pure function of the word: it may not read architectural
 * state, and the same word must always get the same answer. The host relies
 * on this to memoize which decoder claims a word.
 */
#ifndef MODRISCV_EXT_H
#define MODRISCV_EXT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define MODRISCV_ABI_VERSION 1
#define MODRISCV_ENTRY_SYMBOL "modriscv_ext_entry"

enum {
    MODRISCV_RETIRE_SUCCESS = 0,
    MODRISCV_RETIRE_TRAP = 1
};

enum {
    MODRISCV_CAUSE_ILLEGAL_INSTRUCTION = 2,
    MODRISCV_CAUSE_BREAKPOINT = 3,
    MODRISCV_CAUSE_LOAD_ACCESS_FAULT = 5,
    MODRISCV_CAUSE_STORE_ACCESS_FAULT = 7,
    MODRISCV_CAUSE_ECALL_M = 11
};

typedef struct modriscv_state_access {
    void *state;
    uint64_t (*read_gpr)(void *state, uint32_t idx);
    void (*write_gpr)(void *state, uint32_t idx, uint64_t value);
    uint64_t (*read_pc)(void *state);
    void (*write_pc)(void *state, uint64_t pc);
    /* 0 on success, nonzero on access fault (no trap is taken) */
    int (*mem_load)(void *state, uint64_t addr, uint32_t size, uint64_t *out);
    int (*mem_store)(void *state, uint64_t addr, uint32_t size, uint64_t value);
    void (*raise_trap)(void *state, uint32_t cause, uint64_t tval);
    /* 0 on success, nonzero for unimplemented or read-only CSRs */
    int (*read_csr)(void *state, uint32_t csr, uint64_t *out);
    int (*write_csr)(void *state, uint32_t csr, uint64_t value);
} modriscv_state_access;

typedef void *modriscv_ast;

typedef struct modriscv_entry_points {
    int (*decode)(modriscv_ast ast, uint32_t word);
    int (*execute)(modriscv_ast ast, const modriscv_state_access *sa);
    /* snprintf semantics: returns the untruncated length */
    int (*print_insn)(modriscv_ast ast, char *buf, size_t len);
    modriscv_ast (*ast_create)(void);
    void (*ast_kill)(modriscv_ast ast);
    void (*init)(const modriscv_state_access *sa);
    void (*fini)(void);
    const char *(*isa_letters)(void);
} modriscv_entry_points;

typedef struct modriscv_ext_info {
    uint32_t abi_version;
    const char *name;
    const char *isa_letters;
    modriscv_entry_points entry;
} modriscv_ext_info;

typedef const modriscv_ext_info *(*modriscv_ext_entry_fn)(void);

#ifdef __cplusplus
}
#endif

#endif
