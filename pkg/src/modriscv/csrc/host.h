/*
 * Native emulator host: architectural state, RV64I+Zicsr, module registry,
 * step function and run loop.
 *
 * One source, three builds:
 *   MODSIM_MONOLITHIC  M and Zbb decoded inline, no registry
 *   MODSIM_BUILTINS    registry plus the M and Zbb modules linked in
 *   (neither)          base-only host; extensions arrive as shared libraries
 */
#ifndef MODSIM_HOST_H
#define MODSIM_HOST_H

#include <stdint.h>
#include <stdio.h>

#include "modriscv_ext.h"

#define MODSIM_MAX_MODULES 16
#define MODSIM_DISASM_LEN 96
#define MODSIM_CACHE_SIZE 4096
#define MODSIM_FATAL_TRAP_EXIT 133

enum {
    MODSIM_STEP_RETIRED = 0,
    MODSIM_STEP_TRAPPED = 1,
    MODSIM_ERR_OVERLAP = -1,
    MODSIM_ERR_CONTRACT = -2
};

enum {
    MODSIM_RUN_HALTED = 0,
    MODSIM_RUN_CAP = 1,
    MODSIM_RUN_OVERLAP = -1,
    MODSIM_RUN_CONTRACT = -2,
    MODSIM_RUN_TRACE_IO = -3
};

typedef struct modsim_record {
    uint64_t seq;
    uint64_t pc;
    uint32_t raw;
    int trapped;
    int has_wb;
    uint32_t wb_rd;
    uint64_t wb_val;
    uint64_t cause;
    uint64_t tval;
    char disasm[MODSIM_DISASM_LEN];
} modsim_record;

typedef struct modsim_host {
    uint64_t pc;
    uint64_t x[32];
    uint64_t misa, mtvec, mepc, mcause, mtval, minstret;

    uint8_t *mem;
    uint64_t mem_base, mem_size;
    uint64_t tohost;
    int has_tohost;

    int halted;
    uint64_t exit_code;
    uint64_t seq;

    /* per-step scratch */
    uint64_t next_pc;
    int pc_written;
    int traps;
    int has_wb;
    uint32_t wb_rd;
    uint64_t wb_val;

    /* registry */
    int nmods;
    const modriscv_ext_info *mods[MODSIM_MAX_MODULES];
    int strict_overlap;
    int use_cache;
    uint64_t cache[MODSIM_CACHE_SIZE];
    modriscv_state_access sa;

    /* details of the last MODSIM_ERR_* */
    uint32_t err_word;
    int err_nclaims;
    int err_claims[MODSIM_MAX_MODULES + 1]; /* module index, or -1 for base */
    char err_msg[160];
} modsim_host;

int modsim_init(modsim_host *h, uint64_t mem_base, uint64_t mem_size);
void modsim_free(modsim_host *h);
void modsim_reset(modsim_host *h, uint64_t entry);
int modsim_register(modsim_host *h, const modriscv_ext_info *info);
void modsim_fini_modules(modsim_host *h);
int modsim_step(modsim_host *h, modsim_record *rec);
int modsim_run(modsim_host *h, uint64_t max_steps, FILE *trace, uint64_t *steps);
int modsim_format_record(const modsim_record *rec, char *buf, size_t len);
int modsim_base_disasm(uint32_t word, char *buf, size_t len);
int modsim_base_legal(uint32_t word);
int modsim_csr_read(modsim_host *h, uint32_t csr, uint64_t *out);
int modsim_csr_write(modsim_host *h, uint32_t csr, uint64_t value);
int modsim_mem_load(modsim_host *h, uint64_t addr, uint32_t size, uint64_t *out);
int modsim_mem_store(modsim_host *h, uint64_t addr, uint32_t size, uint64_t value);
void modsim_raise_trap(modsim_host *h, uint32_t cause, uint64_t tval);
uint64_t modsim_misa(const char *letters);
int modsim_monolithic(void);

/* run one module instruction per operand pair through its entry points */
int modsim_exec_batch(const modriscv_ext_info *info, uint32_t word, const uint64_t *a, const uint64_t *b,
                      uint64_t *out, size_t n);

/* statically linked module by name; NULL unless built with MODSIM_BUILTINS */
const modriscv_ext_info *modsim_builtin(const char *name);

#endif
