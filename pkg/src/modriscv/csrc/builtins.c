/* Statically registered builds of the M and Zbb modules: same sources as the plugins. */
#include <string.h>

#include "host.h"

#define MODRISCV_EXT_ENTRY modsim_builtin_m_entry
#include "ext_m.c"
#undef MODRISCV_EXT_ENTRY

#define MODRISCV_EXT_ENTRY modsim_builtin_zbb_entry
#include "ext_zbb.c"
#undef MODRISCV_EXT_ENTRY

const modriscv_ext_info *modsim_builtin(const char *name)
{
    if (strcmp(name, "m") == 0)
        return modsim_builtin_m_entry();
    if (strcmp(name, "zbb") == 0)
        return modsim_builtin_zbb_entry();
    return NULL;
}
