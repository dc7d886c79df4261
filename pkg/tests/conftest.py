from __future__ import annotations

import shutil
import subprocess
from pathlib import Path

import pytest

from modriscv import programs
from modriscv.emulator import NATIVE_AVAILABLE
from modriscv.loader import compile_module, plugin_path

HERE = Path(__file__).resolve().parent
TESTMOD = HERE / "plugins" / "testmod.c"

needs_native = pytest.mark.skipif(not NATIVE_AVAILABLE, reason="native hosts not built")


@pytest.fixture(scope="session")
def suite():
    return programs.test_suite()


@pytest.fixture(scope="session")
def suite_dir(tmp_path_factory, suite):
    d = tmp_path_factory.mktemp("suite")
    programs.write_all(d, suite)
    return d


@pytest.fixture(scope="session")
def elf_of(suite_dir):
    def get(name: str) -> Path:
        return suite_dir / f"{name}.elf"
    return get


@pytest.fixture(scope="session")
def m_plugin() -> Path:
    return plugin_path("m")


@pytest.fixture(scope="session")
def zbb_plugin() -> Path:
    return plugin_path("zbb")


def _build(out_dir: Path, name: str, defines=()) -> Path:
    return compile_module([TESTMOD], out_dir / f"lib{name}.so", defines=defines)


@pytest.fixture(scope="session")
def test_plugins(tmp_path_factory):
    """Small modules compiled from tests/plugins/testmod.c with different knobs."""
    if shutil.which("cc") is None and shutil.which("gcc") is None:
        pytest.skip("no C compiler")
    d = tmp_path_factory.mktemp("testmods")
    try:
        return {
            "v2": _build(d, "v2", ["TESTMOD_VERSION=2", 'TESTMOD_NAME="vtwo"', 'TESTMOD_LETTERS="Y"']),
            "mulclaim": _build(d, "mulclaim", ['TESTMOD_NAME="mulclaim"']),
            "badtrap": _build(d, "badtrap", ["TESTMOD_BAD_TRAP", 'TESTMOD_NAME="badtrap"']),
            "addiclaim": _build(d, "addiclaim", ['TESTMOD_NAME="addiclaim"', "TESTMOD_MASK=0x707fu",
                                                 "TESTMOD_MATCH=0x13u"]),
            "noentry": compile_module([_write(d / "noentry.c", "int modriscv_other(void) { return 0; }\n")],
                                      d / "libnoentry.so"),
            "nullentry": compile_module([_write(d / "nullentry.c", NULL_ENTRY)], d / "libnullentry.so"),
            "halftable": compile_module([_write(d / "halftable.c", HALF_TABLE)], d / "libhalftable.so"),
        }
    except subprocess.CalledProcessError as exc:
        pytest.fail(f"building test modules failed: {exc.stderr}")


def _write(path: Path, text: str) -> Path:
    path.write_text(text)
    return path


NULL_ENTRY = """
#include "modriscv_ext.h"
__attribute__((visibility("default"))) const modriscv_ext_info *modriscv_ext_entry(void) { return 0; }
"""

HALF_TABLE = """
#include "modriscv_ext.h"
static int dec(modriscv_ast a, unsigned w) { (void)a; (void)w; return 0; }
static const modriscv_ext_info info = {MODRISCV_ABI_VERSION, "half", "H", {dec}};
__attribute__((visibility("default"))) const modriscv_ext_info *modriscv_ext_entry(void) { return &info; }
"""
