import os

from Cython.Build import cythonize
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

CSRC = "src/modriscv/csrc"
CFLAGS = ["-O2", "-fvisibility=hidden"]
PLUGINS = {"modriscv.plugins.libext_m": "ext_m.c", "modriscv.plugins.libext_zbb": "ext_zbb.c"}
PLUGIN_LEAVES = {name.rsplit(".", 1)[1] for name in PLUGINS}


def host(name, macros, extra_sources=()):
    return Extension(
        f"modriscv._host_{name}",
        [f"src/modriscv/_host_{name}.pyx", f"{CSRC}/host.c", *(f"{CSRC}/{s}" for s in extra_sources)],
        include_dirs=[CSRC],
        define_macros=macros,
        extra_compile_args=CFLAGS,
    )


class BuildExt(build_ext):
    """Plugins are plain shared libraries: no interpreter suffix, no PyInit symbol."""

    def get_ext_filename(self, fullname):
        # called with both the dotted name and its last component
        if fullname.split(".")[-1] in PLUGIN_LEAVES:
            return os.path.join(*fullname.split(".")) + ".so"
        return super().get_ext_filename(fullname)

    def get_export_symbols(self, ext):
        if ext.name in PLUGINS:
            return []
        return super().get_export_symbols(ext)


hosts = cythonize(
    [
        host("mono", [("MODSIM_MONOLITHIC", "1")]),
        host("static", [("MODSIM_BUILTINS", "1")], ["builtins.c"]),
        host("base", []),
    ],
    compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
)
plugins = [
    Extension(name, [f"{CSRC}/{src}"], include_dirs=[CSRC], extra_compile_args=CFLAGS)
    for name, src in PLUGINS.items()
]

setup(ext_modules=hosts + plugins, cmdclass={"build_ext": BuildExt})
