"""Module loading: shared libraries at run time, builtins by name, CLI flags.

Paths are used verbatim; there are no implicit search directories.
"""

from __future__ import annotations

import ctypes
import os
import subprocess
import sysconfig
from dataclasses import dataclass
from pathlib import Path

from . import cabi, ext_m, ext_zbb
from .abi import ABI_VERSION, EntryPointTable, ModuleDescriptor, Origin, validate_descriptor
from .errors import AbiVersionError, LoadError, UnknownBuiltin

ENTRY_SYMBOL = "modriscv_ext_entry"
BUILTIN_PREFIX = "builtin:"

_PACKAGE_DIR = Path(__file__).resolve().parent
_BUILTINS = {ext_m.NAME: ext_m, ext_zbb.NAME: ext_zbb}


def builtin_names() -> tuple[str, ...]:
    return tuple(_BUILTINS)


def _native_builtin(name: str) -> int | None:
    try:
        from . import _host_static
    except ImportError:
        return None
    return _host_static.builtin_address(name) or None


def load_static(builtin_name: str, origin: Origin = Origin.STATIC) -> ModuleDescriptor:
    """Descriptor for a module compiled into the host.

    The Python entry points serve the pure-Python host; ``native`` points at
    the same module's C record linked into the static-modular native host.
    """
    mod = _BUILTINS.get(builtin_name)
    if mod is None:
        raise UnknownBuiltin(builtin_name, _BUILTINS)
    d = mod.descriptor(origin)
    native = _native_builtin(builtin_name)
    if native is not None:
        d = ModuleDescriptor(d.name, d.abi_version, d.isa_letters, d.entry_points, origin, native=native)
    return d


def load_dynamic(path) -> ModuleDescriptor:
    """Map a module library and validate its info record.

    Raises :class:`LoadError` for a missing file, an unloadable library, a
    missing entry symbol, a version mismatch or an incomplete table. The
    library stays mapped for as long as the descriptor is referenced.
    """
    where = str(path)
    if not os.path.exists(where):
        raise LoadError(where, "no such file")
    try:
        lib = ctypes.CDLL(os.path.abspath(where), mode=os.RTLD_NOW | os.RTLD_LOCAL)
    except OSError as exc:
        raise LoadError(where, f"cannot load library ({exc})") from None
    try:
        fn = cabi.ENTRY_FN((ENTRY_SYMBOL, lib))
    except AttributeError:
        raise LoadError(where, f"missing symbol {ENTRY_SYMBOL}") from None
    address = fn()
    if not address:
        raise LoadError(where, f"{ENTRY_SYMBOL} returned NULL")
    info = cabi.info_at(address)
    if info.abi_version != ABI_VERSION:
        raise AbiVersionError(where, info.abi_version, ABI_VERSION)
    missing = cabi.null_entries(info)
    if missing:
        raise LoadError(where, f"incomplete entry-point table (null {', '.join(missing)})")
    if not info.name or not info.isa_letters:
        raise LoadError(where, "missing module name or ISA letters")
    table = cabi.NativeEntryPoints(info).table()
    d = ModuleDescriptor(
        name=info.name.decode(errors="replace"),
        abi_version=info.abi_version,
        isa_letters=info.isa_letters.decode(errors="replace"),
        entry_points=table,
        origin=Origin.DYNAMIC,
        path=where,
        native=address,
        library=lib,
    )
    validate_descriptor(d, where)
    return d


@dataclass(frozen=True)
class LoadRequest:
    """One ``--module`` value: a builtin name or a library path."""

    builtin: str | None = None
    path: str | None = None

    @classmethod
    def parse(cls, value: str) -> "LoadRequest":
        if not value:
            raise ValueError("empty --module value")
        if value.startswith(BUILTIN_PREFIX):
            name = value[len(BUILTIN_PREFIX):]
            if not name:
                raise ValueError(f"missing builtin name in {value!r}")
            return cls(builtin=name)
        return cls(path=value)

    def load(self) -> ModuleDescriptor:
        if self.builtin is not None:
            return load_static(self.builtin)
        return load_dynamic(self.path)

    def __str__(self) -> str:
        return BUILTIN_PREFIX + self.builtin if self.builtin is not None else self.path


class UsageError(ValueError):
    pass


def parse_module_flags(argv) -> list[LoadRequest]:
    """Collect ``--module X`` / ``--module=X`` requests in order; other arguments are ignored."""
    requests = []
    args = list(argv)
    i = 0
    while i < len(args):
        arg = args[i]
        if arg == "--module":
            if i + 1 >= len(args) or args[i + 1].startswith("--"):
                raise UsageError("--module requires a value (builtin:NAME or a library path)")
            value = args[i + 1]
            i += 2
        elif arg.startswith("--module="):
            value = arg.split("=", 1)[1]
            i += 1
        else:
            i += 1
            continue
        try:
            requests.append(LoadRequest.parse(value))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return requests


def plugin_path(name: str) -> Path:
    """Path of a bundled module library, e.g. ``plugin_path("m")``."""
    return _PACKAGE_DIR / "plugins" / f"libext_{name}.so"


def get_include() -> str:
    """Directory holding ``modriscv_ext.h`` for out-of-tree modules."""
    return str(_PACKAGE_DIR / "csrc")


def compile_module(sources, output, cc: str | None = None, defines=()) -> Path:
    """Build a module library with the system C compiler."""
    cc = cc or os.environ.get("CC") or sysconfig.get_config_var("CC") or "cc"
    output = Path(output)
    cmd = [*cc.split(), "-O2", "-shared", "-fPIC", "-fvisibility=hidden", f"-I{get_include()}",
           *(f"-D{d}" for d in defines), *map(str, sources), "-o", str(output)]
    subprocess.run(cmd, check=True, capture_output=True, text=True)
    return output


__all__ = [
    "BUILTIN_PREFIX", "ENTRY_SYMBOL", "EntryPointTable", "LoadRequest", "UsageError", "builtin_names",
    "compile_module", "get_include", "load_dynamic", "load_static", "parse_module_flags", "plugin_path",
]
