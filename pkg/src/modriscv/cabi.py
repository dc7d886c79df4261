"""ctypes mirror of ``modriscv_ext.h``.

Used by the loader to read a module's info record, and by the pure-Python
host to drive native modules through their entry points.
"""

from __future__ import annotations

import ctypes
from ctypes import CFUNCTYPE, POINTER, c_char_p, c_int, c_size_t, c_uint32, c_uint64, c_void_p

from .abi import EntryPointTable, StateAccess
from .arch import Retired

READ_GPR = CFUNCTYPE(c_uint64, c_void_p, c_uint32)
WRITE_GPR = CFUNCTYPE(None, c_void_p, c_uint32, c_uint64)
READ_PC = CFUNCTYPE(c_uint64, c_void_p)
WRITE_PC = CFUNCTYPE(None, c_void_p, c_uint64)
MEM_LOAD = CFUNCTYPE(c_int, c_void_p, c_uint64, c_uint32, POINTER(c_uint64))
MEM_STORE = CFUNCTYPE(c_int, c_void_p, c_uint64, c_uint32, c_uint64)
RAISE_TRAP = CFUNCTYPE(None, c_void_p, c_uint32, c_uint64)
READ_CSR = CFUNCTYPE(c_int, c_void_p, c_uint32, POINTER(c_uint64))
WRITE_CSR = CFUNCTYPE(c_int, c_void_p, c_uint32, c_uint64)


class CStateAccess(ctypes.Structure):
    _fields_ = [
        ("state", c_void_p),
        ("read_gpr", READ_GPR),
        ("write_gpr", WRITE_GPR),
        ("read_pc", READ_PC),
        ("write_pc", WRITE_PC),
        ("mem_load", MEM_LOAD),
        ("mem_store", MEM_STORE),
        ("raise_trap", RAISE_TRAP),
        ("read_csr", READ_CSR),
        ("write_csr", WRITE_CSR),
    ]


DECODE = CFUNCTYPE(c_int, c_void_p, c_uint32)
EXECUTE = CFUNCTYPE(c_int, c_void_p, POINTER(CStateAccess))
PRINT_INSN = CFUNCTYPE(c_int, c_void_p, c_void_p, c_size_t)
AST_CREATE = CFUNCTYPE(c_void_p)
AST_KILL = CFUNCTYPE(None, c_void_p)
INIT = CFUNCTYPE(None, POINTER(CStateAccess))
FINI = CFUNCTYPE(None)
ISA_LETTERS = CFUNCTYPE(c_char_p)


class CEntryPoints(ctypes.Structure):
    _fields_ = [
        ("decode", DECODE),
        ("execute", EXECUTE),
        ("print_insn", PRINT_INSN),
        ("ast_create", AST_CREATE),
        ("ast_kill", AST_KILL),
        ("init", INIT),
        ("fini", FINI),
        ("isa_letters", ISA_LETTERS),
    ]


class CExtInfo(ctypes.Structure):
    _fields_ = [
        ("abi_version", c_uint32),
        ("name", c_char_p),
        ("isa_letters", c_char_p),
        ("entry", CEntryPoints),
    ]


ENTRY_FN = CFUNCTYPE(c_void_p)


def info_at(address: int) -> CExtInfo:
    return CExtInfo.from_address(address)


def null_entries(info: CExtInfo) -> list[str]:
    return [name for name, _ in CEntryPoints._fields_ if not getattr(info.entry, name)]


class _CAccess:
    """A C accessor table forwarding to a Python :class:`StateAccess`.

    The callback objects are kept alive for as long as this wrapper is.
    """

    def __init__(self, sa: StateAccess):
        def mem_load(_, addr, size, out):
            value = sa.mem_load(addr, size)
            if value is None:
                return 1
            out[0] = value
            return 0

        def read_csr(_, csr, out):
            value = sa.read_csr(csr)
            if value is None:
                return 1
            out[0] = value
            return 0

        self.sa = sa
        self.struct = CStateAccess(
            None,
            READ_GPR(lambda _, i: sa.read_gpr(i & 31)),
            WRITE_GPR(lambda _, i, v: sa.write_gpr(i & 31, v)),
            READ_PC(lambda _: sa.read_pc()),
            WRITE_PC(lambda _, v: sa.write_pc(v)),
            MEM_LOAD(mem_load),
            MEM_STORE(lambda _, a, n, v: 0 if sa.mem_store(a, n, v) else 1),
            RAISE_TRAP(lambda _, c, t: sa.raise_trap(c, t)),
            READ_CSR(read_csr),
            WRITE_CSR(lambda _, c, v: 0 if sa.write_csr(c, v) else 1),
        )
        self.pointer = ctypes.pointer(self.struct)


class NativeEntryPoints:
    """Python-callable entry points over a native module's table."""

    def __init__(self, info: CExtInfo):
        self.info = info
        self._access: _CAccess | None = None
        self._buf = ctypes.create_string_buffer(128)

    def _bind(self, sa: StateAccess) -> _CAccess:
        if self._access is None or self._access.sa is not sa:
            self._access = _CAccess(sa)
        return self._access

    def table(self) -> EntryPointTable:
        ep = self.info.entry

        def decode(handle, word):
            return bool(ep.decode(handle, word & 0xFFFFFFFF))

        def execute(handle, sa):
            return Retired(ep.execute(handle, self._bind(sa).pointer))

        def print_insn(handle):
            n = ep.print_insn(handle, ctypes.addressof(self._buf), len(self._buf))
            if n >= len(self._buf):
                self._buf = ctypes.create_string_buffer(n + 1)
                ep.print_insn(handle, ctypes.addressof(self._buf), len(self._buf))
            return self._buf.value.decode()

        def init(sa):
            ep.init(self._bind(sa).pointer)

        return EntryPointTable(
            decode=decode,
            execute=execute,
            print_insn=print_insn,
            ast_create=lambda: ep.ast_create(),
            ast_kill=lambda handle: ep.ast_kill(handle),
            init=init,
            fini=lambda: ep.fini(),
            isa_letters=lambda: (ep.isa_letters() or b"").decode(),
        )
