"""Shared architectural state: registers, CSRs, flat memory and trap entry.

Base and extension code both mutate an :class:`ArchState`; extensions only do
so through a :class:`~modriscv.abi.StateAccess` table.
"""

from __future__ import annotations

import enum
import hashlib
import struct
from dataclasses import dataclass

MASK64 = (1 << 64) - 1

DEFAULT_MEM_BASE = 0x80000000
DEFAULT_MEM_SIZE = 64 * 1024 * 1024

FATAL_TRAP_EXIT = 133

MISA_MXL_64 = 2 << 62

# CSR indices
CSR_MISA = 0x301
CSR_MTVEC = 0x305
CSR_MEPC = 0x341
CSR_MCAUSE = 0x342
CSR_MTVAL = 0x343
CSR_MCYCLE = 0xB00
CSR_MINSTRET = 0xB02
CSR_MHARTID = 0xF14

CSR_NAMES = {
    CSR_MISA: "misa",
    CSR_MHARTID: "mhartid",
    CSR_MTVEC: "mtvec",
    CSR_MEPC: "mepc",
    CSR_MCAUSE: "mcause",
    CSR_MTVAL: "mtval",
    CSR_MCYCLE: "mcycle",
    CSR_MINSTRET: "minstret",
}


class TrapCause(enum.IntEnum):
    IllegalInstruction = 2
    Breakpoint = 3
    LoadAccessFault = 5
    StoreAccessFault = 7
    EnvCallFromM = 11


@dataclass(frozen=True)
class Trap:
    cause: TrapCause
    tval: int = 0


class Retired(enum.IntEnum):
    RETIRE_SUCCESS = 0
    RETIRE_TRAP = 1


class AccessFault(Exception):
    """A load or store touched bytes outside the memory region."""

    def __init__(self, trap: Trap):
        super().__init__(f"{trap.cause.name} at 0x{trap.tval:016x}")
        self.trap = trap


def misa_for(letters: str) -> int:
    value = MISA_MXL_64 | (1 << (ord("I") - ord("A")))
    for letter in letters:
        value |= 1 << (ord(letter) - ord("A"))
    return value


@dataclass
class CsrFile:
    misa: int = misa_for("")
    mhartid: int = 0
    mtvec: int = 0
    mepc: int = 0
    mcause: int = 0
    mtval: int = 0
    mcycle: int = 0
    minstret: int = 0


class ArchState:
    """Architectural state of a single RV64 hart with one flat memory region."""

    def __init__(self, mem_base: int = DEFAULT_MEM_BASE, mem_size: int = DEFAULT_MEM_SIZE):
        if mem_size <= 0:
            raise ValueError("memory size must be positive")
        self.mem_base = mem_base
        self.mem_size = mem_size
        self.mem = bytearray(mem_size)
        self.gprs = [0] * 32
        self.csrs = CsrFile()
        self.pc = mem_base
        self.halted: int | None = None
        self.tohost: int | None = None
        # trace sequence counter, one per step; not architectural
        self.steps = 0
        # last GPR writeback of the current step, for trace records
        self.writeback: tuple[int, int] | None = None

    def reset(self, entry: int) -> None:
        """GPRs and CSRs to zero (misa kept), pc to ``entry``; memory untouched."""
        misa = self.csrs.misa
        self.gprs = [0] * 32
        self.csrs = CsrFile(misa=misa)
        self.pc = entry & MASK64
        self.halted = None
        self.writeback = None
        self.steps = 0

    @property
    def minstret(self) -> int:
        return self.csrs.minstret

    def retire(self) -> None:
        self.csrs.minstret = (self.csrs.minstret + 1) & MASK64
        self.csrs.mcycle = self.csrs.minstret

    # -- registers --------------------------------------------------------

    def gpr_read(self, idx: int) -> int:
        return self.gprs[idx] if idx else 0

    def gpr_write(self, idx: int, value: int) -> None:
        if idx:
            value &= MASK64
            self.gprs[idx] = value
            self.writeback = (idx, value)

    # -- memory -----------------------------------------------------------

    def _offset(self, addr: int, size: int, cause: TrapCause) -> int:
        off = addr - self.mem_base
        if off < 0 or off + size > self.mem_size:
            raise AccessFault(Trap(cause, addr & MASK64))
        return off

    def load(self, addr: int, size: int) -> int:
        off = self._offset(addr, size, TrapCause.LoadAccessFault)
        return int.from_bytes(self.mem[off:off + size], "little")

    def store(self, addr: int, size: int, value: int) -> None:
        off = self._offset(addr, size, TrapCause.StoreAccessFault)
        value &= (1 << (8 * size)) - 1
        self.mem[off:off + size] = value.to_bytes(size, "little")
        if size == 8 and addr == self.tohost and value & 1:
            self.halted = value >> 1

    def mem_access(self, addr: int, size: int, kind: str, value: int = 0) -> int:
        """Load or store ``size`` bytes little-endian; raises :class:`AccessFault`.

        Loads return the zero-extended raw bytes. Stores return 0.
        """
        if size not in (1, 2, 4, 8):
            raise ValueError(f"bad access size {size}")
        if kind == "load":
            return self.load(addr, size)
        if kind == "store":
            self.store(addr, size, value)
            return 0
        raise ValueError(f"bad access kind {kind!r}")

    def write_bytes(self, addr: int, data: bytes) -> None:
        off = self._offset(addr, len(data), TrapCause.StoreAccessFault)
        self.mem[off:off + len(data)] = data

    def read_bytes(self, addr: int, size: int) -> bytes:
        off = self._offset(addr, size, TrapCause.LoadAccessFault)
        return bytes(self.mem[off:off + size])

    # -- CSRs and traps ---------------------------------------------------

    def csr_read(self, csr: int) -> int | None:
        """Value of an implemented CSR, or ``None`` for an unimplemented index."""
        name = CSR_NAMES.get(csr)
        if name is None:
            return None
        return getattr(self.csrs, name)

    def csr_write(self, csr: int, value: int) -> bool:
        """Write a CSR; ``False`` if the index is unimplemented or read-only.

        misa, mcycle and minstret ignore writes. mtvec is forced to direct mode
        and mepc to a 4-byte boundary.
        """
        if csr not in CSR_NAMES or (csr >> 10) == 0b11:
            return False
        value &= MASK64
        if csr == CSR_MTVEC:
            self.csrs.mtvec = value & ~3 & MASK64
        elif csr == CSR_MEPC:
            self.csrs.mepc = value & ~3 & MASK64
        elif csr == CSR_MCAUSE:
            self.csrs.mcause = value
        elif csr == CSR_MTVAL:
            self.csrs.mtval = value
        return True

    def raise_trap(self, trap: Trap) -> None:
        """Take a machine-mode trap in direct mode; halts with 133 if mtvec is 0."""
        self.csrs.mepc = self.pc
        self.csrs.mcause = int(trap.cause)
        self.csrs.mtval = trap.tval & MASK64
        if self.csrs.mtvec == 0:
            self.halted = FATAL_TRAP_EXIT
        else:
            self.pc = self.csrs.mtvec


_DIGEST_CSRS = ("mhartid", "mtvec", "mepc", "mcause", "mtval", "mcycle", "minstret")


def state_words(pc: int, gprs, csr_values) -> bytes:
    return struct.pack("<Q32Q7Q", pc, *gprs, *csr_values)


def snapshot(s) -> str:
    """Deterministic hex digest of pc, GPRs and the execution CSRs.

    Memory is not included. misa is not included either: it reflects which
    modules are registered rather than anything the program did.
    Works on any object exposing ``pc``, ``gprs`` and a ``csrs`` with the
    :class:`CsrFile` field names.
    """
    values = [getattr(s.csrs, name) for name in _DIGEST_CSRS]
    gprs = [0] + list(s.gprs)[1:]
    return hashlib.sha256(state_words(s.pc, gprs, values)).hexdigest()
