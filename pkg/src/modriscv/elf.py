"""Bare-metal ELF images: loading with pyelftools and a minimal writer.

The writer emits a static ET_EXEC with one PT_LOAD segment and a symbol table
(so ``tohost`` can be found), which is all the generated test programs need.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

from elftools.common.exceptions import ELFError
from elftools.elf.elffile import ELFFile
from elftools.elf.sections import SymbolTableSection

from .arch import DEFAULT_MEM_BASE, DEFAULT_MEM_SIZE
from .errors import ElfError

EM_RISCV = 243


@dataclass(frozen=True)
class ElfImage:
    entry: int
    tohost: int | None
    # (physical address, bytes) per PT_LOAD, bss zero-filled
    segments: tuple[tuple[int, bytes], ...] = field(default=())


def load_elf(path, mem_base: int = DEFAULT_MEM_BASE, mem_size: int = DEFAULT_MEM_SIZE) -> ElfImage:
    """Read a 64-bit little-endian RISC-V executable and check it fits in memory."""
    try:
        with open(path, "rb") as f:
            return _read(ELFFile(f), path, mem_base, mem_size)
    except FileNotFoundError:
        raise ElfError(f"{path}: no such file") from None
    except (ELFError, struct.error) as exc:
        raise ElfError(f"{path}: not a readable ELF file ({exc})") from None


def _read(elf: ELFFile, path, mem_base: int, mem_size: int) -> ElfImage:
    if elf.elfclass != 64:
        raise ElfError(f"{path}: ELF class is {elf.elfclass}-bit, expected 64-bit")
    if not elf.little_endian:
        raise ElfError(f"{path}: big-endian ELF, expected little-endian")
    if elf["e_machine"] not in ("EM_RISCV", EM_RISCV):
        raise ElfError(f"{path}: machine is {elf['e_machine']}, expected EM_RISCV")
    if elf["e_type"] != "ET_EXEC":
        raise ElfError(f"{path}: type is {elf['e_type']}, expected ET_EXEC")
    segments = []
    for seg in elf.iter_segments():
        if seg["p_type"] != "PT_LOAD" or seg["p_memsz"] == 0:
            continue
        addr, memsz = seg["p_paddr"], seg["p_memsz"]
        if addr < mem_base or addr + memsz > mem_base + mem_size:
            raise ElfError(f"{path}: segment 0x{addr:x}+0x{memsz:x} outside memory "
                           f"0x{mem_base:x}+0x{mem_size:x}")
        data = seg.data()
        segments.append((addr, data + bytes(memsz - len(data))))
    if not segments:
        raise ElfError(f"{path}: no loadable segments")
    return ElfImage(elf["e_entry"], _symbol(elf, "tohost"), tuple(segments))


def _symbol(elf: ELFFile, name: str) -> int | None:
    for sec in elf.iter_sections():
        if isinstance(sec, SymbolTableSection):
            syms = sec.get_symbol_by_name(name)
            if syms:
                return syms[0]["st_value"]
    return None


# -- writer -------------------------------------------------------------------

_EHDR = struct.Struct("<16sHHIQQQIHHHHHH")
_PHDR = struct.Struct("<IIQQQQQQ")
_SHDR = struct.Struct("<IIQQQQIIQQ")
_SYM = struct.Struct("<IBBHQQ")

SHT_PROGBITS, SHT_SYMTAB, SHT_STRTAB = 1, 2, 3
SHF_WRITE, SHF_ALLOC, SHF_EXECINSTR = 1, 2, 4


def _strtab(names):
    blob, offsets = bytearray(b"\0"), {}
    for n in names:
        offsets[n] = len(blob)
        blob += n.encode() + b"\0"
    return bytes(blob), offsets


def build_elf(base: int, payload: bytes, entry: int | None = None, symbols=None, machine: int = EM_RISCV,
              bss: int = 0) -> bytes:
    """Serialize ``payload`` as one RWX PT_LOAD at ``base`` with the given global symbols."""
    symbols = dict(symbols or {})
    entry = base if entry is None else entry
    ehsize, phsize = _EHDR.size, _PHDR.size
    text_off = 0x1000
    strtab, str_off = _strtab(sorted(symbols))
    shstrtab, sh_off = _strtab([".text", ".symtab", ".strtab", ".shstrtab"])
    syms = _SYM.pack(0, 0, 0, 0, 0, 0)
    for name in sorted(symbols):
        # STB_GLOBAL, STT_NOTYPE, defined in section 1
        syms += _SYM.pack(str_off[name], 0x10, 0, 1, symbols[name], 0)
    sym_off = text_off + len(payload)
    sym_off += -sym_off % 8
    strtab_off = sym_off + len(syms)
    shstr_off = strtab_off + len(strtab)
    shdr_off = shstr_off + len(shstrtab)
    shdr_off += -shdr_off % 8

    ident = b"\x7fELF" + bytes([2, 1, 1, 0]) + bytes(8)
    ehdr = _EHDR.pack(ident, 2, machine, 1, entry, ehsize, shdr_off, 0, ehsize, phsize, 1, _SHDR.size, 5, 4)
    phdr = _PHDR.pack(1, 7, text_off, base, base, len(payload), len(payload) + bss, 0x1000)
    shdrs = [
        _SHDR.pack(0, 0, 0, 0, 0, 0, 0, 0, 0, 0),
        _SHDR.pack(sh_off[".text"], SHT_PROGBITS, SHF_ALLOC | SHF_EXECINSTR | SHF_WRITE, base, text_off,
                   len(payload), 0, 0, 4, 0),
        _SHDR.pack(sh_off[".symtab"], SHT_SYMTAB, 0, 0, sym_off, len(syms), 3, 1, 8, _SYM.size),
        _SHDR.pack(sh_off[".strtab"], SHT_STRTAB, 0, 0, strtab_off, len(strtab), 0, 0, 1, 0),
        _SHDR.pack(sh_off[".shstrtab"], SHT_STRTAB, 0, 0, shstr_off, len(shstrtab), 0, 0, 1, 0),
    ]
    out = bytearray(ehdr + phdr)
    out += bytes(text_off - len(out))
    out += payload
    out += bytes(sym_off - len(out))
    out += syms + strtab + shstrtab
    out += bytes(shdr_off - len(out))
    out += b"".join(shdrs)
    return bytes(out)


def write_elf(path, base: int, payload: bytes, **kwargs) -> Path:
    path = Path(path)
    path.write_bytes(build_elf(base, payload, **kwargs))
    return path

