import random
import shutil
import subprocess

import pytest

from modriscv.asm import AsmError, assemble
from modriscv.elf import load_elf

from reference_encodings import BASE, M, ZBB

CLANG = shutil.which("clang")
needs_clang = pytest.mark.skipif(CLANG is None, reason="clang not installed")


def words(code: bytes) -> list[int]:
    return [int.from_bytes(code[i:i + 4], "little") for i in range(0, len(code), 4)]


def clang_text(tmp_path, source: str) -> bytes:
    from elftools.elf.elffile import ELFFile

    src, obj = tmp_path / "t.s", tmp_path / "t.o"
    src.write_text(source)
    subprocess.run([CLANG, "--target=riscv64", "-march=rv64im_zbb", "-mno-relax", "-c", str(src), "-o", str(obj)],
                   check=True, capture_output=True)
    with open(obj, "rb") as f:
        return ELFFile(f).get_section_by_name(".text").data()


@pytest.mark.parametrize("src,word", BASE + M + ZBB)
def test_matches_reference_table(src, word):
    code, _ = assemble(src, 0x80000000)
    assert words(code) == [word]


@needs_clang
def test_reference_table_is_current(tmp_path):
    rows = BASE + M + ZBB
    text = clang_text(tmp_path, "\n".join(src for src, _ in rows) + "\n")
    assert words(text) == [w for _, w in rows]


@needs_clang
def test_li_expansions_match_clang(tmp_path):
    rng = random.Random(7)
    values = [0, 1, -1, 2047, -2048, 2048, 0x7FFFFFFF, -0x80000000, 0x80000000, 0xFFFFFFFF,
              0x123456789ABCDEF0, -0x123456789ABCDEF0, 1 << 63, (1 << 63) - 1, 0x8000000000000800]
    values += [rng.getrandbits(64) - (1 << 63) for _ in range(150)]
    values += [rng.getrandbits(rng.randint(1, 40)) for _ in range(100)]
    src = "".join(f"li x{5 + i % 20}, {v}\n" for i, v in enumerate(values))
    ours, _ = assemble(src, 0x80000000)
    assert ours == clang_text(tmp_path, src)


@needs_clang
def test_local_branches_and_jumps_match_clang(tmp_path):
    src = """
start:
    addi x1, x0, 3
loop:
    addi x1, x1, -1
    bnez x1, loop
    beq x1, x2, done
    j start
    jal x1, done
    .word 0x12345678
done:
    ret
"""
    ours, labels = assemble(src, 0x80000000)
    assert ours == clang_text(tmp_path, src)
    assert labels["done"] == 0x80000000 + 7 * 4


def test_errors():
    for bad in ("bogus x1, x2", "addi x1, x0, 5000", "add x1, x2", "beq x1, x2, nowhere", "addi x99, x0, 1"):
        with pytest.raises(AsmError):
            assemble(bad, 0x80000000)


def test_program_images_load(tmp_path, suite):
    for prog in suite[:3]:
        path = prog.write(tmp_path)
        img = load_elf(path)
        assert img.entry == 0x80000000 and img.tohost is not None
