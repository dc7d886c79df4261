import io
import random

import pytest

from modriscv.arch import misa_for
from modriscv.elf import load_elf
from modriscv.emulator import (Backend, NativeEmulator, PythonEmulator, RunStatus, default_backend, make_emulator,
                               resolve_backend)
from modriscv.errors import ModuleContractError, OverlapError
from modriscv.loader import load_dynamic, load_static

from conftest import needs_native
from reference_encodings import BASE, M, ZBB

ENTRY = 0x80000000
BACKENDS = ["python", pytest.param("native", marks=needs_native)]


def modules(kind, m_plugin=None, zbb_plugin=None):
    if kind == "static":
        return [load_static("m"), load_static("zbb")]
    if kind == "dynamic":
        return [load_dynamic(m_plugin), load_dynamic(zbb_plugin)]
    return []


def traced(emu, elf, cap=10**6):
    emu.load_image(load_elf(elf))
    buf = io.BytesIO()
    if isinstance(emu, NativeEmulator):
        import tempfile
        with tempfile.TemporaryFile() as f:
            res = emu.run(cap, f)
            f.seek(0)
            data = f.read()
    else:
        res = emu.run(cap, buf)
        data = buf.getvalue()
    return res, data, emu.snapshot()


def test_backend_selection(monkeypatch):
    monkeypatch.setenv("MODRISCV_BACKEND", "python")
    assert default_backend() is Backend.PYTHON
    assert isinstance(make_emulator(), PythonEmulator)
    assert resolve_backend("python") is Backend.PYTHON


@needs_native
def test_native_is_default(monkeypatch):
    monkeypatch.delenv("MODRISCV_BACKEND", raising=False)
    assert default_backend() is Backend.NATIVE


@pytest.mark.parametrize("backend", BACKENDS)
def test_misa_reflects_modules(backend, m_plugin):
    assert make_emulator(backend=backend).csrs["misa"] == misa_for("")
    assert make_emulator([load_dynamic(m_plugin)], backend=backend).csrs["misa"] == misa_for("M")
    assert make_emulator(backend=backend, monolithic=True).csrs["misa"] == misa_for("MB")


@pytest.mark.parametrize("backend", BACKENDS)
def test_plugability_witness(backend, m_plugin, tmp_path):
    from modriscv.elf import write_elf
    elf = write_elf(tmp_path / "mul.elf", ENTRY, (0x02208233).to_bytes(4, "little"))
    for mods, expect in ((lambda: [], "trap"), (lambda: [load_static("m")], "mul"),
                         (lambda: [load_dynamic(m_plugin)], "mul")):
        emu = make_emulator(mods(), backend=backend)
        emu.load_image(load_elf(elf))
        emu.set_gpr(1, 6)
        emu.set_gpr(2, 7)
        out = emu.step()
        if expect == "trap":
            assert out.record.trap == (2, 0x02208233) and emu.csrs["mcause"] == 2
        else:
            assert out.record.disasm == "mul x4, x1, x2" and emu.gprs[4] == 42


@needs_native
@pytest.mark.parametrize("kind", ["none", "static", "dynamic", "mono"])
def test_native_and_python_agree_on_suite(kind, suite, elf_of, m_plugin, zbb_plugin):
    for prog in suite:
        runs = []
        for backend in ("python", "native"):
            mono = kind == "mono"
            emu = make_emulator([] if mono else modules(kind, m_plugin, zbb_plugin), backend=backend,
                                monolithic=mono)
            runs.append(traced(emu, elf_of(prog.name)))
            emu.fini()
        (ra, ta, da), (rb, tb, db) = runs
        assert ta == tb, prog.name
        assert (ra, da) == (rb, db), prog.name


@needs_native
def test_dispatch_cache_is_invisible(suite, elf_of, m_plugin, zbb_plugin):
    for prog in suite:
        a = traced(NativeEmulator(modules("dynamic", m_plugin, zbb_plugin)), elf_of(prog.name))
        b = traced(NativeEmulator(modules("dynamic", m_plugin, zbb_plugin), dispatch_cache=False),
                   elf_of(prog.name))
        assert a == b, prog.name


def _random_image(rng):
    """64 words: mostly reference encodings with scrambled registers, some raw noise, some nops."""
    table = [w for _, w in BASE + M + ZBB if w not in (0x00000073, 0x00100073)]
    words = []
    for _ in range(64):
        r = rng.random()
        if r < 0.8:
            w = rng.choice(table)
            # new rd and rs1; R-type words also get a new rs2
            w = (w & ~0x000FFF80) | (w & 0x7000) | (rng.getrandbits(5) << 7) | (rng.getrandbits(5) << 15)
            if (w & 0x7F) in (0x33, 0x3B):
                w = (w & ~0x01F00000) | (rng.getrandbits(5) << 20)
        elif r < 0.9:
            w = rng.getrandbits(32)
        else:
            w = 0x00000013
        words.append(w)
    return b"".join(w.to_bytes(4, "little") for w in words)


@needs_native
@pytest.mark.parametrize("seed", range(12))
def test_random_streams_agree(seed, m_plugin, zbb_plugin, tmp_path):
    from modriscv.elf import write_elf
    rng = random.Random(seed)
    elf = write_elf(tmp_path / "r.elf", ENTRY, _random_image(rng), bss=4096)
    regs = [rng.choice([rng.getrandbits(64), ENTRY + rng.randrange(0, 256), rng.randrange(0, 64)])
            for _ in range(32)]
    results = []
    for backend in ("python", "native"):
        emu = make_emulator(modules("dynamic", m_plugin, zbb_plugin), backend=backend)
        emu.load_image(load_elf(elf))
        emu.set_mtvec(ENTRY)
        for i, v in enumerate(regs):
            emu.set_gpr(i, v)
        lines = []
        for _ in range(400):
            if emu.halted:
                break
            lines.append(emu.step().record)
        results.append((lines, emu.snapshot(), emu.read(ENTRY, 512)))
    assert results[0] == results[1]


@pytest.mark.parametrize("backend", BACKENDS)
def test_contract_violation_is_reported(backend, test_plugins, tmp_path):
    from modriscv.elf import write_elf
    elf = write_elf(tmp_path / "mul.elf", ENTRY, (0x02208233).to_bytes(4, "little"))
    emu = make_emulator([load_dynamic(test_plugins["badtrap"])], backend=backend)
    emu.load_image(load_elf(elf))
    with pytest.raises(ModuleContractError, match="badtrap"):
        emu.step()


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("cache", [True, False])
def test_overlap_detected(backend, cache, test_plugins, m_plugin, tmp_path):
    from modriscv.elf import write_elf
    elf = write_elf(tmp_path / "mul.elf", ENTRY, (0x00500093).to_bytes(4, "little") +
                    (0x02208233).to_bytes(4, "little"))
    emu = make_emulator([load_dynamic(m_plugin), load_dynamic(test_plugins["mulclaim"])], backend=backend,
                        strict_overlap=True, dispatch_cache=cache)
    emu.load_image(load_elf(elf))
    emu.step()
    with pytest.raises(OverlapError) as info:
        emu.step()
    assert info.value.claimants == ("m", "mulclaim") and info.value.word == 0x02208233


@pytest.mark.parametrize("backend", BACKENDS)
def test_overlap_with_base(backend, test_plugins, tmp_path):
    from modriscv.elf import write_elf
    elf = write_elf(tmp_path / "addi.elf", ENTRY, (0x00500093).to_bytes(4, "little"))
    emu = make_emulator([load_dynamic(test_plugins["addiclaim"])], backend=backend, strict_overlap=True)
    emu.load_image(load_elf(elf))
    with pytest.raises(OverlapError) as info:
        emu.step()
    assert info.value.claimants == ("addiclaim", "base")


@pytest.mark.parametrize("backend", BACKENDS)
def test_first_claim_wins_without_strict(backend, test_plugins, m_plugin, tmp_path):
    from modriscv.elf import write_elf
    elf = write_elf(tmp_path / "mul.elf", ENTRY, (0x02208233).to_bytes(4, "little"))
    for order, disasm in (((test_plugins["mulclaim"], m_plugin), "mulclaim.op x4"),
                          ((m_plugin, test_plugins["mulclaim"]), "mul x4, x1, x2")):
        emu = make_emulator([load_dynamic(p) for p in order], backend=backend)
        emu.load_image(load_elf(elf))
        assert emu.step().record.disasm == disasm


@pytest.mark.parametrize("backend", BACKENDS)
def test_cap_counts_steps(backend, tmp_path):
    from modriscv.elf import write_elf
    elf = write_elf(tmp_path / "loop.elf", ENTRY, (0x0000006F).to_bytes(4, "little"))
    emu = make_emulator(backend=backend)
    emu.load_image(load_elf(elf))
    res = emu.run(1000)
    assert (res.status, res.steps, emu.csrs["minstret"]) == (RunStatus.CAP, 1000, 1000)


@needs_native
def test_fini_is_idempotent(m_plugin):
    emu = NativeEmulator([load_dynamic(m_plugin)])
    emu.fini()
    emu.fini()
    assert emu.modules == []
