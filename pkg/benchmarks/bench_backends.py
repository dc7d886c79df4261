"""Compiled (Cython/C) host versus the pure-Python fallback.

Runs each benchmark workload under both backends with M and Zbb bound
statically and reports median instructions per second and the speedup.

    python3 benchmarks/bench_backends.py [--retirements N] [--repeats R]
"""

from __future__ import annotations

import argparse
import sys
import tempfile
from pathlib import Path

from modriscv import programs
from modriscv.emulator import NATIVE_AVAILABLE
from modriscv.frontend import config_from_flags
from modriscv.harness import bench, format_bench_table

MODULES = "--module builtin:m --module builtin:zbb"


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--retirements", type=int, default=200_000,
                    help="instructions per workload (the Python backend retires well under 1M/s)")
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args(argv)
    if not NATIVE_AVAILABLE:
        print("native hosts are not built; only the Python backend is available", file=sys.stderr)
        return 1
    rows = []
    with tempfile.TemporaryDirectory() as tmp:
        for prog in programs.bench_workloads(args.retirements):
            elf = prog.write(Path(tmp))
            cfgs = [(f"{prog.name}/{b}", config_from_flags(f"--backend {b} {MODULES}", elf))
                    for b in ("native", "python")]
            rows += bench(cfgs, repeats=args.repeats)
    print(format_bench_table(rows))
    print()
    for native, python in zip(rows[::2], rows[1::2]):
        workload = native.name.split("/")[0]
        print(f"{workload:<20} speedup {native.ips / python.ips:8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
