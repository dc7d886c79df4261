"""Per-step trace records and their one-line text form."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, slots=True)
class TraceRecord:
    seq: int
    pc: int
    raw: int
    disasm: str
    writeback: tuple[int, int] | None = None
    trap: tuple[int, int] | None = None


def format_record(rec: TraceRecord) -> str:
    """Render ``rec`` as a newline-terminated trace line."""
    line = f'S {rec.seq} PC 0x{rec.pc:016x} I 0x{rec.raw:08x} "{rec.disasm}"'
    if rec.trap is not None:
        line += f" T cause={rec.trap[0]} tval=0x{rec.trap[1]:016x}"
    elif rec.writeback is not None:
        line += f" W x{rec.writeback[0]}=0x{rec.writeback[1]:016x}"
    return line + "\n"


def emit_trace(rec: TraceRecord, sink) -> None:
    sink.write(format_record(rec))
