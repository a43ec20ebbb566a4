"""Unit-cost RAM over arbitrary-precision naturals."""

from pelram.ram.asm import format_program, parse_program
from pelram.ram.machine import (
    ACCEPTED, BUDGET_EXHAUSTED, REJECTED, RUNTIME_ERROR, MachineState, RunResult, run,
)
from pelram.ram.program import (
    CORE_OPS, RAND_GENERAL, RAND_NONE, RAND_POW2, Instruction, Opcode, Operand,
    OpSetPolicy, Program,
)
from pelram.ram.shiftelim import eliminate_right_shifts, eliminate_right_shifts_detailed

__all__ = [
    "ACCEPTED", "BUDGET_EXHAUSTED", "CORE_OPS", "Instruction", "MachineState", "Opcode",
    "Operand", "OpSetPolicy", "Program", "RAND_GENERAL", "RAND_NONE", "RAND_POW2",
    "REJECTED", "RUNTIME_ERROR", "RunResult", "eliminate_right_shifts",
    "eliminate_right_shifts_detailed", "format_program", "parse_program", "run",
]
