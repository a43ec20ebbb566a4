"""Unit-cost interpreter for RAM[op] programs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from pelram.errors import PelramError
from pelram.natnum import eval_prim
from pelram.ram.program import DIRECT, INDIRECT, Opcode, Operand, Program
from pelram.randsrc import RandomSource

ACCEPTED = "accepted"
REJECTED = "rejected"
BUDGET_EXHAUSTED = "budget_exhausted"
RUNTIME_ERROR = "runtime_error"

INPUT_REGISTER = 0
OUTPUT_REGISTER = 0


@dataclass(frozen=True)
class RunResult:
    outcome: str
    steps_used: int
    final_r0: int
    error: str | None = None
    registers: dict[int, int] = field(default_factory=dict, compare=False, repr=False)

    @property
    def accepted(self) -> bool:
        return self.outcome == ACCEPTED


class MachineState:
    """Registers, program counter and step count of one execution."""

    def __init__(self, program: Program, inp: int, rng: RandomSource | None):
        if inp < 0:
            raise ValueError("input must be a natural number")
        self.program = program
        self.registers: dict[int, int] = {INPUT_REGISTER: inp} if inp else {}
        self.pc = 0
        self.steps = 0
        self.rng = rng

    def read(self, o: Operand) -> int:
        if o.kind == DIRECT:
            return self.registers.get(o.value, 0)
        if o.kind == INDIRECT:
            return self.registers.get(self.registers.get(o.value, 0), 0)
        return o.value

    def write(self, o: Operand, value: int) -> None:
        addr = o.value if o.kind == DIRECT else self.registers.get(o.value, 0)
        if value:
            self.registers[addr] = value
        else:
            self.registers.pop(addr, None)

    def step(self) -> bool:
        """Dispatch one instruction; return False once the machine has halted."""
        instructions = self.program.instructions
        if self.pc >= len(instructions):
            return False
        ins = instructions[self.pc]
        self.steps += 1
        self.pc += 1
        op = ins.op
        if op is Opcode.PRIM:
            a = self.read(ins.args[0])
            b = self.read(ins.args[1]) if len(ins.args) > 1 else 0
            self.write(ins.dest, eval_prim(ins.prim, a, b))
        elif op is Opcode.ASSIGN:
            self.write(ins.dest, self.read(ins.args[0]))
        elif op is Opcode.JUMP:
            self.pc = ins.target
        elif op is Opcode.BEQ:
            if self.read(ins.args[0]) == self.read(ins.args[1]):
                self.pc = ins.target
        elif op is Opcode.RAND2:
            self.write(ins.dest, self._rng().bits(self.read(ins.args[0])))
        elif op is Opcode.RAND:
            self.write(ins.dest, self._rng().below(self.read(ins.args[0])))
        elif op is Opcode.ACCEPT:
            self.registers[0] = 1
            self.pc = len(instructions)
            return False
        elif op is Opcode.REJECT:
            self.registers.pop(0, None)
            self.pc = len(instructions)
            return False
        elif op is Opcode.HALT:
            self.pc = len(instructions)
            return False
        return self.pc < len(instructions)

    def _rng(self) -> RandomSource:
        if self.rng is None:
            self.rng = RandomSource()
        return self.rng


def run(program: Program, inp: int, budget: int, rng: RandomSource | None = None,
        trace: Callable[[MachineState], None] | None = None) -> RunResult:
    """Execute ``program`` on ``inp`` for at most ``budget`` unit-cost steps.

    ``trace``, if given, is called with the machine state before each dispatch.
    Falling off the end of the program is a halt.
    """
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    m = MachineState(program, inp, rng)
    running = m.pc < len(program.instructions)
    try:
        while running:
            if m.steps >= budget:
                return _result(m, BUDGET_EXHAUSTED)
            if trace is not None:
                trace(m)
            running = m.step()
    except PelramError as exc:
        return _result(m, RUNTIME_ERROR, f"{type(exc).__name__}: {exc}")
    out = m.registers.get(OUTPUT_REGISTER, 0)
    return _result(m, ACCEPTED if out else REJECTED)


def _result(m: MachineState, outcome: str, error: str | None = None) -> RunResult:
    return RunResult(outcome, m.steps, m.registers.get(OUTPUT_REGISTER, 0), error,
                     dict(m.registers))
