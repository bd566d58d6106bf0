"""A fuel-metered bit-cell interpreter and the reference universal machines.

Programs are bit strings read as a sequence of 3-bit opcodes (1-2 trailing
bits are ignored)::

    000 FLIP   001 LEFT   010 RIGHT   011 LOOPSTART
    100 LOOPEND   101 READ   110 WRITE   111 HALT

The tape is one-way infinite to the right, holds single bits and starts at
zero with the head on cell 0.  Every executed opcode costs one unit of fuel
and a bracket jump costs one unit per opcode hopped over.  Failure is never
an exception: a run ends Halted, FuelExhausted or Diverged.  Diverged is
reserved for structural rules that hold at every budget (LEFT at cell 0, an
unmatched bracket jump, a prefix READ past the end of the stream).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

from .bitstr import BitString, MalformedInput, nat_to_str, pair_decode

FLIP, LEFT, RIGHT, LOOPSTART, LOOPEND, READ, WRITE, HALT = range(8)

MNEMONICS = ("FLIP", "LEFT", "RIGHT", "LOOPSTART", "LOOPEND", "READ", "WRITE", "HALT")
_ALIASES = {"[": LOOPSTART, "]": LOOPEND}
_TO01 = bytes.maketrans(b"01", b"\x00\x01")


class Kind(enum.Enum):
    HALTED = "halted"
    FUEL_EXHAUSTED = "fuel-exhausted"
    DIVERGED = "diverged"


@dataclass(frozen=True)
class ExecOutcome:
    kind: Kind
    output: BitString = ""
    steps: int = 0
    consumed_input: int = 0
    # Set only when cycle detection was requested and a configuration
    # repeated: the run is FuelExhausted now and at every larger budget.
    proven_nonhalting: bool = False

    @property
    def halted(self) -> bool:
        return self.kind is Kind.HALTED

    @property
    def settled(self) -> bool:
        """True when no larger budget can change the outcome."""
        return self.kind is not Kind.FUEL_EXHAUSTED or self.proven_nonhalting


def _diverged(steps: int, consumed: int = 0) -> ExecOutcome:
    return ExecOutcome(Kind.DIVERGED, "", steps, consumed)


@lru_cache(maxsize=1 << 16)
def _decode(raw: str) -> tuple[tuple[int, ...], tuple[int, ...]]:
    ops = tuple(int(raw[i : i + 3], 2) for i in range(0, len(raw) - 2, 3))
    match = [-1] * len(ops)
    stack = []
    for i, op in enumerate(ops):
        if op == LOOPSTART:
            stack.append(i)
        elif op == LOOPEND and stack:
            j = stack.pop()
            match[i], match[j] = j, i
    return ops, tuple(match)


@dataclass(frozen=True)
class MachineCode:
    """A program: raw bits plus the decoded opcode sequence."""

    raw: BitString
    ops: tuple[int, ...] = field(init=False, repr=False, compare=False)
    match: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ops, match = _decode(self.raw)
        object.__setattr__(self, "ops", ops)
        object.__setattr__(self, "match", match)

    @classmethod
    def from_index(cls, e: int) -> "MachineCode":
        return cls(nat_to_str(e))

    @property
    def mnemonics(self) -> list[str]:
        return [MNEMONICS[op] for op in self.ops]


def assemble(source: str) -> BitString:
    """Translate whitespace-separated mnemonics (``[``/``]`` allowed) to bits."""
    bits = []
    for tok in source.split():
        op = _ALIASES.get(tok)
        if op is None:
            op = MNEMONICS.index(tok.upper())
        bits.append(format(op, "03b"))
    return "".join(bits)


def disassemble(raw: BitString) -> str:
    return " ".join(MachineCode(raw).mnemonics)


def _execute(
    code: MachineCode,
    tape_init: bytes,
    stream: str,
    fuel: int,
    eof_halts: bool,
    detect_cycles: bool = False,
    trace: list | None = None,
) -> ExecOutcome:
    ops, match = code.ops, code.match
    n = len(ops)
    inp = stream.encode().translate(_TO01)
    ninp = len(inp)
    tape = bytearray(tape_init) if tape_init else bytearray(1)
    out: list[str] = []
    pc = head = steps = pos = 0
    saved = None
    next_save = 1

    while pc < n:
        if steps >= fuel:
            return ExecOutcome(Kind.FUEL_EXHAUSTED, "".join(out), steps, pos)
        op = ops[pc]
        if trace is not None:
            trace.append(f"{pc} {head} {tape[head]} {fuel - steps}")
        steps += 1
        if op == FLIP:
            tape[head] ^= 1
            pc += 1
        elif op == RIGHT:
            head += 1
            if head == len(tape):
                tape.append(0)
            pc += 1
        elif op == LEFT:
            if head == 0:
                return _diverged(steps, pos)
            head -= 1
            pc += 1
        elif op == LOOPSTART:
            if tape[head]:
                pc += 1
                continue
            j = match[pc]
            hops = (j if j >= 0 else n - 1) - pc
            if steps + hops > fuel:
                return ExecOutcome(Kind.FUEL_EXHAUSTED, "".join(out), fuel, pos)
            steps += hops
            if j < 0:
                return _diverged(steps, pos)
            pc = j + 1
        elif op == LOOPEND:
            if not tape[head]:
                pc += 1
                continue
            j = match[pc]
            hops = pc - (j if j >= 0 else 0)
            if steps + hops > fuel:
                return ExecOutcome(Kind.FUEL_EXHAUSTED, "".join(out), fuel, pos)
            steps += hops
            if j < 0:
                return _diverged(steps, pos)
            pc = j + 1
            if detect_cycles:
                # Brent-style: compare against a configuration saved at the
                # last power-of-two step count; output never affects the future.
                if saved is not None and saved[0] == pc and saved[1] == head and saved[2] == pos:
                    if saved[3] == bytes(tape).rstrip(b"\x00"):
                        return ExecOutcome(
                            Kind.FUEL_EXHAUSTED, "".join(out), steps, pos, True
                        )
                if steps >= next_save:
                    saved = (pc, head, pos, bytes(tape).rstrip(b"\x00"))
                    next_save = 2 * steps
        elif op == READ:
            if pos >= ninp:
                if eof_halts:
                    return ExecOutcome(Kind.HALTED, "".join(out), steps, pos)
                return _diverged(steps, pos)
            tape[head] = inp[pos]
            pos += 1
            pc += 1
        elif op == WRITE:
            out.append("1" if tape[head] else "0")
            pc += 1
        else:
            return ExecOutcome(Kind.HALTED, "".join(out), steps, pos)
    return ExecOutcome(Kind.HALTED, "".join(out), steps, pos)


def _as_code(code) -> MachineCode:
    return code if isinstance(code, MachineCode) else MachineCode(code)


def condition_tape(condition: BitString) -> bytes:
    return ("1" * len(condition) + "0" + condition).encode().translate(_TO01)


def run_plain(code, input: BitString, fuel: int, *, detect_cycles=False, trace=None) -> ExecOutcome:
    """Plain semantics: READ at end of input halts with the output so far."""
    return _execute(_as_code(code), b"", input, fuel, True, detect_cycles, trace)


def run_prefix(code, stream: BitString, fuel: int, *, detect_cycles=False, trace=None) -> ExecOutcome:
    """Prefix semantics: READ past the end of the stream diverges."""
    return _execute(_as_code(code), b"", stream, fuel, False, detect_cycles, trace)


def run_conditional(
    code, input: BitString, condition: BitString, fuel: int, *, detect_cycles=False, trace=None
) -> ExecOutcome:
    """Plain semantics on a tape pre-loaded with ``1^{|c|} 0 c``."""
    return _execute(
        _as_code(code), condition_tape(condition), input, fuel, True, detect_cycles, trace
    )


def psi(e: int, x: BitString, fuel: int, *, detect_cycles=False) -> ExecOutcome:
    """The e-th partial function: machine ``nat_to_str(e)`` run plainly on x."""
    return run_plain(MachineCode.from_index(e), x, fuel, detect_cycles=detect_cycles)


def universal_plain(y: BitString, fuel: int, *, detect_cycles=False) -> ExecOutcome:
    """The reference plain machine: ``y = <code, input>``.

    The empty string is read as the empty machine on empty input, so the
    empty program prints the empty string.
    """
    if not y:
        return ExecOutcome(Kind.HALTED)
    try:
        code, x = pair_decode(y)
    except MalformedInput:
        return _diverged(0)
    return run_plain(code, x, fuel, detect_cycles=detect_cycles)


def universal_prefix(s: BitString, fuel: int, *, detect_cycles=False) -> ExecOutcome:
    """The reference prefix-free machine.

    ``s = 1^k 0 code rest`` with ``|code| = k``; halts only when the inner
    prefix run halts having read ``rest`` exactly, so the domain is
    prefix-free.
    """
    try:
        code, rest = pair_decode(s)
    except MalformedInput:
        return _diverged(0)
    res = run_prefix(code, rest, fuel, detect_cycles=detect_cycles)
    if res.halted and res.consumed_input != len(rest):
        return _diverged(res.steps, res.consumed_input)
    return res


def universal_conditional(z: BitString, condition: BitString, fuel: int, *, detect_cycles=False) -> ExecOutcome:
    """Reference conditional machine: ``z = <code, input>`` run with the condition on tape."""
    if not z:
        return ExecOutcome(Kind.HALTED)
    try:
        code, x = pair_decode(z)
    except MalformedInput:
        return _diverged(0)
    return run_conditional(code, x, condition, fuel, detect_cycles=detect_cycles)
