"""A small prefix-free register machine over bit-string programs.

Programs are strings of ``'0'``/``'1'`` characters decoded into seven tokens by a
complete prefix code. A program is a token stream that ends at its first HALT
with balanced WHILE/WEND pairs; anything else is either an incomplete prefix
(more bits could still make a program) or not a program at all.

Machine state is two natural-number registers ``A`` and ``B``, both starting
at 0. The output of a halting program is the final value of ``A``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

MACHINE_ID = "bitvm1"
DEFAULT_REGISTER_CAP = 2**64


class Token(IntEnum):
    INC = 0
    DEC = 1
    SWAP = 2
    ADD = 3
    WHILE = 4
    WEND = 5
    HALT = 6


CODEWORDS: dict[Token, str] = {
    Token.INC: "00",
    Token.DEC: "01",
    Token.SWAP: "100",
    Token.ADD: "101",
    Token.WHILE: "110",
    Token.WEND: "1110",
    Token.HALT: "1111",
}
_BY_CODEWORD = {c: t for t, c in CODEWORDS.items()}
_MAX_CODEWORD = max(len(c) for c in CODEWORDS.values())


# -- run outcomes ---------------------------------------------------------

@dataclass(frozen=True)
class Halted:
    output: int
    steps: int
    consumed: int

    @property
    def log_runtime(self) -> float:
        """Log runtime in bits, ``log2(steps)``."""
        return math.log2(self.steps)


@dataclass(frozen=True)
class StillRunning:
    steps: int


@dataclass(frozen=True)
class NeedsMoreBits:
    consumed: int


@dataclass(frozen=True)
class NotAProgram:
    reason: str


RunOutcome = Halted | StillRunning | NeedsMoreBits | NotAProgram


def encode(tokens) -> str:
    return "".join(CODEWORDS[Token(t)] for t in tokens)


def decode_token(bits: str, pos: int = 0) -> tuple[Token, int] | NeedsMoreBits:
    """Decode the token starting at ``bits[pos]``.

    Returns ``(token, next_pos)``, or :class:`NeedsMoreBits` when the remaining
    bits are a proper prefix of some codeword. The code is complete, so there
    is no invalid case.
    """
    if not 0 <= pos <= len(bits):
        raise IndexError(f"position {pos} outside bit string of length {len(bits)}")
    for width in range(2, _MAX_CODEWORD + 1):
        tok = _BY_CODEWORD.get(bits[pos:pos + width])
        if tok is not None:
            return tok, pos + width
        if pos + width >= len(bits):
            break
    return NeedsMoreBits(len(bits))


def parse_program(bits: str) -> list[Token] | NeedsMoreBits | NotAProgram:
    """Parse a complete program.

    A WEND with no open WHILE can never be balanced by appending bits, so it
    is rejected as soon as it is decoded rather than reported as incomplete.
    """
    if any(b not in "01" for b in bits):
        raise ValueError(f"not a bit string: {bits!r}")
    tokens: list[Token] = []
    depth = 0
    pos = 0
    while True:
        dec = decode_token(bits, pos)
        if isinstance(dec, NeedsMoreBits):
            return dec
        tok, pos = dec
        tokens.append(tok)
        if tok is Token.WHILE:
            depth += 1
        elif tok is Token.WEND:
            if depth == 0:
                return NotAProgram("WEND without matching WHILE")
            depth -= 1
        elif tok is Token.HALT:
            if pos != len(bits):
                return NotAProgram("bits past the first HALT")
            if depth != 0:
                return NotAProgram("unclosed WHILE")
            return tokens


def compile_tokens(tokens) -> tuple[np.ndarray, np.ndarray]:
    """Lower a balanced token list to opcode and jump-target arrays.

    WHILE jumps to just past its WEND; WEND jumps back to its WHILE.
    """
    ops = np.fromiter((int(t) for t in tokens), dtype=np.int8, count=len(tokens))
    jumps = np.zeros(len(tokens), dtype=np.int32)
    stack = []
    for i, t in enumerate(tokens):
        if t == Token.WHILE:
            stack.append(i)
        elif t == Token.WEND:
            j = stack.pop()
            jumps[j] = i + 1
            jumps[i] = j
    if stack:
        raise ValueError("unbalanced WHILE/WEND")
    return ops, jumps


# -- execution ------------------------------------------------------------

# kernel status codes
_HALTED, _RUNNING = 0, 1


def _execute_py(ops, jumps, max_steps: int, cap: int) -> tuple[int, int, int]:
    """Reference interpreter on Python ints. Returns ``(status, steps, A)``."""
    a = b = 0
    pc = 0
    steps = 0
    while steps < max_steps:
        op = ops[pc]
        steps += 1
        if op == Token.INC:
            a += 1
            pc += 1
        elif op == Token.DEC:
            if a > 0:
                a -= 1
            pc += 1
        elif op == Token.SWAP:
            a, b = b, a
            pc += 1
        elif op == Token.ADD:
            a += b
            pc += 1
        elif op == Token.WHILE:
            pc = jumps[pc] if a == 0 else pc + 1
        elif op == Token.WEND:
            pc = jumps[pc]
        else:
            return _HALTED, steps, a
        if a >= cap:
            return _RUNNING, steps, a
    return _RUNNING, steps, a


def _execute_u64(ops, jumps, max_steps, limit):
    """uint64 interpreter; registers stay ``<= limit``.

    Repeated machine states are detected with Brent's scheme: a deterministic
    machine that revisits a state never halts, so the run is reported as
    exhausting the whole budget.
    """
    a = np.uint64(0)
    b = np.uint64(0)
    one = np.uint64(1)
    pc = 0
    steps = 0
    saved_pc = -1
    saved_a = np.uint64(0)
    saved_b = np.uint64(0)
    checkpoint = 1
    while steps < max_steps:
        op = ops[pc]
        steps += 1
        if op == 0:
            if a >= limit:
                return 1, steps, a
            a += one
            pc += 1
        elif op == 1:
            if a > 0:
                a -= one
            pc += 1
        elif op == 2:
            a, b = b, a
            pc += 1
        elif op == 3:
            if b > limit - a:
                return 1, steps, a
            a += b
            pc += 1
        elif op == 4:
            if a == 0:
                pc = jumps[pc]
            else:
                pc += 1
        elif op == 5:
            pc = jumps[pc]
        else:
            return 0, steps, a
        if pc == saved_pc and a == saved_a and b == saved_b:
            return 1, max_steps, a
        if steps == checkpoint:
            saved_pc = pc
            saved_a = a
            saved_b = b
            checkpoint *= 2
    return 1, steps, a


if numba is not None:
    _execute_u64 = numba.njit(cache=True, nogil=True)(_execute_u64)


def execute(ops, jumps, max_steps: int, register_cap: int = DEFAULT_REGISTER_CAP) -> tuple[bool, int, int]:
    """Run compiled code. Returns ``(halted, steps, output)``."""
    if numba is not None and register_cap <= 2**64:
        status, steps, a = _execute_u64(ops, jumps, max_steps, np.uint64(register_cap - 1))
    else:
        status, steps, a = _execute_py(ops, jumps, max_steps, register_cap)
    return status == _HALTED, int(steps), int(a)


def run(bits: str, max_steps: int, register_cap: int = DEFAULT_REGISTER_CAP) -> RunOutcome:
    """Run ``bits`` for at most ``max_steps`` steps.

    Every executed token costs one step, HALT included, so a halting run has
    ``steps >= 1``. A register reaching ``register_cap`` leaves the run
    undecided (:class:`StillRunning`), never a wrong halt.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    parsed = parse_program(bits)
    if not isinstance(parsed, list):
        return parsed
    ops, jumps = compile_tokens(parsed)
    halted, steps, out = execute(ops, jumps, max_steps, register_cap)
    if halted:
        return Halted(output=out, steps=steps, consumed=len(bits))
    return StillRunning(steps)
