"""Decide every bit string up to a length cap against a step budget.

The prefix tree of bit strings is walked token by token. A node that ends in
HALT with balanced loops is a complete program and is run; nothing below it
can be a program, so the walk never descends past it. Nodes that reach the
length cap while still incomplete become *live prefixes*, which bound the mass
of everything not yet explored.
"""
from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .vm import (
    CODEWORDS,
    DEFAULT_REGISTER_CAP,
    MACHINE_ID,
    Halted,
    NeedsMoreBits,
    StillRunning,
    Token,
    compile_tokens,
    execute,
    run,
)

log = logging.getLogger(__name__)

MAX_LENGTH = 32
MAX_STEPS = 2**32
MAX_ORACLE_LENGTH = 24
DEFAULT_LENGTH = 22
DEFAULT_STEPS = 2**20
FORMAT_VERSION = "v1"


class CapError(ValidationError):
    """Requested caps are outside the configured hard limits."""


def length_lex(bits: str) -> tuple[int, str]:
    return len(bits), bits


@dataclass(frozen=True, order=True)
class HaltingRecord:
    bits: str
    t: int
    N: int

    @property
    def V(self) -> int:
        return len(self.bits)

    @property
    def E(self) -> float:
        """Log runtime in bits."""
        return math.log2(self.t)

    def sort_key(self):
        return length_lex(self.bits)


@dataclass(frozen=True)
class RunningString:
    bits: str
    steps: int


@dataclass(frozen=True)
class CorpusSnapshot:
    """Decided state of all strings with ``|x| <= L`` at step budget ``Tmax``.

    The three collections are stored as tuples in length-lexicographic order,
    so two snapshots of the same enumeration compare equal field for field.
    """

    L: int
    Tmax: int
    records: tuple[HaltingRecord, ...] = ()
    running: tuple[RunningString, ...] = ()
    live: tuple[str, ...] = ()
    machine_id: str = MACHINE_ID
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    @classmethod
    def build(cls, L, Tmax, records, running, live, machine_id=MACHINE_ID):
        return cls(
            L=L,
            Tmax=Tmax,
            records=tuple(sorted(records, key=HaltingRecord.sort_key)),
            running=tuple(sorted(running, key=lambda r: length_lex(r.bits))),
            live=tuple(sorted(set(live), key=length_lex)),
            machine_id=machine_id,
        )

    def record(self, bits: str) -> HaltingRecord | None:
        if "index" not in self._cache:
            self._cache["index"] = {r.bits: r for r in self.records}
        return self._cache["index"].get(bits)

    def observables(self):
        """``(E, V, N)`` float arrays over the records, in canonical order."""
        if "obs" not in self._cache:
            t = np.array([r.t for r in self.records], dtype=float)
            E = np.log2(t)
            V = np.array([r.V for r in self.records], dtype=float)
            N = np.array([float(r.N) for r in self.records])
            for a in (E, V, N):
                a.setflags(write=False)
            self._cache["obs"] = (E, V, N)
        return self._cache["obs"]

    @property
    def running_bits(self) -> tuple[str, ...]:
        return tuple(r.bits for r in self.running)

    def outputs(self) -> list[int]:
        return sorted({r.N for r in self.records})


def kraft_sum(snapshot: CorpusSnapshot, exact: bool = False):
    """Total dyadic mass of records, running strings and live prefixes.

    With ``exact=True`` the sum is a :class:`~fractions.Fraction`; otherwise a
    correctly rounded float.
    """
    lengths = [r.V for r in snapshot.records]
    lengths += [len(r.bits) for r in snapshot.running]
    lengths += [len(p) for p in snapshot.live]
    if exact:
        return sum((Fraction(1, 2**n) for n in lengths), Fraction(0))
    return math.fsum(2.0**-n for n in lengths)


def _check_caps(L, Tmax, max_length=MAX_LENGTH, max_steps=MAX_STEPS):
    if L < 0 or Tmax < 1:
        raise CapError(f"need L >= 0 and Tmax >= 1, got L={L}, Tmax={Tmax}")
    if L > max_length:
        raise CapError(f"L={L} exceeds the hard limit {max_length}; raise max_length explicitly")
    if Tmax > max_steps:
        raise CapError(f"Tmax={Tmax} exceeds the hard limit {max_steps}; raise max_steps explicitly")


# -- prefix-tree walk -----------------------------------------------------

# Incomplete strings made of r < 4 leading bits of a longer codeword. These are
# the same for every prefix and are always live: "111" extends both to WEND
# and to HALT, so it survives either loop depth.
_PARTIAL = {
    r: sorted({c[:r] for c in CODEWORDS.values() if len(c) > r})
    for r in range(1, max(map(len, CODEWORDS.values())))
}


class _Collector:
    __slots__ = ("records", "running", "live")

    def __init__(self):
        self.records = []
        self.running = []
        self.live = []


def _walk(prefix, tokens, depth, L, Tmax, cap, out):
    room = L - len(prefix)
    if room == 0:
        out.live.append(prefix)
        return
    for tok, code in CODEWORDS.items():
        if len(code) > room:
            continue
        bits = prefix + code
        if tok is Token.HALT:
            if depth == 0:
                _decide(bits, tokens + [tok], Tmax, cap, out)
        elif tok is Token.WEND:
            if depth > 0:
                _walk(bits, tokens + [tok], depth - 1, L, Tmax, cap, out)
        else:
            _walk(bits, tokens + [tok], depth + (tok is Token.WHILE), L, Tmax, cap, out)
    if room <= len(_PARTIAL):
        out.live.extend(prefix + p for p in _PARTIAL[room])


def _decide(bits, tokens, Tmax, cap, out):
    ops, jumps = compile_tokens(tokens)
    halted, steps, value = execute(ops, jumps, Tmax, cap)
    if halted:
        out.records.append(HaltingRecord(bits, steps, value))
    else:
        out.running.append(RunningString(bits, steps))


def _work_units(L, split_depth=2):
    """Token sequences of ``split_depth`` tokens that fit within ``L`` bits.

    Returns ``(units, shallow)``: the subtree roots to hand to workers, and the
    strings decided above the split (HALT-terminated programs, partial tokens
    and full-length prefixes) which the caller handles directly.
    """
    shallow = []  # (kind, bits, tokens) with kind in {"program", "live", "partial"}
    frontier = [("", [], 0)]
    for _ in range(split_depth):
        nxt = []
        for prefix, tokens, depth in frontier:
            room = L - len(prefix)
            if room == 0:
                shallow.append(("live", prefix, tokens))
                continue
            for tok, code in CODEWORDS.items():
                if len(code) > room:
                    continue
                bits = prefix + code
                if tok is Token.HALT:
                    if depth == 0:
                        shallow.append(("program", bits, tokens + [tok]))
                elif tok is Token.WEND:
                    if depth > 0:
                        nxt.append((bits, tokens + [tok], depth - 1))
                else:
                    nxt.append((bits, tokens + [tok], depth + (tok is Token.WHILE)))
            if room <= len(_PARTIAL):
                shallow.extend(("partial", prefix + p, None) for p in _PARTIAL[room])
        frontier = nxt
    return frontier, shallow


def dovetail_enumerate(
    L: int = DEFAULT_LENGTH,
    Tmax: int = DEFAULT_STEPS,
    threads: int = 1,
    register_cap: int = DEFAULT_REGISTER_CAP,
    max_length: int = MAX_LENGTH,
    max_steps: int = MAX_STEPS,
) -> CorpusSnapshot:
    """Classify every string of length ``<= L`` against the budget ``Tmax``.

    Each complete program is run for up to ``Tmax`` steps, which decides the
    same set as interleaving single steps across programs. Subtrees are
    independent; the merged snapshot is canonicalised, so the result does not
    depend on ``threads``.
    """
    _check_caps(L, Tmax, max_length, max_steps)
    units, shallow = _work_units(L)
    out = _Collector()
    for kind, bits, tokens in shallow:
        if kind == "program":
            _decide(bits, tokens, Tmax, register_cap, out)
        else:
            out.live.append(bits)

    def work(unit):
        prefix, tokens, depth = unit
        part = _Collector()
        _walk(prefix, tokens, depth, L, Tmax, register_cap, part)
        return part

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, units))
    else:
        parts = [work(u) for u in units]
    for part in parts:
        out.records += part.records
        out.running += part.running
        out.live += part.live
    snap = CorpusSnapshot.build(L, Tmax, out.records, out.running, out.live)
    log.info(
        "L=%d Tmax=%d: %d records, %d running, %d live",
        L, Tmax, len(snap.records), len(snap.running), len(snap.live),
    )
    return snap


def brute_force_oracle(L: int, Tmax: int, register_cap: int = DEFAULT_REGISTER_CAP,
                       max_length: int = MAX_ORACLE_LENGTH) -> CorpusSnapshot:
    """Run every string of length ``<= L`` on its own, with no pruning.

    Only for checking :func:`dovetail_enumerate`; cost is ``2**(L+1)`` runs.
    """
    _check_caps(L, Tmax, max_length=max_length)
    records, running, live = [], [], []
    for n in range(L + 1):
        for combo in itertools.product("01", repeat=n):
            bits = "".join(combo)
            res = run(bits, Tmax, register_cap)
            if isinstance(res, Halted):
                records.append(HaltingRecord(bits, res.steps, res.output))
            elif isinstance(res, StillRunning):
                running.append(RunningString(bits, res.steps))
            elif isinstance(res, NeedsMoreBits) and n == L:
                live.append(bits)
    return CorpusSnapshot.build(L, Tmax, records, running, live)


# -- persistence ----------------------------------------------------------

class CorpusFormatError(ValidationError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        where = f"line {lineno}: " if lineno is not None else ""
        super().__init__(where + message)


class CorpusVersionError(CorpusFormatError):
    pass


class MachineMismatchError(CorpusFormatError):
    pass


class CorpusIntegrityError(CorpusFormatError):
    pass


def dumps_corpus(snapshot: CorpusSnapshot) -> str:
    lines = [f"#ALGTHERMO {FORMAT_VERSION} machine={snapshot.machine_id} L={snapshot.L} Tmax={snapshot.Tmax}"]
    lines += [f"R {r.bits} {r.t} {r.N}" for r in snapshot.records]
    lines += [f"X {r.bits} {r.steps}" for r in snapshot.running]
    lines += [f"P {p}" for p in snapshot.live]
    return "\n".join(lines) + "\n"


def save_corpus(snapshot: CorpusSnapshot, path) -> None:
    Path(path).write_text(dumps_corpus(snapshot), encoding="utf-8", newline="\n")


def _nat(text, lineno, what):
    if not text.isdigit():
        raise CorpusFormatError(f"{what} must be a natural number, got {text!r}", lineno)
    return int(text)


def _bitfield(text, lineno):
    if text.strip("01"):
        raise CorpusFormatError(f"not a bit string: {text!r}", lineno)
    return text


def loads_corpus(text: str, verify: bool = False, register_cap: int = DEFAULT_REGISTER_CAP) -> CorpusSnapshot:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise CorpusFormatError("empty corpus file", 1)
    head = lines[0].split(" ")
    if not head or head[0] != "#ALGTHERMO" or len(head) != 5:
        raise CorpusFormatError("bad header, expected '#ALGTHERMO v1 machine=... L=... Tmax=...'", 1)
    if head[1] != FORMAT_VERSION:
        raise CorpusVersionError(f"unsupported format version {head[1]!r} (this build reads {FORMAT_VERSION})", 1)
    try:
        meta = dict(kv.split("=", 1) for kv in head[2:])
    except ValueError:
        raise CorpusFormatError("bad header fields", 1) from None
    if set(meta) != {"machine", "L", "Tmax"}:
        raise CorpusFormatError("header needs machine=, L= and Tmax=", 1)
    if meta["machine"] != MACHINE_ID:
        raise MachineMismatchError(
            f"corpus was built for machine {meta['machine']!r}, this build runs {MACHINE_ID!r}", 1)
    L = _nat(meta["L"], 1, "L")
    Tmax = _nat(meta["Tmax"], 1, "Tmax")

    records, running, live = [], [], []
    section_order = "RXP"
    section = 0
    last_key = None
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(" ")
        kind = parts[0]
        if kind not in section_order:
            raise CorpusFormatError(f"unknown line kind {kind!r}", lineno)
        idx = section_order.index(kind)
        if idx < section:
            raise CorpusFormatError(f"{kind} line after the {section_order[section]} section", lineno)
        if idx > section:
            section, last_key = idx, None
        expected = {"R": 4, "X": 3, "P": 2}[kind]
        if len(parts) != expected:
            raise CorpusFormatError(f"{kind} line needs {expected - 1} fields", lineno)
        bits = _bitfield(parts[1], lineno)
        if len(bits) > L:
            raise CorpusFormatError(f"string longer than L={L}", lineno)
        key = length_lex(bits)
        if last_key is not None and key <= last_key:
            raise CorpusFormatError("lines not in length-lexicographic order", lineno)
        last_key = key
        if kind == "R":
            rec = HaltingRecord(bits, _nat(parts[2], lineno, "t"), _nat(parts[3], lineno, "N"))
            if rec.t < 1:
                raise CorpusFormatError("t must be at least 1", lineno)
            if verify:
                res = run(bits, Tmax, register_cap)
                if not (isinstance(res, Halted) and (res.steps, res.output) == (rec.t, rec.N)):
                    raise CorpusIntegrityError(
                        f"record {bits} does not reproduce (t={rec.t}, N={rec.N}); re-run gives {res}", lineno)
            records.append(rec)
        elif kind == "X":
            rs = RunningString(bits, _nat(parts[2], lineno, "steps"))
            if verify:
                res = run(bits, Tmax, register_cap)
                if not (isinstance(res, StillRunning) and res.steps == rs.steps):
                    raise CorpusIntegrityError(f"running string {bits} does not reproduce; re-run gives {res}", lineno)
            running.append(rs)
        else:
            live.append(bits)
    return CorpusSnapshot.build(L, Tmax, records, running, live)


def load_corpus(path, verify: bool = False, register_cap: int = DEFAULT_REGISTER_CAP) -> CorpusSnapshot:
    return loads_corpus(Path(path).read_text(encoding="utf-8"), verify=verify, register_cap=register_cap)
