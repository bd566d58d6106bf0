"""Fair enumeration of programs and anytime complexity upper bounds.

A :class:`ResultStore` records, for one machine kind, every program found
to halt together with its output and step count.  Round ``r`` runs every
program of length ``<= min(r, cap)`` (plus any witness programs supplied by
the caller) with ``fuel(r)`` steps.  Facts are only ever added, so the
shortest-program bound read off the store can only decrease as rounds pass.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator

from .bitstr import BitString, lenlex_key, str_to_nat, strings_of_length
from .bitvm import universal_conditional, universal_plain, universal_prefix


class BudgetOverflow(ValueError):
    pass


class UnknownMachine(KeyError):
    pass


@dataclass(frozen=True)
class MachineKind:
    tag: str  # "plain" | "prefix" | "conditional" | "custom"
    condition: BitString | None = None
    name: str | None = None

    def __post_init__(self):
        if self.tag not in ("plain", "prefix", "conditional", "custom"):
            raise ValueError(f"unknown machine tag {self.tag!r}")
        if self.tag == "custom" and not self.name:
            raise ValueError("custom machines need a name")

    @classmethod
    def conditional(cls, y: BitString) -> "MachineKind":
        return cls("conditional", condition=y)

    @classmethod
    def custom(cls, name: str) -> "MachineKind":
        return cls("custom", name=name)

    def __str__(self):
        if self.tag == "conditional":
            return f"conditional({self.condition})"
        if self.tag == "custom":
            return f"custom({self.name})"
        return self.tag


PLAIN = MachineKind("plain")
PREFIX = MachineKind("prefix")

# runner(program, fuel, cache) -> outcome with .halted/.output/.steps/.settled
Runner = Callable[[BitString, int, dict], object]
_CUSTOM: dict[str, Runner] = {}


def register_machine(name: str, runner: Runner) -> MachineKind:
    _CUSTOM[name] = runner
    return MachineKind.custom(name)


def runner_for(kind: MachineKind) -> Runner:
    if kind.tag == "plain":
        return lambda p, fuel, cache: universal_plain(p, fuel, detect_cycles=True)
    if kind.tag == "prefix":
        return lambda p, fuel, cache: universal_prefix(p, fuel, detect_cycles=True)
    if kind.tag == "conditional":
        y = kind.condition
        return lambda p, fuel, cache: universal_conditional(p, y, fuel, detect_cycles=True)
    try:
        return _CUSTOM[kind.name]
    except KeyError:
        raise UnknownMachine(kind.name) from None


@dataclass(frozen=True)
class FuelSchedule:
    """``fuel(r) = min(base**r, cap)``."""

    base: int = 2
    cap: int = 10**6

    def __call__(self, r: int) -> int:
        return min(self.base**r, self.cap)

    def first_round_with(self, steps: int, length: int, length_cap: int, seeded=False) -> int:
        """Earliest round in which a program of this length and step count halts."""
        r = 1 if seeded or length > length_cap else max(1, length)
        while self(r) < steps:
            if self(r) >= self.cap:
                raise BudgetOverflow(f"{steps} steps exceed the fuel cap {self.cap}")
            r += 1
        return r


@dataclass
class ResultStore:
    machine: MachineKind
    round: int = 0
    facts: dict[BitString, tuple[BitString, int]] = field(default_factory=dict)
    program_length_cap: int = 14
    # working state, not part of the persisted value
    _settled: set = field(default_factory=set, compare=False, repr=False)
    _cache: dict = field(default_factory=dict, compare=False, repr=False)
    _index: dict | None = field(default=None, compare=False, repr=False)
    _index_size: int = field(default=-1, compare=False, repr=False)

    def copy(self) -> "ResultStore":
        return ResultStore(self.machine, self.round, dict(self.facts), self.program_length_cap)

    def best(self) -> dict[BitString, BitString]:
        """Map output -> shortest program (ties: length-lex first)."""
        if self._index_size != len(self.facts):
            idx: dict[BitString, BitString] = {}
            for prog, (out, _) in self.facts.items():
                cur = idx.get(out)
                if cur is None or lenlex_key(prog) < lenlex_key(cur):
                    idx[out] = prog
            self._index = idx
            self._index_size = len(self.facts)
        return self._index

    def bounds(self) -> dict[BitString, int]:
        return {x: len(p) for x, p in self.best().items()}


def _programs(max_len: int) -> Iterator[BitString]:
    for length in range(max_len + 1):
        yield from strings_of_length(length)


def dovetail_round(
    store: ResultStore,
    schedule: Callable[[int], int] = FuelSchedule(),
    *,
    seeds: Iterable[BitString] = (),
    global_cap: int | None = 10**6,
    observer: Callable[[BitString, object], None] | None = None,
) -> ResultStore:
    """Run one round in place and return the store.

    Programs already halted, diverged or proven to cycle are not re-run;
    their status can no longer change, so skipping them leaves the facts of
    every round identical to a from-scratch run.
    """
    r = store.round + 1
    fuel = schedule(r)
    if global_cap is not None and fuel > global_cap:
        raise BudgetOverflow(f"fuel({r}) = {fuel} exceeds the global cap {global_cap}")
    run = runner_for(store.machine)
    facts, settled, cache = store.facts, store._settled, store._cache
    extra = sorted(set(seeds), key=lenlex_key)
    for prog in _chain(_programs(min(r, store.program_length_cap)), extra):
        if prog in facts or prog in settled:
            continue
        res = run(prog, fuel, cache)
        if observer is not None:
            observer(prog, res)
        if res.halted:
            facts[prog] = (res.output, res.steps)
        elif res.settled:
            settled.add(prog)
    store.round = r
    return store


def _chain(*its):
    for it in its:
        yield from it


def run_rounds(store: ResultStore, rounds: int, schedule=FuelSchedule(), **kw) -> ResultStore:
    for _ in range(rounds):
        dovetail_round(store, schedule, **kw)
    return store


def complexity_upper(store: ResultStore, x: BitString) -> int | None:
    """Length of the shortest known program printing ``x`` (None if none yet)."""
    prog = store.best().get(x)
    return None if prog is None else len(prog)


def kraft_sum(store: ResultStore) -> Fraction:
    """Exact sum of ``2^-|p|`` over distinct halted programs."""
    return sum((Fraction(1, 2 ** len(p)) for p in store.facts), Fraction(0))


def kraft_of_values(values: Iterable[int]) -> Fraction:
    return sum((Fraction(1, 2**v) for v in values), Fraction(0))


class AnytimeFunctor:
    """A complexity-like function given by budget-indexed upper bounds.

    ``query`` returns None when no upper bound is known yet.  ``table`` lists
    known values; when ``finite_support`` is set it ignores ``universe`` and
    returns every string with a bound, otherwise it only covers the probe
    universe.  ``machine_backed`` means every value is the length of a
    verified halting program, so counting bounds hold exactly.
    """

    name = "functor"
    conditional = False
    machine_backed = False
    finite_support = False

    def query(self, x: BitString, y: BitString | None = None) -> int | None:
        raise NotImplementedError

    def table(self, universe: Iterable[BitString] = (), y: BitString | None = None) -> dict[BitString, int]:
        out = {}
        for x in universe:
            v = self.query(x, y)
            if v is not None:
                out[x] = v
        return out

    def discovery_round(self, x: BitString, n: int, y: BitString | None = None) -> int:
        return 0

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class StoreFunctor(AnytimeFunctor):
    """Delegates to :func:`complexity_upper` over a lab store."""

    machine_backed = True
    finite_support = True

    def __init__(self, lab, kind: MachineKind, name: str | None = None):
        self.lab = lab
        self.kind = kind
        self.conditional = kind.tag == "conditional" and kind.condition is None
        self.name = name or str(kind)

    def _store(self, y):
        if self.conditional:
            if y is None:
                raise ValueError(f"{self.name} needs a condition")
            return self.lab.store(MachineKind.conditional(y))
        return self.lab.store(self.kind)

    def query(self, x, y=None):
        return complexity_upper(self._store(y), x)

    def table(self, universe=(), y=None):
        return self._store(y).bounds()

    def discovery_round(self, x, n, y=None):
        """First round at which some program of length <= n printed x."""
        store = self._store(y)
        sched = self.lab.schedule
        seeds = self.lab.seeds(store.machine)
        best = None
        for prog, (out, steps) in store.facts.items():
            if out == x and len(prog) <= n:
                r = sched.first_round_with(
                    steps, len(prog), store.program_length_cap, prog in seeds
                )
                best = r if best is None else min(best, r)
        return best if best is not None else 0


def make_functor(lab, kind: MachineKind) -> StoreFunctor:
    if kind.tag == "custom":
        runner_for(kind)
    return StoreFunctor(lab, kind)


class AlphaView:
    """Anytime Solovay alpha over a prefix store: ``min K_t(i)`` for ``i > n``."""

    def __init__(self, store: ResultStore):
        pairs = sorted((str_to_nat(x), k) for x, k in store.bounds().items())
        self.nats = [a for a, _ in pairs]
        suffix = [0] * len(pairs)
        m = None
        for i in range(len(pairs) - 1, -1, -1):
            k = pairs[i][1]
            m = k if m is None else min(m, k)
            suffix[i] = m
        self.suffix_min = suffix

    def __call__(self, n: int) -> int | None:
        i = bisect.bisect_right(self.nats, n)
        return self.suffix_min[i] if i < len(self.nats) else None

    @property
    def max_defined(self) -> int:
        """Largest n with a defined value (-1 if none)."""
        return self.nats[-1] - 1 if self.nats else -1
