"""Auditors for axiom systems of complexity functions.

Each audit measures one property of a functor on a finite sample and
returns an :class:`AuditReport`.  Exact combinatorial checks (counting,
Kraft) pass or fail outright.  An O(1) claim becomes a constant measured on
the sample; when its per-length maxima keep rising over the last few
lengths the report carries a ``ViolationTrend`` instead.
"""

from __future__ import annotations

import bisect
import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .bitstr import BitString, lenlex_key, nat_to_str, pair_encode, str_to_nat, strings_up_to
from .bitvm import psi, universal_prefix
from .dovetail import PREFIX, AnytimeFunctor, StoreFunctor, kraft_of_values
from .machines import C_COPY, E_ID, plain_machine
from .orders import IterationCap, UndefinedIterate, alpha_star_upper, alpha_view
from .pcode import p_encode, run_V

EXACT_PASS = "ExactPass"
EXACT_FAIL = "ExactFail"
BOUNDED = "BoundedWithConstant"
TREND = "ViolationTrend"

TREND_WINDOW = 4
LIBRARY_FUEL = 10**5
WITNESS_FUEL = 10**6


class UndefinedOnSample(ValueError):
    pass


class RankOverflow(ValueError):
    pass


class StaleView(ValueError):
    pass


@dataclass(frozen=True)
class Verdict:
    kind: str
    constant: int | Fraction | None = None
    # for a trend: the (size, maximum) pairs that kept rising
    samples: tuple = ()

    @property
    def passed(self) -> bool:
        return self.kind in (EXACT_PASS, BOUNDED)

    @property
    def exact(self) -> bool:
        return self.kind in (EXACT_PASS, EXACT_FAIL)

    def __str__(self):
        if self.kind == BOUNDED:
            return f"{self.kind}({self.constant})"
        if self.kind == TREND:
            return f"{self.kind}({', '.join(f'{k}:{v}' for k, v in self.samples)})"
        return self.kind


@dataclass
class AuditReport:
    axiom: str
    functor: str
    verdict: Verdict
    evidence: list[dict] = field(default_factory=list)
    round: int | None = None
    sample: str = ""
    skipped: int = 0
    notes: str = ""

    def summary(self) -> dict:
        return {
            "axiom": self.axiom,
            "functor": self.functor,
            "verdict": self.verdict.kind,
            "constant": _jsonable(self.verdict.constant),
            "trend": [list(map(_jsonable, s)) for s in self.verdict.samples],
            "round": self.round,
            "sample": self.sample,
            "rows": len(self.evidence),
            "skipped": self.skipped,
            "notes": self.notes,
        }


def _jsonable(v):
    return str(v) if isinstance(v, Fraction) else v


def rising(per_size: dict[int, int | Fraction]) -> tuple | None:
    """The last ``TREND_WINDOW`` per-size maxima, if they strictly increase."""
    keys = sorted(per_size)[-TREND_WINDOW:]
    vals = [per_size[k] for k in keys]
    if len(vals) == TREND_WINDOW and all(a < b for a, b in zip(vals, vals[1:])):
        return tuple(zip(keys, vals))
    return None


def constant_verdict(per_size: dict[int, int | Fraction]) -> Verdict:
    if not per_size:
        return Verdict(BOUNDED, None)
    trend = rising(per_size)
    top = max(per_size.values())
    return Verdict(TREND, top, trend) if trend else Verdict(BOUNDED, top)


def _bump(per_size: dict, size: int, value) -> None:
    if size not in per_size or value > per_size[size]:
        per_size[size] = value


def _round_of(functor: AnytimeFunctor, y=None) -> int | None:
    if isinstance(functor, StoreFunctor):
        return functor._store(y).round
    lab = getattr(functor, "lab", None)
    return getattr(lab, "target_round", None)


# ---------------------------------------------------------------- library


@dataclass(frozen=True)
class FnLibraryEntry:
    name: str
    kind: str  # "Total" | "Partial"
    index: int | None = None
    evaluator: Callable[[BitString], BitString | None] | None = None
    notes: str = ""

    def __call__(self, x: BitString, fuel: int = LIBRARY_FUEL) -> BitString | None:
        if self.evaluator is not None:
            return self.evaluator(x)
        res = psi(self.index, x, fuel)
        return res.output if res.halted else None


def time_of_computation(n: int, fuel: int) -> int | None:
    """Steps of the prefix reference machine on ``nat_to_str(n)``, if it halts in budget."""
    res = universal_prefix(nat_to_str(n), fuel)
    return res.steps if res.halted else None


def _time_entry(x: BitString) -> BitString | None:
    t = time_of_computation(str_to_nat(x), LIBRARY_FUEL)
    return None if t is None else nat_to_str(t)


TOTAL_MACHINES = ("identity", "complement", "stutter", "zero", "empty", "tail")


def function_library() -> dict[str, FnLibraryEntry]:
    lib = {
        name: FnLibraryEntry(name, "Total", index=str_to_nat(plain_machine(name)))
        for name in TOTAL_MACHINES
    }
    lib["duplicate"] = FnLibraryEntry(
        "duplicate", "Total", evaluator=lambda x: x + x,
        notes="x -> xx; no plain machine computes it under the EOF-halt rule, so it is evaluated directly",
    )
    lib["time_of_computation"] = FnLibraryEntry(
        "time_of_computation", "Partial", evaluator=_time_entry,
        notes="steps of the prefix machine on x, where it halts",
    )
    return lib


# ---------------------------------------------------------------- functors


class FnFunctor(AnytimeFunctor):
    """A functor given by a query function and, optionally, its full support."""

    def __init__(self, name, fn, support=None, *, conditional=False, machine_backed=False, lab=None):
        self.name = name
        self._fn = fn
        self._support = support
        self.conditional = conditional
        self.machine_backed = machine_backed
        self.finite_support = support is not None
        self.lab = lab

    def query(self, x, y=None):
        return self._fn(x, y)

    def table(self, universe=(), y=None):
        xs = self._support(y) if self._support is not None else universe
        out = {}
        for x in xs:
            v = self._fn(x, y)
            if v is not None:
                out[x] = v
        return out


class WitnessedCV(AnytimeFunctor):
    """C_V over the V store, plus the identity witness ``p_encode([e_id]) x``.

    The witness is far beyond any enumerable length, so it is run directly
    (gate included) instead of being found by the dovetailer.
    """

    name = "CV"
    machine_backed = True

    def __init__(self, lab):
        self.lab = lab
        self.base = lab.CV
        self._tau = p_encode([E_ID])
        self._cache: dict = {}
        self._witness: dict[BitString, int | None] = {}

    def witness(self, x: BitString) -> int | None:
        if x not in self._witness:
            res = run_V(self._tau + x, WITNESS_FUEL, cache=self._cache)
            self._witness[x] = len(self._tau) + len(x) if res.halted and res.output == x else None
        return self._witness[x]

    def query(self, x, y=None):
        vals = [v for v in (self.base.query(x), self.witness(x)) if v is not None]
        return min(vals) if vals else None

    def table(self, universe=(), y=None):
        out = dict(self.base.table())
        for x in universe:
            w = self.witness(x)
            if w is not None and (x not in out or w < out[x]):
                out[x] = w
        return out


def _alpha_star(lab, x: BitString) -> int | None:
    try:
        return alpha_star_upper(lab.store(PREFIX), lab.config.alpha_threshold, str_to_nat(x))
    except (UndefinedIterate, IterationCap):
        return None


def builtin_functors(lab) -> dict[str, AnytimeFunctor]:
    """Every functor the auditor knows, bound to the stores of ``lab``."""
    C, K, Cc = lab.C, lab.K, lab.C_cond

    def two_c(x, y):
        v = C.query(x)
        return None if v is None else 2 * v

    def k_alpha(x, y):
        k = K.query(x)
        if k is None:
            return None
        a = _alpha_star(lab, x)
        return None if a is None else k + a

    def b_min(x, y):
        vals = [C.query(x)]
        c = Cc.query(x, y)
        vals.append(None if c is None else 2 * c)
        vals = [v for v in vals if v is not None]
        return min(vals) if vals else None

    return {
        "C": C,
        "K": K,
        "C_cond": Cc,
        "2C": FnFunctor("2C", two_c, lambda y: C.table(), lab=lab),
        "zero": FnFunctor("zero", lambda x, y: 0, lab=lab),
        "length": FnFunctor("length", lambda x, y: len(x), lab=lab),
        "CV": WitnessedCV(lab),
        "K_plus_alpha_star": FnFunctor("K_plus_alpha_star", k_alpha, lambda y: K.table(), lab=lab),
        "B_min": FnFunctor(
            "B_min", b_min, lambda y: set(C.table()) | set(Cc.table(y=y)), conditional=True, lab=lab
        ),
    }


# ---------------------------------------------------------------- audits


def audit_upper_bound(functor, sample: Iterable[BitString], y=None) -> AuditReport:
    """``A(x) <= |x| + c``: c is the max of ``A_t(x) - |x|`` over the sample."""
    rows, per_len = [], {}
    for x in sample:
        a = functor.query(x, y)
        if a is None:
            raise UndefinedOnSample(f"{functor.name} has no bound for {x!r}")
        rows.append({"x": x, "A": a, "len": len(x), "excess": a - len(x)})
        _bump(per_len, len(x), a - len(x))
    return AuditReport("upper_bound", functor.name, constant_verdict(per_len), rows,
                       _round_of(functor, y))


def level_counts(values: Iterable[int], n_max: int) -> list[int]:
    vals = sorted(values)
    return [bisect.bisect_right(vals, n) for n in range(n_max + 1)]


def _slack(counts: Sequence[int]) -> int:
    """Least c >= 0 with ``count(n) < 2^{n+c}`` for every n."""
    return max([0] + [c.bit_length() - n for n, c in enumerate(counts)])


def _two_sided(counts: Sequence[int]) -> int | None:
    """Least c with every count in ``[2^{n-c}, 2^{n+c}]``; None if a level is empty."""
    c = 0
    for n, k in enumerate(counts):
        if k == 0:
            return None
        lo = n - (k.bit_length() - 1)  # 2^{n-c} <= k
        hi = (k - 1).bit_length() - n  # k <= 2^{n+c}
        c = max(c, lo, hi)
    return c


def audit_counting(functor, n_max: int, *, two_sided=False, universe_len: int = 8, y=None) -> AuditReport:
    """``|{x : A(x) <= n}|`` against ``2^{n+1} - 1`` for every ``n <= n_max``.

    Machine-backed functors are held to the bound exactly.  A functor with
    unbounded support is counted over the universes ``|x| <= m`` for growing
    m, and a slack that rises with m is reported as a trend.
    """
    axiom = "two_sided_counting" if two_sided else "counting"
    rnd = _round_of(functor, y)
    if functor.machine_backed or functor.finite_support:
        universe = () if functor.finite_support else strings_up_to(universe_len)
        counts = level_counts(functor.table(universe, y).values(), n_max)
        rows = [{"n": n, "count": k, "bound": 2 ** (n + 1) - 1} for n, k in enumerate(counts)]
        if two_sided:
            return AuditReport(axiom, functor.name, Verdict(BOUNDED, _two_sided(counts)), rows, rnd)
        ok = all(r["count"] <= r["bound"] for r in rows)
        if ok:
            verdict = Verdict(EXACT_PASS)
        elif functor.machine_backed:
            verdict = Verdict(EXACT_FAIL)
        else:
            verdict = Verdict(BOUNDED, _slack(counts))
        return AuditReport(axiom, functor.name, verdict, rows, rnd)
    per_m, rows = {}, []
    for m in range(universe_len + 1):
        counts = level_counts(functor.table(strings_up_to(m), y).values(), n_max)
        per_m[m] = _two_sided(counts) if two_sided else _slack(counts)
        rows += [{"universe_len": m, "n": n, "count": k} for n, k in enumerate(counts)]
    if two_sided and None in per_m.values():
        verdict = Verdict(BOUNDED, None)
    else:
        verdict = constant_verdict(per_m)
    return AuditReport(axiom, functor.name, verdict, rows, rnd,
                       sample=f"universes |x| <= m, m <= {universe_len}")


def audit_counting_shifted(functor, n_max: int, k_max: int, *, universe_len: int = 8, y=None) -> AuditReport:
    """Measured constant for ``|{x : A(x) <= n - k}| = O(2^{n-k})``; informational."""
    universe = () if functor.finite_support else strings_up_to(universe_len)
    counts = level_counts(functor.table(universe, y).values(), n_max)
    rows, best = [], Fraction(0)
    for n in range(n_max + 1):
        for k in range(min(k_max, n) + 1):
            ratio = Fraction(counts[n - k], 2 ** (n - k))
            rows.append({"n": n, "k": k, "count": counts[n - k], "ratio": ratio})
            best = max(best, ratio)
    return AuditReport("shifted_counting", functor.name, Verdict(BOUNDED, best), rows,
                       _round_of(functor, y), notes="no pass/fail contract")


def audit_stability(functor, library: Iterable[FnLibraryEntry], sample: Sequence[BitString], *,
                    y=None, mode: str = "relative") -> list[AuditReport]:
    """One report per entry f: max of ``A(f(x)) - A(x)`` (or ``- |x|`` in length mode)."""
    reports = []
    rnd = _round_of(functor, y)
    for entry in library:
        rows, per_len, skipped = [], {}, 0
        for x in sample:
            fx = entry(x)
            ax = functor.query(x, y)
            afx = None if fx is None else functor.query(fx, y)
            if fx is None or ax is None or afx is None:
                skipped += 1
                continue
            base = len(x) if mode == "length" else ax
            rows.append({"x": x, "fx": fx, "A_x": ax, "A_fx": afx, "diff": afx - base})
            _bump(per_len, len(x), afx - base)
        axiom = "length_stability" if mode == "length" else "stability"
        reports.append(AuditReport(axiom, functor.name, constant_verdict(per_len), rows, rnd,
                                   sample=f"f={entry.name}", skipped=skipped))
    return reports


def audit_semicomputable(snapshots: Sequence[tuple[int, AnytimeFunctor]], universe: Iterable[BitString] = (),
                         y=None) -> AuditReport:
    """Bounds never increase and never disappear along snapshots taken at rising rounds."""
    universe = list(universe)
    tables = [(r, f.table(universe, y)) for r, f in snapshots]
    rows, checked = [], 0
    for (r0, t0), (r1, t1) in zip(tables, tables[1:]):
        for x, v in t0.items():
            checked += 1
            w = t1.get(x)
            if w is None or w > v:
                rows.append({"x": x, "round": r0, "value": v, "next_round": r1, "next_value": w})
    name = snapshots[0][1].name if snapshots else "?"
    verdict = Verdict(EXACT_PASS if not rows else EXACT_FAIL)
    return AuditReport("semicomputable", name, verdict, rows,
                       snapshots[-1][0] if snapshots else None,
                       sample=f"{len(snapshots)} snapshots, {checked} comparisons")


def audit_prefix_suite(functor, sample: Sequence[BitString], b_max: int, *, y=None) -> list[AuditReport]:
    """Kraft partial sum, ``A(x) - |x| - A(|x|)`` and the level-b counting ratios."""
    rnd = _round_of(functor, y)
    table = functor.table(sample, y)
    kraft = kraft_of_values(table.values())
    if kraft <= 1:
        kv = Verdict(EXACT_PASS, kraft)
    elif functor.machine_backed:
        kv = Verdict(EXACT_FAIL, kraft)
    else:
        kv = Verdict(BOUNDED, kraft)
    reports = [AuditReport("kraft", functor.name, kv, [{"terms": len(table), "sum": kraft}], rnd)]

    rows, per_len, skipped = [], {}, 0
    for x in sample:
        a, an = functor.query(x, y), functor.query(nat_to_str(len(x)), y)
        if a is None or an is None:
            skipped += 1
            continue
        rows.append({"x": x, "A": a, "A_len": an, "excess": a - len(x) - an})
        _bump(per_len, len(x), a - len(x) - an)
    reports.append(AuditReport("length_bound", functor.name, constant_verdict(per_len), rows, rnd,
                               skipped=skipped))

    rows, per_len = [], {}
    by_len: dict[int, list[int]] = {}
    for x in sample:
        a = functor.query(x, y)
        if a is not None:
            by_len.setdefault(len(x), []).append(a)
    for n in sorted(by_len):
        an = functor.query(nat_to_str(n), y)
        if an is None:
            continue
        for b in range(b_max + 1):
            k = sum(1 for a in by_len[n] if a <= n + an - b)
            ratio = Fraction(k * 2**b, 2**n)
            rows.append({"n": n, "b": b, "count": k, "ratio": ratio})
            _bump(per_len, n, ratio)
    reports.append(AuditReport("level_counting", functor.name, constant_verdict(per_len), rows, rnd,
                               notes="threshold read as n + A(n) - b"))
    return reports


def audit_conditional_suite(functor, pairs: Sequence[tuple[BitString, BitString]],
                            library: Iterable[FnLibraryEntry] = (), *, n_max: int = 12) -> list[AuditReport]:
    """Upper bound, counting per condition, stability, pairing and diagonal constants."""
    name = functor.name
    ys = sorted({y for _, y in pairs}, key=lenlex_key)
    reports = []

    rows, per_len, skipped = [], {}, 0
    for x, y in pairs:
        b = functor.query(x, y)
        if b is None:
            skipped += 1
            continue
        rows.append({"x": x, "y": y, "B": b, "excess": b - len(x)})
        _bump(per_len, len(x), b - len(x))
    reports.append(AuditReport("cond_upper_bound", name, constant_verdict(per_len), rows, skipped=skipped))

    counting = [audit_counting(functor, n_max, y=y) for y in ys]
    kinds = {r.verdict.kind for r in counting}
    if EXACT_FAIL in kinds:
        verdict = Verdict(EXACT_FAIL)
    elif kinds <= {EXACT_PASS}:
        verdict = Verdict(EXACT_PASS)
    else:
        verdict = Verdict(BOUNDED, max((r.verdict.constant or 0) for r in counting))
    rows = [dict(row, y=y) for y, r in zip(ys, counting) for row in r.evidence]
    reports.append(AuditReport("cond_counting", name, verdict, rows))

    for entry in library:
        rows, per_len, skipped = [], {}, 0
        for x, y in pairs:
            fx = entry(x)
            bx = functor.query(x, y)
            bfx = None if fx is None else functor.query(fx, y)
            if fx is None or bx is None or bfx is None:
                skipped += 1
                continue
            rows.append({"x": x, "y": y, "B_x": bx, "B_fx": bfx, "diff": bfx - bx})
            _bump(per_len, len(x), bfx - bx)
        reports.append(AuditReport("cond_stability", name, constant_verdict(per_len), rows,
                                   sample=f"f={entry.name}", skipped=skipped))

    rows, per_len, skipped = [], {}, 0
    for x, y in pairs:
        bx, bp = functor.query(x, y), functor.query(pair_encode(x, y), y)
        if bx is None or bp is None:
            skipped += 1
            continue
        rows.append({"x": x, "y": y, "B_x": bx, "B_pair": bp, "diff": bp - bx})
        _bump(per_len, len(x), bp - bx)
    reports.append(AuditReport("cond_pairing", name, constant_verdict(per_len), rows, skipped=skipped,
                               notes="rows without an enumerated pair description are skipped"))

    rows, skipped = [], 0
    for y in ys:
        b = functor.query(y, y)
        if b is None:
            skipped += 1
            continue
        rows.append({"y": y, "B": b})
    # B(y|y) is capped by a fixed witness (the tape copier), so no trend rule
    top = max((r["B"] for r in rows), default=None)
    reports.append(AuditReport("cond_diagonal", name, Verdict(BOUNDED, top), rows, skipped=skipped,
                               notes="compare with the witnessed ceiling"))
    return reports


def gap_profile(a, b, sample: Iterable[BitString]) -> list[dict]:
    """Rows of ``a(x) - b(x)`` where both are defined; a report, never a check."""
    rows = []
    for x in sample:
        va, vb = a.query(x), b.query(x)
        if va is not None and vb is not None:
            rows.append({"x": x, a.name: va, b.name: vb, "gap": va - vb})
    return rows


def alpha_time_rows(prefix_store, ns: Iterable[int], fuel: int) -> list[dict]:
    """alpha at n and at the running time of the prefix machine on n (exploratory)."""
    a = alpha_view(prefix_store)
    rows = []
    for n in ns:
        t = time_of_computation(n, fuel)
        rows.append({"n": n, "time": t, "alpha_n": a(n), "alpha_time": None if t is None else a(t)})
    return rows


def prefix_free_stability(functor, entry: FnLibraryEntry, sample: Sequence[BitString], *,
                          asserted_prefix_free: bool) -> AuditReport:
    """``A(f(x)) <= |x| + c_f`` for an f the caller asserts to be prefix-free."""
    (report,) = audit_stability(functor, [entry], sample, mode="length")
    report.axiom = "prefix_free_stability"
    report.notes = "prefix-freeness asserted by caller" if asserted_prefix_free else "prefix-freeness not asserted"
    return report


# ---------------------------------------------------------------- rank codec


def counting_d(values: Iterable[int]) -> int:
    """Least d >= 0 with ``|S_n| < 2^{n+d}`` at every level present."""
    counts = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    total, d = 0, 0
    for n in sorted(counts):
        total += counts[n]
        d = max(d, total.bit_length() - n)
    return d


def _discovery_index(functor: StoreFunctor, y=None) -> dict[BitString, list[tuple[int, int]]]:
    """Per output: (program length, running minimum of first-halting rounds)."""
    store = functor._store(y)
    sched = functor.lab.schedule
    seeds = functor.lab.seeds(store.machine)
    raw: dict[BitString, list[tuple[int, int]]] = {}
    for prog, (out, steps) in store.facts.items():
        r = sched.first_round_with(steps, len(prog), store.program_length_cap, prog in seeds)
        raw.setdefault(out, []).append((len(prog), r))
    index = {}
    for out, lst in raw.items():
        lst.sort()
        best, acc = None, []
        for length, r in lst:
            best = r if best is None else min(best, r)
            acc.append((length, best))
        index[out] = acc
    return index


def fingerprint(table: dict[BitString, int]) -> str:
    h = hashlib.sha256()
    for x in sorted(table, key=lenlex_key):
        h.update(f"{x}:{table[x]};".encode())
    return h.hexdigest()


class RankCodec:
    """Codes y by its rank in ``S_n = {x : A_t(x) <= n}`` at ``n = A_t(y)``.

    The enumeration order of ``S_n`` is (first round at which x entered
    ``S_n``, then length-lex); codes are ``n + d`` bits, big-endian.
    """

    def __init__(self, functor, universe: Iterable[BitString] = (), y=None, d: int | None = None):
        self.name = functor.name
        self.values = dict(functor.table(universe, y))
        self.fingerprint = fingerprint(self.values)
        self.d = counting_d(self.values.values()) if d is None else d
        self._disc = _discovery_index(functor, y) if isinstance(functor, StoreFunctor) else {}
        self._levels: dict[int, list[BitString]] = {}
        self._ranks: dict[int, dict[BitString, int]] = {}

    def discovery(self, x: BitString, n: int) -> int:
        best = 0
        for length, r in self._disc.get(x, ()):
            if length > n:
                break
            best = r
        return best

    def level(self, n: int) -> list[BitString]:
        if n not in self._levels:
            members = [x for x, v in self.values.items() if v <= n]
            members.sort(key=lambda x: (self.discovery(x, n), lenlex_key(x)))
            self._levels[n] = members
            self._ranks[n] = {x: i for i, x in enumerate(members)}
        return self._levels[n]

    def check_view(self, table: dict[BitString, int]) -> None:
        if fingerprint(table) != self.fingerprint:
            raise StaleView(f"store view for {self.name} changed since the codec was built")

    def encode(self, y: BitString) -> BitString:
        if y not in self.values:
            raise KeyError(y)
        n = self.values[y]
        members = self.level(n)
        width = n + self.d
        if len(members) >= 2**width:
            raise RankOverflow(f"|S_{n}| = {len(members)} >= 2^{width}")
        rank = self._ranks[n][y]
        return format(rank, "b").zfill(width) if width else ""

    def decode(self, code: BitString, view: dict[BitString, int] | None = None) -> BitString:
        if view is not None:
            self.check_view(view)
        n = len(code) - self.d
        if n < 0:
            raise ValueError(f"code shorter than d = {self.d}")
        rank = int(code, 2) if code else 0
        members = self.level(n)
        if rank >= len(members):
            raise ValueError(f"rank {rank} out of range for S_{n}")
        return members[rank]


# ---------------------------------------------------------------- self-test


# expected outcome of each audit per builtin functor: True = pass, False = fail
SELF_TEST: dict[str, dict[str, bool]] = {
    "C": {"semicomputable": True, "stability": True, "upper_bound": True, "counting": True},
    "2C": {"semicomputable": True, "stability": True, "upper_bound": False, "counting": True},
    "zero": {"semicomputable": True, "stability": True, "upper_bound": True, "counting": False},
    "length": {"semicomputable": True, "stability": False, "upper_bound": True, "counting": True},
    "K": {"semicomputable": True, "upper_bound": False, "counting": True, "kraft": True},
    "CV": {"semicomputable": True, "upper_bound": True, "counting": True},
    "K_plus_alpha_star": {
        "semicomputable": True, "stability": True, "kraft": True,
        "length_bound": True, "level_counting": True,
    },
    "C_cond": {"cond_upper_bound": True, "cond_counting": True, "cond_diagonal": True},
    "B_min": {"cond_counting": True, "cond_diagonal": True},
}

# witnessed ceilings on the diagonal constant B(y|y)
DIAGONAL_BOUNDS = {"C_cond": C_COPY, "B_min": 2 * C_COPY}

# library used for the stability column of each functor in the self-test
SELF_TEST_LIBRARY = {"length": ("identity", "duplicate")}


@dataclass
class SelfTestResult:
    reports: list[AuditReport]
    rows: list[dict]

    @property
    def matches(self) -> bool:
        return all(r["match"] for r in self.rows)

    @property
    def exit_code(self) -> int:
        """Nonzero iff an exact check failed where it was expected to pass."""
        return int(any(r["exact"] and r["expected"] and not r["observed"] for r in self.rows))


def _combine(reports: list[AuditReport]) -> tuple[bool, bool]:
    """(passed, exact) for a group of reports answering one axiom."""
    return all(r.verdict.passed for r in reports), all(r.verdict.exact for r in reports)


def run_self_test(labs: Sequence, *, sample_len: int = 8, n_max: int = 12, b_max: int = 4,
                  cond_len: int = 3, only: Iterable[str] | None = None) -> SelfTestResult:
    """Audit every builtin functor and compare with :data:`SELF_TEST`.

    ``labs`` are frozen views at rising rounds; the last one is the pinned
    snapshot the remaining audits run on.
    """
    sample = list(strings_up_to(sample_len))
    lib = function_library()
    all_functors = [(lab.target_round, builtin_functors(lab)) for lab in labs]
    current = all_functors[-1][1]
    names = list(only) if only is not None else list(SELF_TEST)
    reports, rows = [], []
    cond_pairs = [(x, y) for y in strings_up_to(cond_len) for x in strings_up_to(cond_len + 1)]

    for name in names:
        f = current[name]
        grouped: dict[str, list[AuditReport]] = {}
        expected = SELF_TEST[name]
        if "semicomputable" in expected:
            snaps = [(r, fs[name]) for r, fs in all_functors]
            grouped["semicomputable"] = [audit_semicomputable(snaps, sample)]
        if "stability" in expected:
            entries = [lib[n] for n in SELF_TEST_LIBRARY.get(name, TOTAL_MACHINES)]
            grouped["stability"] = audit_stability(f, entries, sample)
        if "upper_bound" in expected:
            grouped["upper_bound"] = [audit_upper_bound(f, sample)]
        if "counting" in expected:
            grouped["counting"] = [audit_counting(f, n_max, universe_len=sample_len)]
        if expected.keys() & {"kraft", "length_bound", "level_counting"}:
            for rep in audit_prefix_suite(f, sample, b_max):
                grouped[rep.axiom] = [rep]
        if any(k.startswith("cond_") for k in expected):
            for rep in audit_conditional_suite(f, cond_pairs, [lib[n] for n in ("identity", "complement")],
                                               n_max=n_max):
                grouped.setdefault(rep.axiom, []).append(rep)
        for axiom, want in expected.items():
            group = grouped[axiom]
            observed, exact = _combine(group)
            rows.append({"functor": name, "axiom": axiom, "expected": want, "observed": observed,
                         "exact": exact, "match": observed == want,
                         "verdicts": "; ".join(f"{r.sample + ' ' if r.sample.startswith('f=') else ''}{r.verdict}"
                                               for r in group)})
            reports.extend(group)
        if name in DIAGONAL_BOUNDS:
            (diag,) = grouped["cond_diagonal"]
            c = diag.verdict.constant
            ok = c is not None and c <= DIAGONAL_BOUNDS[name]
            rows.append({"functor": name, "axiom": f"cond_diagonal<={DIAGONAL_BOUNDS[name]}", "expected": True,
                         "observed": ok, "exact": True, "match": ok, "verdicts": f"max B(y|y) = {c}"})
    return SelfTestResult(reports, rows)


# ---------------------------------------------------------------- writers


def reports_to_json(reports: Sequence[AuditReport], config_text: str = "", extra: dict | None = None) -> str:
    doc = {"config": config_text, "reports": [r.summary() for r in reports]}
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n"


def reports_to_csv(reports: Sequence[AuditReport]) -> str:
    """Evidence rows in long form: axiom, functor, sample, row, field, value."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["axiom", "functor", "sample", "row", "field", "value"])
    for rep in reports:
        for i, row in enumerate(rep.evidence):
            for key in sorted(row):
                w.writerow([rep.axiom, rep.functor, rep.sample, i, key, _jsonable(row[key])])
    return buf.getvalue()
