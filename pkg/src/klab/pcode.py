"""The prefix-free composition code P and the gated machine V.

A word of P lists machine indices ``p1 .. pk`` (all >= 1) as
``1^{p1} 000 1^{p2} 000 ... 1^{pk} 01`` and denotes the composition
``psi_{p1} o ... o psi_{pk}`` (``psi_{pk}`` is applied first).  V runs
``tau x`` only when the composition converges on every ``y`` with
``|y| <= |x|``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .bitstr import BitString, strings_up_to
from .bitvm import ExecOutcome, Kind, psi
from .dovetail import make_functor, register_machine


class NotInP(ValueError):
    """No prefix of the string belongs to P."""


def p_encode(exps: Sequence[int]) -> BitString:
    if not exps:
        raise ValueError("empty-list: a P word needs at least one exponent")
    if any(p < 1 for p in exps):
        raise ValueError("zero-exponent: exponents must be positive")
    return "000".join("1" * p for p in exps) + "01"


def p_encoded_length(exps: Sequence[int]) -> int:
    return sum(exps) + 3 * (len(exps) - 1) + 2


def p_decode(s: BitString) -> tuple[list[int], BitString]:
    """Split ``s`` into its unique P prefix (as exponents) and the remainder."""
    exps = []
    i = 0
    while True:
        j = s.find("0", i)
        if j < 0:
            raise NotInP("truncated run of 1s")
        if j == i:
            raise NotInP(f"expected a 1 at offset {i}")
        exps.append(j - i)
        nxt = s[j + 1 : j + 3]
        if nxt[:1] == "1":
            return exps, s[j + 2 :]
        if nxt == "00":
            i = j + 3
            continue
        raise NotInP(f"bad separator at offset {j}")


def phi_tau(tau: Sequence[int], x: BitString, fuel: int, *, detect_cycles=False) -> ExecOutcome:
    """Apply ``psi_{pk}`` first, then ``psi_{pk-1}``, ..., sharing one budget."""
    value = x
    used = 0
    for e in reversed(tau):
        res = psi(e, value, fuel - used, detect_cycles=detect_cycles)
        used += res.steps
        if not res.halted:
            return ExecOutcome(res.kind, "", used, 0, res.proven_nonhalting)
        value = res.output
    return ExecOutcome(Kind.HALTED, value, used)


@dataclass(frozen=True)
class VOutcome:
    kind: Kind
    output: BitString = ""
    steps: int = 0
    # inputs y with |y| <= |x| whose composition run did not converge in budget
    pending: tuple[BitString, ...] = ()
    proven_nonhalting: bool = False

    @property
    def halted(self) -> bool:
        return self.kind is Kind.HALTED

    @property
    def settled(self) -> bool:
        return self.kind is not Kind.FUEL_EXHAUSTED or self.proven_nonhalting

    @property
    def gate_status(self) -> str:
        return "all-shorter-converged" if not self.pending else "pending-shorter"


def _cached_phi(tau: tuple[int, ...], y: BitString, fuel: int, cache, detect_cycles) -> ExecOutcome:
    if cache is None:
        return phi_tau(tau, y, fuel, detect_cycles=detect_cycles)
    hit = cache.get((tau, y))
    if hit is not None and (hit[1].settled or hit[0] >= fuel):
        return hit[1]
    res = phi_tau(tau, y, fuel, detect_cycles=detect_cycles)
    cache[(tau, y)] = (fuel, res)
    return res


@lru_cache(maxsize=32)
def _inputs_up_to(n: int) -> tuple[BitString, ...]:
    return tuple(strings_up_to(n))


def _gate(tau, n, fuel, cache, detect_cycles) -> VOutcome:
    """Run the composition on every y with |y| <= n from a shared pool."""
    key = ("gate", tau, n, fuel)
    if cache is not None and key in cache:
        return cache[key]
    remaining = fuel
    ys = _inputs_up_to(n)
    result = None
    for idx, y in enumerate(ys):
        res = _cached_phi(tau, y, fuel, cache, detect_cycles)
        if res.kind is Kind.DIVERGED and res.steps <= remaining:
            result = VOutcome(Kind.DIVERGED, "", fuel - remaining + res.steps)
        elif res.proven_nonhalting:
            result = VOutcome(Kind.FUEL_EXHAUSTED, "", fuel - remaining, (y,), True)
        elif not res.halted or res.steps > remaining:
            result = VOutcome(Kind.FUEL_EXHAUSTED, "", fuel, ys[idx:])
        if result is not None:
            break
        remaining -= res.steps
    else:
        result = VOutcome(Kind.HALTED, "", fuel - remaining)
    if cache is not None:
        cache[key] = result
    return result


def run_V(s: BitString, fuel: int, *, cache: dict | None = None, detect_cycles=False) -> VOutcome:
    """Run V on ``s``.

    The gate runs the composition on every ``y`` with ``|y| <= |x|`` in
    length-lex order from one shared pool of ``fuel`` steps; V halts only if
    all of them converge within the pool.  ``cache`` memoises composition
    runs and gate summaries and may be shared between calls.
    """
    try:
        exps, x = p_decode(s)
    except NotInP:
        return VOutcome(Kind.DIVERGED)
    return run_V_parsed(exps, x, fuel, cache=cache, detect_cycles=detect_cycles)


def run_V_parsed(tau: Sequence[int], x: BitString, fuel: int, *, cache: dict | None = None,
                 detect_cycles=False) -> VOutcome:
    """``run_V(p_encode(tau) + x)`` without materialising the P word."""
    tau = tuple(tau)
    gate = _gate(tau, len(x), fuel, cache, detect_cycles)
    if not gate.halted:
        return gate
    out = _cached_phi(tau, x, fuel, cache, detect_cycles).output
    return VOutcome(Kind.HALTED, out, gate.steps)


def prepend_total(e: int, tau: Sequence[int]) -> list[int]:
    """Post-compose with ``psi_e``: the P word grows by exactly ``e + 3`` bits."""
    if e < 1:
        raise ValueError("zero-exponent: machine index must be positive")
    return [e, *tau]


def verbosity(exps: Sequence[int]) -> int:
    """Length of the P word minus a ``2 log p + 2`` per-exponent self-delimiting cost."""
    return p_encoded_length(exps) - sum(2 * (p.bit_length() - 1) + 2 for p in exps)


def _v_runner(program: BitString, fuel: int, cache: dict) -> VOutcome:
    return run_V(program, fuel, cache=cache, detect_cycles=True)


V_KIND = register_machine("V", _v_runner)


def make_CV_functor(lab):
    """Anytime ``C_V``: shortest known V-program per output, over ``lab``'s V store."""
    return make_functor(lab, V_KIND)
