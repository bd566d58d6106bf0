"""Order functions, the star-operator and Solovay's alpha function.

An order is total, non-decreasing and unbounded.  For a sub-linear order
``f`` the threshold ``p_f = max{n : f(n) >= n}`` exists and
``f*(n) = min{k : f^(k)(n) <= p_f}`` counts how many applications of ``f``
bring ``n`` down to the threshold (``log*`` for ``f = log``).
"""

from __future__ import annotations

import ast
import configparser
import math
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Iterable

from .dovetail import AlphaView, ResultStore

ITERATION_CAP = 64


class NotSublinear(ValueError):
    pass


class IterationCap(RuntimeError):
    pass


class UndefinedIterate(LookupError):
    pass


@dataclass(frozen=True)
class OrderSpec:
    name: str
    eval: Callable[[int], int]
    n0: int  # promise: f(n) < n for every n >= n0
    definition: str = ""

    def __call__(self, n: int) -> int:
        return self.eval(n)


def floor_log2(n: int) -> int:
    return n.bit_length() - 1 if n > 0 else 0


def icbrt(n: int) -> int:
    r = round(n ** (1 / 3)) if n else 0
    while r**3 > n:
        r -= 1
    while (r + 1) ** 3 <= n:
        r += 1
    return r


_FUNCS = {"log2": floor_log2, "isqrt": math.isqrt, "icbrt": icbrt, "min": min, "max": max}
_BINOPS = {ast.Add: lambda a, b: a + b, ast.Sub: lambda a, b: a - b,
           ast.Mult: lambda a, b: a * b, ast.FloorDiv: lambda a, b: a // b}


def compile_expr(expr: str) -> Callable[[int], int]:
    """Compile an integer expression in ``n`` from the order manifest."""
    tree = ast.parse(expr, mode="eval").body

    def build(node):
        if isinstance(node, ast.Name) and node.id == "n":
            return lambda n: n
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            v = node.value
            return lambda n: v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            op, left, right = _BINOPS[type(node.op)], build(node.left), build(node.right)
            return lambda n: op(left(n), right(n))
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and not node.keywords):
            fn, args = _FUNCS[node.func.id], [build(a) for a in node.args]
            return lambda n: fn(*(a(n) for a in args))
        raise ValueError(f"unsupported syntax in order expression: {ast.dump(node)}")

    return build(tree)


def load_order_library(path=None) -> dict[str, OrderSpec]:
    cp = configparser.ConfigParser()
    if path is None:
        cp.read_string(resources.files("klab").joinpath("data/orders.ini").read_text())
    else:
        with open(path) as fh:
            cp.read_file(fh)
    return {
        name: OrderSpec(name, compile_expr(sec["expr"]), int(sec["n0"]), sec["expr"])
        for name, sec in cp.items()
        if name != configparser.DEFAULTSECT
    }


def compute_pf(f: OrderSpec, probe_cap: int = 1 << 12) -> int:
    """``max{n <= n0 : f(n) >= n}``, after checking ``f(n) < n`` on ``[n0, probe_cap]``."""
    for n in range(f.n0, max(f.n0, probe_cap) + 1):
        if f(n) >= n:
            raise NotSublinear(f"{f.name}({n}) = {f(n)} >= {n}")
    return max(n for n in range(f.n0 + 1) if f(n) >= n)


def iterate(f: Callable[[int], int], n: int, i: int) -> int:
    for _ in range(i):
        n = f(n)
    return n


def star(f: Callable[[int], int], p: int, n: int, cap: int = ITERATION_CAP) -> int:
    """Least k with ``f^(k)(n) <= p``."""
    k = 0
    while n > p:
        if k >= cap:
            raise IterationCap(f"no iterate reached {p} within {cap} steps")
        n = f(n)
        k += 1
    return k


def star_fixpoint(f: Callable[[int], int], n: int, cap: int = ITERATION_CAP) -> int:
    """Alternative definition ``min{k : f^(k)(n) = f^(k+1)(n)}``; comparison only."""
    for k in range(cap + 1):
        m = f(n)
        if m == n:
            return k
        n = m
    raise IterationCap(f"no fixed point within {cap} steps")


def alpha_upper(prefix_store: ResultStore, n: int) -> int | None:
    """Anytime Solovay alpha: ``min K_t(i)`` over enumerated outputs ``i > n``."""
    return alpha_view(prefix_store)(n)


def alpha_view(prefix_store: ResultStore) -> AlphaView:
    view = getattr(prefix_store, "_alpha", None)
    if view is None or view[0] != len(prefix_store.facts):
        view = (len(prefix_store.facts), AlphaView(prefix_store))
        prefix_store._alpha = view
    return view[1]


def anytime_star(alpha: Callable[[int], int | None], p: int, n: int, cap: int = ITERATION_CAP) -> int:
    k = 0
    while n > p:
        m = alpha(n)
        if m is None:
            raise UndefinedIterate(f"alpha_upper({n}) is not yet defined")
        if m >= n:
            # alpha_upper is non-decreasing, so the chain is stuck above p
            raise IterationCap(f"alpha_upper({n}) = {m} does not shrink below {n}")
        if k >= cap:
            raise IterationCap(f"no iterate reached {p} within {cap} steps")
        n = m
        k += 1
    return k


def alpha_star_upper(prefix_store: ResultStore, p: int, n: int) -> int:
    """Star of the anytime alpha order at a caller-fixed threshold ``p``."""
    return anytime_star(alpha_view(prefix_store), p, n)


def anytime_pf(prefix_store: ResultStore) -> int:
    """``max{n : alpha_upper(n) >= n}`` over the defined range of this store."""
    a = alpha_view(prefix_store)
    return max((n for n in range(a.max_defined + 1) if a(n) >= n), default=-1)


def _maxabs(values: Iterable[int]):
    values = list(values)
    return max(values) if values else None


def check_order_lemma(h: Callable[[int], int], prefix_store: ResultStore, ns: Iterable[int]) -> dict:
    """Observed constants for ``alpha(h(n)) - alpha(n)`` and ``alpha(n) - h(n)``.

    These are statistics of the upper approximation, not a check of the
    limit statement.
    """
    a = alpha_view(prefix_store)
    shift, excess, skipped = [], [], 0
    for n in ns:
        an, ahn = a(n), a(h(n))
        if an is None or ahn is None:
            skipped += 1
            continue
        shift.append(abs(ahn - an))
        excess.append(an - h(n))
    return {
        "statistic": "upper-approximation surrogate",
        "max_abs_shift": _maxabs(shift),
        "max_excess_over_h": _maxabs(excess),
        "rows": len(shift),
        "skipped": skipped,
    }


def check_alpha_widget(f: Callable[[int], int | None], prefix_store: ResultStore, ns: Iterable[int]) -> dict:
    """Max of ``alpha(alpha(f(n))) - alpha(n)`` over ``ns`` (undefined rows skipped)."""
    a = alpha_view(prefix_store)
    diffs, skipped = [], 0
    for n in ns:
        fn = f(n)
        an = a(n)
        inner = a(fn) if fn is not None else None
        outer = a(inner) if inner is not None else None
        if an is None or outer is None:
            skipped += 1
            continue
        diffs.append(outer - an)
    return {"max_diff": _maxabs(diffs), "rows": len(diffs), "skipped": skipped}
