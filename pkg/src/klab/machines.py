"""Hand-assembled machines used as witnesses and as the function library.

The copier is the shortest identity machine under plain semantics; an
exhaustive search over all programs of at most 7 opcodes (see
``tests/test_machines.py``) finds exactly two 7-opcode copiers and no
shorter one, and we keep the length-lex smaller.
"""

from __future__ import annotations

from .bitstr import BitString, pair_encode, str_to_nat
from .bitvm import assemble

# plain-input templates: cell 0 is a loop flag, cell 1 receives input bits
_PLAIN_LOOP = "FLIP [ RIGHT READ {body} LEFT ]"
# the same loop, but first clear cell 0 so a pre-loaded tape is harmless
_CLEARED_LOOP = "[ FLIP ] FLIP [ RIGHT READ {body} LEFT ]"
# prefix templates read a self-delimiting stream 1 b1 1 b2 ... 1 bn 0
_PREFIX_LOOP = "READ [ RIGHT READ {body} LEFT READ ]"

BODIES = {
    "identity": "WRITE",
    "complement": "FLIP WRITE",
    "stutter": "WRITE WRITE",
}

COPIER_SRC = _PLAIN_LOOP.format(body="WRITE")
COPIER: BitString = assemble(COPIER_SRC)
E_ID: int = str_to_nat(COPIER)
C_ID: int = 2 * len(COPIER) + 1

# Copies the condition 1^n 0 y off the tape: each round outputs the bit next
# to the separator, then slides the unary block two cells right while
# shortening it by one, so the next bit is again adjacent to the separator.
TAPE_COPIER_SRC = (
    "[ FLIP RIGHT "
    "[ [ RIGHT ] RIGHT WRITE [ FLIP ] LEFT FLIP [ LEFT ] RIGHT FLIP RIGHT FLIP RIGHT ] "
    "RIGHT WRITE HALT ]"
)
TAPE_COPIER: BitString = assemble(TAPE_COPIER_SRC)
C_COPY: int = 2 * len(TAPE_COPIER) + 1

# plain machine for an infinite one-cell loop and for one that diverges
LOOPER: BitString = assemble("FLIP [ ]")
E_LOOP: int = str_to_nat(LOOPER)


def plain_machine(name: str) -> BitString:
    if name == "empty":
        return ""
    if name == "zero":
        return assemble("WRITE")
    if name == "tail":
        return assemble("READ " + _CLEARED_LOOP.format(body="WRITE"))
    return assemble(_PLAIN_LOOP.format(body=BODIES[name]))


def conditional_machine(name: str) -> BitString:
    """Variant of :func:`plain_machine` that ignores a pre-loaded tape."""
    if name in ("empty", "zero"):
        return assemble("[ FLIP ] WRITE") if name == "zero" else ""
    return assemble(_CLEARED_LOOP.format(body=BODIES[name]))


def prefix_machine(name: str) -> BitString:
    if name == "zero":
        return assemble("READ [ RIGHT READ LEFT READ ] WRITE")
    if name == "empty":
        return assemble("READ [ RIGHT READ LEFT READ ]")
    return assemble(_PREFIX_LOOP.format(body=BODIES[name]))


def sd_encode(x: BitString) -> BitString:
    """Self-delimiting stream read by the prefix machines: ``1 b1 ... 1 bn 0``."""
    return "".join("1" + b for b in x) + "0"


def plain_program(code: BitString, x: BitString) -> BitString:
    """Program for the plain universal machine running ``code`` on ``x``."""
    return pair_encode(code, x)


def prefix_program(code: BitString, x: BitString) -> BitString:
    """Program for the prefix universal machine running ``code`` on ``sd(x)``."""
    return pair_encode(code, sd_encode(x))


LIBRARY_MACHINES = ("identity", "complement", "stutter", "zero", "empty")
