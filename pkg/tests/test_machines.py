import itertools

import pytest

from klab.bitstr import str_to_nat, strings_up_to
from klab.bitvm import LOOPEND, LOOPSTART, READ, WRITE, Kind, run_conditional, run_plain, run_prefix
from klab.machines import (
    C_COPY,
    C_ID,
    COPIER,
    E_ID,
    E_LOOP,
    LOOPER,
    TAPE_COPIER,
    conditional_machine,
    plain_machine,
    prefix_machine,
    sd_encode,
)

REFERENCE = {
    "identity": lambda x: x,
    "complement": lambda x: x.translate(str.maketrans("01", "10")),
    "stutter": lambda x: "".join(b + b for b in x),
    "zero": lambda x: "0",
    "empty": lambda x: "",
    "tail": lambda x: x[1:],
}
SAMPLE = list(strings_up_to(8))


def test_pinned_constants():
    assert len(COPIER) == 21 and C_ID == 43 and E_ID == 2206603 == str_to_nat(COPIER)
    assert len(TAPE_COPIER) == 81 and C_COPY == 163
    assert E_LOOP == str_to_nat(LOOPER) == 539


@pytest.mark.parametrize("name", sorted(REFERENCE))
def test_plain_library_machines(name):
    code = plain_machine(name)
    for x in SAMPLE:
        r = run_plain(code, x, 10**4)
        assert r.halted and r.output == REFERENCE[name](x), (name, x)


@pytest.mark.parametrize("name", ["identity", "complement", "stutter", "zero", "empty"])
def test_prefix_library_machines(name):
    code = prefix_machine(name)
    for x in SAMPLE:
        stream = sd_encode(x)
        r = run_prefix(code, stream, 10**4)
        assert r.halted and r.output == REFERENCE[name](x) and r.consumed_input == len(stream)


@pytest.mark.parametrize("name", ["identity", "complement", "zero"])
def test_conditional_library_machines_ignore_tape(name):
    code = conditional_machine(name)
    for y in ("", "1", "0110"):
        for x in strings_up_to(5):
            assert run_conditional(code, x, y, 10**4).output == REFERENCE[name](x)


def test_tape_copier_prints_condition():
    for y in SAMPLE:
        r = run_conditional(TAPE_COPIER, "", y, 10**4)
        assert r.halted and r.output == y, y


def test_looper_never_halts():
    assert run_plain(LOOPER, "", 10**5).kind is Kind.FUEL_EXHAUSTED


def _is_copier(raw):
    for x in ("0110", "1", "", "10", "001", "11010011"):
        r = run_plain(raw, x, 400, detect_cycles=True)
        if not (r.halted and r.output == x):
            return False
    return all(run_plain(raw, x, 10**4).output == x for x in SAMPLE)


def test_copier_is_shortest():
    """No copier has fewer than 7 opcodes; exactly two have 7.

    A copier must READ and WRITE, and it must loop (a loop-free program
    executes each opcode at most once, so it writes at most 7 bits); so only
    opcode strings containing READ, WRITE, LOOPSTART and LOOPEND qualify.
    """
    found = {}
    need = {READ, WRITE, LOOPSTART, LOOPEND}
    for k in range(4, 8):
        for ops in itertools.product(range(8), repeat=k):
            if not need.issubset(ops):
                continue
            raw = "".join(format(o, "03b") for o in ops)
            if _is_copier(raw):
                found.setdefault(k, []).append(raw)
    assert set(found) == {7}
    assert len(found[7]) == 2
    assert COPIER == min(found[7])
