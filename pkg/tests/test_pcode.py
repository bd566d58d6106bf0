import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from klab.bitstr import str_to_nat, strings_up_to
from klab.bitvm import Kind
from klab.dovetail import ResultStore, dovetail_round
from klab.machines import E_ID, E_LOOP, plain_machine
from klab.pcode import (
    V_KIND,
    NotInP,
    p_decode,
    p_encode,
    p_encoded_length,
    phi_tau,
    prepend_total,
    run_V,
    run_V_parsed,
    verbosity,
)

exps_st = st.lists(st.integers(1, 40), min_size=1, max_size=6)
bits = st.text(alphabet="01", max_size=30)


@pytest.mark.parametrize("exps, enc", [([1], "101"), ([2, 3], "1100011101"), ([1, 1, 1], "10001000101")])
def test_encode_examples(exps, enc):
    assert p_encode(exps) == enc
    assert p_decode(enc) == (exps, "")


def test_encode_errors():
    with pytest.raises(ValueError, match="empty-list"):
        p_encode([])
    with pytest.raises(ValueError, match="zero-exponent"):
        p_encode([2, 0])


def test_decode_examples():
    assert p_decode("101" + "0110") == ([1], "0110")
    for bad in ("0110", "", "111", "1100", "11001", "110010"):
        with pytest.raises(NotInP):
            p_decode(bad)


@given(exps_st, bits)
def test_codec_round_trip(exps, rest):
    enc = p_encode(exps)
    assert len(enc) == p_encoded_length(exps) == sum(exps) + 3 * (len(exps) - 1) + 2
    assert p_decode(enc + rest) == (exps, rest)


def test_prefix_freeness_random_codes():
    rng = random.Random(0)
    codes = set()
    while len(codes) < 1000:
        codes.add(tuple(rng.randint(1, 12) for _ in range(rng.randint(1, 5))))
    words = sorted(p_encode(c) for c in codes)
    # in sorted order a prefix would sit right before one of its extensions
    for a, b in zip(words, words[1:]):
        assert not b.startswith(a)
    seq = [list(c) for c in sorted(codes)[:50]]
    stream = "".join(p_encode(c) for c in seq)
    for c in seq:
        got, stream = p_decode(stream)
        assert got == c
    assert stream == ""


def test_phi_tau_examples():
    for x in ("", "0110", "10101"):
        assert phi_tau([E_ID], x, 10**4).output == x
        assert phi_tau([E_ID, E_ID], x, 10**4).output == x
    for fuel in (10, 10**3, 10**5):
        assert phi_tau([E_LOOP], "01", fuel).kind is Kind.FUEL_EXHAUSTED


def test_phi_tau_order():
    comp = str_to_nat(plain_machine("complement"))
    zero = str_to_nat(plain_machine("zero"))
    # zero applied first, then complement: "0" -> "1"
    assert phi_tau([comp, zero], "0110", 10**4).output == "1"
    assert phi_tau([zero, comp], "0110", 10**4).output == "0"


def test_v_identity_witness():
    tau = p_encode([E_ID])
    cache = {}
    for x in strings_up_to(8):
        r = run_V(tau + x, 10**6, cache=cache)
        assert r.halted and r.output == x and r.gate_status == "all-shorter-converged"


def test_v_gate_blocks_on_divergent_machine():
    for fuel in (10, 10**3, 10**5):
        r = run_V(p_encode([E_LOOP]) + "01", fuel)
        assert not r.halted
        assert r.gate_status == "pending-shorter" and "" in r.pending


def test_v_not_in_p():
    assert run_V("00", 100).kind is Kind.DIVERGED


def test_v_gate_insufficient_fuel_lists_pending():
    r = run_V(p_encode([E_ID]) + "0110", 30)
    assert r.kind is Kind.FUEL_EXHAUSTED and r.pending
    assert set(r.pending) <= set(strings_up_to(4))


def test_gate_soundness_during_dovetail():
    store = ResultStore(V_KIND, program_length_cap=14)
    seen = []

    def check(prog, res):
        assert res.halted == (res.gate_status == "all-shorter-converged" and res.kind is Kind.HALTED)
        if res.halted:
            assert not res.pending
        seen.append(res.halted)

    for _ in range(16):
        dovetail_round(store, observer=check)
    assert any(seen)


def test_prepend_total():
    assert prepend_total(2, [3]) == [2, 3]
    assert len(p_encode([3])) == 5 and len(p_encode([2, 3])) == 10
    with pytest.raises(ValueError, match="zero-exponent"):
        prepend_total(0, [3])


def test_prepend_identity_keeps_output():
    for x in ("", "0", "0110"):
        base = run_V(p_encode([E_ID]) + x, 10**5)
        again = run_V(p_encode(prepend_total(E_ID, [E_ID])) + x, 10**5)
        assert base.output == again.output == x


def test_prepend_stutter():
    e = str_to_nat(plain_machine("stutter"))
    s = p_encode(prepend_total(e, [E_ID]))
    cache = {}
    for y in ("", "1", "011"):
        r = run_V(s + y, 10**6, cache=cache)
        assert r.halted and r.output == "".join(b + b for b in y)


def test_parsed_path_matches_string_path():
    for tau, x in (([E_ID], "011"), ([E_LOOP], ""), ([1, 13], "10")):
        assert run_V_parsed(tau, x, 10**4) == run_V(p_encode(tau) + x, 10**4)


def test_verbosity_grows_without_bound():
    values = [verbosity([p]) for p in (4, 16, 256, 4096)]
    assert values == sorted(values) and values[-1] > 4000
    rng = random.Random(1)
    for _ in range(200):
        exps = [rng.randint(2, 2**rng.randint(1, 16)) for _ in range(rng.randint(1, 4))]
        big = [2 * p for p in exps]
        assert verbosity(big) >= verbosity(exps)
