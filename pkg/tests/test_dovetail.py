import os
import struct
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from klab import snapshot
from klab.bitstr import strings_up_to
from klab.bitvm import universal_plain, universal_prefix
from klab.dovetail import (
    PLAIN,
    PREFIX,
    AlphaView,
    BudgetOverflow,
    FuelSchedule,
    MachineKind,
    ResultStore,
    UnknownMachine,
    complexity_upper,
    dovetail_round,
    kraft_of_values,
    kraft_sum,
    make_functor,
    run_rounds,
)
from klab.lab import Lab, LabConfig
from klab.machines import C_COPY, C_ID


def test_round_one_has_empty_program():
    store = dovetail_round(ResultStore(PLAIN))
    assert store.round == 1
    assert store.facts[""] == ("", 0)
    assert complexity_upper(store, "") == 0
    lab = Lab(LabConfig(), target_round=1)
    assert make_functor(lab, PLAIN).query("") == 0


def test_append_only_and_monotone():
    store = ResultStore(PLAIN, program_length_cap=10)
    prev, prev_bounds = {}, {}
    for _ in range(14):
        dovetail_round(store)
        for p, fact in prev.items():
            assert store.facts[p] == fact
        bounds = store.bounds()
        for x, v in prev_bounds.items():
            assert bounds[x] <= v
        prev, prev_bounds = dict(store.facts), bounds


def test_facts_are_replayable(lab):
    store = lab.store(PLAIN)
    for prog in sorted(store.facts)[:: max(1, len(store.facts) // 500)]:
        out, steps = store.facts[prog]
        r = universal_plain(prog, steps)
        assert r.halted and (r.output, r.steps) == (out, steps)


def test_kraft_small_prefix_store():
    store = run_rounds(ResultStore(PREFIX, program_length_cap=10), 14, FuelSchedule(2, 10**4), global_cap=10**4)
    total = kraft_sum(store)
    assert isinstance(total, Fraction) and total <= 1
    assert kraft_of_values(store.bounds().values()) <= total


def test_kraft_pinned_store(lab):
    store = lab.store(PREFIX)
    assert kraft_sum(store) <= 1
    for p in store.facts:
        assert universal_prefix(p, 10**6).halted


def test_exact_counting_every_round():
    store = ResultStore(PLAIN, program_length_cap=12)
    for _ in range(16):
        dovetail_round(store)
        vals = list(store.bounds().values())
        for n in range(13):
            assert sum(v <= n for v in vals) <= 2 ** (n + 1) - 1


def test_budget_overflow():
    with pytest.raises(BudgetOverflow):
        dovetail_round(ResultStore(PLAIN), FuelSchedule(2, 10**9), global_cap=1)


def test_unknown_machine():
    with pytest.raises(UnknownMachine):
        make_functor(Lab(), MachineKind.custom("nope"))


def test_pinned_plain_values(lab):
    C = lab.C
    assert [C.query(x) for x in ("", "0", "1", "00", "01")] == [0, 7, 13, 13, 45]
    assert C.query("0110") == 47 <= 4 + C_ID
    assert C.query("10101010") == 51


def test_prefix_against_plain(lab):
    C, K = lab.C, lab.K
    common = [x for x in K.table() if C.query(x) is not None]
    assert common
    # measured: every enumerated K bound is at least the plain bound
    assert max(C.query(x) - K.query(x) for x in common) == 0


def test_conditional_copier_bound():
    lab = Lab(LabConfig(rounds=12))
    for y in strings_up_to(8):
        assert lab.C_cond.query(y, y) <= C_COPY


def test_conditional_needs_condition(lab):
    with pytest.raises(ValueError):
        lab.C_cond.query("0")


def test_discovery_round(lab):
    C = lab.C
    assert C.discovery_round("", 0) == 1
    r = C.discovery_round("0110", 47)
    assert 1 <= r <= 20
    assert C.discovery_round("0110", 10) == 0


def test_alpha_view_is_monotone(lab):
    a = AlphaView(lab.store(PREFIX))
    vals = [a(n) for n in range(0, a.max_defined + 1, 97)]
    assert all(v is not None for v in vals)
    assert vals == sorted(vals)
    assert a(a.max_defined + 1) is None


# ---------------------------------------------------------------- snapshots


def test_snapshot_round_trip_empty(tmp_path):
    store = ResultStore(PLAIN)
    snapshot.save(store, tmp_path / "e.klab")
    assert snapshot.load(tmp_path / "e.klab") == store


@pytest.mark.parametrize("kind", [PLAIN, PREFIX, MachineKind.conditional("0110"), MachineKind.custom("V")])
def test_snapshot_round_trip_kinds(kind):
    store = ResultStore(kind, 7, {"": ("", 0), "0101": ("1" * 300, 2**40)}, program_length_cap=9)
    again = snapshot.loads(snapshot.dumps(store))
    assert again == store
    assert snapshot.dumps(again) == snapshot.dumps(store)


def test_snapshot_round_trip_lab(lab, tmp_path):
    store = lab.store(PLAIN)
    path = tmp_path / "plain.klab"
    snapshot.save(store, path)
    assert snapshot.load(path) == store
    assert [p.name for p in tmp_path.iterdir() if p.name.endswith(".tmp")] == []


def test_snapshot_header_layout():
    data = snapshot.dumps(ResultStore(PLAIN, 3))
    assert data[:4] == b"KLAB" and data[4] == 1 and data[5] == 0
    assert struct.unpack("<IH", data[6:12]) == (3, 14)


def test_snapshot_bad_magic():
    with pytest.raises(snapshot.FormatError) as err:
        snapshot.loads(b"KLAX\x01\x00" + bytes(6))
    assert err.value.offset == 0


def test_snapshot_bad_version():
    with pytest.raises(snapshot.FormatError) as err:
        snapshot.loads(b"KLAB\x07\x00" + bytes(6))
    assert err.value.offset == 4


def test_snapshot_truncation_offsets():
    data = snapshot.dumps(ResultStore(PLAIN, 1, {"01": ("1", 5)}))
    header = 12  # a cut exactly at a record boundary is a valid shorter store
    assert snapshot.loads(data[:header]).facts == {}
    for cut in [c for c in range(len(data)) if c != header]:
        with pytest.raises(snapshot.FormatError) as err:
            snapshot.loads(data[:cut])
        assert err.value.offset <= cut


@given(st.dictionaries(st.text("01", max_size=20), st.tuples(st.text("01", max_size=40), st.integers(0, 2**63)),
                       max_size=20), st.integers(0, 2**32 - 1))
def test_snapshot_round_trip_property(facts, rnd):
    store = ResultStore(PREFIX, rnd, facts)
    assert snapshot.loads(snapshot.dumps(store)) == store


def test_resume_equivalence(tmp_path):
    cfg = LabConfig()
    path = tmp_path / "p.klab"
    interrupted = Lab(cfg, target_round=100)
    snapshot.save(interrupted.store(PLAIN), path)
    resumed = snapshot.load(path)
    assert resumed.round == 100
    dovetail_round(resumed, cfg.schedule, seeds=interrupted.seeds(PLAIN))
    straight = Lab(cfg, target_round=101).store(PLAIN)
    assert snapshot.dumps(resumed) == snapshot.dumps(straight)


def test_save_replaces_atomically(tmp_path):
    path = tmp_path / "s.klab"
    snapshot.save(ResultStore(PLAIN, 1), path)
    snapshot.save(ResultStore(PLAIN, 2), path)
    assert snapshot.load(path).round == 2
    assert sorted(os.listdir(tmp_path)) == ["s.klab", "s.klab.lock"]
