"""Experiment configuration and the registry of lazily built stores."""

from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, fields, replace

from .bitstr import BitString, pair_encode, strings_up_to
from .dovetail import (
    PLAIN,
    PREFIX,
    FuelSchedule,
    MachineKind,
    ResultStore,
    StoreFunctor,
    dovetail_round,
    make_functor,
)
from .machines import (
    TAPE_COPIER,
    conditional_machine,
    plain_machine,
    plain_program,
    prefix_machine,
    prefix_program,
)
from .pcode import V_KIND

CONFIG_VERSION = 1

PLAIN_WITNESSES = ("identity", "complement", "stutter", "zero", "empty", "tail")
PREFIX_WITNESSES = ("identity", "complement", "stutter", "zero", "empty")
CONDITIONAL_WITNESSES = ("identity", "complement", "zero")


@dataclass(frozen=True)
class LabConfig:
    """Everything that determines the stores, and so every report."""

    program_length_cap: int = 14
    conditional_cap: int = 8
    v_cap: int = 16
    rounds: int = 20
    fuel_base: int = 2
    fuel_cap: int = 10**6
    # library machines are also run on every input of length <= witness_len
    witness_len: int = 8
    conditional_witness_len: int = 4
    alpha_threshold: int = 62
    seed: int = 0

    @classmethod
    def from_mapping(cls, data: dict) -> "LabConfig":
        names = {f.name: f.type for f in fields(cls)}
        kw = {}
        for key, value in data.items():
            if key == "version":
                if int(value) != CONFIG_VERSION:
                    raise ValueError(f"unsupported config version {value}")
                continue
            if key not in names:
                raise ValueError(f"unknown config key {key!r}")
            kw[key] = int(value)
        return cls(**kw)

    def to_text(self) -> str:
        lines = ["[lab]", f"version = {CONFIG_VERSION}"]
        lines += [f"{k} = {v}" for k, v in asdict(self).items()]
        return "\n".join(lines) + "\n"

    @property
    def schedule(self) -> FuelSchedule:
        return FuelSchedule(self.fuel_base, self.fuel_cap)


def read_config(path, section: str = "lab") -> configparser.SectionProxy | dict:
    cp = configparser.ConfigParser()
    with open(path) as fh:
        cp.read_file(fh)
    return dict(cp[section]) if cp.has_section(section) else {}


class Lab:
    """Owns one store per machine kind, all advanced to a common round."""

    def __init__(self, config: LabConfig = LabConfig(), target_round: int | None = None):
        self.config = config
        self.schedule = config.schedule
        self.target_round = config.rounds if target_round is None else target_round
        self.stores: dict[MachineKind, ResultStore] = {}
        self._seeds: dict[MachineKind, frozenset] = {}

    def cap_for(self, kind: MachineKind) -> int:
        if kind.tag == "conditional":
            return self.config.conditional_cap
        if kind.tag == "custom":
            return self.config.v_cap
        return self.config.program_length_cap

    def seeds(self, kind: MachineKind) -> frozenset:
        if kind not in self._seeds:
            self._seeds[kind] = frozenset(self._make_seeds(kind))
        return self._seeds[kind]

    def _make_seeds(self, kind: MachineKind) -> list[BitString]:
        cfg = self.config
        if kind.tag == "plain":
            xs = list(strings_up_to(cfg.witness_len))
            return [plain_program(plain_machine(f), x) for f in PLAIN_WITNESSES for x in xs]
        if kind.tag == "prefix":
            xs = list(strings_up_to(cfg.witness_len))
            return [prefix_program(prefix_machine(f), x) for f in PREFIX_WITNESSES for x in xs]
        if kind.tag == "conditional":
            xs = list(strings_up_to(cfg.conditional_witness_len))
            progs = [pair_encode(TAPE_COPIER, "")]
            progs += [
                plain_program(conditional_machine(f), x) for f in CONDITIONAL_WITNESSES for x in xs
            ]
            return progs
        return []

    def store(self, kind: MachineKind) -> ResultStore:
        st = self.stores.get(kind)
        if st is None:
            st = ResultStore(kind, program_length_cap=self.cap_for(kind))
            self.stores[kind] = st
        self._bring_up(st)
        return st

    def adopt(self, store: ResultStore) -> None:
        """Install a loaded store (e.g. from a snapshot)."""
        self.stores[store.machine] = store

    def _bring_up(self, st: ResultStore) -> None:
        seeds = self.seeds(st.machine)
        while st.round < self.target_round:
            dovetail_round(st, self.schedule, seeds=seeds, global_cap=self.config.fuel_cap)

    def advance_to(self, target_round: int) -> None:
        self.target_round = target_round
        for st in self.stores.values():
            self._bring_up(st)

    def copy(self) -> "Lab":
        """A frozen view: copied stores at the current target round."""
        other = Lab(self.config, self.target_round)
        other._seeds = self._seeds
        other.stores = {k: s.copy() for k, s in self.stores.items()}
        return other

    def functor(self, kind: MachineKind, name: str | None = None) -> StoreFunctor:
        f = make_functor(self, kind)
        if name:
            f.name = name
        return f

    @property
    def C(self) -> StoreFunctor:
        return self.functor(PLAIN, "C")

    @property
    def K(self) -> StoreFunctor:
        return self.functor(PREFIX, "K")

    @property
    def C_cond(self) -> StoreFunctor:
        return self.functor(MachineKind("conditional"), "C_cond")

    @property
    def CV(self) -> StoreFunctor:
        return self.functor(V_KIND, "CV")

    def with_config(self, **changes) -> "Lab":
        return Lab(replace(self.config, **changes))
