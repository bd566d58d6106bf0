"""Command line front-end: ``klab <command> ...``."""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import snapshot
from .audit import (
    SELF_TEST,
    builtin_functors,
    gap_profile,
    reports_to_csv,
    reports_to_json,
    run_self_test,
)
from .bitstr import MalformedInput, check_bitstring, strings_up_to
from .dovetail import PLAIN, PREFIX, BudgetOverflow, MachineKind, dovetail_round, kraft_sum
from .lab import Lab, LabConfig
from .machines import C_COPY, C_ID, E_ID, E_LOOP
from .orders import IterationCap, NotSublinear, alpha_view, anytime_star, compute_pf, load_order_library, star
from .pcode import V_KIND, NotInP, p_decode, p_encode, run_V

AUDIT_DEFAULTS = {
    "rounds": "12,14,16,18,20",
    "functors": ",".join(SELF_TEST),
    "sample_len": "8",
    "n_max": "12",
    "b_max": "4",
    "cond_len": "3",
}


class CliError(Exception):
    pass


def _parse_kind(text: str) -> MachineKind:
    if text == "plain":
        return PLAIN
    if text == "prefix":
        return PREFIX
    if text in ("v", "V"):
        return V_KIND
    if text.startswith("conditional:"):
        return MachineKind.conditional(check_bitstring(text.split(":", 1)[1]))
    raise CliError(f"unknown machine kind {text!r} (plain, prefix, v, conditional:<bits>)")


def load_config(args) -> tuple[LabConfig, configparser.ConfigParser]:
    cp = configparser.ConfigParser()
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                cp.read_file(fh)
        except OSError as exc:
            raise CliError(f"cannot read config: {exc}") from None
    try:
        cfg = LabConfig.from_mapping(dict(cp["lab"])) if cp.has_section("lab") else LabConfig()
    except ValueError as exc:
        raise CliError(f"bad config: {exc}") from None
    overrides = {k: v for k, v in (("rounds", getattr(args, "rounds", None)),
                                   ("program_length_cap", getattr(args, "cap", None)),
                                   ("fuel_cap", getattr(args, "fuel_cap", None))) if v is not None}
    return replace(cfg, **overrides), cp


def _load_snapshot(path) -> snapshot.ResultStore:
    if not Path(path).exists():
        raise CliError(f"no snapshot at {path}")
    try:
        return snapshot.load(path)
    except snapshot.FormatError as exc:
        raise CliError(f"corrupt snapshot {path}: {exc}") from None


def _lab_from_snapshots(cfg: LabConfig, paths) -> Lab:
    if not paths:
        raise CliError("no snapshot given (use --snapshot)")
    stores = [_load_snapshot(p) for p in paths]
    lab = Lab(cfg, target_round=max(s.round for s in stores))
    for s in stores:
        lab.adopt(s)
    return lab


# ---------------------------------------------------------------- dovetail


def _run_rounds(store, lab: Lab, path, out) -> None:
    seeds = lab.seeds(store.machine)
    while store.round < lab.config.rounds:
        try:
            dovetail_round(store, lab.schedule, seeds=seeds, global_cap=lab.config.fuel_cap)
        except BudgetOverflow as exc:
            raise CliError(str(exc)) from None
        snapshot.save(store, path)
        print(f"round {store.round}: {len(store.facts)} facts", file=out)


def cmd_dovetail(args, out) -> int:
    cfg, _ = load_config(args)
    if args.action == "status":
        store = _load_snapshot(args.snapshot)
        print(f"machine: {store.machine}", file=out)
        print(f"round: {store.round}", file=out)
        print(f"facts: {len(store.facts)}", file=out)
        print(f"program_length_cap: {store.program_length_cap}", file=out)
        if store.machine.tag == "prefix":
            k = kraft_sum(store)
            print(f"kraft: {k} ({float(k):.6f})", file=out)
        return 0
    lab = Lab(cfg, target_round=0)
    if args.action == "run":
        kind = _parse_kind(args.kind)
        store = snapshot.ResultStore(kind, program_length_cap=lab.cap_for(kind))
        snapshot.save(store, args.snapshot)
    else:
        store = _load_snapshot(args.snapshot)
    _run_rounds(store, lab, args.snapshot, out)
    return 0


# ---------------------------------------------------------------- query


def cmd_query(args, out) -> int:
    cfg, _ = load_config(args)
    lab = _lab_from_snapshots(cfg, args.snapshot)
    functors = builtin_functors(lab)
    if args.functor not in functors:
        raise CliError(f"unknown functor {args.functor!r}; known: {', '.join(functors)}")
    f = functors[args.functor]
    x = check_bitstring(args.x)
    y = None if args.y is None else check_bitstring(args.y)
    if f.conditional and y is None:
        raise CliError(f"{args.functor} needs --y")
    v = f.query(x, y)
    print(f"{'unknown' if v is None else v} (round {lab.target_round})", file=out)
    return 0


# ---------------------------------------------------------------- audit


def _audit_settings(cp: configparser.ConfigParser) -> dict:
    settings = dict(AUDIT_DEFAULTS)
    if cp.has_section("audit"):
        settings.update(cp["audit"])
    return settings


def _labs_at(cfg: LabConfig, rounds: list[int]) -> list[Lab]:
    lab = Lab(cfg, target_round=rounds[0])
    views = []
    for r in rounds:
        lab.advance_to(r)
        views.append(lab.copy())
    return views


def cmd_audit(args, out) -> int:
    cfg, cp = load_config(args)
    s = _audit_settings(cp)
    rounds = sorted(int(r) for r in s["rounds"].split(","))
    names = [n.strip() for n in s["functors"].split(",") if n.strip()]
    unknown = [n for n in names if n not in SELF_TEST]
    if unknown:
        raise CliError(f"unknown functor(s) in audit config: {', '.join(unknown)}")
    cfg = replace(cfg, rounds=rounds[-1])
    result = run_self_test(_labs_at(cfg, rounds), sample_len=int(s["sample_len"]), n_max=int(s["n_max"]),
                           b_max=int(s["b_max"]), cond_len=int(s["cond_len"]), only=names)
    for row in result.rows:
        status = "ok" if row["match"] else "MISMATCH"
        want = "pass" if row["expected"] else "fail"
        print(f"{row['functor']:<18} {row['axiom']:<22} expect {want:<4} {status:<8} {row['verdicts']}", file=out)
    config_text = cfg.to_text() + "[audit]\n" + "".join(f"{k} = {s[k]}\n" for k in sorted(s))
    extra = {"matrix": result.rows, "exit_code": result.exit_code}
    if args.json:
        Path(args.json).write_text(reports_to_json(result.reports, config_text, extra))
    if args.csv:
        Path(args.csv).write_text(reports_to_csv(result.reports))
    return result.exit_code


# ---------------------------------------------------------------- star / alpha


def _parse_range(text: str) -> range:
    lo, sep, hi = text.partition("..")
    if not sep:
        raise CliError(f"range must look like LO..HI, got {text!r}")
    return range(int(lo), int(hi) + 1)


def _write_csv(rows: list[dict], path, out) -> None:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    if path:
        Path(path).write_text(buf.getvalue())
    else:
        out.write(buf.getvalue())


def cmd_star(args, out) -> int:
    lib = load_order_library(args.library)
    if args.order not in lib:
        raise CliError(f"unknown order {args.order!r}; known: {', '.join(lib)}")
    f = lib[args.order]
    try:
        p = compute_pf(f) if args.p is None else args.p
        rows = [{"n": n, "f": f(n), "star": star(f, p, n)} for n in _parse_range(args.range)]
    except (NotSublinear, IterationCap) as exc:
        raise CliError(str(exc)) from None
    _write_csv(rows, args.out, out)
    return 0


def cmd_alpha(args, out) -> int:
    cfg, _ = load_config(args)
    store = _load_snapshot(args.snapshot)
    if store.machine.tag != "prefix":
        raise CliError("alpha needs a prefix-machine snapshot")
    a = alpha_view(store)
    p = cfg.alpha_threshold if args.p is None else args.p
    rows = []
    for n in _parse_range(args.range):
        try:
            s = anytime_star(a, p, n)
        except (LookupError, IterationCap):
            s = None
        rows.append({"n": n, "alpha_upper": a(n), "alpha_star": s})
    _write_csv(rows, args.out, out)
    return 0


# ---------------------------------------------------------------- pcode


def cmd_pcode(args, out) -> int:
    if args.action == "encode":
        try:
            print(p_encode(args.values), file=out)
        except ValueError as exc:
            raise CliError(str(exc)) from None
        return 0
    s = check_bitstring(args.bits)
    if args.action == "decode":
        try:
            exps, rest = p_decode(s)
        except NotInP as exc:
            raise CliError(f"not-in-P: {exc}") from None
        print(f"exps: {' '.join(map(str, exps))}", file=out)
        print(f"rest: {rest}", file=out)
        return 0
    res = run_V(s, args.fuel)
    print(f"kind: {res.kind.value}", file=out)
    print(f"output: {res.output}", file=out)
    print(f"steps: {res.steps}", file=out)
    print(f"gate: {res.gate_status}", file=out)
    if res.pending:
        print(f"pending: {' '.join(y or '(empty)' for y in res.pending)}", file=out)
    return 0


# ---------------------------------------------------------------- report


def cmd_report(args, out) -> int:
    """Measured machine constants plus the C_V - C gap profile."""
    cfg, _ = load_config(args)
    lab = _lab_from_snapshots(cfg, args.snapshot) if args.snapshot else Lab(cfg)
    functors = builtin_functors(lab)
    sample = list(strings_up_to(args.sample_len))
    doc = {
        "config": cfg.to_text(),
        "round": lab.target_round,
        "constants": {"e_id": E_ID, "c_id": C_ID, "c_copy": C_COPY, "e_loop": E_LOOP},
        "kraft_prefix": str(kraft_sum(lab.store(PREFIX))),
        "gap_CV_minus_C": gap_profile(functors["CV"], functors["C"], sample),
        "untested": ["relativized C (no halting oracle)", "limit statements on |C_V - C| and |A - K|"],
    }
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        out.write(text)
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="klab", description="Anytime Kolmogorov complexity laboratory.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file with [lab] and [audit] sections")
    common.add_argument("--rounds", type=int, help="override the configured round count")
    common.add_argument("--cap", type=int, help="override program_length_cap")
    common.add_argument("--fuel-cap", type=int, dest="fuel_cap", help="override the global fuel cap")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dovetail", parents=[common], help="build, resume or inspect a store snapshot")
    p.add_argument("action", choices=("run", "resume", "status"))
    p.add_argument("--snapshot", required=True)
    p.add_argument("--kind", default="plain", help="plain | prefix | v | conditional:<bits>")
    p.set_defaults(func=cmd_dovetail)

    p = sub.add_parser("query", parents=[common], help="upper bound of a functor at x")
    p.add_argument("functor")
    p.add_argument("x", nargs="?", default="")
    p.add_argument("--y", help="condition for conditional functors")
    p.add_argument("--snapshot", action="append", default=[])
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("audit", parents=[common], help="run the auditor self-test matrix")
    p.add_argument("--json")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("star", help="star-operator table as CSV")
    p.add_argument("order")
    p.add_argument("--p", type=int)
    p.add_argument("--range", default="0..20")
    p.add_argument("--library", help="order manifest (INI); defaults to the bundled one")
    p.add_argument("--out")
    p.set_defaults(func=cmd_star)

    p = sub.add_parser("alpha", parents=[common], help="anytime alpha and alpha* table as CSV")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--p", type=int)
    p.add_argument("--range", default="0..64")
    p.add_argument("--out")
    p.set_defaults(func=cmd_alpha)

    p = sub.add_parser("pcode", help="encode/decode P words and run V")
    psub = p.add_subparsers(dest="action", required=True)
    q = psub.add_parser("encode")
    q.add_argument("values", type=int, nargs="+")
    q = psub.add_parser("decode")
    q.add_argument("bits")
    q = psub.add_parser("runv")
    q.add_argument("bits")
    q.add_argument("--fuel", type=int, default=10**4)
    p.set_defaults(func=cmd_pcode)

    p = sub.add_parser("report", parents=[common], help="measured constants and gap profile as JSON")
    p.add_argument("--snapshot", action="append", default=[])
    p.add_argument("--sample-len", type=int, default=6, dest="sample_len")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except (CliError, MalformedInput) as exc:
        print(f"klab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
