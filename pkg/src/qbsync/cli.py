"""Command-line front end.

Reports go to stdout as JSON (or to ``--out``); a short human summary goes to
stderr.  Exit codes: 0 ok, 2 invalid configuration, 3 protocol failure
(every honest process aborted), 4 round budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any

from . import rng as streams
from .clocksync import SyncConfig, run_sync, sync_config_dict
from .costs import channel_accounting, list_type_count, monte_carlo_efficiency
from .dba import QBConfig, default_length, make_list_set, qb_config_dict, run_qb
from .harness import ReplayMismatch, Transcript, parse_fault, profiles_for, replay
from .lists import validate_list_set
from .om import OmConfig, om, om_message_count
from .qudit import BudgetExhausted

EXIT_OK, EXIT_CONFIG, EXIT_ABORT, EXIT_BUDGET = 0, 2, 3, 4

DEFAULTS: dict[str, Any] = {
    "m": 4,
    "seed": 0,
    "eta": 1.0,
    "trials": 10_000,
    "backend": "dealer",
    "out": None,
    "L": None,
    "value": 1,
    "n": 1,
    "faults": [],
    "offsets": None,
    "bits": 16,
    "resolution": 1e-3,
    "theta": None,
    "transcript": None,
    "schemes": ["SingleQudit", "QkdLists"],
    "ms": None,
    "etas": None,
}


class ConfigError(ValueError):
    pass


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--m", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--eta", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--backend", choices=["quantum", "dealer"])
    p.add_argument("--out")
    p.add_argument("--config", help="JSON file with any of the flags; flags override it")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qbsync", description="Single-qudit detectable Byzantine agreement simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("distribute", help="generate a correlated list set")
    _common(p)
    p.add_argument("--L", type=int)

    p = sub.add_parser("dba", help="run one QB(n,m) agreement")
    _common(p)
    p.add_argument("--L", type=int)
    p.add_argument("--value", type=int)
    p.add_argument("--fault", dest="faults", action="append", help="pid:Strategy[:arg], repeatable")
    p.add_argument("--theta", type=float)
    p.add_argument("--transcript", help="write the JSON-lines transcript here (.gz compresses)")

    p = sub.add_parser("om", help="run the classical OM(n) baseline")
    _common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--value", type=int)
    p.add_argument("--fault", dest="faults", action="append")

    p = sub.add_parser("clocksync", help="one synchronization round over rotated QB runs")
    _common(p)
    p.add_argument("--offsets", help="comma-separated tick offsets, one per process")
    p.add_argument("--bits", type=int)
    p.add_argument("--resolution", type=float)
    p.add_argument("--L", type=int)
    p.add_argument("--fault", dest="faults", action="append")
    p.add_argument("--transcript")

    p = sub.add_parser("efficiency", help="detector-efficiency cost study")
    _common(p)
    p.add_argument("--ms", help="comma-separated process counts")
    p.add_argument("--etas", help="comma-separated efficiencies")
    p.add_argument("--schemes", help="comma-separated schemes")

    p = sub.add_parser("replay", help="re-run a recorded transcript and compare")
    p.add_argument("path")
    p.add_argument("--out")
    return ap


def merge_config(args: argparse.Namespace) -> dict[str, Any]:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            from_file = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {args.config}: {e}") from e
        unknown = set(from_file) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        cfg.update(from_file)
    for k, v in vars(args).items():
        if v is not None and k not in ("config", "command"):
            cfg[k] = v
    for key in ("ms", "etas", "schemes"):
        if isinstance(cfg[key], str):
            cfg[key] = cfg[key].split(",")
    return cfg


def _faults(cfg) -> dict:
    try:
        return dict(parse_fault(s) for s in cfg["faults"] or [])
    except (ValueError, json.JSONDecodeError) as e:
        raise ConfigError(str(e)) from e


def _emit(report: dict[str, Any], out: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def cmd_distribute(cfg) -> tuple[dict, int]:
    m = cfg["m"]
    length = cfg["L"] or default_length(m)
    ls = make_list_set(m, length, cfg["backend"], cfg["seed"], 0, eta=cfg["eta"])
    rep = validate_list_set(ls)
    out = json.loads(ls.to_json())
    out.update({"rounds_consumed": ls.rounds_consumed, "valid": rep.ok, "violations": rep.violations})
    print(f"distribute: m={m} L={length} backend={cfg['backend']} valid={rep.ok} rounds={ls.rounds_consumed}", file=sys.stderr)
    return out, EXIT_OK


def cmd_dba(cfg) -> tuple[dict, int]:
    m, seed = cfg["m"], cfg["seed"]
    faults = _faults(cfg)
    length = cfg["L"] or default_length(m)
    ls = make_list_set(m, length, cfg["backend"], seed, 0, eta=cfg["eta"])
    t = Transcript("dba", seed, qb_config_dict(m, cfg["value"], faults, length, cfg["backend"], cfg["eta"], cfg["theta"]))
    res = run_qb(m, cfg["value"], profiles_for(m, faults), ls, QBConfig(theta=cfg["theta"]), seed=seed, transcript=t)
    if cfg["transcript"]:
        t.write(cfg["transcript"])
    hv = res.honest_verdicts()
    report = {
        "m": m,
        "L": length,
        "messages": res.messages,
        "verdicts": {str(k): v.to_dict() for k, v in res.verdicts.items()},
        "agreement": res.agreement(),
        "validity": res.validity(),
    }
    for k, v in sorted(res.verdicts.items()):
        tag = "honest" if res.profiles[k].honest else "faulty"
        print(f"P{k:<3}{tag:<8}{'abort' if v.aborted else v.value!s:<7}{v.case}", file=sys.stderr)
    relays = [v for k, v in hv.items() if k != res.source]
    code = EXIT_ABORT if relays and all(v.aborted for v in relays) else EXIT_OK
    return report, code


def cmd_om(cfg) -> tuple[dict, int]:
    oc = OmConfig(cfg["m"], cfg["n"])
    res = om(oc, cfg["value"], _faults(cfg))
    report = {
        "m": oc.m,
        "n": oc.n,
        "decisions": {str(k): v for k, v in res.decisions.items()},
        "messages": res.messages,
        "message_count_formula": om_message_count(oc.n, oc.m),
        "agreement": res.agreement(),
        "validity": res.validity(),
    }
    print(f"OM({oc.n}) m={oc.m}: decisions={res.decisions} messages={res.messages}", file=sys.stderr)
    return report, EXIT_OK


def cmd_clocksync(cfg) -> tuple[dict, int]:
    if cfg["offsets"] is None:
        g = streams.derive_rng(cfg["seed"], 0, streams.OFFSETS)
        offsets = g.integers(0, 1 << (cfg["bits"] - 2), size=cfg["m"]).tolist()
    elif isinstance(cfg["offsets"], str):
        offsets = [int(x) for x in cfg["offsets"].split(",")]
    else:
        offsets = [int(x) for x in cfg["offsets"]]
    faults = _faults(cfg)
    sc = SyncConfig(bit_width=cfg["bits"], resolution=cfg["resolution"], list_length=cfg["L"], backend=cfg["backend"], eta=cfg["eta"])
    t = Transcript("clocksync", cfg["seed"], sync_config_dict(offsets, faults, sc))
    res = run_sync(offsets, profiles_for(len(offsets), faults), sc, seed=cfg["seed"], transcript=t)
    if cfg["transcript"]:
        t.write(cfg["transcript"])
    report = json.loads(res.report.to_json())
    report.update({"before": res.before, "after": res.after})
    print(f"clocksync: before={res.before} after={res.after} C1={res.report.c1} C2={res.report.c2} aborted={res.report.aborted}", file=sys.stderr)
    return report, EXIT_ABORT if res.report.aborted else EXIT_OK


def cmd_efficiency(cfg) -> tuple[dict, int]:
    ms = [int(x) for x in (cfg["ms"] or [cfg["m"]])]
    etas = [float(x) for x in (cfg["etas"] or [cfg["eta"]])]
    rows = []
    for si, scheme in enumerate(cfg["schemes"]):
        for m in ms:
            for e in etas:
                g = streams.derive_rng(cfg["seed"], si, streams.EFFICIENCY, m, int(round(e * 1e6)))
                est = monte_carlo_efficiency(scheme, m, e, cfg["trials"], g)
                row = est.to_dict()
                row["channels"] = channel_accounting(scheme, m)
                rows.append(row)
                print(f"{scheme:<16}m={m:<3}eta={e:<6}rate={est.rate:.4f} closed={est.closed_form:.4f}", file=sys.stderr)
    types = {str(m): dict(zip(("relay_patterns", "permutation_lists"), list_type_count(m))) for m in ms}
    return {"rows": rows, "list_types": types}, EXIT_OK


def cmd_replay(args) -> tuple[dict, int]:
    t = Transcript.read(args.path)
    res = replay(t)
    print(f"replay {args.path}: identical={res.identical}", file=sys.stderr)
    return {"identical": res.identical, "events": len(t.events), "first_difference": res.first_difference}, EXIT_OK if res.identical else EXIT_ABORT


COMMANDS = {
    "distribute": cmd_distribute,
    "dba": cmd_dba,
    "om": cmd_om,
    "clocksync": cmd_clocksync,
    "efficiency": cmd_efficiency,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "replay":
            report, code = cmd_replay(args)
            out = args.out
        else:
            cfg = merge_config(args)
            report, code = COMMANDS[args.command](cfg)
            out = cfg["out"]
    except BudgetExhausted as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, ReplayMismatch, ValueError, KeyError, TypeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    _emit(report, out)
    return code


if __name__ == "__main__":
    sys.exit(main())
