"""Command-line interface.

Subcommands: simulate (operating-characteristics studies, with sweeps),
decide (one-shot recommendation from a trial-state file), finalize (final
dose selection from a trial-state file), scenarios (the built-in library),
serve (HTTP conduct service).  Exit codes: 0 success, 1 validation error,
2 runtime error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from . import io as pio
from .design import DesignKind, decide, select_obd
from .scenarios import SCENARIO_IDS, builtin_scenario
from .simulate import run_replications
from .tite import next_dose_tite


class CliError(Exception):
    def __init__(self, message: str, code: int = 1):
        super().__init__(message)
        self.code = code


def _parse_designs(value: str) -> list[DesignKind]:
    if value.lower() == "all":
        return list(DesignKind)
    return [DesignKind.parse(part) for part in value.split(",") if part.strip()]


def _parse_scenarios(value: str):
    if value.lower() == "all":
        return list(SCENARIO_IDS)
    parts = [p.strip() for p in value.split(",") if p.strip()]
    return [int(p) if p.isdigit() else p for p in parts]


def _parse_sweep(value: str) -> dict:
    key, _, raw = value.partition("=")
    if not raw:
        raise pio.ConfigError("sweep must look like key=v1,v2,...")
    aliases = {"gp": "pk_influence", "pk_influence": "pk_influence", "cv": "cv",
               "rho": "tox_eff_corr", "rho_pq": "tox_eff_corr", "tox_eff_corr": "tox_eff_corr",
               "windows": "windows"}
    name = aliases.get(key.strip().lower())
    if name is None:
        raise pio.ConfigError(f"unknown sweep key {key!r}; valid: gP, cv, rho, windows")
    if name == "windows":
        values = []
        for pair in raw.split(","):
            tox_w, _, eff_w = pair.partition(":")
            if not eff_w:
                raise pio.ConfigError("windows sweep entries must look like TOX:EFF, e.g. 45:90")
            values.append((float(tox_w), float(eff_w)))
    else:
        values = [float(v) for v in raw.split(",") if v.strip()]
    if not values:
        raise pio.ConfigError(f"sweep {key!r} has no values")
    return {name: values}


def _sweep_variants(config: pio.RunConfig):
    """(label, scenario_overrides) pairs covering the configured sweep."""
    if not config.sweep:
        yield "", dict(config.scenario_overrides)
        return
    (key, values), = config.sweep.items()
    for v in values:
        overrides = dict(config.scenario_overrides)
        if key == "windows":
            overrides["tox_window_days"], overrides["eff_window_days"] = float(v[0]), float(v[1])
            label = f"windows={v[0]:g}:{v[1]:g}"
        else:
            overrides[key] = float(v)
            label = f"{key}={v:g}"
        yield label, overrides


def cmd_simulate(args) -> int:
    if args.config:
        config = pio.load_config(args.config)
    else:
        config = pio.RunConfig(designs=[DesignKind.PKBOIN12], scenarios=[1])
    if args.design:
        config.designs = _parse_designs(args.design)
    if args.scenario:
        config.scenarios = _parse_scenarios(args.scenario)
    if args.reps is not None:
        if args.reps < 1:
            raise pio.ConfigError("reps must be at least 1")
        config.reps = args.reps
    if args.seed is not None:
        config.seed = args.seed
    if args.threads is not None:
        config.threads = args.threads
    if args.out:
        config.out = args.out
    if args.format:
        config.format = args.format
    if args.sweep:
        config.sweep = _parse_sweep(args.sweep)

    ocs = []
    for sweep_label, overrides in _sweep_variants(config):
        for scenario_ref in config.scenarios:
            scenario = pio.resolve_scenario(scenario_ref, overrides)
            if sweep_label:
                scenario = dataclasses.replace(
                    scenario, label=f"{scenario.label}[{sweep_label}]"
                )
            for kind in config.designs:
                params = pio.params_from_json(config.params, kind=kind)
                oc = run_replications(
                    params, scenario, config.reps, config.seed, parallelism=config.threads
                )
                ocs.append(oc)
                sel = oc.selection_pct
                best = max(range(len(sel)), key=lambda i: sel[i]) + 1 if any(sel) else None
                print(
                    f"{oc.design:<15} {oc.scenario:<22} reps={oc.reps} "
                    f"ET={oc.early_termination_pct:5.1f}% "
                    f"top_dose={best} duration={oc.mean_duration_months:.1f}mo",
                    file=sys.stderr,
                )
    if config.out:
        pio.write_report(ocs, config.format, config.out)
        print(f"wrote {len(ocs)} rows to {config.out}", file=sys.stderr)
    else:
        print(json.dumps({"results": [pio.oc_to_json(oc) for oc in ocs]}, indent=2, sort_keys=True))
    return 0


def _load_state(path: str) -> pio.TrialStateFile:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise CliError(f"state file not found: {path}", 2) from None
    except json.JSONDecodeError as exc:
        raise pio.ConfigError(f"state file is not valid JSON: {exc}") from None
    return pio.trial_state_from_json(doc)


def cmd_decide(args) -> int:
    state = _load_state(args.state)
    params = state.params
    at_time = args.at_time if args.at_time is not None else state.time_days
    if params.kind.time_to_event:
        if state.patients is None:
            raise pio.ConfigError("TITE designs need patient-level records in the state file")
        decision = next_dose_tite(state.states, state.patients, state.current_dose, at_time, params)
    else:
        if state.patients is not None:
            for p in state.patients:
                if p.pending_any(at_time, params):
                    raise pio.ConfigError(
                        f"patient {p.id!r} has pending outcomes; complete-data designs "
                        "need fully ascertained states"
                    )
        decision = decide(state.states, state.current_dose, params)
    print(pio.canonical_json(pio.decision_to_json(decision)))
    return 0


def cmd_finalize(args) -> int:
    state = _load_state(args.state)
    result = select_obd(state.states, state.params)
    print(pio.canonical_json(pio.obd_to_json(result)))
    return 0


def cmd_scenarios(args) -> int:
    if args.id is not None:
        scenario = builtin_scenario(args.id)
        print(json.dumps(pio.scenario_to_json(scenario), indent=2, sort_keys=True))
        return 0
    rows = []
    for i in SCENARIO_IDS:
        s = builtin_scenario(i)
        rows.append(
            {
                "id": i,
                "obd": s.obd,
                "tox_probs": list(s.tox_probs),
                "eff_probs": list(s.eff_probs),
                "pk_means": list(s.pk_means),
            }
        )
    print(json.dumps({"scenarios": rows}, indent=2, sort_keys=True))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(store_dir=args.store)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; we use 1
        raise CliError(message, 1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pkboin12", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run operating-characteristics studies")
    sim.add_argument("--config", help="JSON run configuration")
    sim.add_argument("--design", "--designs", dest="design",
                     help="design name(s), comma separated, or 'all'")
    sim.add_argument("--scenario", help="library id(s), 'all', or a scenario JSON path")
    sim.add_argument("--reps", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--threads", type=int)
    sim.add_argument("--out", help="report path")
    sim.add_argument("--format", choices=["csv", "json"])
    sim.add_argument("--sweep", help="key=v1,v2,... over gP, cv, rho, or windows (TOX:EFF pairs)")
    sim.set_defaults(func=cmd_simulate)

    dec = sub.add_parser("decide", help="next-cohort decision for a trial-state file")
    dec.add_argument("--state", required=True)
    dec.add_argument("--at-time", type=float, dest="at_time",
                     help="calendar day for TITE follow-up (default: the file's clock)")
    dec.set_defaults(func=cmd_decide)

    fin = sub.add_parser("finalize", help="final dose selection for a trial-state file")
    fin.add_argument("--state", required=True)
    fin.set_defaults(func=cmd_finalize)

    sc = sub.add_parser("scenarios", help="list or show built-in scenarios")
    sc.add_argument("--id", type=int)
    sc.set_defaults(func=cmd_scenarios)

    srv = sub.add_parser("serve", help="start the conduct service")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    srv.add_argument("--store", default=None, help="session store directory")
    srv.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ValueError as exc:  # ConfigError and engine validation errors
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
