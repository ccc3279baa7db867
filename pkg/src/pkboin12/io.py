"""Configuration, trial-state files, and report writers.

All machine formats are JSON; tabular reports are CSV with a fixed header.
Decision and selection payloads are serialized through one canonical path
(sorted keys, plain repr floats) so the CLI and the HTTP service emit
byte-identical documents for the same state.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .design import Decision, DesignKind, DesignParams, DoseState, ObdResult
from .scenarios import SCENARIO_IDS, builtin_scenario
from .simulate import OperatingCharacteristics, Scenario
from .stats import IntervalBoundaries, PkPosteriorParams, UtilitySpec


class ConfigError(ValueError):
    """A configuration or state file failed validation."""


# ---------------------------------------------------------------------------
# Design parameters


def params_to_json(params: DesignParams) -> dict:
    return {
        "kind": params.kind.value,
        "num_doses": params.num_doses,
        "max_tox_prob": params.max_tox_prob,
        "min_eff_prob": params.min_eff_prob,
        "utilities": list(params.utilities.as_tuple()),
        "boundaries": list(params.boundaries.as_tuple()),
        "benchmark": params.benchmark,
        "sample_cutoff": params.sample_cutoff,
        "escalation_min_n": params.escalation_min_n,
        "c_tox": params.c_tox,
        "c_eff": params.c_eff,
        "c_pk": params.c_pk,
        "pk": {
            "target": params.pk.target,
            "ineffective": params.pk.ineffective,
            "cutoff": params.pk.cutoff,
            "prior_sd": params.pk.prior_sd,
            "sampling_sd": list(params.pk.sampling_sd) if params.pk.sampling_sd else None,
        },
        "cohort_size": params.cohort_size,
        "max_patients": params.max_patients,
        "start_dose": params.start_dose,
        "tox_window_days": params.tox_window_days,
        "eff_window_days": params.eff_window_days,
        "elim_min_n": params.elim_min_n,
        "pk_elim_min_n": params.pk_elim_min_n,
        "pk_delay_days": params.pk_delay_days,
    }


_PARAM_FIELDS = {
    "num_doses": int,
    "max_tox_prob": float,
    "min_eff_prob": float,
    "sample_cutoff": int,
    "escalation_min_n": int,
    "c_tox": float,
    "c_eff": float,
    "c_pk": float,
    "cohort_size": int,
    "max_patients": int,
    "start_dose": int,
    "tox_window_days": float,
    "eff_window_days": float,
    "elim_min_n": int,
    "pk_elim_min_n": int,
    "pk_delay_days": float,
}

_PK_FIELDS = {
    "target": float,
    "ineffective": float,
    "cutoff": float,
    "prior_sd": float,
}


def params_from_json(doc: dict, kind: DesignKind | str | None = None) -> DesignParams:
    """Build DesignParams from a JSON object, applying defaults for missing
    fields and raising ConfigError with the offending field name."""
    if not isinstance(doc, dict):
        raise ConfigError("design parameters must be a JSON object")
    doc = dict(doc)
    kwargs: dict = {}
    kind_raw = doc.pop("kind", None) if kind is None else kind
    if kind_raw is not None:
        try:
            kwargs["kind"] = (
                kind_raw if isinstance(kind_raw, DesignKind) else DesignKind.parse(str(kind_raw))
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if "utilities" in doc:
        u = doc.pop("utilities")
        if not (isinstance(u, (list, tuple)) and len(u) == 4):
            raise ConfigError("utilities must be a list of four scores")
        try:
            kwargs["utilities"] = UtilitySpec(*[float(v) for v in u])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"utilities: {exc}") from None
    if "boundaries" in doc:
        b = doc.pop("boundaries")
        if not (isinstance(b, (list, tuple)) and len(b) == 2):
            raise ConfigError("boundaries must be a [escalation, deescalation] pair")
        try:
            kwargs["boundaries"] = IntervalBoundaries(float(b[0]), float(b[1]))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"boundaries: {exc}") from None
    if "benchmark" in doc:
        kwargs["benchmark"] = float(doc.pop("benchmark"))
    if "pk" in doc:
        pk_doc = doc.pop("pk")
        if not isinstance(pk_doc, dict):
            raise ConfigError("pk must be a JSON object")
        pk_kwargs: dict = {}
        pk_doc = dict(pk_doc)
        for name, cast in _PK_FIELDS.items():
            if name in pk_doc and pk_doc[name] is not None:
                try:
                    pk_kwargs[name] = cast(pk_doc.pop(name))
                except (TypeError, ValueError):
                    raise ConfigError(f"pk.{name}: expected a number") from None
            else:
                pk_doc.pop(name, None)
        if pk_doc.get("sampling_sd") is not None:
            sd = pk_doc.pop("sampling_sd")
            if not isinstance(sd, (list, tuple)):
                raise ConfigError("pk.sampling_sd must be a list with one entry per dose")
            pk_kwargs["sampling_sd"] = tuple(float(v) for v in sd)
        else:
            pk_doc.pop("sampling_sd", None)
        if pk_doc:
            raise ConfigError(f"unknown pk field(s): {', '.join(sorted(pk_doc))}")
        try:
            kwargs["pk"] = PkPosteriorParams(**pk_kwargs)
        except ValueError as exc:
            raise ConfigError(f"pk: {exc}") from None
    for name, cast in _PARAM_FIELDS.items():
        if name in doc:
            try:
                kwargs[name] = cast(doc.pop(name))
            except (TypeError, ValueError):
                raise ConfigError(f"{name}: expected a number") from None
    if doc:
        raise ConfigError(f"unknown design parameter(s): {', '.join(sorted(doc))}")
    try:
        return DesignParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


# ---------------------------------------------------------------------------
# Scenarios


_SCENARIO_KNOBS = {
    "cv": float,
    "pk_influence": float,
    "tox_eff_corr": float,
    "accrual_per_month": float,
    "tox_window_days": float,
    "eff_window_days": float,
}


def scenario_from_json(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ConfigError("scenario must be a JSON object")
    doc = dict(doc)
    kwargs: dict = {}
    for name in ("tox_probs", "eff_probs", "pk_means"):
        if name not in doc:
            raise ConfigError(f"scenario is missing {name}")
        vec = doc.pop(name)
        if not isinstance(vec, (list, tuple)):
            raise ConfigError(f"{name} must be a list")
        kwargs[name] = tuple(float(v) for v in vec)
    for name, cast in _SCENARIO_KNOBS.items():
        if name in doc:
            kwargs[name] = cast(doc.pop(name))
    if "obd" in doc:
        obd = doc.pop("obd")
        kwargs["obd"] = None if obd is None else int(obd)
    kwargs["label"] = str(doc.pop("label", "custom"))
    if doc:
        raise ConfigError(f"unknown scenario field(s): {', '.join(sorted(doc))}")
    try:
        return Scenario(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def scenario_to_json(s: Scenario) -> dict:
    return {
        "label": s.label,
        "tox_probs": list(s.tox_probs),
        "eff_probs": list(s.eff_probs),
        "pk_means": list(s.pk_means),
        "cv": s.cv,
        "pk_influence": s.pk_influence,
        "tox_eff_corr": s.tox_eff_corr,
        "accrual_per_month": s.accrual_per_month,
        "tox_window_days": s.tox_window_days,
        "eff_window_days": s.eff_window_days,
        "obd": s.obd,
    }


def resolve_scenario(ref, overrides: dict | None = None) -> Scenario:
    """A scenario from a library id, an inline object, or a JSON file path."""
    overrides = dict(overrides or {})
    for name in overrides:
        if name not in _SCENARIO_KNOBS:
            raise ConfigError(f"unknown scenario override: {name}")
    if isinstance(ref, bool):
        raise ConfigError("scenario must be an id, object, or path")
    if isinstance(ref, int):
        try:
            return builtin_scenario(ref, **overrides)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if isinstance(ref, dict):
        base = scenario_from_json(ref)
        return dataclasses.replace(base, **overrides) if overrides else base
    if isinstance(ref, str):
        if ref.isdigit():
            return resolve_scenario(int(ref), overrides)
        path = Path(ref)
        if not path.exists():
            raise ConfigError(f"scenario file not found: {ref}")
        base = scenario_from_json(json.loads(path.read_text()))
        return dataclasses.replace(base, **overrides) if overrides else base
    raise ConfigError(f"cannot interpret scenario reference {ref!r}")


# ---------------------------------------------------------------------------
# Run configuration


@dataclass
class RunConfig:
    """One simulation study: designs x scenarios x optional sweep."""

    designs: list[DesignKind]
    scenarios: list  # ids / dicts / paths, resolved lazily
    reps: int = 2000
    seed: int = 1729
    threads: int | None = None
    params: dict = field(default_factory=dict)  # DesignParams overrides
    scenario_overrides: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)  # {"pk_influence": [...]} etc.
    out: str | None = None
    format: str = "csv"


_SWEEP_KEYS = {"pk_influence", "cv", "tox_eff_corr", "windows"}


def load_config(source) -> RunConfig:
    """Parse and validate a run configuration (path, JSON text, or dict)."""
    if isinstance(source, (str, Path)):
        path = Path(source)
        if not path.exists():
            raise ConfigError(f"config file not found: {source}")
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
    else:
        doc = source
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    doc = dict(doc)

    designs_raw = doc.pop("design", doc.pop("designs", "PKBOIN-12"))
    if isinstance(designs_raw, str):
        designs_raw = (
            [k.value for k in DesignKind] if designs_raw.lower() == "all" else [designs_raw]
        )
    if not isinstance(designs_raw, list) or not designs_raw:
        raise ConfigError("design must be a name, a list of names, or 'all'")
    try:
        designs = [DesignKind.parse(str(d)) for d in designs_raw]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    scenarios_raw = doc.pop("scenario", doc.pop("scenarios", None))
    if scenarios_raw is None:
        raise ConfigError("config is missing scenario")
    if isinstance(scenarios_raw, str) and scenarios_raw.lower() == "all":
        scenarios = list(SCENARIO_IDS)
    elif isinstance(scenarios_raw, list):
        scenarios = scenarios_raw
    else:
        scenarios = [scenarios_raw]

    reps = int(doc.pop("reps", 2000))
    if reps < 1:
        raise ConfigError("reps must be at least 1")
    seed = int(doc.pop("seed", 1729))
    threads = doc.pop("threads", None)
    threads = None if threads is None else int(threads)

    params = doc.pop("params", {})
    if not isinstance(params, dict):
        raise ConfigError("params must be a JSON object")
    params_from_json(params)  # validate field names and values now

    scenario_overrides = doc.pop("scenario_overrides", {})
    if not isinstance(scenario_overrides, dict):
        raise ConfigError("scenario_overrides must be a JSON object")
    for name in scenario_overrides:
        if name not in _SCENARIO_KNOBS:
            raise ConfigError(f"unknown scenario override: {name}")

    sweep = doc.pop("sweep", {})
    if not isinstance(sweep, dict):
        raise ConfigError("sweep must be a JSON object")
    for key in sweep:
        if key not in _SWEEP_KEYS:
            raise ConfigError(f"unknown sweep key {key!r}; valid: {', '.join(sorted(_SWEEP_KEYS))}")

    out = doc.pop("out", None)
    fmt = str(doc.pop("format", "csv")).lower()
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    if doc:
        raise ConfigError(f"unknown config field(s): {', '.join(sorted(doc))}")
    return RunConfig(
        designs=designs,
        scenarios=scenarios,
        reps=reps,
        seed=seed,
        threads=threads,
        params=params,
        scenario_overrides=scenario_overrides,
        sweep=sweep,
        out=out,
        format=fmt,
    )


# ---------------------------------------------------------------------------
# Trial-state files


def dose_state_to_json(s: DoseState) -> dict:
    return {
        "counts": list(s.counts),
        "pk_values": list(s.pk_values),
        "eliminated_safety": s.eliminated_safety,
        "eliminated_efficacy": s.eliminated_efficacy,
        "eliminated_pk": s.eliminated_pk,
    }


def dose_state_from_json(doc: dict) -> DoseState:
    counts = doc.get("counts", [0, 0, 0, 0])
    if not (isinstance(counts, list) and len(counts) == 4):
        raise ConfigError("dose counts must be a list of four tallies")
    return DoseState(
        counts=[int(c) for c in counts],
        pk_values=[float(v) for v in doc.get("pk_values", [])],
        eliminated_safety=bool(doc.get("eliminated_safety", False)),
        eliminated_efficacy=bool(doc.get("eliminated_efficacy", False)),
        eliminated_pk=bool(doc.get("eliminated_pk", False)),
    )


def patient_to_json(p) -> dict:
    return {
        "id": p.id,
        "dose": p.dose,
        "enroll_day": p.enroll_day,
        "pk_value": p.pk_value,
        "tox_event_day": p.tox_event_day,
        "eff_event_day": p.eff_event_day,
        "tox_reported": p.tox_reported,
        "eff_reported": p.eff_reported,
    }


def patient_from_json(doc: dict):
    from .tite import PatientRecord

    try:
        return PatientRecord(
            id=doc.get("id", ""),
            dose=int(doc["dose"]),
            enroll_day=float(doc.get("enroll_day", 0.0)),
            pk_value=float(doc["pk_value"]),
            tox_event_day=None if doc.get("tox_event_day") is None else float(doc["tox_event_day"]),
            eff_event_day=None if doc.get("eff_event_day") is None else float(doc["eff_event_day"]),
            tox_reported=doc.get("tox_reported"),
            eff_reported=doc.get("eff_reported"),
        )
    except KeyError as exc:
        raise ConfigError(f"patient record is missing {exc.args[0]}") from None


@dataclass
class TrialStateFile:
    params: DesignParams
    states: list[DoseState]
    patients: list | None
    current_dose: int
    time_days: float


def trial_state_from_json(doc: dict) -> TrialStateFile:
    """Parse a trial-state document.

    Either per-dose aggregates (enough for the complete-data designs) or
    patient-level records (required for the TITE designs); when patients are
    present, aggregates are derived from them.
    """
    if not isinstance(doc, dict):
        raise ConfigError("trial state must be a JSON object")
    if "design" not in doc:
        raise ConfigError("trial state is missing design")
    params = params_from_json(doc["design"])
    current = int(doc.get("current_dose", params.start_dose))
    if not 1 <= current <= params.num_doses:
        raise ConfigError(f"current_dose must be in 1..{params.num_doses}, got {current}")
    time_days = float(doc.get("time_days", 0.0))

    patients = None
    if doc.get("patients") is not None:
        patients = [patient_from_json(p) for p in doc["patients"]]
        for p in patients:
            if not 1 <= p.dose <= params.num_doses:
                raise ConfigError(f"patient {p.id!r} has dose {p.dose} outside 1..{params.num_doses}")
        states = [DoseState() for _ in range(params.num_doses)]
        for p in patients:
            states[p.dose - 1].pk_values.append(p.pk_value)
        flags = doc.get("doses")
        if flags:
            _apply_flags(states, flags)
        _fill_counts_from_patients(states, patients, params, time_days)
    elif doc.get("doses") is not None:
        raw = doc["doses"]
        if len(raw) != params.num_doses:
            raise ConfigError(f"doses must have {params.num_doses} entries, got {len(raw)}")
        states = [dose_state_from_json(d) for d in raw]
    else:
        raise ConfigError("trial state needs either doses or patients")
    return TrialStateFile(params, states, patients, current, time_days)


def _apply_flags(states: list[DoseState], raw: list) -> None:
    for s, doc in zip(states, raw):
        s.eliminated_safety = bool(doc.get("eliminated_safety", False))
        s.eliminated_efficacy = bool(doc.get("eliminated_efficacy", False))
        s.eliminated_pk = bool(doc.get("eliminated_pk", False))


def _fill_counts_from_patients(states, patients, params: DesignParams, t: float) -> None:
    """Aggregate ascertained outcomes into complete-data counts.

    Patients with any pending outcome at t are left out of the counts; the
    complete-data engine refuses such states, the TITE engine never reads
    the counts.
    """
    for p in patients:
        tox = p.tox_status(t, params)
        eff = p.eff_status(t, params)
        if tox is None or eff is None:
            continue
        states[p.dose - 1].add_outcome(tox, eff)


def trial_state_to_json(state: TrialStateFile) -> dict:
    doc = {
        "design": params_to_json(state.params),
        "current_dose": state.current_dose,
        "time_days": state.time_days,
        "doses": [dose_state_to_json(s) for s in state.states],
    }
    if state.patients is not None:
        doc["patients"] = [patient_to_json(p) for p in state.patients]
    return doc


# ---------------------------------------------------------------------------
# Canonical payloads


def canonical_json(payload: dict) -> str:
    """The one serialization used for parity checks across CLI and service."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False)


def decision_to_json(decision: Decision) -> dict:
    diag = _jsonable(decision.diagnostics)
    return {
        "action": decision.action.value,
        "dose": decision.dose,
        "rule": decision.rule,
        "diagnostics": diag,
    }


def obd_to_json(result: ObdResult) -> dict:
    return {
        "selected": result.selected,
        "mtd": result.mtd,
        "pk_floor": result.pk_floor,
        "iso_tox": {str(k): v for k, v in result.iso_tox.items()},
        "iso_pk": {str(k): v for k, v in result.iso_pk.items()},
        "utilities": {str(k): v for k, v in result.utilities.items()},
        "candidates": list(result.candidates),
        "reason": result.reason,
    }


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "item"):  # numpy scalar
        return value.item()
    return value


# ---------------------------------------------------------------------------
# Reports


REPORT_COLUMNS = ["design", "scenario", "reps", "seed"]


def _report_row(oc: OperatingCharacteristics) -> dict:
    D = len(oc.selection_pct)
    row: dict = {
        "design": oc.design,
        "scenario": oc.scenario,
        "reps": oc.reps,
        "seed": oc.seed,
    }
    for d in range(D):
        row[f"sel{d + 1}_pct"] = round(oc.selection_pct[d], 1)
    row["et_pct"] = round(oc.early_termination_pct, 1)
    for d in range(D):
        row[f"n{d + 1}"] = round(oc.mean_patients[d], 1)
    row["duration_months"] = round(oc.mean_duration_months, 1)
    for d in range(D):
        row[f"sel{d + 1}_pct_full"] = oc.selection_pct[d]
    row["et_pct_full"] = oc.early_termination_pct
    row["terminated_pct_full"] = oc.terminated_pct
    row["no_selection_completed_pct_full"] = oc.no_selection_completed_pct
    for d in range(D):
        row[f"n{d + 1}_full"] = oc.mean_patients[d]
    row["mean_enrolled_full"] = oc.mean_enrolled
    row["duration_months_full"] = oc.mean_duration_months
    return row


def oc_to_json(oc: OperatingCharacteristics) -> dict:
    return {
        "design": oc.design,
        "scenario": oc.scenario,
        "reps": oc.reps,
        "seed": oc.seed,
        "selection_pct": list(oc.selection_pct),
        "early_termination_pct": oc.early_termination_pct,
        "terminated_pct": oc.terminated_pct,
        "no_selection_completed_pct": oc.no_selection_completed_pct,
        "mean_patients": list(oc.mean_patients),
        "mean_enrolled": oc.mean_enrolled,
        "mean_duration_months": oc.mean_duration_months,
    }


def oc_from_json(doc: dict) -> OperatingCharacteristics:
    return OperatingCharacteristics(
        design=doc["design"],
        scenario=doc["scenario"],
        reps=int(doc["reps"]),
        seed=int(doc["seed"]),
        selection_pct=tuple(doc["selection_pct"]),
        early_termination_pct=doc["early_termination_pct"],
        terminated_pct=doc["terminated_pct"],
        no_selection_completed_pct=doc["no_selection_completed_pct"],
        mean_patients=tuple(doc["mean_patients"]),
        mean_enrolled=doc["mean_enrolled"],
        mean_duration_months=doc["mean_duration_months"],
    )


def report_header(num_doses: int) -> list[str]:
    cols = list(REPORT_COLUMNS)
    cols += [f"sel{d}_pct" for d in range(1, num_doses + 1)]
    cols += ["et_pct"]
    cols += [f"n{d}" for d in range(1, num_doses + 1)]
    cols += ["duration_months"]
    cols += [f"sel{d}_pct_full" for d in range(1, num_doses + 1)]
    cols += ["et_pct_full", "terminated_pct_full", "no_selection_completed_pct_full"]
    cols += [f"n{d}_full" for d in range(1, num_doses + 1)]
    cols += ["mean_enrolled_full", "duration_months_full"]
    return cols


def write_report(ocs: list[OperatingCharacteristics], fmt: str, path) -> None:
    """One row per (design, scenario); 1-decimal display columns plus
    full-precision companions.  JSON output round-trips via oc_from_json."""
    path = Path(path)
    try:
        if fmt == "json":
            payload = {"results": [oc_to_json(oc) for oc in ocs]}
            path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        elif fmt == "csv":
            num_doses = len(ocs[0].selection_pct) if ocs else 6
            header = report_header(num_doses)
            with path.open("w", newline="") as fh:
                writer = csv.DictWriter(fh, fieldnames=header)
                writer.writeheader()
                for oc in ocs:
                    writer.writerow(_report_row(oc))
        else:
            raise ConfigError(f"format must be csv or json, got {fmt!r}")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc


def read_report_json(path) -> list[OperatingCharacteristics]:
    doc = json.loads(Path(path).read_text())
    return [oc_from_json(d) for d in doc["results"]]
