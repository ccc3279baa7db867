"""HTTP conduct service: persistent trial sessions, cohort submission,
on-demand recommendations, finalization, and asynchronous simulation jobs.

Sessions are JSON documents in a file-backed store, so a live trial
survives restarts.  Mutations on one session are serialized behind a
per-session lock; reads take snapshots.  Every Decision/ObdResult payload
passes through the same canonical serialization as the CLI.
"""

from __future__ import annotations

import json
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any

from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import io as pio
from .design import Action, Decision, DesignParams, decide, select_obd
from .simulate import run_replications
from .tite import PatientRecord, next_dose_tite

API_PREFIX = "/api/v1"


class PatientIn(BaseModel):
    id: str | int | None = None
    pk_value: float
    tox: bool | None = None  # None = pending (TITE only)
    eff: bool | None = None
    enroll_day: float | None = None
    tox_event_day: float | None = None
    eff_event_day: float | None = None


class CreateTrialIn(BaseModel):
    design: dict[str, Any] = Field(default_factory=dict)


class CohortIn(BaseModel):
    patients: list[PatientIn]
    time_days: float | None = None  # decision time; defaults to the latest enrollment


class FinalizeIn(BaseModel):
    at_time: float | None = None
    force: bool = False


class SimulationIn(BaseModel):
    config: dict[str, Any]


class TrialSession:
    """In-memory session with write-through JSON persistence."""

    def __init__(self, sid: str, params: DesignParams, store: "SessionStore"):
        self.id = sid
        self.params = params
        self.states = [pio.DoseState() for _ in range(params.num_doses)]
        self.patients: list[PatientRecord] = []
        self.current_dose = params.start_dose
        self.clock_days = 0.0
        self.status = "accruing"  # accruing | suspended | complete | terminated
        self.decision_log: list[dict] = []
        self.lock = threading.Lock()
        self.store = store

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "design": pio.params_to_json(self.params),
            "doses": [pio.dose_state_to_json(s) for s in self.states],
            "patients": [pio.patient_to_json(p) for p in self.patients],
            "current_dose": self.current_dose,
            "time_days": self.clock_days,
            "status": self.status,
            "decision_log": self.decision_log,
        }

    @classmethod
    def from_json(cls, doc: dict, store: "SessionStore") -> "TrialSession":
        params = pio.params_from_json(doc["design"])
        session = cls(doc["id"], params, store)
        session.states = [pio.dose_state_from_json(d) for d in doc["doses"]]
        session.patients = [pio.patient_from_json(p) for p in doc["patients"]]
        session.current_dose = int(doc["current_dose"])
        session.clock_days = float(doc["time_days"])
        session.status = doc["status"]
        session.decision_log = list(doc["decision_log"])
        return session

    def persist(self) -> None:
        self.store.write(self.id, self.to_json())

    # -- views ----------------------------------------------------------------

    def dose_table(self) -> list[dict]:
        from .design import desirability, observed_rates, snapshot_from_state

        rows = []
        for d, state in enumerate(self.states, start=1):
            tox_rate, eff_rate, pk_mean = observed_rates(state)
            snap = snapshot_from_state(state, self.params.utilities)
            rows.append(
                {
                    "dose": d,
                    "n": state.n,
                    "n_tox": state.n_tox,
                    "n_eff": state.n_eff,
                    "tox_rate": tox_rate,
                    "eff_rate": eff_rate,
                    "pk_mean": pk_mean,
                    "desirability": desirability(snap, self.params.utilities, self.params.benchmark),
                    "eliminated_safety": state.eliminated_safety,
                    "eliminated_efficacy": state.eliminated_efficacy,
                    "eliminated_pk": state.eliminated_pk,
                }
            )
        return rows

    def view(self) -> dict:
        derived = {
            "boundaries": list(self.params.boundaries.as_tuple()),
            "benchmark": self.params.benchmark,
            "pk_cutoff": self.params.pk.cutoff,
        }
        last = self.decision_log[-1]["decision"] if self.decision_log else None
        return {
            "id": self.id,
            "status": self.status,
            "design": pio.params_to_json(self.params),
            "derived": derived,
            "enrolled": len(self.patients),
            "current_dose": self.current_dose,
            "time_days": self.clock_days,
            "doses": self.dose_table(),
            "decision_log": self.decision_log,
            "last_decision": last,
            "recommendation": self.recommendation(self.clock_days),
        }

    # -- engine calls --------------------------------------------------------

    def recommendation(self, at_time: float) -> dict:
        if self.status in ("complete", "terminated"):
            last = next(
                (e["decision"] for e in reversed(self.decision_log) if "decision" in e), None
            )
            if last is not None:
                return last
            return pio.decision_to_json(Decision(Action.TERMINATE, None, self.status, {}))
        if not self.patients:
            return pio.decision_to_json(
                Decision(Action.TREAT, self.params.start_dose, "first_cohort", {})
            )
        if not self.params.kind.time_to_event:
            # Complete-data decisions are time-independent: the verdict is
            # whatever the last cohort produced.
            return self.decision_log[-1]["decision"]
        decision = self.compute_decision(at_time, mutate=False)
        return pio.decision_to_json(decision)

    def compute_decision(self, at_time: float, mutate: bool) -> Decision:
        """Recompute the engine verdict at a calendar time.

        With mutate False, elimination flags are evaluated on copies so that
        idempotent reads never change session state.
        """
        states = self.states if mutate else [
            pio.dose_state_from_json(pio.dose_state_to_json(s)) for s in self.states
        ]
        if self.params.kind.time_to_event:
            return next_dose_tite(states, self.patients, self.current_dose, at_time, self.params)
        return decide(states, self.current_dose, self.params)


class SessionStore:
    """Directory of <session-id>.json documents."""

    def __init__(self, root: Path | None):
        self.root = root
        if root is not None:
            root.mkdir(parents=True, exist_ok=True)

    def write(self, sid: str, doc: dict) -> None:
        if self.root is None:
            return
        tmp = self.root / f"{sid}.json.tmp"
        tmp.write_text(json.dumps(doc, sort_keys=True))
        tmp.replace(self.root / f"{sid}.json")

    def load_all(self) -> list[dict]:
        if self.root is None:
            return []
        docs = []
        for path in sorted(self.root.glob("*.json")):
            try:
                docs.append(json.loads(path.read_text()))
            except (OSError, json.JSONDecodeError):
                continue
        return docs


class SimulationJob:
    def __init__(self, jid: str, config: pio.RunConfig):
        self.id = jid
        self.config = config
        self.progress = 0.0
        self.result: list[dict] | None = None
        self.error: str | None = None


def create_app(store_dir: str | None = None, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="pkboin12 conduct service", version="1.0")
    store = SessionStore(Path(store_dir) if store_dir else None)
    sessions: dict[str, TrialSession] = {}
    for doc in store.load_all():
        try:
            session = TrialSession.from_json(doc, store)
            sessions[session.id] = session
        except (KeyError, pio.ConfigError):
            continue
    jobs: dict[str, SimulationJob] = {}
    job_pool = ThreadPoolExecutor(max_workers=2)
    registry_lock = threading.Lock()

    def get_session(sid: str) -> TrialSession:
        session = sessions.get(sid)
        if session is None:
            raise HTTPException(404, f"unknown trial session {sid!r}")
        return session

    @app.post(API_PREFIX + "/trials", status_code=201)
    def create_trial(body: CreateTrialIn):
        try:
            params = pio.params_from_json(body.design)
        except pio.ConfigError as exc:
            raise HTTPException(400, str(exc)) from None
        sid = uuid.uuid4().hex[:12]
        session = TrialSession(sid, params, store)
        with registry_lock:
            sessions[sid] = session
        session.persist()
        return session.view()

    @app.get(API_PREFIX + "/trials/{sid}")
    def get_trial(sid: str):
        return get_session(sid).view()

    @app.post(API_PREFIX + "/trials/{sid}/cohorts")
    def submit_cohort(sid: str, body: CohortIn):
        session = get_session(sid)
        with session.lock:
            if session.status in ("complete", "terminated"):
                raise HTTPException(409, f"session is {session.status}")
            params = session.params
            if len(body.patients) != params.cohort_size:
                raise HTTPException(
                    422, f"cohort must have {params.cohort_size} patients, got {len(body.patients)}"
                )
            tite = params.kind.time_to_event
            records = []
            base = len(session.patients)
            for i, p in enumerate(body.patients):
                if p.pk_value is None or p.pk_value <= 0:
                    raise HTTPException(422, "pk_value must be positive")
                if not tite and (p.tox is None or p.eff is None):
                    raise HTTPException(
                        422, "pending outcomes are only allowed for time-to-event designs"
                    )
                records.append(
                    PatientRecord(
                        id=p.id if p.id is not None else f"p{base + i + 1}",
                        dose=session.current_dose,
                        enroll_day=p.enroll_day if p.enroll_day is not None else session.clock_days,
                        pk_value=p.pk_value,
                        tox_event_day=p.tox_event_day,
                        eff_event_day=p.eff_event_day,
                        tox_reported=p.tox,
                        eff_reported=p.eff,
                    )
                )
            at_time = body.time_days
            if at_time is None:
                at_time = max([r.enroll_day for r in records] + [session.clock_days])
            session.clock_days = at_time
            for rec in records:
                session.patients.append(rec)
                state = session.states[rec.dose - 1]
                state.pk_values.append(rec.pk_value)
                if not tite:
                    state.add_outcome(bool(rec.tox_reported), bool(rec.eff_reported))
            decision = session.compute_decision(at_time, mutate=True)
            if decision.action is Action.TERMINATE:
                session.status = "terminated"
            elif decision.action is Action.SUSPEND:
                session.status = "suspended"
            else:
                session.status = "accruing"
                session.current_dose = decision.dose
                if len(session.patients) >= params.max_patients:
                    session.status = "complete"
            entry = {
                "time_days": at_time,
                "cohort": [pio.patient_to_json(r) for r in records],
                "decision": pio.decision_to_json(decision),
            }
            session.decision_log.append(entry)
            session.persist()
            return {"id": sid, "status": session.status, "decision": entry["decision"],
                    "doses": session.dose_table(), "enrolled": len(session.patients)}

    @app.get(API_PREFIX + "/trials/{sid}/recommendation")
    def get_recommendation(sid: str, at_time: float | None = None):
        session = get_session(sid)
        t = at_time if at_time is not None else session.clock_days
        return {"id": sid, "at_time": t, "decision": session.recommendation(t)}

    @app.post(API_PREFIX + "/trials/{sid}/finalize")
    def finalize_trial(sid: str, body: FinalizeIn | None = None):
        body = body or FinalizeIn()
        session = get_session(sid)
        with session.lock:
            params = session.params
            at_time = body.at_time if body.at_time is not None else session.clock_days
            if params.kind.time_to_event:
                pending = [p.id for p in session.patients if p.pending_any(at_time, params)]
                if pending and not body.force:
                    raise HTTPException(
                        409,
                        f"{len(pending)} patient(s) still have pending outcomes at day "
                        f"{at_time:g}; pass force to finalize anyway",
                    )
                states = [pio.DoseState() for _ in range(params.num_doses)]
                for s_old, s_new in zip(session.states, states):
                    s_new.pk_values = list(s_old.pk_values)
                    s_new.eliminated_safety = s_old.eliminated_safety
                    s_new.eliminated_efficacy = s_old.eliminated_efficacy
                    s_new.eliminated_pk = s_old.eliminated_pk
                for p in session.patients:
                    tox = p.tox_status(at_time, params)
                    eff = p.eff_status(at_time, params)
                    # force treats an unresolved outcome as event-free
                    states[p.dose - 1].add_outcome(bool(tox), bool(eff))
                session.states = states
            # Elimination flags stand as accumulated by the per-cohort
            # decisions; selection reads them directly.
            result = select_obd(session.states, params)
            session.status = "terminated" if result.selected is None else "complete"
            payload = pio.obd_to_json(result)
            session.decision_log.append({"time_days": at_time, "finalize": payload})
            session.persist()
            return {"id": sid, "status": session.status, "result": payload}

    @app.post(API_PREFIX + "/simulations", status_code=201)
    def create_simulation(body: SimulationIn):
        try:
            config = pio.load_config(body.config)
        except pio.ConfigError as exc:
            raise HTTPException(400, str(exc)) from None
        jid = uuid.uuid4().hex[:12]
        job = SimulationJob(jid, config)
        with registry_lock:
            jobs[jid] = job

        def run() -> None:
            try:
                ocs = []
                total = len(config.designs) * len(config.scenarios)
                done = 0
                for scenario_ref in config.scenarios:
                    scenario = pio.resolve_scenario(scenario_ref, config.scenario_overrides)
                    for kind in config.designs:
                        params = pio.params_from_json(config.params, kind=kind)

                        def tick(frac: float, base=done, tot=total) -> None:
                            job.progress = min((base + frac) / tot, 0.999)

                        oc = run_replications(
                            params, scenario, config.reps, config.seed,
                            parallelism=config.threads, progress=tick,
                        )
                        ocs.append(pio.oc_to_json(oc))
                        done += 1
                        job.progress = min(done / total, 0.999)
                job.result = ocs
                job.progress = 1.0
            except Exception as exc:  # surfaced via polling
                job.error = str(exc)
                job.progress = 1.0

        job_pool.submit(run)
        return {"id": jid, "progress": job.progress}

    @app.get(API_PREFIX + "/simulations/{jid}")
    def get_simulation(jid: str):
        job = jobs.get(jid)
        if job is None:
            raise HTTPException(404, f"unknown simulation job {jid!r}")
        payload = {"id": jid, "progress": job.progress}
        if job.error is not None:
            payload["error"] = job.error
        elif job.result is not None and job.progress >= 1.0:
            payload["result"] = {"results": job.result}
        return payload

    @app.get(API_PREFIX + "/scenarios")
    def list_scenarios():
        from .scenarios import SCENARIO_IDS, builtin_scenario

        return {
            "scenarios": [
                {"id": i, **pio.scenario_to_json(builtin_scenario(i))} for i in SCENARIO_IDS
            ]
        }

    ui_root = Path(static_dir) if static_dir else Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if ui_root.is_dir():
        app.mount("/", StaticFiles(directory=str(ui_root), html=True), name="ui")
    else:

        @app.get("/")
        def index():
            return {"service": "pkboin12", "api": API_PREFIX}

    return app
