"""Scenario-driven Monte Carlo engine.

Generates patients whose individual DLT/response probabilities are tied to
their drug exposure, runs calendar-time trials under any of the four
designs, and aggregates operating characteristics over replications with
per-replicate RNG streams so results do not depend on the degree of
parallelism.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .design import (
    Action,
    DesignParams,
    ObdResult,
    apply_eliminations,
    decide,
    new_dose_states,
    select_obd,
)
from .tite import PatientRecord, next_dose_tite

DAYS_PER_MONTH = 30.0


@dataclass(frozen=True)
class Scenario:
    """Ground truth for simulation: per-dose event rates and mean exposure,
    plus the patient-generation knobs."""

    tox_probs: tuple[float, ...]
    eff_probs: tuple[float, ...]
    pk_means: tuple[float, ...]
    cv: float = 0.25  # coefficient of variation of individual exposure
    pk_influence: float = 1.0  # exposure-to-probability leverage at the individual level
    tox_eff_corr: float = 0.0
    accrual_per_month: float = 3.0
    tox_window_days: float = 30.0
    eff_window_days: float = 60.0
    obd: int | None = None  # annotated optimal dose, if one exists
    label: str = ""

    def __post_init__(self) -> None:
        D = len(self.tox_probs)
        if not (len(self.eff_probs) == len(self.pk_means) == D and D >= 1):
            raise ValueError("tox_probs, eff_probs and pk_means must share a positive length")
        for name in ("tox_probs", "eff_probs"):
            probs = getattr(self, name)
            if any(not 0.0 <= p <= 1.0 for p in probs):
                raise ValueError(f"{name} must lie in [0, 1]")
        if any(b <= a for a, b in zip(self.tox_probs, self.tox_probs[1:])):
            raise ValueError("tox_probs must increase strictly with dose")
        if any(b <= a for a, b in zip(self.pk_means, self.pk_means[1:])):
            raise ValueError("pk_means must increase strictly with dose")
        if any(r <= 0 for r in self.pk_means):
            raise ValueError("pk_means must be positive")
        if self.cv < 0:
            raise ValueError("cv must be nonnegative")
        if not 0.0 <= self.tox_eff_corr < 1.0:
            raise ValueError("tox_eff_corr must lie in [0, 1)")
        if self.accrual_per_month <= 0:
            raise ValueError("accrual_per_month must be positive")

    @property
    def num_doses(self) -> int:
        return len(self.tox_probs)


@dataclass
class TrialResult:
    """Outcome of one simulated trial."""

    selected: int | None
    early_terminated: bool
    termination_reason: str | None
    dose_patients: tuple[int, ...]
    enrolled: int
    duration_months: float
    obd: ObdResult | None


@dataclass
class OperatingCharacteristics:
    """Aggregate of many replications of one (design, scenario) pair."""

    design: str
    scenario: str
    reps: int
    seed: int
    selection_pct: tuple[float, ...]  # per dose
    early_termination_pct: float  # no dose selected, any cause
    terminated_pct: float  # stopped before the sample-size cap
    no_selection_completed_pct: float  # ran to the cap but selected nothing
    mean_patients: tuple[float, ...]
    mean_enrolled: float
    mean_duration_months: float


def individual_probs(
    tox_prob: float, eff_prob: float, pk_mean: float, pk_value: float, influence: float
) -> tuple[float, float]:
    """Patient-level DLT/response probabilities scaled by relative exposure,
    clamped into [0, 1]."""
    if pk_mean <= 0:
        raise ValueError("pk_mean must be positive")
    scale = 1.0 + influence * (pk_value - pk_mean) / pk_mean
    p = min(max(tox_prob * scale, 0.0), 1.0)
    q = min(max(eff_prob * scale, 0.0), 1.0)
    return p, q


def _draw_joint_bernoulli(p: float, q: float, corr: float, rng: np.random.Generator) -> tuple[bool, bool]:
    """One draw of (DLT, response) with the requested Pearson correlation.

    The joint law of two binaries is fixed by the marginals and the both-events
    cell; that cell is set to p*q + corr*sd(p)*sd(q), clipped to the feasible
    (Frechet) range, so independence is exact at corr 0 and the empirical
    correlation matches corr whenever it is attainable.
    """
    p11 = p * q + corr * math.sqrt(p * (1.0 - p) * q * (1.0 - q))
    p11 = min(max(p11, max(0.0, p + q - 1.0)), min(p, q))
    u = rng.random()
    if u < p11:
        return True, True
    if u < p:
        return True, False
    if u < p + q - p11:
        return False, True
    return False, False


def draw_patient(
    scenario: Scenario, dose: int, rng: np.random.Generator, enroll_day: float, pid: int
) -> PatientRecord:
    """Generate one patient at a dose: positive exposure from a zero-truncated
    normal, exposure-linked outcome probabilities, and uniform event times for
    positive outcomes."""
    mean = scenario.pk_means[dose - 1]
    if scenario.cv == 0.0:
        pk = mean
    else:
        sd = scenario.cv * mean
        pk = rng.normal(mean, sd)
        while pk <= 0.0:
            pk = rng.normal(mean, sd)
    p, q = individual_probs(
        scenario.tox_probs[dose - 1], scenario.eff_probs[dose - 1], mean, pk, scenario.pk_influence
    )
    tox, eff = _draw_joint_bernoulli(p, q, scenario.tox_eff_corr, rng)
    tox_day = rng.uniform(0.0, scenario.tox_window_days) if tox else None
    eff_day = rng.uniform(0.0, scenario.eff_window_days) if eff else None
    return PatientRecord(
        id=pid,
        dose=dose,
        enroll_day=enroll_day,
        pk_value=pk,
        tox_event_day=tox_day,
        eff_event_day=eff_day,
    )


def params_for_scenario(params: DesignParams, scenario: Scenario) -> DesignParams:
    """Align window lengths with the scenario and fix the exposure sampling
    sd at its generative value (cv times the true mean) unless the caller
    pinned one explicitly."""
    pk = params.pk
    if pk.sampling_sd is None and scenario.cv > 0:
        pk = replace(pk, sampling_sd=tuple(scenario.cv * r for r in scenario.pk_means))
    return replace(
        params,
        num_doses=scenario.num_doses,
        tox_window_days=scenario.tox_window_days,
        eff_window_days=scenario.eff_window_days,
        pk=pk,
    )


def _ascertainment_day(p: PatientRecord, params: DesignParams) -> float:
    tox_at = p.enroll_day + (p.tox_event_day if p.tox_event_day is not None else params.tox_window_days)
    eff_at = p.enroll_day + (p.eff_event_day if p.eff_event_day is not None else params.eff_window_days)
    return max(tox_at, eff_at)


def _next_ascertainment_after(patients: list[PatientRecord], t: float, params: DesignParams) -> float | None:
    """Next time any single outcome of any patient becomes known."""
    best = None
    for p in patients:
        for event_day, window in (
            (p.tox_event_day, params.tox_window_days),
            (p.eff_event_day, params.eff_window_days),
        ):
            at = p.enroll_day + (event_day if event_day is not None else window)
            if at > t and (best is None or at < best):
                best = at
    return best


def run_trial(params: DesignParams, scenario: Scenario, rng: np.random.Generator) -> TrialResult:
    """Simulate one trial on a calendar clock.

    Arrivals follow a Poisson process; the complete-data designs decide only
    once every outcome is ascertained, while the time-to-event designs decide
    at cohort completion, re-trying at each ascertainment while suspended.
    """
    if params.num_doses != scenario.num_doses:
        raise ValueError("design and scenario disagree on the number of doses")
    if (params.tox_window_days, params.eff_window_days) != (
        scenario.tox_window_days,
        scenario.eff_window_days,
    ):
        raise ValueError("design and scenario disagree on the assessment windows")
    tite = params.kind.time_to_event
    mean_gap = DAYS_PER_MONTH / scenario.accrual_per_month
    states = new_dose_states(params.num_doses)
    patients: list[PatientRecord] = []
    current = params.start_dose
    t = 0.0
    ascertained_by = 0.0  # running max over complete-outcome times
    terminated = False
    reason: str | None = None
    end_time: float | None = None

    while True:
        for _ in range(params.cohort_size):
            t += rng.exponential(mean_gap)
            rec = draw_patient(scenario, current, rng, t, pid=len(patients))
            patients.append(rec)
            state = states[current - 1]
            state.pk_values.append(rec.pk_value)
            state.add_outcome(rec.tox_event_day is not None, rec.eff_event_day is not None)
            ascertained_by = max(ascertained_by, _ascertainment_day(rec, params))
        if len(patients) >= params.max_patients:
            break
        if tite:
            t_dec = t
            while True:
                decision = next_dose_tite(states, patients, current, t_dec, params)
                if decision.action is not Action.SUSPEND:
                    break
                nxt = _next_ascertainment_after(patients, t_dec, params)
                if nxt is None:  # nothing left to wait for; cannot stay suspended
                    raise RuntimeError("suspended with no pending ascertainments")
                t_dec = nxt
            t = t_dec
        else:
            t = max(t, ascertained_by)
            decision = decide(states, current, params)
        if decision.action is Action.TERMINATE:
            terminated = True
            reason = decision.rule
            end_time = t
            break
        current = decision.dose

    first_enroll = patients[0].enroll_day
    if terminated:
        selected = None
        obd = None
    else:
        end_time = max(t, ascertained_by)
        # The exposure stopping rule still applies to the last cohort's data;
        # the safety/futility screens do not, since no dosing decision is
        # left to guard.
        apply_eliminations(states, params, current=current, rules=("pk",))
        obd = select_obd(states, params)
        selected = obd.selected
    dose_patients = tuple(s.n for s in states)
    return TrialResult(
        selected=selected,
        early_terminated=terminated,
        termination_reason=reason,
        dose_patients=dose_patients,
        enrolled=len(patients),
        duration_months=(end_time - first_enroll) / DAYS_PER_MONTH,
        obd=obd,
    )


def rng_for_replicate(seed: int, rep: int) -> np.random.Generator:
    """Independent, order-insensitive stream for one replicate."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(rep,)))


def _run_chunk(args) -> tuple[int, np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    params, scenario, seed, lo, hi = args
    D = params.num_doses
    sel = np.zeros(hi - lo, dtype=np.int64)
    term = np.zeros(hi - lo, dtype=bool)
    counts = np.zeros((hi - lo, D), dtype=np.int64)
    enrolled = np.zeros(hi - lo, dtype=np.int64)
    duration = np.zeros(hi - lo, dtype=float)
    for i, rep in enumerate(range(lo, hi)):
        res = run_trial(params, scenario, rng_for_replicate(seed, rep))
        sel[i] = res.selected or 0
        term[i] = res.early_terminated
        counts[i] = res.dose_patients
        enrolled[i] = res.enrolled
        duration[i] = res.duration_months
    return lo, sel, term, counts, enrolled, duration


def default_parallelism() -> int:
    env = os.environ.get("PKBOIN12_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_replications(
    params: DesignParams,
    scenario: Scenario,
    reps: int,
    seed: int,
    parallelism: int | None = None,
    progress=None,
) -> OperatingCharacteristics:
    """Monte Carlo operating characteristics.

    Each replicate owns a stream derived from (seed, replicate index), and
    aggregation runs in replicate order, so the result is bit-identical for
    any worker count.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    params = params_for_scenario(params, scenario)
    workers = parallelism if parallelism is not None else default_parallelism()
    D = params.num_doses
    sel = np.zeros(reps, dtype=np.int64)
    term = np.zeros(reps, dtype=bool)
    counts = np.zeros((reps, D), dtype=np.int64)
    enrolled = np.zeros(reps, dtype=np.int64)
    duration = np.zeros(reps, dtype=float)

    def store(result) -> None:
        lo, s, tm, c, e, du = result
        sel[lo : lo + len(s)] = s
        term[lo : lo + len(s)] = tm
        counts[lo : lo + len(s)] = c
        enrolled[lo : lo + len(s)] = e
        duration[lo : lo + len(s)] = du

    if workers <= 1 or reps == 1:
        chunk = max(1, reps // 20)
        done = 0
        for lo in range(0, reps, chunk):
            hi = min(lo + chunk, reps)
            store(_run_chunk((params, scenario, seed, lo, hi)))
            done = hi
            if progress:
                progress(done / reps)
    else:
        chunk = max(1, math.ceil(reps / (workers * 4)))
        jobs = [(params, scenario, seed, lo, min(lo + chunk, reps)) for lo in range(0, reps, chunk)]
        done = 0
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for result in pool.map(_run_chunk, jobs):
                store(result)
                done += result[1].shape[0]
                if progress:
                    progress(done / reps)

    selection_pct = tuple(100.0 * float(np.mean(sel == d)) for d in range(1, D + 1))
    no_sel = 100.0 * float(np.mean(sel == 0))
    terminated_pct = 100.0 * float(np.mean(term))
    return OperatingCharacteristics(
        design=params.kind.value,
        scenario=scenario.label,
        reps=reps,
        seed=seed,
        selection_pct=selection_pct,
        early_termination_pct=no_sel,
        terminated_pct=terminated_pct,
        no_selection_completed_pct=no_sel - terminated_pct,
        mean_patients=tuple(float(m) for m in np.mean(counts, axis=0)),
        mean_enrolled=float(np.mean(enrolled)),
        mean_duration_months=float(np.mean(duration)),
    )
