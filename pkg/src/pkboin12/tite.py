"""Pending-outcome machinery for the time-to-event design variants.

Patients are snapshotted at a calendar time: each outcome is ascertained
(positive at its event time, negative at its window end) or still pending.
Pending outcomes contribute follow-up-weighted expectations to effective
outcome tallies, which feed the same branching logic as the complete-data
engine.  Exposure values are treated as known shortly after enrollment.
"""

from __future__ import annotations

from dataclasses import dataclass
import statistics

from .design import (
    Action,
    Decision,
    DesignParams,
    DoseSnapshot,
    DoseState,
    apply_eliminations_to_snapshots,
    next_dose_from_snapshots,
)
from .stats import quasi_events


@dataclass
class PatientRecord:
    """One enrolled patient.

    Event days are offsets from enrollment; None means no event has been
    observed (the outcome resolves negative once the window elapses).  The
    ``*_reported`` fields let live conduct assert an outcome directly,
    overriding the event-day bookkeeping.
    """

    id: int | str
    dose: int  # 1-based
    enroll_day: float
    pk_value: float
    tox_event_day: float | None = None
    eff_event_day: float | None = None
    tox_reported: bool | None = None
    eff_reported: bool | None = None

    def followup(self, t: float, window: float) -> float:
        return min(max(t - self.enroll_day, 0.0), window)

    def _status(
        self, t: float, window: float, event_day: float | None, reported: bool | None
    ) -> bool | None:
        """Ascertained value at time t, or None while pending."""
        if reported is not None:
            return reported
        elapsed = t - self.enroll_day
        if event_day is not None and event_day <= elapsed:
            return True
        if elapsed >= window:
            return False
        return None

    def tox_status(self, t: float, params: DesignParams) -> bool | None:
        return self._status(t, params.tox_window_days, self.tox_event_day, self.tox_reported)

    def eff_status(self, t: float, params: DesignParams) -> bool | None:
        return self._status(t, params.eff_window_days, self.eff_event_day, self.eff_reported)

    def pending_any(self, t: float, params: DesignParams) -> bool:
        return self.tox_status(t, params) is None or self.eff_status(t, params) is None

    def pk_known(self, t: float, params: DesignParams) -> bool:
        return t - self.enroll_day >= params.pk_delay_days


@dataclass
class EffectiveCounts:
    """Imputation-weighted outcome tallies at one dose."""

    counts: tuple[float, float, float, float]
    events: float
    n: int
    tox_rate: float | None
    eff_rate: float | None


def cond_event_prob(rate: float, followup: float, window: float) -> float:
    """Probability a pending outcome turns positive, given event-free
    follow-up so far and a uniform event-time model over the window."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"rate must be in [0, 1], got {rate}")
    if not 0.0 <= followup <= window:
        raise ValueError(f"followup must be in [0, {window}], got {followup}")
    frac = followup / window
    denom = 1.0 - rate * frac
    if denom <= 0.0:
        if rate * (1.0 - frac) == 0.0:
            return 0.0
        raise ValueError("degenerate conditional: rate * followup fraction reaches 1")
    return rate * (1.0 - frac) / denom


def _rate_star(
    patients: list[PatientRecord], t: float, window: float, status_fn
) -> float | None:
    """Follow-up-weighted event-rate estimate with pending outcomes.

    Observed events over (ascertained patients + pending follow-up
    fractions); reduces to the plain rate when nothing is pending.
    """
    events = 0.0
    denom = 0.0
    for p in patients:
        status = status_fn(p)
        if status is None:
            denom += p.followup(t, window) / window
        else:
            denom += 1.0
            if status:
                events += 1.0
    if denom <= 0.0:
        return None
    return events / denom


def estimate_pq_star(
    patients: list[PatientRecord], t: float, params: DesignParams
) -> tuple[float | None, float | None]:
    """Effective DLT and response rates at a dose at calendar time t."""
    p_star = _rate_star(patients, t, params.tox_window_days, lambda p: p.tox_status(t, params))
    q_star = _rate_star(patients, t, params.eff_window_days, lambda p: p.eff_status(t, params))
    return p_star, q_star


def effective_counts(
    patients: list[PatientRecord],
    t: float,
    params: DesignParams,
    p_star: float | None = None,
    q_star: float | None = None,
) -> EffectiveCounts:
    """Expected outcome tallies over the four joint categories.

    Each patient contributes the product of per-outcome terms: an indicator
    when ascertained, the follow-up-conditional event probability when
    pending.  The four contributions of one patient always sum to 1, so the
    tallies sum to the number of patients.
    """
    if p_star is None or q_star is None:
        est_p, est_q = estimate_pq_star(patients, t, params)
        p_star = est_p if p_star is None else p_star
        q_star = est_q if q_star is None else q_star
    n1 = n2 = n3 = n4 = 0.0
    for p in patients:
        tox = p.tox_status(t, params)
        if tox is None:
            if p_star is None:
                raise ValueError("pending toxicity outcome with no rate estimate")
            pt = cond_event_prob(p_star, p.followup(t, params.tox_window_days), params.tox_window_days)
        else:
            pt = 1.0 if tox else 0.0
        eff = p.eff_status(t, params)
        if eff is None:
            if q_star is None:
                raise ValueError("pending efficacy outcome with no rate estimate")
            pe = cond_event_prob(q_star, p.followup(t, params.eff_window_days), params.eff_window_days)
        else:
            pe = 1.0 if eff else 0.0
        n1 += (1.0 - pt) * pe
        n2 += (1.0 - pt) * (1.0 - pe)
        n3 += pt * pe
        n4 += pt * (1.0 - pe)
    counts = (n1, n2, n3, n4)
    return EffectiveCounts(
        counts=counts,
        events=quasi_events(counts, params.utilities),
        n=len(patients),
        tox_rate=p_star,
        eff_rate=q_star,
    )


def suspension_check(patients: list[PatientRecord], t: float, params: DesignParams) -> bool:
    """True when more than half the patients at a dose have any pending
    outcome at time t.  Vacuously false with no patients."""
    if not patients:
        return False
    pending = sum(1 for p in patients if p.pending_any(t, params))
    return pending / len(patients) > 0.5


def build_snapshots(
    patients_by_dose: list[list[PatientRecord]],
    states: list[DoseState],
    t: float,
    params: DesignParams,
) -> list[DoseSnapshot]:
    """Per-dose snapshots with effective tallies and observed exposure."""
    snaps: list[DoseSnapshot] = []
    for dose0, group in enumerate(patients_by_dose):
        state = states[dose0]
        pk_values = [p.pk_value for p in group if p.pk_known(t, params)]
        pk_n = len(pk_values)
        pk_mean = sum(pk_values) / pk_n if pk_n else None
        pk_sd = statistics.stdev(pk_values) if pk_n >= 2 else None
        if group:
            p_star, q_star = estimate_pq_star(group, t, params)
            eff = effective_counts(group, t, params, p_star, q_star)
            n = float(eff.n)
            events = eff.events
            tox_events = (p_star or 0.0) * n
            eff_events = (q_star or 0.0) * n
        else:
            n = events = tox_events = eff_events = 0.0
        snaps.append(
            DoseSnapshot(
                n=n,
                events=events,
                tox_events=tox_events,
                eff_events=eff_events,
                treated=len(group),
                pk_n=pk_n,
                pk_mean=pk_mean,
                pk_sample_sd=pk_sd,
                eliminated_safety=state.eliminated_safety,
                eliminated_efficacy=state.eliminated_efficacy,
                eliminated_pk=state.eliminated_pk,
            )
        )
    return snaps


def group_by_dose(patients: list[PatientRecord], num_doses: int, t: float | None = None) -> list[list[PatientRecord]]:
    groups: list[list[PatientRecord]] = [[] for _ in range(num_doses)]
    for p in patients:
        if t is not None and p.enroll_day > t:
            continue
        groups[p.dose - 1].append(p)
    return groups


def next_dose_tite(
    states: list[DoseState],
    patients: list[PatientRecord],
    current: int,
    t: float,
    params: DesignParams,
) -> Decision:
    """Time-indexed decision: suspend, or eliminate-and-branch on effective
    quantities.

    With every outcome ascertained this coincides exactly with the
    complete-data engine on the same evidence.
    """
    by_dose = group_by_dose(patients, params.num_doses, t)
    at_current = by_dose[current - 1]
    if suspension_check(at_current, t, params):
        pending = sum(1 for p in at_current if p.pending_any(t, params))
        return Decision(
            Action.SUSPEND,
            None,
            "accrual_suspended",
            {
                "current_dose": current,
                "pending": pending,
                "treated": len(at_current),
                "pending_fraction": pending / len(at_current),
            },
        )
    snaps = build_snapshots(by_dose, states, t, params)
    rule_tails: dict = {}
    if apply_eliminations_to_snapshots(states, snaps, params, rule_tails, current=current):
        return Decision(
            Action.TERMINATE, None, "all_doses_eliminated", {"time": t, "rule_tails": rule_tails}
        )
    decision = next_dose_from_snapshots(snaps, current, params)
    decision.diagnostics["time"] = t
    decision.diagnostics["rule_tails"] = rule_tails
    return decision
