"""Pending-outcome machinery: conditional event probabilities, effective
tallies, suspension, and the reduction to the complete-data engine."""

import numpy as np
import pytest

from pkboin12 import (
    Action,
    DesignKind,
    DesignParams,
    DoseState,
    PatientRecord,
    cond_event_prob,
    decide,
    effective_counts,
    estimate_pq_star,
    next_dose_tite,
    suspension_check,
)
from pkboin12.design import new_dose_states

from conftest import state


def patient(dose=1, enroll=0.0, pk=5000.0, tox_day=None, eff_day=None, pid=0, **kw):
    return PatientRecord(
        id=pid, dose=dose, enroll_day=enroll, pk_value=pk,
        tox_event_day=tox_day, eff_event_day=eff_day, **kw
    )


@pytest.fixture
def params():
    return DesignParams(kind=DesignKind.TITE_PKBOIN12)


class TestCondEventProb:
    def test_half_window(self):
        assert cond_event_prob(0.2, 15.0, 30.0) == pytest.approx(1 / 9)

    def test_no_followup_returns_rate(self):
        assert cond_event_prob(0.37, 0.0, 30.0) == 0.37

    def test_full_window_returns_zero(self):
        assert cond_event_prob(0.37, 30.0, 30.0) == 0.0
        assert cond_event_prob(1.0, 60.0, 60.0) == 0.0

    def test_monotone_in_followup_and_rate(self):
        probs = [cond_event_prob(0.4, t, 30.0) for t in np.linspace(0, 30, 31)]
        assert all(x >= y - 1e-12 for x, y in zip(probs, probs[1:]))
        probs = [cond_event_prob(r, 10.0, 30.0) for r in np.linspace(0, 0.99, 25)]
        assert all(y >= x - 1e-12 for x, y in zip(probs, probs[1:]))

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            cond_event_prob(1.2, 5.0, 30.0)
        with pytest.raises(ValueError):
            cond_event_prob(0.5, 40.0, 30.0)


class TestEstimatePqStar:
    def test_reduces_to_plain_rates(self, params):
        # 2 DLTs of 6, everything ascertained (windows elapsed).
        pts = [patient(tox_day=5.0 if i < 2 else None, eff_day=None, pid=i) for i in range(6)]
        p_star, q_star = estimate_pq_star(pts, t=100.0, params=params)
        assert p_star == pytest.approx(1 / 3)
        assert q_star == pytest.approx(0.0)

    def test_partial_followup_weighting(self, params):
        # 1 observed DLT among 2 toxicity-ascertained + 1 pending at half window.
        pts = [
            patient(tox_day=10.0, enroll=0.0, pid=0),
            patient(tox_day=None, enroll=0.0, pid=1),
            patient(tox_day=None, enroll=45.0, pid=2),  # 15 days of follow-up
        ]
        p_star, _ = estimate_pq_star(pts, t=60.0, params=params)
        assert p_star == pytest.approx(1 / 2.5)

    def test_no_information_is_undefined(self, params):
        pts = [patient(enroll=10.0, pid=i) for i in range(3)]
        p_star, q_star = estimate_pq_star(pts, t=10.0, params=params)
        assert p_star is None and q_star is None


class TestEffectiveCounts:
    def test_complete_data_reduces_exactly(self, params):
        pts = [
            patient(tox_day=3.0, eff_day=10.0, pid=0),
            patient(tox_day=None, eff_day=20.0, pid=1),
            patient(tox_day=None, eff_day=None, pid=2),
        ]
        eff = effective_counts(pts, t=1000.0, params=params)
        assert eff.counts == pytest.approx((1.0, 1.0, 1.0, 0.0))
        assert eff.events == pytest.approx(2.0)

    def test_fresh_patient_splits_by_marginals(self, params):
        pts = [patient(pid=0, enroll=50.0)]
        eff = effective_counts(pts, t=50.0, params=params, p_star=0.2, q_star=0.4)
        assert eff.counts == pytest.approx((0.32, 0.48, 0.08, 0.12))
        assert sum(eff.counts) == pytest.approx(1.0, abs=1e-12)

    def test_ascertained_tox_with_expired_efficacy_window(self, params):
        # Toxicity seen; efficacy pending at the very end of its window
        # contributes all remaining mass to the no-response cell.
        pts = [patient(pid=0, enroll=0.0, tox_day=5.0, eff_day=None)]
        eff = effective_counts(pts, t=60.0, params=params, p_star=0.5, q_star=0.5)
        assert eff.counts == pytest.approx((0.0, 0.0, 0.0, 1.0))

    def test_mass_conservation_under_random_pending_patterns(self, params):
        rng = np.random.default_rng(61)
        for _ in range(300):
            n = int(rng.integers(1, 12))
            pts = []
            for i in range(n):
                enroll = float(rng.uniform(0, 100))
                tox_day = float(rng.uniform(0, 30)) if rng.random() < 0.3 else None
                eff_day = float(rng.uniform(0, 60)) if rng.random() < 0.4 else None
                pts.append(patient(enroll=enroll, tox_day=tox_day, eff_day=eff_day, pid=i))
            t = float(rng.uniform(0, 160))
            pts = [p for p in pts if p.enroll_day <= t]
            if not pts:
                continue
            p_star, q_star = estimate_pq_star(pts, t, params)
            if p_star is None or q_star is None:
                continue
            eff = effective_counts(pts, t, params, p_star, q_star)
            assert sum(eff.counts) == pytest.approx(len(pts), abs=1e-9)


class TestSuspension:
    def test_two_of_three_pending(self, params):
        pts = [
            patient(pid=0, enroll=0.0, tox_day=None, eff_day=None),   # ascertained by t=60
            patient(pid=1, enroll=50.0),
            patient(pid=2, enroll=55.0),
        ]
        assert suspension_check(pts, t=60.0, params=params)

    def test_one_of_three_pending(self, params):
        pts = [
            patient(pid=0, enroll=0.0),
            patient(pid=1, enroll=0.0),
            patient(pid=2, enroll=55.0),
        ]
        assert not suspension_check(pts, t=60.0, params=params)

    def test_vacuous_without_patients(self, params):
        assert not suspension_check([], t=10.0, params=params)


def random_complete_cohort(rng, num_doses=6):
    """Patients whose outcomes are all ascertained by the query time."""
    pts = []
    t = 400.0
    pid = 0
    for dose in range(1, num_doses + 1):
        for _ in range(int(rng.integers(0, 4)) * 3):
            enroll = float(rng.uniform(0, 300))
            tox = rng.random() < 0.25
            eff = rng.random() < 0.4
            pts.append(
                patient(
                    dose=dose,
                    enroll=enroll,
                    pk=float(rng.uniform(500, 9000)),
                    tox_day=float(rng.uniform(0, 30)) if tox else None,
                    eff_day=float(rng.uniform(0, 60)) if eff else None,
                    pid=pid,
                )
            )
            pid += 1
    return pts, t


class TestNextDoseTite:
    def test_reduction_to_complete_data_engine(self, params):
        # With zero pending outcomes the TITE decision equals the
        # complete-data decision built from the same evidence.
        rng = np.random.default_rng(67)
        checked = 0
        for _ in range(1000):
            pts, t = random_complete_cohort(rng)
            if not pts:
                continue
            tite_states = new_dose_states(6)
            plain_states = new_dose_states(6)
            for p in pts:
                for states in (tite_states, plain_states):
                    states[p.dose - 1].pk_values.append(p.pk_value)
                plain_states[p.dose - 1].add_outcome(
                    p.tox_event_day is not None, p.eff_event_day is not None
                )
            current = int(rng.choice([p.dose for p in pts]))
            a = next_dose_tite(tite_states, pts, current, t, params)
            b = decide(plain_states, current, params)
            assert (a.action, a.dose) == (b.action, b.dose)
            assert [s.eliminated for s in tite_states] == [s.eliminated for s in plain_states]
            checked += 1
        assert checked > 900

    def test_suspends_with_majority_pending(self, params):
        pts = [patient(dose=3, enroll=100.0, pid=i) for i in range(4)]
        pts += [patient(dose=3, enroll=0.0, tox_day=2.0, eff_day=3.0, pid=9)]
        pts += [patient(dose=3, enroll=0.0, tox_day=None, eff_day=None, pid=10)]
        decision = next_dose_tite(new_dose_states(6), pts, 3, 101.0, params)
        assert decision.action is Action.SUSPEND
        assert decision.diagnostics["pending_fraction"] > 0.5

    def test_effective_rates_drive_pk_backtrack(self, params):
        # Current dose 4 with high effective DLT rate and adequate exposure
        # chooses from the expanded lower set on starred evidence.
        pts = []
        pid = 0
        for dose, pk in ((1, 1000), (2, 2000), (3, 5000)):
            for _ in range(3):
                pts.append(patient(dose=dose, enroll=0.0, pk=pk, eff_day=10.0, pid=pid))
                pid += 1
        # dose 4: two fully ascertained DLTs + one patient pending at half
        # the toxicity window
        pts.append(patient(dose=4, enroll=100.0, pk=6500, tox_day=5.0, eff_day=5.0, pid=pid))
        pts.append(patient(dose=4, enroll=100.0, pk=6400, tox_day=8.0, eff_day=12.0, pid=pid + 1))
        pts.append(patient(dose=4, enroll=115.0, pk=6600, pid=pid + 2))
        decision = next_dose_tite(new_dose_states(6), pts, 4, 130.0, params)
        assert decision.action is Action.TREAT
        # p* = 2 / (2 + 15/30) = 0.8 over the de-escalation boundary,
        # pk mean 6500 over the cutoff, lowest adequate dose is 3.
        assert decision.diagnostics["tox_rate"] == pytest.approx(0.8)
        assert decision.diagnostics["d_star"] == 3
        assert decision.dose == 3

    def test_decision_continuous_in_followup(self, params):
        rng = np.random.default_rng(71)
        for _ in range(50):
            pts, t = random_complete_cohort(rng)
            pts = [p for p in pts if p.dose <= 3]
            if not pts:
                continue
            # add some pending patients
            for i in range(3):
                pts.append(patient(dose=2, enroll=t - 20.0, pk=4000.0, pid=900 + i))
            for p in pts:
                if p.dose == 2:
                    break
            a = next_dose_tite(new_dose_states(6), pts, 1, t, params)
            for p in pts:
                p.enroll_day += 1e-10  # perturb follow-up by < 1e-9 days
            b = next_dose_tite(new_dose_states(6), pts, 1, t, params)
            assert (a.action, a.dose) == (b.action, b.dose)

    def test_pk_delay_hides_recent_values(self):
        delayed = DesignParams(kind=DesignKind.TITE_PKBOIN12, pk_delay_days=3.0)
        p = patient(dose=1, enroll=10.0, pk=5000.0, pid=0)
        assert not p.pk_known(11.0, delayed)
        assert p.pk_known(13.0, delayed)


class TestReportedOutcomes:
    def test_reported_values_override_event_days(self, params):
        p = patient(pid=0, enroll=0.0, tox_day=None, eff_day=None,
                    tox_reported=True, eff_reported=False)
        assert p.tox_status(1.0, params) is True
        assert p.eff_status(1.0, params) is False
        assert not p.pending_any(1.0, params)

    def test_window_elapse_resolves_negative(self, params):
        p = patient(pid=0, enroll=0.0)
        assert p.tox_status(10.0, params) is None
        assert p.tox_status(30.0, params) is False
        assert p.eff_status(59.9, params) is None
        assert p.eff_status(60.0, params) is False
