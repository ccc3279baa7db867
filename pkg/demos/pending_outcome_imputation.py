"""Show how the time-to-event machinery treats pending outcomes.

Three patients enroll at a dose; their toxicity and efficacy calls arrive
over the following weeks.  At each query time we print the follow-up
weighted rate estimates, the effective outcome tallies, and whether accrual
would be suspended.  Once every window has elapsed, the numbers collapse to
the plain observed counts.

Run: python demos/pending_outcome_imputation.py
"""

from pkboin12 import DesignKind, DesignParams, PatientRecord
from pkboin12.tite import effective_counts, estimate_pq_star, suspension_check

params = DesignParams(kind=DesignKind.TITE_PKBOIN12)

patients = [
    # a DLT on day 12, response on day 25
    PatientRecord(id="a", dose=2, enroll_day=0.0, pk_value=5200, tox_event_day=12.0, eff_event_day=25.0),
    # no events at all: toxicity resolves at day 30, efficacy at day 60
    PatientRecord(id="b", dose=2, enroll_day=3.0, pk_value=4800),
    # late responder on day 50, no toxicity
    PatientRecord(id="c", dose=2, enroll_day=6.0, pk_value=5600, eff_event_day=50.0),
]

print(f"windows: toxicity {params.tox_window_days:.0f}d, efficacy {params.eff_window_days:.0f}d")
print()
for t in (7.0, 15.0, 30.0, 40.0, 66.0):
    p_star, q_star = estimate_pq_star(patients, t, params)
    eff = effective_counts(patients, t, params, p_star, q_star)
    suspended = suspension_check(patients, t, params)
    statuses = []
    for p in patients:
        tox = p.tox_status(t, params)
        resp = p.eff_status(t, params)
        fmt = lambda v: "?" if v is None else ("+" if v else "-")
        statuses.append(f"{p.id}[tox {fmt(tox)}, eff {fmt(resp)}]")
    print(f"day {t:5.1f}  {'  '.join(statuses)}")
    print(f"          effective DLT rate {p_star:.3f}, response rate {q_star:.3f}")
    print(f"          effective tallies {tuple(round(c, 3) for c in eff.counts)} "
          f"(sum {sum(eff.counts):.3f}), quasi-events {eff.events:.3f}")
    print(f"          accrual suspended: {suspended}")
    print()
