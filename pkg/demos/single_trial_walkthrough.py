"""Conduct one simulated trial cohort by cohort, narrating each decision.

The engine is driven exactly as a live trial would drive it: accumulate a
cohort's outcomes, apply the elimination rules, and ask for the next dose.
The printout shows the observed rates, the desirability of each admissible
dose, and the rule that fired.

Run: python demos/single_trial_walkthrough.py [seed]
"""

import sys

from pkboin12 import (
    Action,
    DesignKind,
    DesignParams,
    builtin_scenario,
    decide,
    draw_patient,
    new_dose_states,
    select_obd,
)
from pkboin12.simulate import params_for_scenario, rng_for_replicate

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 7
scenario = builtin_scenario(5)
params = params_for_scenario(DesignParams(kind=DesignKind.PKBOIN12), scenario)
rng = rng_for_replicate(seed, 0)

print(f"Design {params.kind.value} on a plateau dose-response truth "
      f"(annotated optimum: dose {scenario.obd}), seed {seed}")
print(f"true DLT rates      : {scenario.tox_probs}")
print(f"true response rates : {scenario.eff_probs}")
print(f"true mean exposure  : {scenario.pk_means}")
print()

states = new_dose_states(params.num_doses)
current = params.start_dose
cohort_no = 0
enrolled = 0
while enrolled < params.max_patients:
    cohort_no += 1
    outcomes = []
    for _ in range(params.cohort_size):
        rec = draw_patient(scenario, current, rng, enroll_day=0.0, pid=enrolled)
        enrolled += 1
        tox = rec.tox_event_day is not None
        eff = rec.eff_event_day is not None
        states[current - 1].add_outcome(tox, eff)
        states[current - 1].pk_values.append(rec.pk_value)
        outcomes.append(f"{'T' if tox else '-'}{'E' if eff else '-'}")
    s = states[current - 1]
    print(f"cohort {cohort_no:>2} at dose {current}: outcomes {' '.join(outcomes)}   "
          f"dose now {s.n_tox}/{s.n} DLT, {s.n_eff}/{s.n} responses")
    if enrolled >= params.max_patients:
        break
    decision = decide(states, current, params)
    if decision.action is Action.TERMINATE:
        print(f"    -> trial stops early ({decision.rule})")
        break
    tails = decision.diagnostics.get("desirability", {})
    shown = ", ".join(f"d{d}:{v:.3f}" for d, v in sorted(tails.items()))
    eliminated = decision.diagnostics.get("eliminated", {})
    note = f"   eliminated: {eliminated}" if eliminated else ""
    print(f"    -> next dose {decision.dose}  [{decision.rule}]  {shown}{note}")
    current = decision.dose

if enrolled >= params.max_patients:
    result = select_obd(states, params)
    print()
    print(f"final isotonic DLT rates : "
          + ", ".join(f"d{d}:{v:.2f}" for d, v in result.iso_tox.items()))
    if result.iso_pk:
        print(f"final isotonic exposure  : "
              + ", ".join(f"d{d}:{v:.0f}" for d, v in result.iso_pk.items()))
    print(f"candidate range          : MTD d{result.mtd}, exposure floor d{result.pk_floor}"
          f" -> candidates {result.candidates}")
    print(f"posterior mean utilities : "
          + ", ".join(f"d{d}:{v:.1f}" for d, v in sorted(result.utilities.items())))
    print(f"selected dose            : {result.selected}")
