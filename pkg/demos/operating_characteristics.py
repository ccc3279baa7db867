"""Compare the four designs on one scenario.

Runs a moderate number of replications per design (bump REPS for stable
numbers) and prints a selection/allocation table in the usual layout:
selection percentage per dose plus early termination, mean patients per
dose, and mean duration in months.

Run: python demos/operating_characteristics.py [scenario_id] [reps]
"""

import sys

from pkboin12 import DesignKind, DesignParams, builtin_scenario, run_replications

scenario_id = int(sys.argv[1]) if len(sys.argv) > 1 else 1
reps = int(sys.argv[2]) if len(sys.argv) > 2 else 400
scenario = builtin_scenario(scenario_id)

print(f"scenario {scenario_id} (annotated optimum: {scenario.obd or 'none'}), {reps} replications")
header = ("design", *[f"sel{d}" for d in range(1, 7)], "ET", *[f"n{d}" for d in range(1, 7)], "months")
print(("{:<15}" + "{:>6}" * 7 + " | " + "{:>5}" * 6 + "{:>8}").format(*header))
for kind in DesignKind:
    oc = run_replications(DesignParams(kind=kind), scenario, reps=reps, seed=20240)
    row = (
        kind.value,
        *[f"{v:.1f}" for v in oc.selection_pct],
        f"{oc.early_termination_pct:.1f}",
        *[f"{v:.1f}" for v in oc.mean_patients],
        f"{oc.mean_duration_months:.1f}",
    )
    print(("{:<15}" + "{:>6}" * 7 + " | " + "{:>5}" * 6 + "{:>8}").format(*row))
