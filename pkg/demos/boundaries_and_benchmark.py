"""Walk through the constants that parameterize a design.

A design is pinned down by a handful of derived quantities: the interval
boundaries on the observed DLT rate, the utility benchmark a good dose
should beat, and the exposure cutoff separating inadequate from adequate
drug levels.  This script derives them for the default configuration and
shows how they respond to the design targets.

Run: python demos/boundaries_and_benchmark.py
"""

import numpy as np

from pkboin12 import (
    DesignKind,
    DesignParams,
    PkPosteriorParams,
    UtilitySpec,
    boin_boundaries,
    expected_utility,
    utility_benchmark,
)

print("=" * 70)
print("Interval boundaries as the DLT target moves")
print("=" * 70)
for target in (0.20, 0.25, 0.30, 0.35, 0.40):
    b = boin_boundaries(target)
    print(f"  target {target:.2f}  ->  stay/escalate below {b.escalation:.3f}, "
          f"de-escalate at {b.deescalation:.3f}")

print()
print("=" * 70)
print("Utility scores and the benchmark")
print("=" * 70)
u = UtilitySpec()  # (no tox, eff)=100, (no tox, no eff)=40, (tox, eff)=60, (tox, no eff)=0
print(f"  default utilities: {u.as_tuple()}")
bench = utility_benchmark(u, tox_target=0.35, eff_min=0.25)
print(f"  benchmark for targets (0.35, 0.25): {bench:.1f} on the 0-100 scale")
print("  expected utility of a few (DLT rate, response rate) profiles:")
for p, q in [(0.05, 0.10), (0.20, 0.55), (0.24, 0.55), (0.45, 0.55)]:
    eu = expected_utility(p, q, u)
    verdict = "beats" if eu > bench else "misses"
    print(f"    p={p:.2f} q={q:.2f}  ->  EU {eu:5.1f}  ({verdict} the benchmark)")

print()
print("=" * 70)
print("Exposure constants")
print("=" * 70)
pk = PkPosteriorParams(target=6000)
print(f"  target exposure      : {pk.target:.0f}")
print(f"  inefficacious level  : {pk.ineffective:.0f}  (0.6 x target by default)")
print(f"  decision cutoff      : {pk.cutoff:.0f}  (midpoint of the two)")

print()
print("=" * 70)
print("Everything assembled into design parameters")
print("=" * 70)
params = DesignParams(kind=DesignKind.PKBOIN12)
print(f"  design               : {params.kind.value}")
print(f"  boundaries           : ({params.boundaries.escalation:.3f}, "
      f"{params.boundaries.deescalation:.3f})")
print(f"  benchmark            : {params.benchmark:.1f}")
print(f"  cohorts              : {params.max_patients // params.cohort_size} x {params.cohort_size} patients")
print(f"  elimination cutoffs  : safety {params.c_tox}, futility {params.c_eff}, exposure {params.c_pk}")
