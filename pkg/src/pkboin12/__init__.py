"""Utility-based Bayesian optimal-interval dose finding with PK exposure.

Four designs share one engine: the interval design on joint
toxicity/efficacy utilities (BOIN12), its exposure-integrated extension
(PKBOIN-12), and the time-to-event variants of both that decide with
pending outcomes (TITE-BOIN12, TITE-PKBOIN-12).  The package provides the
decision state machine, a calendar-time Monte Carlo simulator with a
built-in scenario library, report writers, a CLI, and an HTTP service for
live trial conduct.
"""

from .design import (
    Action,
    Decision,
    DesignKind,
    DesignParams,
    DoseState,
    ObdResult,
    apply_eliminations,
    d_pk_min,
    decide,
    desirability,
    new_dose_states,
    next_dose,
    observed_rates,
    select_obd,
)
from .scenarios import SCENARIO_IDS, all_scenarios, builtin_scenario
from .simulate import (
    OperatingCharacteristics,
    Scenario,
    TrialResult,
    draw_patient,
    individual_probs,
    run_replications,
    run_trial,
)
from .stats import (
    IntervalBoundaries,
    PkPosteriorParams,
    UtilitySpec,
    beta_posterior_tail,
    boin_boundaries,
    expected_utility,
    pava,
    pk_below_target_prob,
    quasi_events,
    utility_benchmark,
)
from .tite import (
    EffectiveCounts,
    PatientRecord,
    cond_event_prob,
    effective_counts,
    estimate_pq_star,
    next_dose_tite,
    suspension_check,
)

__version__ = "0.1.0"

__all__ = [
    "Action",
    "Decision",
    "DesignKind",
    "DesignParams",
    "DoseState",
    "EffectiveCounts",
    "IntervalBoundaries",
    "ObdResult",
    "OperatingCharacteristics",
    "PatientRecord",
    "PkPosteriorParams",
    "Scenario",
    "SCENARIO_IDS",
    "TrialResult",
    "UtilitySpec",
    "all_scenarios",
    "apply_eliminations",
    "beta_posterior_tail",
    "boin_boundaries",
    "builtin_scenario",
    "cond_event_prob",
    "d_pk_min",
    "decide",
    "desirability",
    "draw_patient",
    "effective_counts",
    "estimate_pq_star",
    "expected_utility",
    "individual_probs",
    "new_dose_states",
    "next_dose",
    "next_dose_tite",
    "observed_rates",
    "pava",
    "pk_below_target_prob",
    "quasi_events",
    "run_replications",
    "run_trial",
    "select_obd",
    "suspension_check",
    "utility_benchmark",
]
