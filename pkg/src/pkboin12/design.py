"""Complete-data decision state machine for the four designs.

Accumulates per-dose evidence, applies the interval-based dose-finding
rules (with or without the exposure-expanded admissible sets), the
safety/efficacy/exposure elimination rules, and the final optimal-dose
selection.  The time-to-event variants reuse the same branching logic via
per-dose snapshots built from partially observed patients (see tite.py).
"""

from __future__ import annotations

import enum
import statistics
from dataclasses import dataclass, field

from .stats import (
    IntervalBoundaries,
    PkPosteriorParams,
    UtilitySpec,
    beta_posterior_tail,
    boin_boundaries,
    pava,
    pk_below_target_prob,
    quasi_events,
    utility_benchmark,
)


class DesignKind(str, enum.Enum):
    BOIN12 = "BOIN12"
    PKBOIN12 = "PKBOIN-12"
    TITE_BOIN12 = "TITE-BOIN12"
    TITE_PKBOIN12 = "TITE-PKBOIN-12"

    @property
    def uses_pk(self) -> bool:
        return self in (DesignKind.PKBOIN12, DesignKind.TITE_PKBOIN12)

    @property
    def time_to_event(self) -> bool:
        return self in (DesignKind.TITE_BOIN12, DesignKind.TITE_PKBOIN12)

    @classmethod
    def parse(cls, name: str) -> "DesignKind":
        key = name.strip().upper().replace("_", "-")
        for kind in cls:
            if kind.value.upper() == key:
                return kind
        valid = ", ".join(k.value for k in cls)
        raise ValueError(f"unknown design {name!r}; valid kinds: {valid}")


class Action(str, enum.Enum):
    TREAT = "treat_at_dose"
    SUSPEND = "suspend"
    TERMINATE = "terminate_early"


@dataclass(frozen=True)
class DesignParams:
    """All tuning constants of a design.

    ``boundaries`` and ``benchmark`` are derived from the targets when not
    given explicitly; if given, they must be consistent with the targets.
    """

    kind: DesignKind = DesignKind.PKBOIN12
    num_doses: int = 6
    max_tox_prob: float = 0.35
    min_eff_prob: float = 0.25
    utilities: UtilitySpec = field(default_factory=UtilitySpec)
    boundaries: IntervalBoundaries | None = None
    benchmark: float | None = None
    sample_cutoff: int = 6  # switch to the two-dose admissible set at this n
    escalation_min_n: int = 9  # forced-escalation sample requirement
    c_tox: float = 0.95
    c_eff: float = 0.90
    c_pk: float = 0.95
    pk: PkPosteriorParams = field(default_factory=PkPosteriorParams)
    cohort_size: int = 3
    max_patients: int = 45
    start_dose: int = 1
    tox_window_days: float = 30.0
    eff_window_days: float = 60.0
    elim_min_n: int = 3  # safety/efficacy rules need this many patients
    pk_elim_min_n: int = 6  # exposure rule needs this many patients
    pk_delay_days: float = 0.0  # exposure known this long after enrollment

    def __post_init__(self) -> None:
        if isinstance(self.kind, str):
            object.__setattr__(self, "kind", DesignKind.parse(self.kind))
        if self.num_doses < 1:
            raise ValueError("num_doses must be positive")
        for name in ("max_tox_prob", "min_eff_prob", "c_tox", "c_eff", "c_pk"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must be in (0, 1), got {v}")
        if not 1 <= self.start_dose <= self.num_doses:
            raise ValueError(f"start_dose must be in 1..{self.num_doses}, got {self.start_dose}")
        if self.cohort_size < 1:
            raise ValueError("cohort_size must be positive")
        if self.max_patients % self.cohort_size != 0:
            raise ValueError(
                f"max_patients ({self.max_patients}) must be a multiple of "
                f"cohort_size ({self.cohort_size})"
            )
        if self.tox_window_days <= 0 or self.eff_window_days <= 0:
            raise ValueError("assessment windows must be positive")
        if self.boundaries is None:
            object.__setattr__(self, "boundaries", boin_boundaries(self.max_tox_prob))
        derived = utility_benchmark(self.utilities, self.max_tox_prob, self.min_eff_prob)
        if self.benchmark is None:
            object.__setattr__(self, "benchmark", derived)
        elif abs(self.benchmark - derived) > 1e-9:
            raise ValueError(
                f"benchmark {self.benchmark} inconsistent with utilities/targets ({derived})"
            )
        if self.pk.sampling_sd is not None and len(self.pk.sampling_sd) != self.num_doses:
            raise ValueError("pk.sampling_sd must have one entry per dose")


@dataclass
class DoseState:
    """Accumulated evidence at one dose: outcome tallies, exposure samples,
    and sticky elimination flags."""

    counts: list[int] = field(default_factory=lambda: [0, 0, 0, 0])
    pk_values: list[float] = field(default_factory=list)
    eliminated_safety: bool = False
    eliminated_efficacy: bool = False
    eliminated_pk: bool = False

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def n_tox(self) -> int:
        return self.counts[2] + self.counts[3]

    @property
    def n_eff(self) -> int:
        return self.counts[0] + self.counts[2]

    @property
    def ever_used(self) -> bool:
        return self.n > 0

    @property
    def eliminated(self) -> bool:
        return self.eliminated_safety or self.eliminated_efficacy or self.eliminated_pk

    def add_outcome(self, tox: bool, eff: bool) -> None:
        self.counts[outcome_category(tox, eff)] += 1


def outcome_category(tox: bool, eff: bool) -> int:
    """Index into the (no tox, eff), (no tox, no eff), (tox, eff), (tox, no eff) order."""
    if not tox:
        return 0 if eff else 1
    return 2 if eff else 3


def new_dose_states(num_doses: int) -> list[DoseState]:
    return [DoseState() for _ in range(num_doses)]


def observed_rates(state: DoseState) -> tuple[float | None, float | None, float | None]:
    """(DLT rate, response rate, mean exposure); None marks an untried dose
    or a dose without exposure samples."""
    n = state.n
    tox_rate = state.n_tox / n if n > 0 else None
    eff_rate = state.n_eff / n if n > 0 else None
    pk_mean = sum(state.pk_values) / len(state.pk_values) if state.pk_values else None
    return tox_rate, eff_rate, pk_mean


@dataclass
class DoseSnapshot:
    """Evidence at one dose as the branching logic sees it.

    For complete data the fields mirror DoseState; the time-to-event engine
    substitutes imputation-weighted effective values for n-dependent fields
    while keeping exposure fully observed.
    """

    n: float
    events: float  # quasi-event count feeding the desirability posterior
    tox_events: float  # DLT count (possibly fractional under imputation)
    eff_events: float
    treated: int  # actual patients assigned, for tie-breaking
    pk_n: int = 0
    pk_mean: float | None = None
    pk_sample_sd: float | None = None
    eliminated_safety: bool = False
    eliminated_efficacy: bool = False
    eliminated_pk: bool = False

    @property
    def eliminated(self) -> bool:
        return self.eliminated_safety or self.eliminated_efficacy or self.eliminated_pk

    @property
    def tox_rate(self) -> float | None:
        return self.tox_events / self.n if self.n > 0 else None

    @property
    def eff_rate(self) -> float | None:
        return self.eff_events / self.n if self.n > 0 else None


def snapshot_from_state(state: DoseState, u: UtilitySpec) -> DoseSnapshot:
    pk_n = len(state.pk_values)
    pk_mean = sum(state.pk_values) / pk_n if pk_n else None
    pk_sd = statistics.stdev(state.pk_values) if pk_n >= 2 else None
    return DoseSnapshot(
        n=float(state.n),
        events=quasi_events(state.counts, u),
        tox_events=float(state.n_tox),
        eff_events=float(state.n_eff),
        treated=state.n,
        pk_n=pk_n,
        pk_mean=pk_mean,
        pk_sample_sd=pk_sd,
        eliminated_safety=state.eliminated_safety,
        eliminated_efficacy=state.eliminated_efficacy,
        eliminated_pk=state.eliminated_pk,
    )


@dataclass
class Decision:
    """Verdict for the next cohort plus the evidence that produced it."""

    action: Action
    dose: int | None = None
    rule: str = ""
    diagnostics: dict = field(default_factory=dict)


@dataclass
class ObdResult:
    """Final dose selection with its intermediate estimates."""

    selected: int | None
    mtd: int | None
    pk_floor: int | None
    iso_tox: dict[int, float]
    iso_pk: dict[int, float]
    utilities: dict[int, float]
    candidates: list[int]
    reason: str


def desirability(state_or_snap, u: UtilitySpec, benchmark: float) -> float:
    """Posterior probability that the dose's standardized utility beats the
    benchmark.  Untried doses get the prior tail."""
    if isinstance(state_or_snap, DoseState):
        snap = snapshot_from_state(state_or_snap, u)
    else:
        snap = state_or_snap
    return beta_posterior_tail(snap.events, snap.n, benchmark / 100.0, "above")


def d_pk_min(states, cutoff: float) -> int | None:
    """Lowest dose whose observed mean exposure exceeds the cutoff (1-based)."""
    for i, s in enumerate(states):
        if isinstance(s, DoseState):
            mean = sum(s.pk_values) / len(s.pk_values) if s.pk_values else None
        else:
            mean = s.pk_mean
        if mean is not None and mean > cutoff:
            return i + 1
    return None


def _sampling_sd(snap: DoseSnapshot, dose: int, params: DesignParams) -> float | None:
    if params.pk.sampling_sd is not None:
        return params.pk.sampling_sd[dose - 1]
    return snap.pk_sample_sd


def _pick_dose(candidates: list[int], snaps: list[DoseSnapshot], params: DesignParams) -> tuple[int, dict[int, float]]:
    """Argmax of desirability; ties prefer fewer treated patients, then the
    lower dose."""
    tails = {
        d: desirability(snaps[d - 1], params.utilities, params.benchmark) for d in candidates
    }
    best = min(candidates, key=lambda d: (-tails[d], snaps[d - 1].treated, d))
    return best, tails


def _filter(doses, snaps: list[DoseSnapshot], num_doses: int) -> list[int]:
    return [d for d in doses if 1 <= d <= num_doses and not snaps[d - 1].eliminated]


def next_dose_from_snapshots(
    snaps: list[DoseSnapshot], current: int, params: DesignParams
) -> Decision:
    """Shared branching used by both the complete-data and TITE engines.

    Assumes elimination flags are already up to date on the snapshots.
    """
    D = params.num_doses
    alive = [d for d in range(1, D + 1) if not snaps[d - 1].eliminated]
    diag: dict = {
        "current_dose": current,
        "boundaries": list(params.boundaries.as_tuple()),
        "eliminated": {
            d: _elim_labels(snaps[d - 1]) for d in range(1, D + 1) if snaps[d - 1].eliminated
        },
    }
    if not alive:
        return Decision(Action.TERMINATE, None, "all_doses_eliminated", diag)

    cur = snaps[current - 1]
    if cur.n == 0:
        # Nothing observed yet: treat the first cohort here.
        return Decision(Action.TREAT, current, "first_cohort", diag)

    tox_rate = cur.tox_rate
    esc, deesc = params.boundaries.as_tuple()
    diag["tox_rate"] = tox_rate
    diag["eff_rate"] = cur.eff_rate
    diag["pk_mean"] = cur.pk_mean

    pk_branch = False
    d_star = None
    dmin = None
    if params.kind.uses_pk:
        cutoff = params.pk.cutoff
        diag["pk_cutoff"] = cutoff
        dmin = d_pk_min(snaps, cutoff)
        diag["d_pk_min"] = dmin
        pk_branch = cur.pk_mean is not None and cur.pk_mean > cutoff
        if pk_branch:
            d_star = min(current - 1, dmin)  # dmin exists: the current dose qualifies
            diag["d_star"] = d_star

    def low_set() -> list[int]:  # candidates at or below the current dose excluding it
        return list(range(d_star, current)) if pk_branch else [current - 1]

    def mid_set() -> list[int]:  # current dose and eligible lower doses
        return list(range(d_star, current + 1)) if pk_branch else [current - 1, current]

    def full_set() -> list[int]:  # one step up included
        return list(range(d_star, current + 2)) if pk_branch else [current - 1, current, current + 1]

    if tox_rate >= deesc:
        candidates = low_set()
        rule = "overly_toxic_pk_backtrack" if pk_branch else "overly_toxic_deescalate"
    elif (
        cur.n >= params.escalation_min_n
        and current < D
        and snaps[current].n == 0
        and not snaps[current].eliminated
    ):
        diag["admissible"] = [current + 1]
        return Decision(Action.TREAT, current + 1, "forced_escalation", diag)
    elif esc < tox_rate < deesc:
        candidates = mid_set() if cur.n >= params.sample_cutoff else full_set()
        rule = "interval_mid"
    else:
        candidates = full_set()
        rule = "interval_low"
    if pk_branch:
        rule += "_pk_expanded"

    candidates = _filter(candidates, snaps, D)
    diag["admissible"] = candidates
    if candidates:
        dose, tails = _pick_dose(candidates, snaps, params)
        diag["desirability"] = tails
        return Decision(Action.TREAT, dose, rule, diag)

    # Empty admissible set: stay if allowed, otherwise the highest usable
    # lower dose, otherwise stop.
    if not cur.eliminated:
        return Decision(Action.TREAT, current, rule + "_stay", diag)
    below = [d for d in alive if d < current]
    if below:
        return Decision(Action.TREAT, max(below), rule + "_fallback_below", diag)
    return Decision(Action.TERMINATE, None, rule + "_no_usable_dose", diag)


def _elim_labels(snap: DoseSnapshot) -> list[str]:
    labels = []
    if snap.eliminated_safety:
        labels.append("safety")
    if snap.eliminated_efficacy:
        labels.append("efficacy")
    if snap.eliminated_pk:
        labels.append("pk")
    return labels


def next_dose(states: list[DoseState], current: int, params: DesignParams) -> Decision:
    """Dose for the next cohort under complete data.

    Call apply_eliminations first; this only reads the flags.
    """
    snaps = [snapshot_from_state(s, params.utilities) for s in states]
    return next_dose_from_snapshots(snaps, current, params)


ALL_RULES = ("safety", "efficacy", "pk")


def apply_eliminations_to_snapshots(
    states: list[DoseState],
    snaps: list[DoseSnapshot],
    params: DesignParams,
    diag: dict | None = None,
    current: int | None = None,
    rules: tuple = ALL_RULES,
) -> bool:
    """Evaluate the elimination rules and set sticky flags on both the
    snapshots and the backing states.

    ``current`` restricts the rules to the dose whose data just changed,
    which is how the rules run at each decision epoch; the exposure rule
    then removes at most one lower dose per epoch.  With ``current`` None
    every dose is swept (the exposure rule in ascending order).  ``rules``
    selects which criteria run; the end-of-trial check uses only the
    exposure rule, which is a trial-level stopping criterion, whereas the
    safety/futility screens only ever guard the next dosing decision.

    Returns True when the trial must stop: every dose is eliminated, or the
    exposure rule fires at the top dose.  When given, ``diag`` collects the
    per-dose rule tails actually evaluated.
    """
    D = params.num_doses
    doses = [current] if current is not None else list(range(1, D + 1))
    terminate = False

    def mark(d: int, flag: str) -> None:
        setattr(states[d - 1], flag, True)
        setattr(snaps[d - 1], flag, True)

    def record(d: int, rule: str, value: float) -> None:
        if diag is not None:
            diag.setdefault(d, {})[rule] = value

    for d in doses:
        snap = snaps[d - 1]
        if snap.n < params.elim_min_n:
            continue
        if "safety" in rules and not snap.eliminated_safety:
            tail = beta_posterior_tail(snap.tox_events, snap.n, params.max_tox_prob, "above")
            record(d, "safety", tail)
            if tail > params.c_tox:
                for dd in range(d, D + 1):
                    mark(dd, "eliminated_safety")
        if "efficacy" in rules and not snap.eliminated_efficacy:
            tail = beta_posterior_tail(snap.eff_events, snap.n, params.min_eff_prob, "below")
            record(d, "efficacy", tail)
            if tail > params.c_eff:
                mark(d, "eliminated_efficacy")

    if "pk" in rules and params.kind.uses_pk:
        for d in doses:
            snap = snaps[d - 1]
            if snap.pk_n < params.pk_elim_min_n or snap.pk_mean is None:
                continue
            sd = _sampling_sd(snap, d, params)
            if sd is None or sd <= 0:
                continue
            prob = pk_below_target_prob(
                snap.pk_mean, snap.pk_n, sd, params.pk.prior_sd, params.pk.target
            )
            record(d, "pk", prob)
            if prob <= params.c_pk:
                continue
            if d == D:
                for dd in range(1, D + 1):
                    mark(dd, "eliminated_pk")
                terminate = True
            elif d >= 2:
                for dd in range(1, d):
                    if not snaps[dd - 1].eliminated:
                        mark(dd, "eliminated_pk")
                        break
            # The rule is silent for the lowest dose; no action there.

    if all(snaps[d - 1].eliminated for d in range(1, D + 1)):
        terminate = True
    return terminate


def apply_eliminations(
    states: list[DoseState],
    params: DesignParams,
    current: int | None = None,
    rules: tuple = ALL_RULES,
) -> bool:
    """Complete-data elimination pass; returns the stop flag."""
    snaps = [snapshot_from_state(s, params.utilities) for s in states]
    return apply_eliminations_to_snapshots(states, snaps, params, current=current, rules=rules)


def decide(states: list[DoseState], current: int, params: DesignParams) -> Decision:
    """Elimination pass at the current dose followed by the dose-finding
    step (complete data)."""
    snaps = [snapshot_from_state(s, params.utilities) for s in states]
    rule_tails: dict = {}
    if apply_eliminations_to_snapshots(states, snaps, params, rule_tails, current=current):
        return Decision(
            Action.TERMINATE,
            None,
            "all_doses_eliminated",
            {
                "rule_tails": rule_tails,
                "eliminated": {
                    d: _elim_labels(snaps[d - 1]) for d in range(1, params.num_doses + 1)
                },
            },
        )
    decision = next_dose_from_snapshots(snaps, current, params)
    decision.diagnostics["rule_tails"] = rule_tails
    return decision


def _argmin_abs(values: dict[int, float], target: float, prefer_high_when_below: bool) -> int:
    best = min(abs(v - target) for v in values.values())
    ties = [d for d, v in values.items() if abs(abs(v - target) - best) <= 1e-12]
    if not prefer_high_when_below:
        return min(ties)
    hi = max(ties)
    return hi if values[hi] < target else min(ties)


def _pk_floor_dose(iso_pk: dict[int, float], target: float) -> int:
    """Lowest-adequate-exposure dose for final selection: the dose whose
    isotonic exposure estimate is nearest the target from below (nearest
    overall if every estimate exceeds the target); ties go to the lower
    dose."""
    below = {d: v for d, v in iso_pk.items() if v <= target}
    pool = below if below else iso_pk
    return _argmin_abs(pool, target, prefer_high_when_below=False)


def select_obd(states: list[DoseState], params: DesignParams) -> ObdResult:
    """Final dose selection once the trial is over.

    Isotonic DLT rates locate the maximum tolerated dose; for the exposure
    designs, isotonic exposure means locate the floor of the candidate
    range; the winner maximizes the posterior-mean utility among tried,
    non-eliminated doses in the range.
    """
    D = params.num_doses
    tried = [d for d in range(1, D + 1) if states[d - 1].n > 0]
    if not tried:
        return ObdResult(None, None, None, {}, {}, {}, [], "no_dose_tried")

    tox_rates = [states[d - 1].n_tox / states[d - 1].n for d in tried]
    weights = [states[d - 1].n for d in tried]
    iso_tox = dict(zip(tried, pava(tox_rates, weights)))
    mtd = _argmin_abs(iso_tox, params.max_tox_prob, prefer_high_when_below=True)

    pk_floor = None
    iso_pk: dict[int, float] = {}
    if params.kind.uses_pk:
        pk_doses = [d for d in range(1, D + 1) if states[d - 1].pk_values]
        if pk_doses:
            means = [sum(states[d - 1].pk_values) / len(states[d - 1].pk_values) for d in pk_doses]
            pk_w = [len(states[d - 1].pk_values) for d in pk_doses]
            iso_pk = dict(zip(pk_doses, pava(means, pk_w)))
            pk_floor = _pk_floor_dose(iso_pk, params.pk.target)

    # The floor never exceeds the MTD, mirroring the in-trial cap of the
    # expanded set at min(d - 1, lowest adequate-exposure dose).
    floor = min(pk_floor, mtd) if (params.kind.uses_pk and pk_floor is not None) else 1
    candidates = [
        d for d in tried if floor <= d <= mtd and not states[d - 1].eliminated
    ]
    utilities = {
        d: 100.0
        * (1.0 + quasi_events(states[d - 1].counts, params.utilities))
        / (2.0 + states[d - 1].n)
        for d in tried
    }
    if not candidates:
        return ObdResult(None, mtd, pk_floor, iso_tox, iso_pk, utilities, [], "empty_candidate_set")
    selected = min(candidates, key=lambda d: (-utilities[d], d))
    return ObdResult(selected, mtd, pk_floor, iso_tox, iso_pk, utilities, candidates, "selected")
