"""Numerical kernel shared by every design variant.

Pure functions only: optimal-interval boundaries on the DLT rate, utility
scores and the utility benchmark, Beta posterior tails for the quasi-binomial
desirability model, the zero-truncated normal posterior tail for drug
exposure, and weighted isotonic regression.  Everything here is safe for
unrestricted concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import betaincc, ndtr


@dataclass(frozen=True)
class UtilitySpec:
    """Utility scores on a 0-100 scale for the four joint outcomes.

    Outcome order everywhere in this package: (no tox, eff), (no tox, no eff),
    (tox, eff), (tox, no eff).  The best outcome is pinned at 100 and the
    worst at 0; the middle two are elicited from clinicians.
    """

    no_tox_eff: float = 100.0
    no_tox_no_eff: float = 40.0
    tox_eff: float = 60.0
    tox_no_eff: float = 0.0

    def __post_init__(self) -> None:
        if self.no_tox_eff != 100.0:
            raise ValueError("utility of (no tox, eff) is pinned at 100")
        if self.tox_no_eff != 0.0:
            raise ValueError("utility of (tox, no eff) is pinned at 0")
        if not 0.0 <= self.no_tox_no_eff <= 100.0:
            raise ValueError(f"no_tox_no_eff must be in [0, 100], got {self.no_tox_no_eff}")
        if not 0.0 <= self.tox_eff <= 100.0:
            raise ValueError(f"tox_eff must be in [0, 100], got {self.tox_eff}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.no_tox_eff, self.no_tox_no_eff, self.tox_eff, self.tox_no_eff)


@dataclass(frozen=True)
class IntervalBoundaries:
    """Escalation/de-escalation cut points on the observed DLT rate."""

    escalation: float  # stay/escalate below this
    deescalation: float  # de-escalate at or above this

    def __post_init__(self) -> None:
        if not 0.0 < self.escalation < self.deescalation < 1.0:
            raise ValueError(
                f"boundaries must satisfy 0 < escalation < deescalation < 1, "
                f"got ({self.escalation}, {self.deescalation})"
            )

    def as_tuple(self) -> tuple[float, float]:
        return (self.escalation, self.deescalation)


def _default_ineffective(target: float) -> float:
    return 0.6 * target


@dataclass(frozen=True)
class PkPosteriorParams:
    """Prior and decision constants for the continuous exposure outcome.

    ``sampling_sd`` is the assumed per-dose standard deviation of individual
    exposure values.  When None, downstream code falls back to the sample
    standard deviation of the observed values at each dose.
    """

    target: float = 6000.0  # exposure needed for an efficacious dose
    ineffective: float | None = None  # defaults to 0.6 * target
    cutoff: float | None = None  # defaults to (target + ineffective) / 2
    prior_sd: float = 10000.0
    sampling_sd: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.prior_sd <= 0:
            raise ValueError("prior_sd must be positive")
        if self.target <= 0:
            raise ValueError("target exposure must be positive")
        if self.ineffective is None:
            object.__setattr__(self, "ineffective", _default_ineffective(self.target))
        if self.cutoff is None:
            object.__setattr__(self, "cutoff", (self.target + self.ineffective) / 2.0)
        if not self.ineffective < self.target:
            raise ValueError("ineffective exposure must be below the target")
        if not 0.0 <= self.cutoff <= self.target:
            raise ValueError("cutoff must lie in [0, target]")
        if self.sampling_sd is not None:
            sds = tuple(float(s) for s in self.sampling_sd)
            if any(s <= 0 for s in sds):
                raise ValueError("sampling_sd entries must be positive")
            object.__setattr__(self, "sampling_sd", sds)


def boin_boundaries(tox_target: float) -> IntervalBoundaries:
    """Interval boundaries for a target DLT probability.

    Uses the standard optimal-interval construction with the highest
    acceptable under-dosing rate at 0.6x the target and the lowest
    unacceptable over-dosing rate at 1.4x the target.
    """
    if not 0.0 < tox_target < 1.0:
        raise ValueError(f"tox_target must be in (0, 1), got {tox_target}")
    lo = 0.6 * tox_target
    hi = 1.4 * tox_target
    if hi >= 1.0:
        raise ValueError(f"tox_target {tox_target} too high: 1.4x target reaches 1")
    escalation = math.log((1 - lo) / (1 - tox_target)) / math.log(
        tox_target * (1 - lo) / (lo * (1 - tox_target))
    )
    deescalation = math.log((1 - tox_target) / (1 - hi)) / math.log(
        hi * (1 - tox_target) / (tox_target * (1 - hi))
    )
    return IntervalBoundaries(escalation, deescalation)


def utility_benchmark(u: UtilitySpec, tox_target: float, eff_min: float) -> float:
    """Benchmark score an acceptable dose should beat, on the 0-100 scale.

    The floor is the expected utility of a borderline dose (DLT rate at the
    target, response rate at the minimum); the benchmark sits halfway
    between that floor and a perfect score.
    """
    for name, v in (("tox_target", tox_target), ("eff_min", eff_min)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must be in [0, 1], got {v}")
    floor = (
        u.no_tox_eff * (1 - tox_target) * eff_min
        + u.no_tox_no_eff * (1 - tox_target) * (1 - eff_min)
        + u.tox_eff * tox_target * eff_min
    )
    return floor + (100.0 - floor) / 2.0


def quasi_events(counts, u: UtilitySpec) -> float:
    """Utility-weighted fractional event count from the four outcome tallies."""
    c = counts
    w = u.as_tuple()
    return (w[0] * c[0] + w[1] * c[1] + w[2] * c[2] + w[3] * c[3]) / 100.0


def expected_utility(tox_prob: float, eff_prob: float, u: UtilitySpec) -> float:
    """Expected utility of a dose from its marginal DLT and response rates.

    Only valid when the two middle utilities sum to 100, which makes the
    expectation depend on the joint outcome law through the marginals alone.
    """
    if u.no_tox_no_eff + u.tox_eff != 100.0:
        raise ValueError("marginal form requires the two middle utilities to sum to 100")
    return u.no_tox_no_eff * (1 - tox_prob) + u.tox_eff * eff_prob


@lru_cache(maxsize=1 << 18)
def _beta_tail_above(a: float, b: float, x: float) -> float:
    return float(betaincc(a, b, x))


def beta_posterior_tail(events: float, n: float, threshold: float, direction: str = "above") -> float:
    """Tail probability of the Beta(1 + events, 1 + n - events) posterior.

    ``events`` may be fractional (quasi-binomial event counts).  The flat
    Beta(1, 1) prior is baked in: with no data the tail reduces to the
    prior tail at the threshold.
    """
    if not 0.0 <= events <= n:
        raise ValueError(f"events must lie in [0, n], got events={events}, n={n}")
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {threshold}")
    a = 1.0 + events
    b = 1.0 + n - events
    if direction == "above":
        return _beta_tail_above(a, b, threshold)
    if direction == "below":
        return 1.0 - _beta_tail_above(a, b, threshold)
    raise ValueError(f"direction must be 'above' or 'below', got {direction!r}")


def pk_below_target_prob(
    pk_mean: float, n: int, sampling_sd: float, prior_sd: float, target: float
) -> float:
    """Posterior probability that a dose's true exposure falls short of target.

    Conjugate normal update of a zero-truncated normal prior centred at 0
    with a large spread; the data enter through the sample mean of ``n``
    individual exposure values with known sampling sd.  Truncation at zero is
    renormalized away; once the posterior sits more than 8 sd above zero the
    correction is numerically irrelevant and is skipped.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if sampling_sd <= 0:
        raise ValueError("sampling_sd must be positive")
    if prior_sd <= 0:
        raise ValueError("prior_sd must be positive")
    precision = 1.0 / prior_sd**2 + n / sampling_sd**2
    post_var = 1.0 / precision
    post_mean = (n * pk_mean / sampling_sd**2) * post_var
    post_sd = math.sqrt(post_var)
    z_target = (target - post_mean) / post_sd
    z_zero = (0.0 - post_mean) / post_sd
    if -z_zero > 8.0:
        return float(ndtr(z_target))
    mass_above_zero = 1.0 - ndtr(z_zero)
    if mass_above_zero <= 0.0:
        return 1.0 if z_target > 0 else 0.0
    p = (ndtr(z_target) - ndtr(z_zero)) / mass_above_zero
    return float(min(max(p, 0.0), 1.0))


def pava(values, weights) -> np.ndarray:
    """Weighted least-squares isotonic (nondecreasing) fit.

    Pool-adjacent-violators with exact block pooling; ties are left intact
    and the weighted mean of the output equals that of the input.
    """
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    if v.ndim != 1 or v.shape != w.shape:
        raise ValueError("values and weights must be 1-d and equal length")
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    means: list[float] = []
    wsum: list[float] = []
    size: list[int] = []
    for val, wt in zip(v, w):
        means.append(float(val))
        wsum.append(float(wt))
        size.append(1)
        while len(means) > 1 and means[-2] > means[-1]:
            m2, w2, s2 = means.pop(), wsum.pop(), size.pop()
            m1, w1, s1 = means.pop(), wsum.pop(), size.pop()
            wt_ = w1 + w2
            means.append((m1 * w1 + m2 * w2) / wt_)
            wsum.append(wt_)
            size.append(s1 + s2)
    return np.repeat(np.asarray(means), np.asarray(size))
