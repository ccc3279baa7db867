"""Built-in benchmark scenario library.

Fourteen six-dose configurations covering increasing, plateau, unimodal and
constant dose-response shapes, plus two with no acceptable dose (13: every
dose under-exposed and inefficacious; 14: every dose overly toxic).  The
annotated ``obd`` is the dose that optimizes the utility trade-off among
tolerable, adequately exposed doses, or None when no such dose exists.
"""

from __future__ import annotations

from .simulate import Scenario

_RAW: dict[int, tuple[tuple[float, ...], tuple[float, ...], tuple[float, ...], int | None]] = {
    1: (
        (0.01, 0.03, 0.05, 0.10, 0.18, 0.24),
        (0.05, 0.10, 0.20, 0.30, 0.45, 0.55),
        (1000, 1500, 2500, 3600, 4800, 6500),
        6,
    ),
    2: (
        (0.03, 0.05, 0.10, 0.15, 0.20, 0.41),
        (0.05, 0.10, 0.20, 0.40, 0.55, 0.65),
        (1000, 2000, 3500, 6000, 7500, 8500),
        5,
    ),
    3: (
        (0.20, 0.30, 0.40, 0.50, 0.60, 0.70),
        (0.40, 0.55, 0.60, 0.65, 0.70, 0.75),
        (4500, 6000, 7000, 8000, 9000, 9500),
        2,
    ),
    4: (
        (0.30, 0.40, 0.50, 0.60, 0.70, 0.80),
        (0.50, 0.55, 0.60, 0.65, 0.70, 0.75),
        (6500, 7000, 7500, 8000, 8500, 9000),
        1,
    ),
    5: (
        (0.03, 0.05, 0.10, 0.20, 0.30, 0.45),
        (0.10, 0.30, 0.45, 0.55, 0.55, 0.55),
        (1000, 2000, 4000, 6000, 7500, 9000),
        4,
    ),
    6: (
        (0.10, 0.15, 0.21, 0.24, 0.27, 0.30),
        (0.20, 0.30, 0.40, 0.55, 0.55, 0.55),
        (2000, 3000, 4000, 6000, 6500, 7000),
        4,
    ),
    7: (
        (0.10, 0.15, 0.21, 0.24, 0.27, 0.30),
        (0.30, 0.40, 0.55, 0.55, 0.55, 0.55),
        (2000, 4000, 6000, 6500, 7000, 7500),
        3,
    ),
    8: (
        (0.10, 0.21, 0.24, 0.27, 0.30, 0.33),
        (0.40, 0.55, 0.55, 0.55, 0.55, 0.55),
        (4000, 6000, 6500, 7000, 7500, 8000),
        2,
    ),
    9: (
        (0.20, 0.25, 0.30, 0.40, 0.45, 0.50),
        (0.30, 0.50, 0.45, 0.40, 0.35, 0.30),
        (5000, 6500, 7500, 8000, 8500, 9000),
        2,
    ),
    10: (
        (0.10, 0.20, 0.30, 0.45, 0.50, 0.55),
        (0.30, 0.40, 0.55, 0.60, 0.55, 0.45),
        (4000, 5000, 6000, 7000, 7500, 8000),
        3,
    ),
    11: (
        (0.03, 0.05, 0.10, 0.15, 0.20, 0.25),
        (0.10, 0.30, 0.40, 0.50, 0.65, 0.55),
        (1500, 3000, 4500, 6000, 7500, 9000),
        5,
    ),
    12: (
        (0.05, 0.10, 0.20, 0.45, 0.55, 0.65),
        (0.50, 0.50, 0.50, 0.50, 0.50, 0.50),
        (6000, 7000, 7500, 8000, 8500, 9000),
        1,
    ),
    13: (
        (0.01, 0.03, 0.05, 0.10, 0.12, 0.14),
        (0.03, 0.05, 0.10, 0.20, 0.20, 0.20),
        (500, 900, 1500, 2600, 3600, 4600),
        None,
    ),
    14: (
        (0.45, 0.50, 0.55, 0.60, 0.65, 0.70),
        (0.30, 0.40, 0.55, 0.55, 0.55, 0.55),
        (6000, 6500, 7000, 7500, 8000, 8500),
        None,
    ),
}

SCENARIO_IDS = tuple(sorted(_RAW))


def builtin_scenario(scenario_id: int, **overrides) -> Scenario:
    """The library scenario with the given id (1..14).

    Keyword overrides (cv, pk_influence, tox_eff_corr, accrual_per_month,
    windows) adjust the generation knobs without touching the dose-response
    truth.
    """
    if scenario_id not in _RAW:
        raise ValueError(f"scenario id must be in 1..{max(_RAW)}, got {scenario_id}")
    tox, eff, pk, obd = _RAW[scenario_id]
    kwargs = dict(
        tox_probs=tox,
        eff_probs=eff,
        pk_means=tuple(float(v) for v in pk),
        obd=obd,
        label=f"scenario-{scenario_id}",
    )
    kwargs.update(overrides)
    return Scenario(**kwargs)


def all_scenarios() -> list[Scenario]:
    return [builtin_scenario(i) for i in SCENARIO_IDS]
