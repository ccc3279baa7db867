import numpy as np
import pytest

from pkboin12 import DesignKind, DesignParams, DoseState, UtilitySpec


@pytest.fixture
def boin12_params():
    return DesignParams(kind=DesignKind.BOIN12)


@pytest.fixture
def pkboin12_params():
    return DesignParams(kind=DesignKind.PKBOIN12)


@pytest.fixture
def tite_pkboin12_params():
    return DesignParams(kind=DesignKind.TITE_PKBOIN12)


def state(counts=(0, 0, 0, 0), pk=(), **flags) -> DoseState:
    s = DoseState(counts=list(counts), pk_values=list(pk))
    for name, value in flags.items():
        setattr(s, name, value)
    return s


def random_states(rng: np.random.Generator, num_doses=6, with_pk=True, pk_low=None, pk_high=None):
    """Random per-dose evidence for property tests."""
    states = []
    for _ in range(num_doses):
        n = int(rng.integers(0, 13))
        counts = rng.multinomial(n, [0.25, 0.25, 0.25, 0.25]).tolist() if n else [0, 0, 0, 0]
        pk = []
        if with_pk and n:
            lo = 500.0 if pk_low is None else pk_low
            hi = 9000.0 if pk_high is None else pk_high
            pk = rng.uniform(lo, hi, size=n).tolist()
        states.append(DoseState(counts=counts, pk_values=pk))
    return states
