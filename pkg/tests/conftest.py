import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from ktour import Instance
from ktour.generate import DISTRIBUTIONS, generate

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# (criterion number, line), printed in order at the end of the session
ACCEPTANCE_LINES: list[tuple[int, str]] = []


def pytest_collection_modifyitems(items):
    # the itp guarantee criterion reads a session-wide counter, so it goes last
    last = [it for it in items if it.name == "test_c03_itp_guarantee"]
    items[:] = [it for it in items if it not in last] + last


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES, key=lambda x: x[0]):
            terminalreporter.write_line(line)


def oracle_corpus(count, n_max=8, k_max=4, seed=0, n_min=1):
    """Deterministic (instance, dist) pairs cycling through all distributions."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        dist = DISTRIBUTIONS[i % len(DISTRIBUTIONS)]
        n = int(rng.integers(n_min, n_max + 1))
        k = int(rng.integers(1, k_max + 1))
        out.append(generate(n, k, seed=int(rng.integers(1 << 30)), dist=dist))
    return out


coord = st.floats(min_value=-50, max_value=50, allow_nan=False, allow_infinity=False)


@st.composite
def instances(draw, min_n=0, max_n=12, max_k=5):
    n = draw(st.integers(min_n, max_n))
    pts = draw(st.lists(st.tuples(coord, coord), min_size=n, max_size=n))
    k = draw(st.integers(1, max_k))
    return Instance.from_points(pts, k)


@st.composite
def partitions(draw, instance):
    """A random feasible solution: a shuffled order cut into pieces of size <= k."""
    n, k = instance.n, instance.k
    order = draw(st.permutations(list(range(n))))
    tours, i = [], 0
    while i < n:
        size = draw(st.integers(1, k))
        tours.append(tuple(order[i:i + size]))
        i += size
    return tours


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
