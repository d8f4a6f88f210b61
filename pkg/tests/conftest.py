import numpy as np
import pytest
from hypothesis import strategies as st

from groupdistortion.core import Grouping, Instance


@st.composite
def euclidean_instances(draw, max_n=8, max_m=4, max_dim=3):
    """Random Euclidean instance with a random grouping (labels drawn per agent)."""
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(2, max_m))
    dim = draw(st.integers(1, max_dim))
    coord = st.floats(0, 10, allow_nan=False, allow_infinity=False)
    agents = np.array(draw(st.lists(st.lists(coord, min_size=dim, max_size=dim), min_size=n, max_size=n)))
    alts = np.array(draw(st.lists(st.lists(coord, min_size=dim, max_size=dim), min_size=m, max_size=m)))
    labels = draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n))
    return Instance.from_points(agents, alts), Grouping.from_labels(labels)


@st.composite
def line_instances(draw, max_n=6, max_m=3):
    """Instances on the integer line 0..8, which keeps ties common."""
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(2, max_m))
    agents = draw(st.lists(st.integers(0, 8), min_size=n, max_size=n))
    alts = draw(st.lists(st.integers(0, 8), min_size=m, max_size=m))
    labels = draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n))
    return Instance.from_points(agents, alts), Grouping.from_labels(labels)


@pytest.fixture
def small_line():
    # a@0, b@1; agents at 0, 1, 1; groups {i1, i2}, {i3}
    return Instance.from_points([0.0, 1.0, 1.0], [0.0, 1.0]), Grouping([[0, 1], [2]])
