import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from groupdistortion import simplex


def test_textbook_problem():
    # max 3x + 5y ; x <= 4, 2y <= 12, 3x + 2y <= 18
    res = simplex.solve([3, 5], [[1, 0], [0, 2], [3, 2]], [4, 12, 18])
    assert res.status == simplex.OPTIMAL
    assert res.value == pytest.approx(36.0)
    assert res.x == pytest.approx([2.0, 6.0])


def test_unbounded_ray():
    A = np.array([[1.0, -1.0]])
    c = np.array([0.0, 1.0])
    res = simplex.solve(c, A, [1.0])
    assert res.status == simplex.UNBOUNDED
    r = res.ray
    assert np.all(r >= -1e-12) and np.all(A @ r <= 1e-12) and c @ r > 0


def test_zero_objective_stays_at_origin():
    res = simplex.solve([0.0, 0.0], [[1.0, 1.0]], [1.0])
    assert res.status == simplex.OPTIMAL and res.value == 0.0


def test_rejects_negative_rhs_and_bad_shapes():
    with pytest.raises(ValueError):
        simplex.solve([1.0], [[1.0]], [-1.0])
    with pytest.raises(ValueError):
        simplex.solve([1.0, 2.0], [[1.0]], [1.0])


def test_degenerate_cycling_example():
    # Beale's example, which cycles under the largest-coefficient rule
    c = np.array([0.75, -150.0, 0.02, -6.0])
    A = np.array([
        [0.25, -60.0, -0.04, 9.0],
        [0.5, -90.0, -0.02, 3.0],
        [0.0, 0.0, 1.0, 0.0],
    ])
    b = np.array([0.0, 0.0, 1.0])
    res = simplex.solve(c, A, b)
    assert res.status == simplex.OPTIMAL
    assert res.value == pytest.approx(0.05)


@st.composite
def random_lps(draw):
    nr = draw(st.integers(1, 8))
    nv = draw(st.integers(1, 8))
    coef = st.integers(-5, 5)
    A = np.array(draw(st.lists(st.lists(coef, min_size=nv, max_size=nv), min_size=nr, max_size=nr)), dtype=float)
    b = np.array(draw(st.lists(st.integers(0, 6), min_size=nr, max_size=nr)), dtype=float)
    c = np.array(draw(st.lists(coef, min_size=nv, max_size=nv)), dtype=float)
    return c, A, b


@settings(max_examples=300, deadline=None)
@given(random_lps())
def test_against_scipy_linprog(lp):
    c, A, b = lp
    ours = simplex.solve(c, A, b)
    # a box keeps the reference LP bounded, so HiGHS always returns an optimum
    box = 1e6
    ref = linprog(-c, A_ub=A, b_ub=b, bounds=[(0, box)] * len(c), method="highs")
    assert ref.status == 0
    if ours.status == simplex.UNBOUNDED:
        r = ours.ray
        # origin is feasible, so this certificate proves unboundedness
        assert np.all(r >= -1e-9) and np.all(A @ r <= 1e-9) and c @ r > 1e-9
        assert -ref.fun >= box * (c @ r) / r.max() - 1e-6 * box
    else:
        assert ours.status == simplex.OPTIMAL
        assert ours.value == pytest.approx(-ref.fun, abs=1e-7)
        assert np.all(ours.x >= -1e-9)
        assert np.all(A @ ours.x <= b + 1e-7)
        assert c @ ours.x == pytest.approx(ours.value, abs=1e-9)
