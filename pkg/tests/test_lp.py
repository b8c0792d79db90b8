"""The in-house simplex checked against scipy's HiGHS as an oracle."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog as highs

from sdquant import lp


def test_textbook_problem():
    # max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18
    res = lp.linprog([-3, -5], A_ub=[[1, 0], [0, 2], [3, 2]], b_ub=[4, 12, 18])
    np.testing.assert_allclose(res.x, [2, 6], atol=1e-9)
    assert res.objective == pytest.approx(-36)


def test_equality_constraints_and_negative_rhs():
    res = lp.linprog([1, 1], A_eq=[[1, -1]], b_eq=[-2], A_ub=[[-1, -1]], b_ub=[-4])
    np.testing.assert_allclose(res.x, [1, 3], atol=1e-9)


def test_infeasible():
    with pytest.raises(lp.InfeasibleError):
        lp.linprog([1], A_ub=[[1]], b_ub=[-1])


def test_unbounded():
    with pytest.raises(lp.UnboundedError):
        lp.linprog([-1, 0], A_ub=[[0, 1]], b_ub=[1])


def test_degenerate_redundant_equalities():
    res = lp.linprog([1, 2, 3], A_eq=[[1, 1, 1], [2, 2, 2]], b_eq=[1, 2])
    np.testing.assert_allclose(res.x, [1, 0, 0], atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.integers(1, 6), st.integers(0, 2))
def test_matches_highs(seed, n, m_ub, m_eq):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=n)
    a_ub = rng.normal(size=(m_ub, n))
    b_ub = rng.normal(size=m_ub) + 1.0
    a_eq = rng.normal(size=(m_eq, n)) if m_eq else None
    b_eq = rng.normal(size=m_eq) if m_eq else None
    # box the variables so most instances are bounded
    a_ub = np.vstack([a_ub, np.eye(n)])
    b_ub = np.concatenate([b_ub, np.full(n, 5.0)])
    ref = highs(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if ref.status == 2:
        with pytest.raises(lp.InfeasibleError):
            lp.linprog(c, a_ub, b_ub, a_eq, b_eq)
        return
    assert ref.status == 0
    res = lp.linprog(c, a_ub, b_ub, a_eq, b_eq)
    assert res.objective == pytest.approx(ref.fun, abs=1e-7, rel=1e-7)
    assert np.all(res.x >= -1e-9)
    assert np.all(a_ub @ res.x <= b_ub + 1e-7)
    if m_eq:
        np.testing.assert_allclose(a_eq @ res.x, b_eq, atol=1e-7)
