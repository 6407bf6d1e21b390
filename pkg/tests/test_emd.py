import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from viewclean.emd import emd_uniform, transport

from .oracles import emd_by_plan_enumeration


def test_transport_requires_balance():
    with pytest.raises(ValueError):
        transport(np.array([1.0, 1.0]), np.array([1.0]), np.zeros((2, 1)))


def test_one_by_two_splits_mass():
    cost = np.array([[0.4, 0.6]])
    d, flow = emd_uniform(cost)
    assert d == pytest.approx(0.5)
    np.testing.assert_allclose(flow, [[0.5, 0.5]])


def test_identity_is_zero():
    cost = np.array([[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
    d, flow = emd_uniform(cost)
    assert d == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(np.diag(flow), [1 / 3] * 3, atol=1e-12)


def test_permutation_costs():
    # optimal assignment is the anti-diagonal
    cost = np.array([[1.0, 0.0], [0.0, 1.0]])
    d, flow = emd_uniform(cost)
    assert d == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(flow, [[0.0, 0.5], [0.5, 0.0]], atol=1e-12)


def test_flow_mass_constraints():
    rng = np.random.default_rng(7)
    cost = rng.random((4, 6))
    _, flow = emd_uniform(cost)
    np.testing.assert_allclose(flow.sum(axis=1), np.full(4, 1 / 4), atol=1e-9)
    np.testing.assert_allclose(flow.sum(axis=0), np.full(6, 1 / 6), atol=1e-9)
    assert flow.sum() == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(
    st.integers(1, 5),
    st.integers(1, 5),
    st.integers(0, 2**31 - 1),
)
def test_matches_plan_enumeration(m, n, seed):
    rng = np.random.default_rng(seed)
    cost = rng.random((m, n)) * 2.0
    d, _ = emd_uniform(cost)
    assert d == pytest.approx(emd_by_plan_enumeration(cost.tolist()), abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(arrays(np.float64, (3, 3), elements=st.floats(0, 5, allow_nan=False)))
def test_symmetry(cost):
    d1, _ = emd_uniform(cost)
    d2, _ = emd_uniform(cost.T)
    assert d1 == pytest.approx(d2, abs=1e-9)


def test_degenerate_uniform_costs():
    # every feasible flow has the same cost; heavy degeneracy must not hang
    cost = np.ones((6, 6))
    d, _ = emd_uniform(cost)
    assert d == pytest.approx(1.0)


def test_larger_instance_against_scaled_costs():
    rng = np.random.default_rng(123)
    cost = rng.random((40, 35))
    d1, _ = emd_uniform(cost)
    d2, _ = emd_uniform(cost * 3.5)
    assert d2 == pytest.approx(3.5 * d1, rel=1e-9)
