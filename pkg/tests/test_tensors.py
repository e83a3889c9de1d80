import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from collapse_ns.tensors import contract, contraction_identity, deformation, divergence, stress

MU, ETA = 0.7, 0.3


def test_deformation_examples():
    assert np.allclose(deformation(np.eye(2)), np.eye(2))
    assert np.allclose(deformation([[0, 1], [0, 0]]), [[0, 0.5], [0.5, 0]])
    assert np.allclose(deformation([[0, -1], [1, 0]]), 0.0)


def test_stress_examples():
    assert np.allclose(stress(np.eye(2), MU, ETA, 2), 2 * ETA * np.eye(2))
    assert np.allclose(stress(np.array([[0.0, 1], [0, 0]]), MU, ETA, 2), [[0, MU], [MU, 0]])
    assert np.allclose(stress(np.zeros((3, 3)), MU, ETA, 3), 0.0)


def test_contraction_identity_examples():
    lhs, rhs = contraction_identity(np.eye(2), MU, ETA, 2)
    assert lhs == pytest.approx(4 * ETA) and rhs == pytest.approx(4 * ETA)
    lhs, rhs = contraction_identity(np.array([[0.0, 1], [0, 0]]), MU, ETA, 2)
    assert lhs == pytest.approx(MU) and rhs == pytest.approx(MU)


@pytest.mark.parametrize("N", [2, 3])
def test_contraction_identity_random(N, rng):
    G = rng.normal(size=(10_000, N, N))
    lhs, rhs = contraction_identity(G, MU, ETA, N)
    assert np.max(np.abs(lhs - rhs) / (1 + np.abs(lhs))) <= 1e-12


finite = st.floats(-1e3, 1e3, allow_nan=False)


@given(G=arrays(float, (3, 3), elements=finite), mu=st.floats(0, 10), eta=st.floats(0, 10))
def test_stress_symmetric_with_bulk_trace(G, mu, eta):
    S = stress(G, mu, eta, 3)
    scale = 1 + np.max(np.abs(S))
    assert np.max(np.abs(S - S.T)) <= 1e-14 * scale
    assert np.trace(S) == pytest.approx(3 * eta * divergence(G), abs=1e-12 * scale)


@given(G=arrays(float, (2, 2), elements=finite), mu=st.floats(0, 10), eta=st.floats(0, 10))
def test_dissipation_nonnegative(G, mu, eta):
    lhs = contract(stress(G, mu, eta, 2), G)
    assert lhs >= -1e-12 * (1 + np.sum(G * G)) * (1 + mu + eta)
