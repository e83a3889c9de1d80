import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from collapse_ns import PressureLaw, Renormalization, coercivity_scan, entropy_integrand, renorm_H

LAW = PressureLaw(2.0, 1.0)
REN = Renormalization(LAW, 1.0)


def test_pressure_law_properties():
    rho = np.logspace(-3, 3, 50)
    assert LAW.pressure(0.0) == 0.0
    assert np.all(LAW.dpressure(rho) > 0)
    assert LAW.admissible(2) and LAW.admissible(3)
    assert not PressureLaw(1.2, 1.0).admissible(3)
    with pytest.raises(ValueError):
        PressureLaw(1.2, 1.0).require(3)
    with pytest.raises(ValueError):
        PressureLaw(2.0, -1.0)


def test_renormalization_examples():
    h, h1, h2 = renorm_H(REN, 1.0)
    assert h == 0.0
    h, h1, h2 = renorm_H(REN, 2.0)
    assert (h, h1, h2) == pytest.approx((2.0, 3.0, 2.0), abs=1e-15)


@pytest.mark.parametrize("gamma", [1.0, 1.4, 2.0, 3.0])
def test_renormalization_ode_and_hessian(gamma):
    law = PressureLaw(gamma, 1.7)
    ren = Renormalization(law, 0.8)
    rho = np.logspace(-3, 3, 601)
    h, h1, h2 = renorm_H(ren, rho)
    p = law.pressure(rho)
    assert np.max(np.abs(rho * h1 - h - p) / (1 + np.abs(p))) <= 1e-11
    assert np.max(np.abs(h2 - law.dpressure(rho) / rho) / h2) <= 1e-13
    # finite-difference oracle for the first derivative
    e = 1e-6
    fd = (renorm_H(ren, rho * (1 + e))[0] - renorm_H(ren, rho * (1 - e))[0]) / (2 * e * rho)
    assert np.max(np.abs(fd - h1) / (1 + np.abs(h1))) <= 1e-6


def test_renormalization_rejects_nonpositive_density():
    with pytest.raises(ValueError):
        renorm_H(REN, np.array([1.0, 0.0]))


def test_integrand_examples():
    assert entropy_integrand(REN, 1.3, 0.2, 1.3, 0.2) == pytest.approx(0.0, abs=1e-15)
    assert entropy_integrand(REN, 1.0, 1.0, 1.0, 0.0) == pytest.approx(0.5)
    assert entropy_integrand(REN, 2.0, 0.0, 1.0, 0.0) == pytest.approx(1.0)
    assert entropy_integrand(REN, 0.0, 0.0, 1.0, 0.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        entropy_integrand(REN, 1.0, 0.0, 0.0, 0.0)


def test_integrand_vector_velocities():
    u = np.array([[1.0, 2.0]])
    U = np.array([[0.0, 0.0]])
    assert entropy_integrand(REN, np.array([2.0]), u, np.array([2.0]), U)[0] == pytest.approx(5.0)


pos = st.floats(1e-3, 50.0)
vel = st.floats(-20.0, 20.0)


@given(rho=st.floats(0.0, 50.0), r=pos, u=vel, U=vel, gamma=st.floats(1.0, 4.0), floor=pos)
def test_integrand_nonnegative_and_symmetric(rho, r, u, U, gamma, floor):
    ren = Renormalization(PressureLaw(gamma, 1.0), floor)
    val = entropy_integrand(ren, rho, u, r, U)
    scale = 1 + rho * (u - U) ** 2 + rho**gamma + r**gamma
    assert val >= -1e-13 * scale
    assert entropy_integrand(ren, rho, -u, r, -U) == pytest.approx(val, rel=1e-12, abs=1e-13 * scale)


@given(rho=pos, r=pos, floor1=pos, floor2=pos)
def test_integrand_independent_of_reference_density(rho, r, floor1, floor2):
    a = entropy_integrand(Renormalization(LAW, floor1), rho, 0.0, r, 0.0)
    b = entropy_integrand(Renormalization(LAW, floor2), rho, 0.0, r, 0.0)
    assert a == pytest.approx(b, rel=1e-9, abs=1e-9 * (1 + rho * rho + r * r))


def test_scale_consistency():
    rho = np.logspace(-2, 2, 20)
    one = renorm_H(Renormalization(PressureLaw(2.0, 1.0), 1.0), rho)
    two = renorm_H(Renormalization(PressureLaw(2.0, 2.0), 1.0), rho)
    for a, b in zip(one, two):
        assert np.allclose(b, 2 * a, rtol=1e-15)


def test_coercivity_constants_positive():
    c = coercivity_scan(REN, (0.5, 2.0), (0.25, 4.0), samples=10_000)
    assert c.c1 > 0 and c.c3 > 0 and c.c2 >= c.c1
    # gamma = 2: the density is exactly rho w^2 / 2 + (rho - r)^2, so on K = [0.5, 2]
    # the ratio lies in [min(rho/2, 1), max(rho/2, 1)] = [0.25, 1]
    assert c.c1 == pytest.approx(0.25, abs=5e-3)
    assert c.c2 == pytest.approx(1.0, abs=1e-8)


def test_coercivity_rejects_bad_intervals():
    with pytest.raises(ValueError):
        coercivity_scan(REN, (0.5, 2.0), (0.6, 4.0))
