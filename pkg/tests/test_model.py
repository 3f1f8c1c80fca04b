import math

import numpy as np
import pytest

from ekflow.grid import SYMMETRIC, GridSpec, ScalarField
from ekflow.model import InitialData, pressure, quartic_double_well
from ekflow.operators import laplacian5
from ekflow.presets import (
    bubble_density,
    preset,
    stationary_profile,
    well_prepared_data,
)

GAMMA = 9e-4


def test_quartic_wells():
    m = quartic_double_well(GAMMA)
    assert m.W(1.0) == pytest.approx(0.0, abs=0.0)
    assert m.W(2.0) == pytest.approx(0.0, abs=0.0)
    assert m.W(1.5) == pytest.approx(0.0625)
    assert m.U(1.5) - m.V(1.5) == pytest.approx(0.0625)
    assert m.dW(1.5) == pytest.approx(0.0, abs=1e-14)


def test_quartic_convex_splitting():
    m = quartic_double_well(GAMMA)
    rho = np.linspace(0.25, 4.0, 1000)
    assert np.all(m.d2U(rho) >= 26.0)
    assert np.all(m.d2V(rho) > 0.0)
    exact_dW = 2.0 * (rho - 1.0) * (rho - 2.0) * (2.0 * rho - 3.0)
    np.testing.assert_allclose(m.dU(rho) - m.dV(rho), exact_dW,
                               rtol=0.0, atol=1e-12 * np.max(np.abs(exact_dW)))
    assert m.kappa_V == pytest.approx(36.0 * 0.5)


def test_pressure_examples():
    m = quartic_double_well(GAMMA)
    assert pressure(m, 1.0) == pytest.approx(0.0, abs=0.0)
    # W(3) = 4, W'(3) = 12, p = 3*12 - 4
    assert pressure(m, 3.0) == pytest.approx(32.0)
    with pytest.raises(ValueError):
        pressure(m, -1.0)


def test_pressure_derivative_matches_finite_differences():
    m = quartic_double_well(GAMMA)
    rho, eps = 1.5, 1e-6
    fd = (pressure(m, rho + eps) - pressure(m, rho - eps)) / (2.0 * eps)
    assert fd == pytest.approx(rho * m.d2W(rho), abs=1e-6)


def test_initial_data_requires_positive_density():
    g = GridSpec(dim=1, K=4)
    from ekflow.grid import VectorField
    with pytest.raises(ValueError):
        InitialData(ScalarField(g, np.linspace(-0.1, 1.0, 5)),
                    VectorField.zero(g))


def test_preset_exp51():
    p = preset("exp51")
    assert p.grid.K == 40 and p.grid.h == pytest.approx(2.5e-2)
    assert p.params.mach == 1.0
    assert p.params.gamma == pytest.approx(9e-4)
    assert p.params.tau == pytest.approx(5e-4)
    assert p.default_steps == 2000
    values = np.unique(p.initial.rho.values)
    np.testing.assert_array_equal(values, [1.0, 2.0, 3.0])
    assert p.initial.v.max_norm() == 0.0
    # diamond membership: node at (1/4, 1/4) has density 3
    assert p.initial.rho.values[10, 10] == 3.0
    assert p.initial.rho.values[30, 30] == 2.0


def test_preset_exp52_amplitude():
    p = preset("exp52", M=1e-3)
    # amplitude 1/2 + 4 M = 0.504: extreme values 1.5 -+ 0.504 * tanh range
    g = p.grid
    center = p.initial.rho.values[g.K // 2, g.K // 2]
    assert center == pytest.approx(1.5 + 0.504 * math.tanh(
        math.sqrt(2.0 / 9e-4) * 0.25), rel=1e-12)
    with pytest.raises(ValueError):
        bubble_density(g, 9e-4, 0.25)


def test_preset_exp53_exp55():
    p = preset("exp53")
    assert p.grid.lo == -1.0 and p.grid.hi == 1.0
    assert p.params.tau == pytest.approx(p.grid.h / 100.0)
    assert p.measure_time == pytest.approx(0.0125)
    assert p.params.variant == "newton"
    p55 = preset("exp55")
    assert p55.params.variant == "linearized"
    np.testing.assert_array_equal(p.initial.rho.values, p55.initial.rho.values)


def test_preset_exp54():
    p = preset("exp54", K=40)
    assert p.params.mach == pytest.approx(0.05)
    assert p.params.tau == pytest.approx(p.grid.h / 5.0)
    assert p.solver.tol_residual == pytest.approx(1e-11)
    x = p.grid.coords()
    expected = 1.5 + 0.5 * np.tanh(x / math.sqrt(2.0 * 1e-3))
    np.testing.assert_allclose(p.initial.rho.values, expected, atol=0.0)


def test_all_presets_have_positive_density():
    for name in ("exp51", "exp52", "exp53", "exp54", "exp55"):
        p = preset(name)
        assert float(np.min(p.initial.rho.values)) > 0.0


def test_unknown_preset():
    with pytest.raises(ValueError):
        preset("exp99")


def test_exp54_near_discrete_compatibility():
    # the sampled stationary profile satisfies the discrete constancy of
    # W'(rho) - gamma lap rho only up to sampling truncation; record that the
    # deviation stays modest at desk resolutions (measured, not exact)
    for K in (40, 80, 160):
        p = preset("exp54", K=K)
        pot = (p.model.dW(p.initial.rho.values)
               - p.model.gamma * laplacian5(p.initial.rho, SYMMETRIC).values)
        deviation = float(np.max(pot) - np.min(pot))
        assert deviation < 0.1


def test_stationary_profile_solves_equilibrium():
    gamma = 1e-3
    f = stationary_profile(gamma)
    x = np.linspace(-0.5, 0.5, 201)
    rho = f(x)
    m = quartic_double_well(gamma)
    # gamma rho'' computed spectrally accurate via the tanh identity
    s = np.tanh(x / math.sqrt(2.0 * gamma))
    rho_xx = -s * (1.0 - s**2) / (2.0 * gamma)
    residual = m.dW(rho) - gamma * rho_xx
    assert np.max(np.abs(residual)) < 1e-12


def test_well_prepared_data_is_discretely_solenoidal():
    from ekflow.grid import ANTISYMMETRIC, VectorField
    from ekflow.operators import div_centered
    g = GridSpec(dim=2, K=20)
    init = well_prepared_data(g)
    assert init.well_prepared
    momentum = VectorField(g, tuple(init.rho.values * c
                                    for c in init.v.components))
    div = div_centered(momentum, ANTISYMMETRIC)
    assert float(np.max(np.abs(div.values))) < 1e-11
    pot = (quartic_double_well(GAMMA).dW(init.rho.values)
           - GAMMA * laplacian5(init.rho, SYMMETRIC).values)
    assert float(np.max(pot) - np.min(pot)) == 0.0
