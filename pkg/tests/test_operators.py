import numpy as np
import pytest

from ekflow.grid import (
    ANTISYMMETRIC,
    SYMMETRIC,
    GridSpec,
    ScalarField,
    VectorField,
)
from ekflow.operators import (
    div_advection,
    div_centered,
    grad_centered,
    grad_forward,
    jacobian_forward,
    laplacian5,
    sparse_divergence,
    sparse_gradient,
    sparse_laplacian,
)
from ekflow.verification import (
    check_advection_compatibility,
    check_inverse_inequality,
    check_mass_telescoping,
    check_sbp_cross,
    check_sbp_quadratic,
)


def grid2(K=8):
    return GridSpec(dim=2, K=K)


def test_grad_centered_constant_and_linear():
    g = grid2()
    const = ScalarField.constant(g, 3.0)
    out = grad_centered(const, SYMMETRIC)
    for c in out.components:
        np.testing.assert_array_equal(c, np.zeros(g.shape))

    x, _ = g.meshgrid()
    fx = grad_centered(ScalarField(g, x), SYMMETRIC)
    np.testing.assert_allclose(fx.components[0][1:-1, :], 1.0, atol=1e-13)
    np.testing.assert_allclose(fx.components[1], 0.0, atol=1e-13)


def test_grad_centered_quadratic_1d():
    g = GridSpec(dim=1, K=4)
    f = ScalarField(g, g.coords() ** 2)
    out = grad_centered(f, SYMMETRIC)
    # centered difference at node 2: (0.5625 - 0.0625) / 0.5 = 1.0
    assert out.components[0][2] == pytest.approx(1.0, abs=1e-14)


def test_grad_forward_examples():
    g = grid2()
    const = ScalarField.constant(g, -2.0)
    for c in grad_forward(const, SYMMETRIC).components:
        np.testing.assert_array_equal(c, np.zeros(g.shape))

    x, _ = g.meshgrid()
    out = grad_forward(ScalarField(g, 3.0 * x), SYMMETRIC)
    np.testing.assert_allclose(out.components[0][:-1, :], 3.0, atol=1e-12)
    np.testing.assert_allclose(out.components[0][-1, :], 0.0, atol=0.0)

    g1 = GridSpec(dim=1, K=2)
    out1 = grad_forward(ScalarField(g1, np.array([1.0, 2.0, 4.0])), SYMMETRIC)
    np.testing.assert_allclose(out1.components[0], [2.0, 4.0, 0.0])


def test_div_centered_examples():
    g = grid2()
    const = VectorField(g, (np.full(g.shape, 2.0), np.full(g.shape, -1.0)))
    out = div_centered(const, ANTISYMMETRIC)
    np.testing.assert_allclose(out.values[1:-1, 1:-1], 0.0, atol=0.0)
    # boundary: ghost flips sign, (f - (-f)) / 2h = f / h
    assert out.values[0, 4] == pytest.approx(2.0 / g.h)

    x, y = g.meshgrid()
    out = div_centered(VectorField(g, (x, y)), ANTISYMMETRIC)
    np.testing.assert_allclose(out.values[1:-1, 1:-1], 2.0, atol=1e-12)


def test_jacobian_forward_examples():
    g = grid2()
    const = VectorField(g, (np.ones(g.shape), np.ones(g.shape)))
    assert jacobian_forward(const).frobenius_sq_sum() == 0.0

    x, _ = g.meshgrid()
    tens = jacobian_forward(VectorField(g, (x, np.zeros(g.shape))))
    np.testing.assert_allclose(tens.entries[0, 0], 1.0, atol=1e-13)
    np.testing.assert_allclose(tens.entries[0, 1], 0.0, atol=0.0)
    np.testing.assert_allclose(tens.entries[1], 0.0, atol=0.0)


def test_laplacian_examples():
    g = grid2()
    x, y = g.meshgrid()
    lin = laplacian5(ScalarField(g, 2.0 * x - y), SYMMETRIC)
    np.testing.assert_allclose(lin.values[1:-1, 1:-1], 0.0, atol=1e-11)

    quad = laplacian5(ScalarField(g, x**2 + y**2), SYMMETRIC)
    np.testing.assert_allclose(quad.values[1:-1, 1:-1], 4.0, atol=1e-10)


def test_div_advection_zero_velocity():
    g = grid2()
    rho = ScalarField(g, 1.0 + np.random.default_rng(0).uniform(size=g.shape))
    out = div_advection(rho, VectorField.zero(g))
    for c in out.components:
        np.testing.assert_array_equal(c, np.zeros(g.shape))


def test_div_advection_hand_case_1d():
    g = GridSpec(dim=1, K=2)
    rho = ScalarField.constant(g, 1.0)
    u = VectorField(g, (np.array([0.0, 1.0, 0.0]),))
    out = div_advection(rho, u)
    assert out.components[0][1] == pytest.approx(0.0, abs=0.0)


def test_compatibility_identity_randomized():
    rng = np.random.default_rng(11)
    result = check_advection_compatibility(rng, cases_per_grid=100)
    assert result.cases >= 500
    assert result.passed, result.line()


def test_inverse_inequality_randomized():
    rng = np.random.default_rng(12)
    result = check_inverse_inequality(rng, cases_per_grid=50)
    assert result.cases >= 200
    assert result.passed, result.line()


def test_sbp_identities_randomized():
    rng = np.random.default_rng(13)
    for check in (check_sbp_quadratic, check_sbp_cross):
        result = check(rng, cases_per_grid=100)
        assert result.cases >= 500
        assert result.passed, result.line()


def test_divergence_telescoping_randomized():
    rng = np.random.default_rng(14)
    result = check_mass_telescoping(rng, cases_per_grid=100)
    assert result.passed, result.line()


@pytest.mark.parametrize("dim", [1, 2])
def test_sparse_forms_match_stencils(dim):
    rng = np.random.default_rng(21)
    g = GridSpec(dim=dim, K=6)
    f = ScalarField(g, rng.standard_normal(g.shape))
    for parity in (SYMMETRIC, ANTISYMMETRIC):
        mats = sparse_gradient(g, parity)
        grad = grad_centered(f, parity)
        for mat, comp in zip(mats, grad.components):
            np.testing.assert_allclose(
                (mat @ f.values.ravel()).reshape(g.shape), comp, atol=1e-13)
        lap = sparse_laplacian(g, parity) @ f.values.ravel()
        np.testing.assert_allclose(lap.reshape(g.shape),
                                   laplacian5(f, parity).values, atol=1e-10)
    v = VectorField(g, tuple(rng.standard_normal(g.shape) for _ in range(dim)))
    div_mats = sparse_divergence(g, ANTISYMMETRIC)
    assembled = sum(m @ c.ravel() for m, c in zip(div_mats, v.components))
    np.testing.assert_allclose(assembled.reshape(g.shape),
                               div_centered(v, ANTISYMMETRIC).values,
                               atol=1e-12)
