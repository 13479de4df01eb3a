import numpy as np
import pytest

from affinesphere.geometry import (
    ConvexDomain,
    GridPotential,
    GridSpec,
    HyperboloidPotential,
    PolynomialPotential,
    QuadraticPotential,
    duality_gap,
    gradient_identity_defect,
    legendre_transform,
)
from affinesphere.geometry.errors import ConvexityError, PreconditionError
from affinesphere.geometry.legendre import LegendrePotential, injectivity_margin, invert_gradient


def paraboloid(dim=2):
    return PolynomialPotential((0.0, 0.5), dim=dim)


def test__gradient_inversion_of_the_hyperboloid():
    y = np.array([0.5, 0.0])
    x = invert_gradient(HyperboloidPotential(2), y)
    assert x == pytest.approx(y / np.sqrt(1.0 - y @ y), rel=1e-10)


def test__gradient_inversion_rejects_concave_functions():
    concave = QuadraticPotential(0.0, -np.eye(2), role="graph")
    with pytest.raises(ConvexityError):
        invert_gradient(concave, (0.3, 0.1))


def test__quadratic_is_self_dual():
    v = legendre_transform(paraboloid()).v
    for y in [(0.0, 0.0), (0.3, -0.7), (2.0, 1.0)]:
        assert v.value(y) == pytest.approx(0.5 * np.dot(y, y), abs=1e-14)


def test__hyperboloid_transform_is_the_lower_hemisphere():
    v = legendre_transform(HyperboloidPotential(2)).v
    for y in [(0.0, 0.0), (0.3, 0.4), (-0.6, 0.5)]:
        assert v.value(y) == pytest.approx(-np.sqrt(1.0 - np.dot(y, y)), abs=1e-12)


def test__double_transform_returns_the_function():
    f = PolynomialPotential((0.0, 0.5, 0.25), dim=2)
    double = LegendrePotential(LegendrePotential(f))
    rng = np.random.default_rng(5)
    for x in rng.uniform(-0.7, 0.7, size=(20, 2)):
        assert double.value(x) == pytest.approx(f.value(x), abs=1e-10)


def test__gradient_identity_holds_for_analytic_pairs():
    assert gradient_identity_defect(legendre_transform(paraboloid()), (0.4, -1.2)) == pytest.approx(np.zeros(2), abs=1e-15)
    pair = legendre_transform(HyperboloidPotential(2))
    assert np.max(np.abs(gradient_identity_defect(pair, (1.0, 0.0)))) <= 1e-10


def test__gradient_identity_on_grids_shrinks_with_spacing():
    f = PolynomialPotential((0.0, 0.5, 0.25), dim=2)
    defects = []
    for nodes in (17, 33):
        grid = GridSpec.build(ConvexDomain.disk(), nodes)
        pair = legendre_transform(GridPotential(grid, grid.sample(f.value), role="graph"))
        defects.append(np.max(np.abs(gradient_identity_defect(pair, (0.25, 0.125)))))
    assert defects[1] < defects[0]
    assert defects[1] < 0.05


def test__duality_gap_examples():
    pair = legendre_transform(paraboloid())
    assert duality_gap(pair, (0.3, 0.4)) == pytest.approx(0.25)
    assert duality_gap(pair, (0.0, 0.0)) == pytest.approx(0.0, abs=1e-15)
    hyper = legendre_transform(HyperboloidPotential(2))
    x = np.array([0.6, 0.8])
    assert duality_gap(hyper, x) == pytest.approx(1.0 / np.sqrt(2.0), rel=1e-10)
    assert duality_gap(hyper, (0.0, 0.0)) == pytest.approx(0.0, abs=1e-14)


def test__duality_gap_needs_the_minimum_at_the_origin():
    shifted = PolynomialPotential((0.0, 0.5), dim=2, center=(0.5, 0.0))
    with pytest.raises(PreconditionError):
        duality_gap(legendre_transform(shifted), (0.1, 0.1))


def test__gradient_map_is_injective_with_a_margin():
    f = PolynomialPotential((0.0, 0.5, 0.25), dim=2)
    rng = np.random.default_rng(7)
    a = rng.uniform(-1, 1, size=(200, 2))
    b = rng.uniform(-1, 1, size=(200, 2))
    assert injectivity_margin(f, a, b) >= 1.0 - 1e-12


def test__inverse_map_undoes_the_gradient_map():
    pair = legendre_transform(HyperboloidPotential(2))
    x = np.array([0.3, 0.4])
    assert pair.inverse_map(pair.gradient_map(x)) == pytest.approx(x, rel=1e-8)


def test__grid_dual_covers_part_of_its_target_grid():
    grid = GridSpec.build(ConvexDomain.disk(), 17)
    pair = legendre_transform(GridPotential(grid, grid.sample(paraboloid().value), role="graph"))
    assert pair.v.covered.shape == grid.shape
    assert pair.v.covered.any()
