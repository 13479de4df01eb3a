import numpy as np
import pytest
import voluptuous as vol

from affinesphere.geometry import (
    BallPotential,
    ConvexDomain,
    GridPotential,
    GridSpec,
    HyperboloidPotential,
    Jet,
    PolynomialPotential,
    QuadraticPotential,
    RadialGraphPotential,
    builtin_potential,
    domain_from_spec,
    exact_solution,
    hessian_at,
    load_potential_spec,
)
from affinesphere.geometry.errors import OutsideDomainError, TangencyError
from affinesphere.geometry.invariants import affine_sphere_residual
from affinesphere.geometry.potentials import radial_graph_jet


def test__hessian_examples():
    quadratic = builtin_potential("quadratic", dim=2)
    assert np.asarray(hessian_at(quadratic, (0.0, 0.0))) == pytest.approx(0.5 * np.eye(2))
    ball = hessian_at(BallPotential(2), (0.0, 0.0))
    assert ball.matrix == pytest.approx(np.eye(2))
    assert ball.positive_definite
    constant = hessian_at(QuadraticPotential(-1.0, np.zeros((2, 2))), (0.3, 0.1))
    assert constant.matrix == pytest.approx(np.zeros((2, 2)))
    assert not constant.positive_definite


def test__hessian_outside_the_domain_is_rejected():
    with pytest.raises(OutsideDomainError):
        hessian_at(BallPotential(2), (1.0, 1.0))


@pytest.mark.parametrize("semi_axes", [(1.0, 1.0), (2.0, 1.0), (0.5, 3.0)])
def test__ellipsoid_solutions_solve_the_equation(semi_axes):
    u = BallPotential(2, center=(0.3, -0.1), semi_axes=semi_axes)
    rng = np.random.default_rng(1)
    for q in rng.uniform(-0.6, 0.6, size=(10, 2)):
        t = np.array([0.3, -0.1]) + q * np.asarray(semi_axes)
        assert affine_sphere_residual(u, t) == pytest.approx(0.0, abs=1e-12)


def test__interval_solution():
    u = exact_solution(ConvexDomain.interval())
    assert u.value(0.6) == pytest.approx(-0.8)
    assert affine_sphere_residual(u, 0.6) == pytest.approx(0.0, abs=1e-12)
    assert exact_solution(ConvexDomain.square()) is None


def test__analytic_third_derivatives_match_differences():
    f = PolynomialPotential((0.0, 0.5, 0.25, 0.1), dim=2)
    x = np.array([0.4, -0.3])
    step = 1e-5
    numeric = np.stack(
        [(f.hessian(x + step * e) - f.hessian(x - step * e)) / (2 * step) for e in np.eye(2)], axis=-1
    )
    assert f.third(x) == pytest.approx(numeric, abs=1e-7)


def test__grid_potential_is_exact_on_quadratics():
    grid = GridSpec.build(ConvexDomain.disk(), 17)
    u = QuadraticPotential(-1.0, 0.5 * np.eye(2))
    g = GridPotential(grid, grid.sample(u.value))
    assert np.max(np.abs(g.node_hessians - 0.5 * np.eye(2))) < 1e-10
    assert np.max(np.abs(g.node_gradients - 0.5 * grid.points)) < 1e-10
    node = grid.points[len(grid.points) // 2]
    assert g.value(node) == pytest.approx(u.value(node))
    assert g.lambda_min() == pytest.approx(np.full(grid.size, 0.5))


def test__grid_potential_interpolates_and_refuses_the_exterior():
    grid = GridSpec.build(ConvexDomain.disk(), 33)
    u = QuadraticPotential(-1.0, 0.5 * np.eye(2))
    g = GridPotential(grid, grid.sample(u.value))
    assert g.value((0.01, 0.02)) == pytest.approx(u.value((0.01, 0.02)), abs=grid.h**2)
    assert g.interpolable((0.1, 0.1))
    assert not g.interpolable((0.99, 0.0))
    with pytest.raises(OutsideDomainError):
        g.value((0.99, 0.0))


def test__boundary_vanishing_grid_potential_is_exact_on_the_ellipse_solution():
    domain = ConvexDomain.ellipse()
    u = exact_solution(domain)
    grid = GridSpec.build(domain, 33)
    g = GridPotential(grid, grid.sample(u.value), dirichlet=True)
    near_wall = int(np.argmin(domain.boundary_distance(grid.points)))
    for k in (0, grid.size // 2, near_wall):
        p = grid.points[k]
        for got, expected in ((g.node_gradients[k], u.gradient(p)), (g.node_hessians[k], u.hessian(p))):
            assert np.max(np.abs(got - expected)) <= 1e-6 * np.max(np.abs(expected))
    for p in [(0.31, 0.17), (-1.2, 0.4)]:
        j = g.jet(p)
        assert j.value == pytest.approx(u.value(p), abs=1e-10)
        assert j.gradient == pytest.approx(u.gradient(p), abs=1e-8)
        assert j.hessian == pytest.approx(u.hessian(p), abs=1e-8)
    assert np.all(g.lambda_min() > 0)


def test__boundary_vanishing_grid_potential_must_be_negative():
    grid = GridSpec.build(ConvexDomain.interval(), 9)
    with pytest.raises(ValueError):
        GridPotential(grid, np.zeros(grid.size), dirichlet=True)


def test__grid_potential_needs_one_value_per_node():
    grid = GridSpec.build(ConvexDomain.interval(), 9)
    with pytest.raises(ValueError):
        GridPotential(grid, np.zeros(grid.size + 1))


def test__radial_graph_of_the_ball_is_the_hyperboloid():
    u = BallPotential(2)
    hyperboloid = HyperboloidPotential(2)
    for t in [(0.0, 0.0), (0.3, 0.4), (-0.6, 0.2)]:
        x, j = radial_graph_jet(u.jet(t), t)
        assert x == pytest.approx(-np.asarray(t) / u.value(t))
        expected = hyperboloid.jet(x)
        assert j.value == pytest.approx(expected.value)
        assert j.gradient == pytest.approx(expected.gradient)
        assert j.hessian == pytest.approx(expected.hessian)


def test__radial_graph_potential_finds_source_points():
    graph = RadialGraphPotential(BallPotential(2))
    x = np.array([1.0, 0.5])
    assert graph.value(x) == pytest.approx(np.sqrt(1.0 + x @ x))
    t = graph.source_point(x)
    assert -t / BallPotential(2).value(t) == pytest.approx(x)


def test__radial_graph_needs_transversality():
    with pytest.raises(TangencyError):
        radial_graph_jet(Jet(0.5, np.zeros(2), np.eye(2)), (0.0, 0.0))
    with pytest.raises(TangencyError):
        radial_graph_jet(Jet(-1.0, np.array([-2.0, 0.0]), np.eye(2)), (1.0, 0.0))


def test__potential_specs():
    u = load_potential_spec({"builtin": "ball", "n": 1})
    assert u.dim == 1
    assert u.value(0.0) == pytest.approx(-1.0)
    ellipse = load_potential_spec({"builtin": "ball", "domain": {"kind": "ellipse", "semi_axes": [2, 1]}})
    assert ellipse.value((0.0, 0.0)) == pytest.approx(-(2.0 ** (1.0 / 3.0)))
    poly = load_potential_spec({"builtin": "polynomial", "coefficients": [0, 0.5, 0.25]})
    assert poly.value((1.0, 0.0)) == pytest.approx(0.75)
    with pytest.raises(vol.Invalid):
        load_potential_spec({"builtin": "torus"})


def test__potential_spec_files(tmp_path):
    path = tmp_path / "p.json"
    path.write_text('{"builtin": "quadratic", "n": 2}', encoding="utf-8")
    u = load_potential_spec(path)
    assert u.value((0.0, 0.0)) == pytest.approx(-1.0)
    assert u.is_potential


def test__domain_shorthands():
    assert domain_from_spec("square").contains((0.9, -0.9))
    assert domain_from_spec("disk", dim=1).dim == 1
    assert domain_from_spec({"kind": "disk", "radius": 2.0}).contains((1.5, 0.0))
