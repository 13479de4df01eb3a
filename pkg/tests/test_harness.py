import numpy as np
import pytest

from affinesphere.const import ROLE_GRAPH
from affinesphere.geometry import (
    BallPotential,
    ConvexDomain,
    GridPotential,
    GridSpec,
    HyperboloidPotential,
    PolynomialPotential,
    ProjectiveMap,
    QuadraticPotential,
    builtin_potential,
    conormal_suite,
    duality_suite,
    fubini_pick_suite,
    legendre_suite,
    legendre_transform,
    solve_affine_sphere,
)
from affinesphere.geometry.errors import OutsideDomainError, StudyError
from affinesphere.geometry.invariants import coincidence_defect, geodesic_length
from affinesphere.geometry.harness import (
    convergence_order,
    divergence_study,
    equivariance_suite,
    grad_estimate_sample,
    gradient_estimate_scan,
    gradient_ratio,
    gradient_ratio_direct,
    order_from_errors,
    random_projective_maps,
    solver_equivariance,
)


def test__gradient_ratio_on_the_hyperboloid():
    f = HyperboloidPotential(1)
    assert gradient_ratio(f, [1.0]) == pytest.approx(1.0 / np.sqrt(2.0), rel=1e-12)
    assert gradient_ratio(f, [0.0]) == pytest.approx(0.0, abs=1e-15)
    assert gradient_ratio_direct(f, [1.0]) == pytest.approx(1.0 / np.sqrt(2.0), rel=1e-8)


def test__gradient_ratio_paths_agree_in_two_dimensions():
    f = PolynomialPotential((1.0, 0.5, 0.25), dim=2)
    for x in ([0.3, -0.2], [0.5, 0.25]):
        assert gradient_ratio_direct(f, x) == pytest.approx(gradient_ratio(f, x), rel=1e-8)


def test__grad_estimate_sample_fields():
    sample = grad_estimate_sample(HyperboloidPotential(1), [1.0], 2.0)
    assert sample.f == pytest.approx(np.sqrt(2.0))
    assert sample.v == pytest.approx(-1.0 / np.sqrt(2.0))
    assert sample.w == pytest.approx(np.sqrt(2.0))
    assert sample.q == pytest.approx(np.sqrt(2.0 - np.sqrt(2.0)) / np.sqrt(2.0))


def test__gradient_estimate_scan_matches_the_one_dimensional_oracle():
    report = gradient_estimate_scan(HyperboloidPotential(1), 2.0)
    oracle = report.measurements["oracle"]
    assert oracle > 0
    assert report.criteria["finite"]
    assert 0.9 * oracle <= report.fitted["C"] <= oracle + 1e-9


def test__gradient_estimate_scan_rejects_empty_levels():
    with pytest.raises(StudyError):
        gradient_estimate_scan(HyperboloidPotential(1), 0.0)
    with pytest.raises(StudyError):
        gradient_estimate_scan(HyperboloidPotential(1), 0.5)


def test__hyperboloid_lengths_grow_by_a_decade_log():
    report = divergence_study(HyperboloidPotential(1), [1.0], 4)
    assert report.parameters["chart"] == "unbounded"
    assert report.passed
    assert report.measurements["increments"][-1] == pytest.approx(np.log(10.0), abs=1e-2)


def test__ball_potential_lengths_diverge_at_the_boundary():
    report = divergence_study(BallPotential(2), [1.0, 0.0], 3)
    assert report.parameters["chart"] == "bounded"
    assert report.passed
    assert report.measurements["lengths"][1] == pytest.approx(np.arctanh(0.9), rel=1e-6)
    assert report.measurements["increments"][-1] == pytest.approx(0.5 * np.log(10.0), abs=1e-2)


def test__divergence_base_outside_the_domain():
    with pytest.raises(StudyError):
        divergence_study(BallPotential(2), [1.0, 0.0], 2, base=[2.0, 0.0])


def test__order_from_errors():
    assert order_from_errors([0.1, 0.05, 0.025], [1e-16, 0.0, 1e-15])["order"] == "exact"
    result = order_from_errors([0.1, 0.05, 0.025], [1e-2, 2.5e-3, 6.25e-4])
    assert result["order"] == pytest.approx(2.0)
    assert result["monotone"]
    assert not order_from_errors([0.1, 0.05, 0.025], [1e-2, 2e-2, 1e-3])["monotone"]
    with pytest.raises(StudyError):
        order_from_errors([0.1, 0.05], [1e-2, 2.5e-3])


def test__convergence_needs_a_closed_form_solution():
    with pytest.raises(StudyError):
        convergence_order(ConvexDomain.square(), [17, 33, 65])


def test__random_maps_are_normalized_and_positive_on_the_disk():
    domain = ConvexDomain.disk()
    maps = random_projective_maps(4, 2, seed=7, projective=True, domain=domain)
    assert len(maps) == 4
    for a in maps:
        assert abs(np.linalg.det(a.matrix)) == pytest.approx(1.0)
        assert a.lam([0.0, 0.0]) > 0


def test__equivariance_under_identity_and_random_maps():
    u = BallPotential(2)
    maps = [ProjectiveMap.identity(2)] + random_projective_maps(
        3, 2, seed=42, projective=True, domain=ConvexDomain.disk()
    )
    report = equivariance_suite(u, maps, samples=5)
    assert report.rows[0]["residual"] <= 1e-12
    assert report.passed


def test__equivariance_needs_a_bounded_chart():
    with pytest.raises(StudyError):
        equivariance_suite(builtin_potential("hyperboloid", dim=2), [ProjectiveMap.identity(2)])


def test__legendre_suite_passes():
    potentials = [HyperboloidPotential(2), PolynomialPotential((0.0, 0.5, 0.25), dim=2)]
    report = legendre_suite(potentials, samples=50)
    assert report.passed, report.measurements


def test__fubini_pick_and_conormal_suites_pass():
    assert fubini_pick_suite(samples=20).passed
    assert fubini_pick_suite(dim=1, samples=20).passed
    assert conormal_suite(samples=20).passed


def test__duality_suite_passes():
    report = duality_suite([BallPotential(2), builtin_potential("quadratic", dim=2)], samples=10)
    assert report.passed, report.measurements


def test__interval_convergence_reproduces_the_solution():
    report = convergence_order(ConvexDomain.interval(), [65, 129, 257])
    assert report.passed, report.measurements
    assert report.measurements["order"] == "exact"
    assert max(report.measurements["errors"]) <= 1e-8


def test__disk_convergence_reproduces_the_solution():
    report = convergence_order(ConvexDomain.disk(), [33, 65, 129])
    assert report.passed, report.measurements
    assert report.measurements["order"] == "exact"


@pytest.mark.slow
def test__solver_commutes_with_diagonal_maps():
    a = ProjectiveMap.affine(np.diag([np.sqrt(2.0), 1.0 / np.sqrt(2.0)]))
    report = solver_equivariance(ConvexDomain.disk(), a, nodes=65)
    assert report.passed, report.measurements


def test__unresolved_grid_steps_are_not_measured():
    grid = GridSpec.build(ConvexDomain.interval(), 129)
    analytic = QuadraticPotential(-1.0, np.eye(1))
    u = GridPotential(grid, grid.sample(analytic.value))
    report = divergence_study(u, [1.0], 4)
    lengths = report.measurements["lengths"]
    assert report.measurements["measured_steps"] == 1
    assert lengths[2:] == [None, None, None]
    assert report.measurements["increments"][1:] == [None, None, None]
    assert lengths[1] == pytest.approx(geodesic_length(analytic, [1.0], 0.0, 0.9), abs=1e-2)
    assert not report.criteria["measured"]
    assert not report.passed
    assert [row["measured"] for row in report.rows] == [True, True, False, False, False]


def test__solved_interval_lengths_diverge_at_the_boundary():
    domain = ConvexDomain.interval()
    u, _ = solve_affine_sphere(domain, GridSpec.build(domain, 257))
    report = divergence_study(u, [1.0], 4)
    assert report.measurements["measured_steps"] == 2
    assert report.passed, report.measurements
    exact = divergence_study(BallPotential(1), [1.0], 2).measurements["lengths"]
    assert report.measurements["lengths"][:3] == pytest.approx(exact, rel=1e-5)
    assert report.measurements["increments"][1] >= 0.5


@pytest.mark.slow
def test__solved_disk_lengths_diverge_at_the_boundary():
    domain = ConvexDomain.disk()
    u, _ = solve_affine_sphere(domain, GridSpec.build(domain, 257))
    report = divergence_study(u, [1.0, 0.0], 3)
    assert report.measurements["measured_steps"] == 2
    assert report.passed, report.measurements
    assert report.measurements["lengths"][1] == pytest.approx(np.arctanh(0.9), rel=1e-4)


def test__solved_disk_is_an_affine_sphere_in_the_interior():
    domain = ConvexDomain.disk()
    grid = GridSpec.build(domain, 65)
    u, _ = solve_affine_sphere(domain, grid)
    inner = grid.points[np.linalg.norm(grid.points, axis=1) <= 0.85]
    assert len(inner) > 100
    worst = max(abs(coincidence_defect(u, t)) for t in inner)
    assert worst <= 5e-3


def test__scan_finds_the_minimum_of_the_hyperboloid():
    report = gradient_estimate_scan(HyperboloidPotential(2), 2.0, nodes=33)
    coarse = report.measurements["coarse"]
    assert coarse["base_point"] == pytest.approx([0.0, 0.0], abs=coarse["spacing"])
    assert coarse["nodes"] > 0
    assert report.criteria["finite"]


@pytest.mark.slow
@pytest.mark.parametrize("h", [2.0, 4.0, 8.0])
def test__two_dimensional_gradient_estimate_is_stable_under_refinement(h):
    report = gradient_estimate_scan(HyperboloidPotential(2), h)
    assert report.passed, report.measurements
    assert report.rows[1]["nodes"] == 2 * report.rows[0]["nodes"] - 1
    assert 0.0 < report.fitted["C"] < np.inf


def test__resampled_legendre_transform_of_a_grid_quadratic():
    a = np.diag([1.0, 2.0])
    grid = GridSpec.build(ConvexDomain.disk(), 129)
    f = GridPotential(grid, grid.sample(lambda x: 0.5 * x @ a @ x), role=ROLE_GRAPH)
    pair = legendre_transform(f)
    for x in ([0.2, 0.1], [-0.3, 0.25], [0.0, -0.4]):
        x = np.asarray(x)
        y = a @ x
        assert pair.v.contains(y)
        tolerance = 2.0 * grid.h * (np.linalg.norm(x) + grid.h)
        assert pair.v.value(y) == pytest.approx(0.5 * x @ a @ x, abs=tolerance)
        assert pair.v.gradient(y) == pytest.approx(x, abs=grid.h)
        assert pair.v.hessian(y) == pytest.approx(np.linalg.inv(a), abs=1e-8)
    with pytest.raises(OutsideDomainError):
        pair.v.value([5.0, 5.0])
