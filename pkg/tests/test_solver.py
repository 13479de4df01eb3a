import numpy as np
import pytest

from affinesphere.geometry import (
    BallPotential,
    ConvexDomain,
    GridPotential,
    GridSpec,
    SolverConfig,
    builtin_potential,
    perturbation_factor,
    poisson_init,
    solve_affine_sphere,
)
from affinesphere.geometry.errors import DampingExhaustedError, PreconditionError
from affinesphere.geometry.solver import (
    EVENT_ITERATION,
    EVENT_PHASE,
    EVENT_STAGE,
    INIT_DISTANCE,
    PHASE_NEWTON,
    PHASE_PRE,
    AffineSphereSolver,
    discrete_residual,
    distance_init,
    interior_error,
    interior_region,
    potential_hessians,
)


def test__poisson_init_is_exact_on_the_interval_and_disk():
    for domain, nodes in ((ConvexDomain.interval(), 33), (ConvexDomain.disk(), 33)):
        grid = GridSpec.build(domain, nodes)
        u0 = poisson_init(domain, grid)
        exact = -np.sqrt(1.0 - np.einsum("mi,mi->m", grid.points, grid.points))
        assert np.max(np.abs(u0.node_values - exact)) < 1e-8


def test__poisson_init_on_the_square_is_negative():
    domain = ConvexDomain.square()
    u0 = poisson_init(domain, GridSpec.build(domain, 17))
    assert np.all(u0.node_values < 0)


def test__solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(tolerance=0.0)
    with pytest.raises(ValueError):
        SolverConfig(max_iterations=0)
    with pytest.raises(ValueError):
        SolverConfig(stages=(0.5, 0.9))
    with pytest.raises(ValueError):
        SolverConfig(init="zero")
    assert SolverConfig(stages=[0.5, 1.0]).stages == (0.5, 1.0)


def test__coarse_grids_are_rejected():
    with pytest.raises(PreconditionError):
        solve_affine_sphere(ConvexDomain.disk(), GridSpec.build(ConvexDomain.disk(), 9))


def test__discrete_residual_vanishes_on_the_ellipse_solution():
    domain = ConvexDomain.ellipse()
    grid = GridSpec.build(domain, 33)
    exact = grid.sample(BallPotential(2, semi_axes=(2.0, 1.0)).value)
    assert np.max(np.abs(discrete_residual(grid, exact))) < 1e-8
    assert np.all(np.isnan(discrete_residual(grid, -exact)))
    assert np.all(np.linalg.eigvalsh(potential_hessians(grid, exact))[:, 0] > 0)


def test__discrete_residual_flags_a_kink():
    grid = GridSpec.build(ConvexDomain.interval(), 17)
    values = -np.sqrt(1.0 - grid.points[:, 0] ** 2)
    values[grid.size // 2] *= 0.5
    residual = discrete_residual(grid, values)
    assert np.isnan(residual[grid.size // 2])
    assert np.isfinite(residual[0])


def test__interior_region_of_the_disk():
    grid = GridSpec.build(ConvexDomain.disk(), 33)
    region = interior_region(grid, 0.85)
    radii = np.linalg.norm(grid.points, axis=1)
    assert np.all(radii[region] <= 0.85 + 1e-12)
    assert region.sum() > 0


def test__interval_golden_solve():
    domain = ConvexDomain.interval()
    u, report = solve_affine_sphere(domain, GridSpec.build(domain, 257), reference=BallPotential(1))
    assert report.converged
    assert report.iterations <= 25
    assert report.final_residual <= 1e-9
    assert report.interior_error <= 5e-3
    assert report.certified
    assert np.all(u.node_values < 0)


def test__solver_events_follow_the_iterations():
    domain = ConvexDomain.disk()
    seen = {"iterations": 0, "stages": []}

    def on_iteration(stage, index, residual):
        seen["iterations"] += 1

    _, report = solve_affine_sphere(
        domain,
        GridSpec.build(domain, 33),
        listeners={EVENT_ITERATION: on_iteration, EVENT_STAGE: seen["stages"].append},
    )
    assert seen["iterations"] == len(report.residuals)
    assert seen["stages"] == report.stages == [1.0]
    assert all(b < a for a, b in zip(report.residuals, report.residuals[1:]))


def test__listener_failures_do_not_stop_the_solve():
    domain = ConvexDomain.interval()

    def broken(*args):
        raise RuntimeError("listener failure")

    _, report = solve_affine_sphere(domain, GridSpec.build(domain, 65), listeners={EVENT_ITERATION: broken})
    assert report.converged


def test__different_initial_guesses_agree():
    domain = ConvexDomain.interval()
    grid = GridSpec.build(domain, 65)
    u, _ = solve_affine_sphere(domain, grid)
    w, report = solve_affine_sphere(domain, grid, SolverConfig(level=65, init=INIT_DISTANCE))
    assert report.iterations > 0
    assert np.max(np.abs(u.node_values - w.node_values)) <= 1e-8


def test__distance_init_vanishes_like_a_square_root():
    domain = ConvexDomain.interval()
    grid = GridSpec.build(domain, 17)
    values = distance_init(domain, grid).node_values
    assert values ** 2 == pytest.approx(0.1 * (1.0 - np.abs(grid.points[:, 0])))
    assert np.all(np.isfinite(discrete_residual(grid, values)))


def test__pre_phase_repairs_an_inadmissible_start():
    domain = ConvexDomain.interval()
    grid = GridSpec.build(domain, 33)
    psi = 1.0 - grid.points[:, 0] ** 2
    middle = grid.size // 2
    psi[middle] += 5.0 * grid.h**2
    start = GridPotential(grid, -np.sqrt(psi))
    assert np.any(np.isnan(discrete_residual(grid, start.node_values)))

    phases = []
    u, report = solve_affine_sphere(domain, grid, initial=start, listeners={EVENT_PHASE: phases.append})
    assert phases[:2] == [PHASE_PRE, PHASE_NEWTON]
    assert report.pre_phase_iterations >= 1
    assert report.histories[0].phase == PHASE_PRE and report.histories[0].converged
    assert np.max(np.abs(u.node_values + np.sqrt(1.0 - grid.points[:, 0] ** 2))) <= 1e-8


def test__continuation_runs_every_exponent_stage():
    domain = ConvexDomain.interval()
    grid = GridSpec.build(domain, 33)
    direct, _ = solve_affine_sphere(domain, grid)
    u, report = solve_affine_sphere(domain, grid, SolverConfig(level=33, always_continue=True))
    assert report.stages == [0.5, 0.75, 1.0]
    assert [h.scale for h in report.histories if h.phase == PHASE_NEWTON] == [0.5, 0.75, 1.0]
    for history in report.histories:
        assert history.converged
        assert all(b < a for a, b in zip(history.residuals, history.residuals[1:]))
    assert report.final_residual <= 1e-9
    assert np.max(np.abs(u.node_values - direct.node_values)) <= 1e-8


def test__stalled_solve_falls_back_to_continuation(monkeypatch):
    newton = AffineSphereSolver._newton
    calls = []

    def stall_once(self, psi, scale):
        calls.append(scale)
        if len(calls) == 1:
            raise DampingExhaustedError("damping exhausted at iteration 0")
        return newton(self, psi, scale)

    monkeypatch.setattr(AffineSphereSolver, "_newton", stall_once)
    domain = ConvexDomain.interval()
    u, report = solve_affine_sphere(domain, GridSpec.build(domain, 33), reference=BallPotential(1))
    assert calls == [1.0, 0.5, 0.75, 1.0]
    assert report.stages == [0.5, 0.75, 1.0]
    assert report.converged
    assert report.interior_error <= 1e-8


def test__iteration_cap_keeps_stage_histories_apart():
    domain = ConvexDomain.interval()
    grid = GridSpec.build(domain, 33)
    solver = AffineSphereSolver(domain, grid, SolverConfig(level=33, max_iterations=1, init=INIT_DISTANCE))
    with pytest.raises(DampingExhaustedError):
        solver.solve()
    histories = solver.report.histories
    assert [h.scale for h in histories] == [1.0, 0.5]
    for history in histories:
        assert not history.converged
        assert len(history.residuals) == 2
        assert history.residuals[1] < history.residuals[0]


def test__disk_solve_at_65_nodes():
    domain = ConvexDomain.disk()
    u, report = solve_affine_sphere(domain, GridSpec.build(domain, 65), reference=BallPotential(2))
    assert report.final_residual <= 1e-9
    assert report.interior_error <= 5e-3
    assert report.certified
    assert u.dirichlet


@pytest.mark.slow
def test__disk_golden_solve():
    domain = ConvexDomain.disk()
    u, report = solve_affine_sphere(domain, GridSpec.build(domain, 129), reference=BallPotential(2))
    assert report.iterations <= 25
    assert report.final_residual <= 1e-9
    assert report.interior_error <= 5e-3
    assert report.certified
    assert interior_error(u, BallPotential(2)) == pytest.approx(report.interior_error)


@pytest.mark.slow
def test__square_solve_is_certified():
    domain = ConvexDomain.square()
    _, report = solve_affine_sphere(domain, GridSpec.build(domain, 33))
    assert report.final_residual <= 1e-9
    assert report.certified


def test__perturbation_factor_identities():
    domain = ConvexDomain.interval()
    grid = GridSpec.build(domain, 33)
    u_bar, _ = solve_affine_sphere(domain, grid)
    assert perturbation_factor(u_bar, u_bar).node_values == pytest.approx(np.ones(grid.size))
    doubled = GridPotential(grid, 2.0 * u_bar.node_values)
    assert perturbation_factor(doubled, u_bar).node_values == pytest.approx(np.full(grid.size, 0.5))
    with pytest.raises(PreconditionError):
        perturbation_factor(GridPotential(grid, -u_bar.node_values), u_bar)


def test__perturbation_of_the_quadratic_on_the_disk():
    domain = ConvexDomain.disk()
    grid = GridSpec.build(domain, 33)
    u_bar, report = solve_affine_sphere(domain, grid)
    phi = perturbation_factor(builtin_potential("quadratic", dim=2, domain=domain), u_bar)
    assert phi.minimum > 0
    assert np.isfinite(phi.maximum)
    assert np.max(np.abs(phi.equation_residual())) <= report.final_residual + 1e-6


def test__unsubscribed_listeners_are_not_called():
    domain = ConvexDomain.interval()
    solver = AffineSphereSolver(domain, GridSpec.build(domain, 33))
    calls = []
    unsubscribe = solver.add_listener(EVENT_ITERATION, lambda *args: calls.append(args))
    assert unsubscribe()
    assert not unsubscribe()
    solver.solve()
    assert calls == []
    assert solver.dispatch_event(EVENT_ITERATION, 1.0, 0, 0.0) == 0
