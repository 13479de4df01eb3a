import dataclasses
import logging
import typing

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from ..const import (
    CONTINUATION_STAGES,
    DISTANCE_INIT_SCALE,
    INTERIOR_REGION_RADIUS,
    LINEAR_RELATIVE_RESIDUAL,
    MIN_NODES_PER_AXIS,
    PD_RELATIVE_TOLERANCE,
    ROLE_FACTOR,
    SOLVER_MAX_HALVINGS,
    SOLVER_MAX_ITERATIONS,
    SOLVER_TOLERANCE,
)
from .abc import Potential
from .domain import ConvexDomain, GridSpec
from .errors import (
    DampingExhaustedError,
    LinearSolveError,
    PreconditionError,
)
from .event_target import EventTarget
from .potentials import GridPotential

__all__ = [
    "AffineSphereSolver",
    "PerturbationFactor",
    "SolverConfig",
    "SolverReport",
    "StageHistory",
    "discrete_residual",
    "distance_init",
    "interior_error",
    "interior_region",
    "perturbation_factor",
    "poisson_init",
    "potential_hessians",
    "solve_affine_sphere",
]

logger = logging.getLogger(__name__)

EVENT_PHASE = "phase"
EVENT_STAGE = "stage"
EVENT_ITERATION = "iteration"
EVENT_DAMPING = "damping"

INIT_POISSON = "poisson"
INIT_DISTANCE = "distance"

PHASE_PRE = "pre"
PHASE_NEWTON = "newton"


@dataclasses.dataclass(frozen=True)
class SolverConfig:
    level: int = 129
    tolerance: float = SOLVER_TOLERANCE
    max_iterations: int = SOLVER_MAX_ITERATIONS
    max_halvings: int = SOLVER_MAX_HALVINGS
    linear_residual: float = LINEAR_RELATIVE_RESIDUAL
    stages: tuple[float, ...] = CONTINUATION_STAGES
    init: str = INIT_POISSON
    always_continue: bool = False

    def __post_init__(self) -> None:
        if self.level < 3:
            raise ValueError("level must be at least 3 nodes per axis")
        if self.tolerance <= 0 or self.linear_residual <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iterations < 1 or self.max_halvings < 1:
            raise ValueError("iteration caps must be at least 1")
        stages = tuple(self.stages)
        if not stages or stages[-1] != 1.0 or stages[0] <= 0 or any(b <= a for a, b in zip(stages, stages[1:])):
            raise ValueError("continuation stages must be positive, increase and end at 1.0")
        if self.init not in (INIT_POISSON, INIT_DISTANCE):
            raise ValueError(f"unknown initial guess {self.init!r}")
        object.__setattr__(self, "stages", stages)


@dataclasses.dataclass
class StageHistory:
    """Residual norms of one phase at one exponent scale.

    Pre-phase entries hold the l2 norm of the scaled residual, Newton entries
    the max norm of the log residual.
    """

    scale: float
    phase: str
    residuals: list[float] = dataclasses.field(default_factory=list)
    converged: bool = False


@dataclasses.dataclass
class SolverReport:
    iterations: int = 0
    histories: list[StageHistory] = dataclasses.field(default_factory=list)
    damping_events: list[tuple[int, int]] = dataclasses.field(default_factory=list)
    stages: list[float] = dataclasses.field(default_factory=list)
    pre_phase_iterations: int = 0
    converged: bool = False
    interior_error: float | None = None
    min_u: float = float("nan")
    max_u: float = float("nan")
    min_eigenvalue: float = float("nan")

    @property
    def residuals(self) -> list[float]:
        """Newton history of the last stage."""
        for history in reversed(self.histories):
            if history.phase == PHASE_NEWTON:
                return history.residuals
        return []

    @property
    def final_residual(self) -> float:
        residuals = self.residuals
        return residuals[-1] if residuals else float("nan")

    @property
    def certified(self) -> bool:
        return self.max_u < 0 and self.min_eigenvalue > 0

    def as_dict(self) -> dict[str, typing.Any]:
        out = dataclasses.asdict(self)
        out["residuals"] = list(self.residuals)
        out["final_residual"] = self.final_residual
        out["certified"] = self.certified
        return out


def _exponent(dim: int, scale: float) -> float:
    """Power of psi in the residual written for psi = u^2."""
    return 0.5 * (scale * (dim + 2) - 3 * dim)


def _positive_definite_rows(m: np.ndarray) -> np.ndarray:
    eig = np.linalg.eigvalsh(m)
    trace = np.abs(np.trace(m, axis1=1, axis2=2))
    return eig[:, 0] > PD_RELATIVE_TOLERANCE * (1.0 + trace)


def _log_residual(grid: GridSpec, psi: np.ndarray, scale: float) -> np.ndarray:
    _, _, m = grid.root_parts(psi)
    n = grid.dim
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.linalg.slogdet(m)[1] - n * np.log(4.0) + _exponent(n, scale) * np.log(psi)
    out[(psi <= 0) | ~_positive_definite_rows(m)] = np.nan
    return out


def discrete_residual(grid: GridSpec, values: np.ndarray, *, exponent_scale: float = 1.0) -> np.ndarray:
    """G = log det D^2 u + s (n+2) log(-u) at every interior node.

    The Hessian is taken through psi = u^2, which the exact solutions on
    ellipsoids make quadratic: D^2 u = (grad psi grad psi^T - 2 psi D^2 psi) / (4 psi^(3/2)).
    Nodes where u >= 0 or that Hessian is not positive definite give nan.
    """
    values = np.asarray(values, dtype=float)
    out = _log_residual(grid, values**2, exponent_scale)
    out[values >= 0] = np.nan
    return out


def potential_hessians(grid: GridSpec, values: np.ndarray) -> np.ndarray:
    """Discrete Hessians of a negative potential, shape (m, n, n)."""
    psi = np.asarray(values, dtype=float) ** 2
    _, _, m = grid.root_parts(psi)
    return m / (4.0 * psi**1.5)[:, None, None]


def _admissible(grid: GridSpec, psi: np.ndarray) -> bool:
    if not np.all(np.isfinite(psi)) or np.any(psi <= 0):
        return False
    _, _, m = grid.root_parts(psi)
    return bool(np.all(_positive_definite_rows(m)))


def interior_region(grid: GridSpec, radius: float = INTERIOR_REGION_RADIUS) -> np.ndarray:
    """Interior nodes whose boundary distance is at least (1 - radius) of the largest one."""
    dist = grid.domain.boundary_distance(grid.points)
    return dist >= (1.0 - radius) * float(dist.max())


def interior_error(u: GridPotential, reference: Potential, *, radius: float = INTERIOR_REGION_RADIUS) -> float:
    region = interior_region(u.grid, radius)
    exact = np.array([reference.value(p) for p in u.grid.points[region]])
    return float(np.max(np.abs(u.node_values[region] - exact)))


def _solve_linear(matrix: scipy.sparse.spmatrix, rhs: np.ndarray, tolerance: float) -> np.ndarray:
    a = matrix.tocsc()
    x = scipy.sparse.linalg.spsolve(a, rhs)
    scale = max(float(np.linalg.norm(rhs)), np.finfo(float).tiny)
    residual = rhs - a @ x
    if np.linalg.norm(residual) > tolerance * scale and np.all(np.isfinite(x)):
        x = x + scipy.sparse.linalg.spsolve(a, residual)
        residual = rhs - a @ x
    if not np.all(np.isfinite(x)) or np.linalg.norm(residual) > tolerance * scale:
        raise LinearSolveError(
            f"linear solve missed relative residual {tolerance:.1e} "
            f"({float(np.linalg.norm(residual)) / scale:.3e})"
        )
    return x


def poisson_init(domain: ConvexDomain, grid: GridSpec) -> GridPotential:
    """u0 = -sqrt(psi) with  Laplace(psi) = -2n  and psi = 0 on the boundary."""
    if grid.domain is not domain and grid.domain != domain:
        raise ValueError("grid was built for another domain")
    rhs = np.full(grid.size, -2.0 * grid.dim)
    psi = _solve_linear(grid.laplacian(), rhs, LINEAR_RELATIVE_RESIDUAL)
    if np.any(psi <= 0):
        raise LinearSolveError("poisson initial guess is not positive inside the domain")
    return GridPotential(grid, -np.sqrt(psi), dirichlet=True)


def distance_init(domain: ConvexDomain, grid: GridSpec, *, scale: float = DISTANCE_INIT_SCALE) -> GridPotential:
    """u0 = -sqrt(scale * distance to the boundary)."""
    return GridPotential(grid, -np.sqrt(scale * domain.boundary_distance(grid.points)), dirichlet=True)


class AffineSphereSolver(EventTarget):
    """Damped Newton solver for det D^2 u = (-1/u)^(n+2), u = 0 on the boundary.

    The unknown is psi = u^2 at the interior nodes. Iterates stay positive
    with a positive definite discrete Hessian of u; a stalled solve is retried
    along the exponent stages of the config.

    Events: `phase(name)`, `stage(scale)`, `iteration(stage, index, residual)`
    and `damping(index, halvings)`.
    """

    __slots__ = ("_domain", "_grid", "_config", "_operators", "_gradients", "_report")

    def __init__(self, domain: ConvexDomain, grid: GridSpec | None = None, config: SolverConfig | None = None) -> None:
        super().__init__()
        self._config = config or SolverConfig()
        self._domain = domain
        self._grid = grid or GridSpec.build(domain, self._config.level)
        if min(self._grid.shape) < MIN_NODES_PER_AXIS:
            raise PreconditionError(f"grid needs at least {MIN_NODES_PER_AXIS} nodes per axis")
        self._operators = self._grid.hessian_operators()
        self._gradients = self._grid.gradient_operators()
        self._report = SolverReport()

    @property
    def grid(self) -> GridSpec:
        return self._grid

    @property
    def config(self) -> SolverConfig:
        return self._config

    @property
    def report(self) -> SolverReport:
        """Report of the latest solve, filled in as far as it got."""
        return self._report

    def _trace_operator(self, weights: np.ndarray) -> scipy.sparse.spmatrix:
        """sum_ij W_ij (D^2 .)_ij for symmetric per-node weights W."""
        ops = self._operators
        out = scipy.sparse.diags(weights[:, 0, 0]) @ ops[(0, 0)]
        if self._grid.dim == 2:
            out = out + scipy.sparse.diags(weights[:, 1, 1]) @ ops[(1, 1)]
            out = out + scipy.sparse.diags(2.0 * weights[:, 0, 1]) @ ops[(0, 1)]
        return out

    def _linearized(self, psi: np.ndarray, weights: np.ndarray, grad: np.ndarray, hess: np.ndarray) -> scipy.sparse.spmatrix:
        """delta -> tr(W dM) for dM = grad psi grad delta^T + grad delta grad psi^T - 2 delta D^2 psi - 2 psi D^2 delta."""
        w = np.einsum("kij,kj->ki", weights, grad)
        out = self._trace_operator(-2.0 * psi[:, None, None] * weights)
        out = out + scipy.sparse.diags(-2.0 * np.einsum("kij,kji->k", weights, hess))
        for k, op in enumerate(self._gradients):
            out = out + scipy.sparse.diags(2.0 * w[:, k]) @ op
        return out

    def _log_jacobian(self, psi: np.ndarray, scale: float) -> scipy.sparse.spmatrix:
        grad, hess, m = self._grid.root_parts(psi)
        power = _exponent(self._grid.dim, scale)
        return self._linearized(psi, np.linalg.inv(m), grad, hess) + scipy.sparse.diags(power / psi)

    def _scaled_residual(self, psi: np.ndarray, scale: float) -> np.ndarray:
        """det D^2 u (-u)^(s(n+2)) - 1, written as det M psi^p / 4^n - 1."""
        _, _, m = self._grid.root_parts(psi)
        n = self._grid.dim
        return np.linalg.det(m) * psi ** _exponent(n, scale) / 4.0**n - 1.0

    def _scaled_jacobian(self, psi: np.ndarray, scale: float) -> scipy.sparse.spmatrix:
        grad, hess, m = self._grid.root_parts(psi)
        n = self._grid.dim
        power = _exponent(n, scale)
        det = np.linalg.det(m)
        if n == 1:
            cof = np.ones_like(m)
        else:
            cof = np.empty_like(m)
            cof[:, 0, 0] = m[:, 1, 1]
            cof[:, 1, 1] = m[:, 0, 0]
            cof[:, 0, 1] = cof[:, 1, 0] = -m[:, 0, 1]
        weight = psi**power / 4.0**n
        core = self._linearized(psi, cof, grad, hess)
        return scipy.sparse.diags(weight) @ core + scipy.sparse.diags(det * power * psi ** (power - 1.0) / 4.0**n)

    def _pre_phase(self, psi: np.ndarray, scale: float) -> np.ndarray:
        """Newton on the scaled residual until the iterate becomes admissible."""
        cfg = self._config
        history = StageHistory(scale, PHASE_PRE)
        self._report.histories.append(history)
        self.dispatch_event(EVENT_PHASE, PHASE_PRE)
        logger.info("iterate is not admissible at stage %.2f, starting pre-phase", scale)
        for iteration in range(cfg.max_iterations):
            if _admissible(self._grid, psi):
                history.converged = True
                return psi
            res = self._scaled_residual(psi, scale)
            norm = float(np.linalg.norm(res))
            history.residuals.append(norm)
            step = _solve_linear(self._scaled_jacobian(psi, scale), -res, cfg.linear_residual)
            alpha = 1.0
            for halving in range(cfg.max_halvings):
                candidate = psi + alpha * step
                if np.all(candidate > 0) and np.linalg.norm(self._scaled_residual(candidate, scale)) < norm:
                    break
                alpha *= 0.5
            else:
                raise DampingExhaustedError(f"pre-phase damping exhausted at iteration {iteration}")
            if halving:
                self.dispatch_event(EVENT_DAMPING, iteration, halving)
            logger.debug("pre-phase iteration %d: residual %.3e, step %.3g", iteration, norm, alpha)
            self._report.pre_phase_iterations += 1
            psi = candidate
        if not _admissible(self._grid, psi):
            raise DampingExhaustedError("pre-phase did not reach an admissible iterate")
        history.converged = True
        return psi

    def _newton(self, psi: np.ndarray, scale: float) -> np.ndarray:
        """Damped Newton iteration on the log residual for one exponent scale."""
        cfg = self._config
        report = self._report
        history = StageHistory(scale, PHASE_NEWTON)
        report.histories.append(history)
        report.stages.append(scale)
        self.dispatch_event(EVENT_STAGE, scale)
        residual = _log_residual(self._grid, psi, scale)
        norm = float(np.max(np.abs(residual)))

        for _ in range(cfg.max_iterations):
            history.residuals.append(norm)
            self.dispatch_event(EVENT_ITERATION, scale, report.iterations, norm)
            logger.debug("stage %.2f iteration %d: residual %.3e", scale, report.iterations, norm)
            if norm <= cfg.tolerance:
                history.converged = True
                return psi
            step = _solve_linear(self._log_jacobian(psi, scale), -residual, cfg.linear_residual)
            alpha = 1.0
            for halving in range(cfg.max_halvings):
                candidate = psi + alpha * step
                if np.all(candidate > 0):
                    trial = _log_residual(self._grid, candidate, scale)
                    trial_norm = float(np.max(np.abs(trial)))
                    if np.isfinite(trial_norm) and trial_norm < norm:
                        break
                alpha *= 0.5
            else:
                raise DampingExhaustedError(
                    f"damping exhausted at iteration {report.iterations} (residual {norm:.3e})"
                )
            if halving:
                report.damping_events.append((report.iterations, halving))
                self.dispatch_event(EVENT_DAMPING, report.iterations, halving)
            report.iterations += 1
            psi, residual, norm = candidate, trial, trial_norm

        history.residuals.append(norm)
        if norm <= cfg.tolerance:
            history.converged = True
            return psi
        raise DampingExhaustedError(f"no convergence after {cfg.max_iterations} iterations (residual {norm:.3e})")

    def _stage(self, psi: np.ndarray, scale: float) -> np.ndarray:
        if not _admissible(self._grid, psi):
            psi = self._pre_phase(psi, scale)
        self.dispatch_event(EVENT_PHASE, PHASE_NEWTON)
        return self._newton(psi, scale)

    def _initial(self) -> GridPotential:
        if self._config.init == INIT_DISTANCE:
            return distance_init(self._domain, self._grid)
        return poisson_init(self._domain, self._grid)

    def solve(self, initial: GridPotential | None = None, *, reference: Potential | None = None) -> tuple[GridPotential, SolverReport]:
        self._report = SolverReport()
        start_values = (initial or self._initial()).node_values
        if np.any(start_values >= 0):
            raise PreconditionError("initial guess must be negative at every interior node")
        start = start_values**2
        logger.info("solving on %s grid of %s", self._grid.shape, self._domain.kind.value)

        psi = None
        if not self._config.always_continue:
            try:
                psi = self._stage(start, 1.0)
            except DampingExhaustedError as e:
                logger.warning("solve stalled (%s), retrying with continuation %s", e, self._config.stages)
        if psi is None:
            psi = start
            for scale in self._config.stages:
                self.dispatch_event(EVENT_PHASE, "continuation")
                psi = self._stage(psi, scale)

        report = self._report
        report.converged = True
        values = -np.sqrt(psi)
        u = GridPotential(self._grid, values, dirichlet=True)
        report.min_u = float(values.min())
        report.max_u = float(values.max())
        report.min_eigenvalue = float(np.linalg.eigvalsh(potential_hessians(self._grid, values))[:, 0].min())
        if reference is not None:
            report.interior_error = interior_error(u, reference)
        logger.info(
            "converged after %d iterations, residual %.3e", report.iterations, report.final_residual
        )
        return u, report


def solve_affine_sphere(
    domain: ConvexDomain,
    grid: GridSpec | None = None,
    config: SolverConfig | None = None,
    *,
    initial: GridPotential | None = None,
    reference: Potential | None = None,
    listeners: dict[str, typing.Callable[..., None]] | None = None,
) -> tuple[GridPotential, SolverReport]:
    solver = AffineSphereSolver(domain, grid, config)
    for name, listener in (listeners or {}).items():
        solver.add_listener(name, listener)
    return solver.solve(initial, reference=reference)


class PerturbationFactor(GridPotential):
    """phi = u_bar / u_given at the interior nodes of the solution grid."""

    __slots__ = ("_given",)

    def __init__(self, grid: GridSpec, values: np.ndarray, given: np.ndarray) -> None:
        super().__init__(grid, values, role=ROLE_FACTOR)
        self._given = given

    @property
    def given_values(self) -> np.ndarray:
        return self._given

    @property
    def minimum(self) -> float:
        return float(self.node_values.min())

    @property
    def maximum(self) -> float:
        return float(self.node_values.max())

    def perturbed_values(self) -> np.ndarray:
        return self.node_values * self._given

    def equation_residual(self) -> np.ndarray:
        """Log residual of det (phi u)_ij = (-1/(phi u))^(n+2) with the discrete Hessian."""
        return discrete_residual(self.grid, self.perturbed_values())


def perturbation_factor(u_given: Potential, u_bar: GridPotential) -> PerturbationFactor:
    grid = u_bar.grid
    given = np.array([u_given.value(p) for p in grid.points])
    if np.any(given >= 0) or np.any(u_bar.node_values >= 0):
        raise PreconditionError("both potentials must be negative on the interior nodes")
    phi = u_bar.node_values / given
    logger.debug("perturbation factor in [%.6g, %.6g]", phi.min(), phi.max())
    return PerturbationFactor(grid, phi, given)
