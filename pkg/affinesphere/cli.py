"""Command-line front door: ``python -m affinesphere <command> [flags]``."""

import argparse
import dataclasses
import json
import logging
import pathlib
import sys
import time
import typing

import numpy as np
import voluptuous as vol

from .const import (
    CONTINUATION_STAGES,
    DEFAULT_SEED,
    METRIC_AFFINE_GRAPH,
    METRIC_CENTROAFFINE,
    ROLE_GRAPH,
    SOLVER_MAX_ITERATIONS,
    SOLVER_TOLERANCE,
    VERSION,
)
from .export import output_lock, plain, write_csv, write_json
from .geometry.abc import Potential
from .geometry.domain import ConvexDomain, GridSpec
from .geometry.errors import AffineSphereError, ConfigError
from .geometry.harness import (
    StudyReport,
    conormal_suite,
    convergence_order,
    divergence_study,
    duality_suite,
    equivariance_suite,
    fubini_pick_suite,
    gradient_estimate_scan,
    legendre_suite,
    random_projective_maps,
    solver_equivariance,
)
from .geometry.invariants import (
    affine_sphere_residual,
    coincidence_defect,
    conormals_at,
    convexity_agreement,
    fubini_pick_at,
    metric_at,
)
from .geometry.legendre import duality_gap, gradient_identity_defect, legendre_transform
from .geometry.potentials import (
    BUILTINS,
    DOMAIN_SCHEMA,
    BallPotential,
    HyperboloidPotential,
    PolynomialPotential,
    QuadraticPotential,
    RadialGraphPotential,
    builtin_potential,
    domain_from_spec,
    exact_solution,
    hessian_at,
    load_potential_spec,
)
from .geometry.projective import ProjectiveMap, transform_potential
from .geometry.solver import INIT_DISTANCE, INIT_POISSON, SolverConfig, perturbation_factor, solve_affine_sphere

__all__ = ["COMMANDS", "RUN_SCHEMA", "SUITES", "Outcome", "RunConfig", "main", "parse_config", "run"]

logger = logging.getLogger(__name__)

COMMAND_SOLVE = "solve"
COMMAND_INVARIANTS = "invariants"
COMMAND_LEGENDRE = "legendre"
COMMAND_TRANSFORM = "transform"
COMMAND_VERIFY = "verify"
COMMAND_PERTURB = "perturb"
COMMANDS = (COMMAND_SOLVE, COMMAND_INVARIANTS, COMMAND_LEGENDRE, COMMAND_TRANSFORM, COMMAND_VERIFY, COMMAND_PERTURB)

SUITE_ALL = "all"
SUITES = (
    "gradient-estimate",
    "divergence",
    "convergence",
    "equivariance",
    "legendre",
    "fubini-pick",
    "conormals",
    "duality",
    SUITE_ALL,
)

DOMAIN_SHORTHANDS = ("interval", "disk", "ellipse", "square")


def _floats(value: typing.Any) -> tuple[float, ...]:
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    if not isinstance(value, (list, tuple)):
        raise vol.Invalid("expected a comma-separated list of numbers")
    try:
        return tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise vol.Invalid(f"not a list of numbers: {value!r}") from None


def _map_entries(value: typing.Any) -> tuple[float, ...]:
    entries = _floats(value)
    if len(entries) not in (4, 9):
        raise vol.Invalid("a map needs 4 or 9 entries")
    return entries


RUN_SCHEMA = vol.Schema(
    {
        vol.Required("command"): vol.In(COMMANDS),
        vol.Exclusive("builtin", "potential"): vol.In(BUILTINS),
        vol.Exclusive("potential_file", "potential"): vol.IsFile(),
        vol.Optional("domain", default="disk"): vol.Any(vol.In(DOMAIN_SHORTHANDS), DOMAIN_SCHEMA),
        vol.Optional("dim"): vol.All(vol.Coerce(int), vol.In([1, 2])),
        vol.Optional("grid", default=129): vol.All(vol.Coerce(int), vol.Range(min=3)),
        vol.Optional("level"): vol.All(vol.Coerce(int), vol.Range(min=2, max=12)),
        vol.Optional("map"): _map_entries,
        vol.Optional("h", default=(2.0, 4.0, 8.0)): vol.All(_floats, vol.Length(min=1)),
        vol.Optional("suite", default=SUITE_ALL): vol.In(SUITES),
        vol.Optional("seed", default=DEFAULT_SEED): vol.Coerce(int),
        vol.Optional("out"): str,
        vol.Optional("report"): str,
        vol.Optional("quick", default=False): bool,
        vol.Optional("at"): _floats,
        vol.Optional("direction"): _floats,
        vol.Optional("k_max", default=5): vol.All(vol.Coerce(int), vol.Range(min=1, max=12)),
        vol.Optional("samples", default=50): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional("tolerance", default=SOLVER_TOLERANCE): vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False)),
        vol.Optional("max_iterations", default=SOLVER_MAX_ITERATIONS): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional("init", default=INIT_POISSON): vol.In([INIT_POISSON, INIT_DISTANCE]),
        vol.Optional("verbose", default=False): bool,
    }
)


@dataclasses.dataclass(frozen=True)
class RunConfig:
    command: str
    domain: dict[str, typing.Any]
    dim: int
    grid: int
    builtin: str | None
    potential_file: str | None
    map: tuple[float, ...] | None
    h: tuple[float, ...]
    suite: str
    seed: int
    out: str
    report: str
    quick: bool
    at: tuple[float, ...] | None
    direction: tuple[float, ...] | None
    k_max: int
    samples: int
    verbose: bool
    solver: SolverConfig

    def build_domain(self) -> ConvexDomain:
        return domain_from_spec(self.domain, dim=self.dim)

    def build_potential(self, default: str) -> Potential:
        if self.potential_file is not None:
            return load_potential_spec(self.potential_file)
        name = self.builtin or default
        domain = self.build_domain() if name in ("ball", "quadratic") else None
        return builtin_potential(name, dim=self.dim, domain=domain)

    def as_dict(self) -> dict[str, typing.Any]:
        out = dataclasses.asdict(self)
        out["solver"] = dataclasses.asdict(self.solver)
        return out


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> typing.NoReturn:
        raise ConfigError(message)


def _build_parser() -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="JSON run configuration; flags override its values")
    common.add_argument("--domain", help="interval, disk, ellipse or square")
    common.add_argument("--dim", type=int, help="dimension for builtins without a domain")
    common.add_argument("--grid", type=int, help="grid nodes per axis")
    common.add_argument("--level", type=int, help="grid level N, i.e. 2^N + 1 nodes per axis")
    common.add_argument("--builtin", help=f"builtin potential ({', '.join(BUILTINS)})")
    common.add_argument("--potential-file", dest="potential_file", help="JSON potential specification")
    common.add_argument("--map", help="4 or 9 comma-separated matrix entries, row-major")
    common.add_argument("--h", help="comma-separated sublevel heights")
    common.add_argument("--suite", help=f"verification suite ({', '.join(SUITES)})")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="CSV output path")
    common.add_argument("--report", help="JSON report path")
    common.add_argument("--quick", action="store_true", help="smaller sample counts and grids")
    common.add_argument("--at", help="comma-separated evaluation point")
    common.add_argument("--direction", help="comma-separated ray direction")
    common.add_argument("--k-max", dest="k_max", type=int, help="number of divergence decades")
    common.add_argument("--samples", type=int, help="number of random sample points")
    common.add_argument("--verbose", action="store_true", help="debug logging")

    parser = _ArgumentParser(prog="affinesphere", description="hyperbolic affine spheres on convex domains")
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        sub.add_parser(command, parents=[common])
    return parser


def _read_config_file(path: str) -> dict[str, typing.Any]:
    try:
        raw = json.loads(pathlib.Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed config file {path}: {e.msg} at line {e.lineno}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return raw


def _infer_dim(values: dict[str, typing.Any]) -> int:
    if "dim" in values:
        return values["dim"]
    domain = values["domain"]
    kind = domain if isinstance(domain, str) else domain["kind"]
    if kind == "interval":
        return 1
    if "at" in values:
        if len(values["at"]) not in (1, 2):
            raise ConfigError(f"--at needs 1 or 2 coordinates, got {len(values['at'])}")
        return len(values["at"])
    return 2


def parse_config(argv: typing.Sequence[str] | None = None, config_file: str | None = None) -> RunConfig:
    args = vars(_build_parser().parse_args(argv))
    path = args.pop("config", None) or config_file
    merged = _read_config_file(path) if path else {}
    merged.update(args)
    try:
        values = RUN_SCHEMA(merged)
    except vol.Invalid as e:
        raise ConfigError(f"invalid configuration: {e}") from e

    grid = values["grid"]
    if "level" in values and "grid" not in args:
        grid = 2 ** values["level"] + 1
    command = values["command"]
    try:
        solver = SolverConfig(
            level=grid,
            tolerance=values["tolerance"],
            max_iterations=values["max_iterations"],
            stages=CONTINUATION_STAGES,
            init=values["init"],
        )
    except ValueError as e:
        raise ConfigError(str(e)) from e
    domain = values["domain"]
    dim = _infer_dim(values)
    if "potential_file" not in values and command != COMMAND_VERIFY:
        for key in ("at", "direction"):
            if key in values and len(values[key]) != dim:
                raise ConfigError(f"--{key} has {len(values[key])} coordinates, the potential is {dim}-dimensional")
    return RunConfig(
        command=command,
        domain={"kind": domain} if isinstance(domain, str) else domain,
        dim=dim,
        grid=grid,
        builtin=values.get("builtin"),
        potential_file=values.get("potential_file"),
        map=values.get("map"),
        h=values["h"],
        suite=values["suite"],
        seed=values["seed"],
        out=values.get("out", f"{command}.csv"),
        report=values.get("report", f"{command}.json"),
        quick=values["quick"],
        at=values.get("at"),
        direction=values.get("direction"),
        k_max=values["k_max"],
        samples=values["samples"],
        verbose=values["verbose"],
        solver=solver,
    )


@dataclasses.dataclass
class Outcome:
    header: list[str]
    rows: list[list[typing.Any]]
    payload: dict[str, typing.Any]
    criteria: dict[str, bool]
    summary: str

    @property
    def passed(self) -> bool:
        return all(self.criteria.values())


def _coords(prefix: str, dim: int) -> list[str]:
    return [f"{prefix}{i + 1}" for i in range(dim)]


def _points(config: RunConfig, f: Potential) -> np.ndarray:
    if config.at is not None:
        if len(config.at) != f.dim:
            raise ConfigError(f"--at has {len(config.at)} coordinates, the potential is {f.dim}-dimensional")
        return np.atleast_2d(np.asarray(config.at, dtype=float))
    rng = np.random.default_rng(config.seed)
    count = min(config.samples, 10) if config.quick else config.samples
    if f.domain is not None:
        lo, hi = f.domain.bounding_box()
        cand = rng.uniform(lo, hi, size=(20 * count, f.dim))
        inner = cand[f.domain.boundary_distance(cand) > 0.05 * float(np.max(hi - lo))]
        return inner[:count]
    cand = rng.uniform(-0.9, 0.9, size=(4 * count, f.dim))
    return cand[np.linalg.norm(cand, axis=1) <= 0.9][:count]


def _solve(config: RunConfig) -> Outcome:
    domain = config.build_domain()
    grid = GridSpec.build(domain, config.grid)
    reference = exact_solution(domain)
    started = time.perf_counter()
    u, report = solve_affine_sphere(domain, grid, config.solver, reference=reference)
    elapsed = time.perf_counter() - started
    lam = u.lambda_min()
    rows = [[*p, v, m] for p, v, m in zip(grid.points, u.node_values, lam)]
    criteria = {
        "converged": report.converged,
        "residual": report.final_residual <= config.solver.tolerance,
        "certified": report.certified,
    }
    if report.interior_error is not None:
        criteria["interior_error"] = report.interior_error <= 5e-3
    summary = (
        f"solve on {domain.kind.value} with {grid.shape[0]} nodes per axis: {report.iterations} iterations, "
        f"residual {report.final_residual:.3e}, {elapsed:.1f}s"
    )
    return Outcome(
        [*_coords("t", grid.dim), "u", "lambda_min"],
        rows,
        {"solver": report.as_dict(), "nodes": grid.size, "spacing": grid.h},
        criteria,
        summary,
    )


def _invariants(config: RunConfig) -> Outcome:
    f = config.build_potential("ball")
    points = _points(config, f)
    graph = RadialGraphPotential(f) if f.is_potential else f
    rows, samples = [], []
    for t in points:
        cn = conormals_at(f, t)
        x = graph.point(-t / f.value(t)) if f.is_potential else t
        fp = fubini_pick_at(graph, x)
        kind = METRIC_CENTROAFFINE if f.is_potential else METRIC_AFFINE_GRAPH
        sample = {
            "point": t,
            "value": f.value(t),
            "metric": metric_at(kind, f, t),
            "nu": cn.nu,
            "mu": cn.mu,
            "conormal_defect": cn.defect,
            "cubic_norm": float(np.linalg.norm(fp.A)),
            "shape_operator": fp.B,
            "lambda_min": hessian_at(f, t).min_eigenvalue,
        }
        if f.is_potential:
            sample["residual"] = affine_sphere_residual(f, t)
            sample["coincidence_defect"] = coincidence_defect(f, t)
            sample["convexity_agreement"] = convexity_agreement(f, t)
        samples.append(sample)
        rows.append(
            [
                *t,
                sample["value"],
                sample["lambda_min"],
                sample.get("convexity_agreement", ""),
                sample.get("residual", ""),
                cn.defect,
                sample["cubic_norm"],
                float(np.trace(np.linalg.solve(fp.g, fp.B))),
                *cn.nu,
                *cn.mu,
            ]
        )
    worst = max(s["conormal_defect"] for s in samples)
    payload: dict[str, typing.Any] = {"role": f.role, "max_conormal_defect": worst}
    criteria = {}
    if f.is_potential:
        criteria["convexity_agreement"] = all(s["convexity_agreement"] for s in samples)
    if len(samples) == 1:
        payload["sample"] = samples[0]
    else:
        payload["samples"] = len(samples)
    return Outcome(
        [*_coords("t", f.dim), "value", "lambda_min", "convexity_agreement", "residual", "conormal_defect", "cubic_norm", "shape_trace", *_coords("nu", f.dim + 1), *_coords("mu", f.dim + 1)],
        rows,
        payload,
        criteria,
        f"invariants of a {f.role} at {len(samples)} points, max |nu - mu| {worst:.3e}",
    )


def _legendre(config: RunConfig) -> Outcome:
    source = config.build_potential("polynomial")
    f = RadialGraphPotential(source) if source.is_potential else source
    pair = legendre_transform(f)
    rows = []
    for x in _points(config, f):
        y = pair.gradient_map(x)
        defect = float(np.max(np.abs(gradient_identity_defect(pair, x))))
        rows.append([*x, *y, pair.dual_value_at(x), defect, duality_gap(pair, x)])
    worst = max(r[-2] for r in rows)
    gap = min(r[-1] for r in rows)
    return Outcome(
        [*_coords("x", f.dim), *_coords("y", f.dim), "v", "gradient_defect", "gap"],
        rows,
        {"max_gradient_defect": worst, "min_gap": gap},
        {"gradient_identity": worst <= 1e-10, "gap_nonnegative": gap >= -1e-12},
        f"legendre transform at {len(rows)} points, max defect {worst:.3e}, min gap {gap:.3e}",
    )


def _transform(config: RunConfig) -> Outcome:
    if config.map is None:
        raise ConfigError("transform needs --map")
    u = config.build_potential("ball")
    if not u.is_potential:
        raise ConfigError("transform acts on potentials, not graph functions")
    a = ProjectiveMap.from_entries(config.map)
    if a.dim != u.dim:
        raise ConfigError(f"a {a.dim}-dimensional map cannot act on a {u.dim}-dimensional potential")
    moved = transform_potential(u, a)
    rows = []
    worst = 0.0
    for t in _points(config, u):
        tt = moved.map.apply(t)
        before = affine_sphere_residual(u, t)
        after = affine_sphere_residual(moved, tt)
        worst = max(worst, abs(after - before))
        rows.append([*t, *tt, u.value(t), moved.value(tt), before, after])
    return Outcome(
        [*_coords("t", u.dim), *_coords("s", u.dim), "u", "u_transformed", "residual", "residual_transformed"],
        rows,
        {"map": moved.map.matrix, "max_residual_deviation": worst},
        {"residual_invariant": worst <= 1e-9},
        f"transformed {len(rows)} points, max residual deviation {worst:.3e}",
    )


def _perturb(config: RunConfig) -> Outcome:
    domain = config.build_domain()
    given = config.build_potential("quadratic")
    grid = GridSpec.build(domain, config.grid)
    u_bar, report = solve_affine_sphere(domain, grid, config.solver)
    phi = perturbation_factor(given, u_bar)
    residual = float(np.max(np.abs(phi.equation_residual())))
    rows = [[*p, v, g] for p, v, g in zip(grid.points, phi.node_values, phi.given_values)]
    return Outcome(
        [*_coords("t", domain.dim), "phi", "u_given"],
        rows,
        {"phi_min": phi.minimum, "phi_max": phi.maximum, "equation_residual": residual, "solver": report.as_dict()},
        {
            "positive": phi.minimum > 0,
            "bounded": bool(np.isfinite(phi.maximum)),
            "equation": residual <= report.final_residual + 1e-6,
        },
        f"phi in [{phi.minimum:.6g}, {phi.maximum:.6g}], equation residual {residual:.3e}",
    )


def _suite_reports(config: RunConfig, suite: str) -> list[StudyReport]:
    quick = config.quick
    if suite == "gradient-estimate":
        f = config.build_potential("hyperboloid") if config.builtin or config.potential_file else HyperboloidPotential(config.dim)
        nodes = (201 if f.dim == 1 else 33) if quick else None
        return [gradient_estimate_scan(f, h, nodes=nodes) for h in config.h]
    if suite == "divergence":
        reports = [divergence_study(HyperboloidPotential(1), (1.0,), config.k_max)]
        solved = ((ConvexDomain.interval(), 257 if quick else 1025), (ConvexDomain.disk(), 257))
        for domain, nodes in solved:
            d = config.direction if config.direction and len(config.direction) == domain.dim else (1.0,) * domain.dim
            reports.append(divergence_study(BallPotential(domain.dim), d, config.k_max))
            u, _ = solve_affine_sphere(domain, GridSpec.build(domain, nodes), config.solver)
            reports.append(divergence_study(u, d, config.k_max))
        return reports
    if suite == "convergence":
        return [
            convergence_order(ConvexDomain.interval(), (65, 129, 257), config=config.solver),
            convergence_order(ConvexDomain.disk(), (33, 65, 129), config=config.solver),
        ]
    if suite == "equivariance":
        disk = ConvexDomain.disk()
        u = BallPotential(2)
        count = 3 if quick else 10
        maps = random_projective_maps(count, 2, seed=config.seed, domain=disk)
        maps += random_projective_maps(count, 2, seed=config.seed + 1, projective=True, domain=disk)
        reports = [equivariance_suite(u, maps, samples=5 if quick else 20, seed=config.seed)]
        if not quick:
            scaling = ProjectiveMap.affine(np.diag([np.sqrt(2.0), 1.0 / np.sqrt(2.0)]))
            reports.append(solver_equivariance(ConvexDomain.disk(), scaling, config=config.solver, nodes=65))
        return reports
    if suite == "legendre":
        potentials = [
            PolynomialPotential((0.0, 0.5), dim=2),
            HyperboloidPotential(2),
            PolynomialPotential((0.0, 0.5, 0.25), dim=2),
            PolynomialPotential((1.0, 1.0, 0.5, 0.1), dim=2),
            QuadraticPotential(0.0, np.diag([1.0, 3.0]), role=ROLE_GRAPH),
        ]
        return [legendre_suite(potentials, samples=100 if quick else 2000, seed=config.seed)]
    if suite == "fubini-pick":
        return [fubini_pick_suite(samples=10 if quick else 100, seed=config.seed)]
    if suite == "conormals":
        return [conormal_suite(samples=10 if quick else 100, seed=config.seed)]
    if suite == "duality":
        potentials = [BallPotential(2), builtin_potential("quadratic", dim=2)]
        return [duality_suite(potentials, samples=10 if quick else 100, seed=config.seed)]
    raise ValueError(f"unknown suite {suite!r}")


def _verify(config: RunConfig) -> Outcome:
    suites = [s for s in SUITES if s != SUITE_ALL] if config.suite == SUITE_ALL else [config.suite]
    reports: list[StudyReport] = []
    for suite in suites:
        logger.info("running suite %s", suite)
        reports.extend(_suite_reports(config, suite))
    criteria = {f"{i}:{r.kind}:{name}": ok for i, r in enumerate(reports) for name, ok in r.criteria.items()}
    columns = sorted({key for r in reports for row in r.rows for key in row})
    rows = [
        [i, r.kind, *(row.get(c, "") for c in columns)]
        for i, r in enumerate(reports)
        for row in r.rows
    ]
    failed = [name for name, ok in criteria.items() if not ok]
    summary = f"{len(reports)} studies, {len(criteria) - len(failed)}/{len(criteria)} criteria passed"
    if failed:
        summary += "; failed: " + ", ".join(failed)
    return Outcome(
        ["study", "kind", *columns],
        rows,
        {"reports": [r.as_dict() for r in reports]},
        criteria,
        summary,
    )


_HANDLERS: dict[str, typing.Callable[[RunConfig], Outcome]] = {
    COMMAND_SOLVE: _solve,
    COMMAND_INVARIANTS: _invariants,
    COMMAND_LEGENDRE: _legendre,
    COMMAND_TRANSFORM: _transform,
    COMMAND_VERIFY: _verify,
    COMMAND_PERTURB: _perturb,
}


def run(config: RunConfig) -> int:
    """Execute one run; 0 when every criterion passes, 1 on failures, 2 on usage errors."""
    try:
        with output_lock(config.out, config.report):
            outcome = _HANDLERS[config.command](config)
            count = write_csv(config.out, outcome.header, outcome.rows)
            write_json(
                config.report,
                {
                    "command": config.command,
                    "criteria": outcome.criteria,
                    "passed": outcome.passed,
                    "rows": count,
                    **outcome.payload,
                },
                config=config.as_dict(),
            )
    except ConfigError as e:
        logger.error("%s", e.qualified())
        return 2
    except ValueError as e:
        logger.error("%s: %s", __name__, e)
        return 2
    except AffineSphereError as e:
        logger.error("%s", e.qualified())
        return 1
    print(outcome.summary)
    if not outcome.passed:
        logger.warning("criteria failed: %s", plain(sorted(k for k, ok in outcome.criteria.items() if not ok)))
        return 1
    return 0


def main(argv: typing.Sequence[str] | None = None) -> int:
    try:
        config = parse_config(argv)
    except ConfigError as e:
        print(f"affinesphere: error: {e}", file=sys.stderr)
        return 2
    logging.basicConfig(
        level=logging.DEBUG if config.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    return run(config)
