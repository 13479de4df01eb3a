import dataclasses
import logging
import typing

import numpy as np
import scipy.optimize

from ..const import (
    BAND_WIDTH_FACTOR,
    DEFAULT_SEED,
    DUALITY_GAP_SLACK,
    DIVERGENCE_MIN_INCREMENT,
    DIVERGENCE_MIN_MEASURED,
    EXACT_ERROR,
    INTERIOR_REGION_RADIUS,
    METRIC_AFFINE_RADIAL,
    METRIC_CALABI,
    METRIC_CENTROAFFINE,
    REFINEMENT_STABILITY,
    SCAN_NODES_1D,
    SCAN_NODES_2D,
)
from .abc import Potential, as_point
from .domain import ConvexDomain, GridSpec, locate_base_point, sublevel_set
from .errors import (
    ChartOverflowError,
    OutsideDomainError,
    ResolutionError,
    SingularMapError,
    StudyError,
    TangencyError,
)
from .invariants import (
    affine_sphere_residual,
    centroaffine_dual,
    conormals_at,
    conormals_from_jet,
    dual_jet,
    fubini_pick_at,
    geodesic_length,
    metric_at,
)
from .legendre import (
    LegendrePotential,
    duality_gap,
    gradient_identity_defect,
    injectivity_margin,
    invert_gradient,
    legendre_transform,
)
from .potentials import (
    HyperboloidPotential,
    PolynomialPotential,
    RadialGraphPotential,
    exact_solution,
    radial_graph_jet,
)
from .projective import (
    ProjectiveMap,
    chart_jacobian,
    lambda_range,
    normalize_map,
    transform_grid,
    transform_potential,
)
from .solver import SolverConfig, interior_error, interior_region, solve_affine_sphere

__all__ = [
    "GradEstimateSample",
    "StudyReport",
    "conormal_suite",
    "convergence_order",
    "divergence_study",
    "duality_suite",
    "equivariance_suite",
    "fubini_pick_suite",
    "gradient_estimate_scan",
    "gradient_ratio",
    "gradient_ratio_direct",
    "grad_estimate_sample",
    "legendre_suite",
    "order_from_errors",
    "random_projective_maps",
    "solver_equivariance",
]

logger = logging.getLogger(__name__)


@dataclasses.dataclass
class StudyReport:
    kind: str
    parameters: dict[str, typing.Any] = dataclasses.field(default_factory=dict)
    measurements: dict[str, typing.Any] = dataclasses.field(default_factory=dict)
    fitted: dict[str, float] = dataclasses.field(default_factory=dict)
    criteria: dict[str, bool] = dataclasses.field(default_factory=dict)
    rows: list[dict[str, typing.Any]] = dataclasses.field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.criteria.values())

    def as_dict(self) -> dict[str, typing.Any]:
        out = dataclasses.asdict(self)
        out["passed"] = self.passed
        return out


@dataclasses.dataclass(frozen=True)
class GradEstimateSample:
    x: np.ndarray
    f: float
    v: float
    w: float
    psi: float
    ratio: float
    q: float


def _as_graph(f: Potential) -> Potential:
    return RadialGraphPotential(f) if f.is_potential else f


def _dual_value(f: Potential, x: np.ndarray) -> tuple[typing.Any, float]:
    j = f.jet(x)
    v = float(j.gradient @ x - j.value)
    if v >= 0:
        raise TangencyError(f"legendre value is not negative at {tuple(x)}")
    return j, v


def gradient_ratio(f: Potential, x: typing.Any) -> float:
    """|grad v|_g / (-v) from the determinant identity."""
    p = f.point(x)
    j, v = _dual_value(f, p)
    det_root = np.exp(np.linalg.slogdet(j.hessian)[1] / (f.dim + 2))
    return float(np.sqrt(det_root * (p @ j.hessian @ p)) / (-v))


def gradient_ratio_direct(f: Potential, x: typing.Any) -> float:
    """Same ratio through the inverse affine metric and the inverted gradient map."""
    p = f.point(x)
    j, v = _dual_value(f, p)
    x_back = invert_gradient(f, j.gradient, seed=p)
    grad_v = j.hessian @ x_back
    det_root = np.exp(np.linalg.slogdet(j.hessian)[1] / (f.dim + 2))
    g_inv = det_root * np.linalg.inv(j.hessian)
    return float(np.sqrt(grad_v @ g_inv @ grad_v) / (-v))


def grad_estimate_sample(f: Potential, x: typing.Any, h: float) -> GradEstimateSample:
    p = f.point(x)
    j, v = _dual_value(f, p)
    det_root = np.exp(np.linalg.slogdet(j.hessian)[1] / (f.dim + 2))
    ratio = gradient_ratio(f, p)
    return GradEstimateSample(
        x=p,
        f=j.value,
        v=v,
        w=-1.0 / v,
        psi=-det_root / v,
        ratio=ratio,
        q=ratio * float(np.sqrt(max(h - j.value, 0.0))),
    )


def _level_radius(f: Potential, direction: np.ndarray, h: float, center: np.ndarray) -> float:
    def gap(r: float) -> float:
        return f.value(center + r * direction) - h

    hi = 1.0
    try:
        while gap(hi) <= 0:
            hi *= 2.0
            if hi > 1e12:
                raise StudyError("sublevel set is unbounded along a scan direction")
    except OutsideDomainError as e:
        raise StudyError("sublevel set reaches the chart boundary") from e
    return scipy.optimize.brentq(gap, 0.0, hi, xtol=1e-14)


def _scan_box(f: Potential, h: float, center: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if f.dim == 1:
        dirs = np.array([[1.0], [-1.0]])
    else:
        angles = np.linspace(0.0, 2.0 * np.pi, 64, endpoint=False)
        dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    ends = np.array([center + _level_radius(f, d, h, center) * d for d in dirs])
    lo, hi = ends.min(axis=0), ends.max(axis=0)
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def _scan(f: Potential, h: float, nodes: int) -> dict[str, typing.Any]:
    center = np.zeros(f.dim)
    if f.value(center) >= h:
        raise StudyError(f"sublevel set at level {h} is empty")
    lo, hi = _scan_box(f, h, center)
    if f.dim == 1:
        box = ConvexDomain.interval(float(lo[0]), float(hi[0]))
    else:
        box = ConvexDomain.polygon([(lo[0], lo[1]), (hi[0], lo[1]), (hi[0], hi[1]), (lo[0], hi[1])])
    grid = GridSpec.build(box, nodes)
    values = grid.sample(f.value)
    base = locate_base_point(f, grid, values=values)
    section = sublevel_set(f, h, base, grid, values=values)
    if section.empty:
        raise StudyError(f"no grid node lies in the sublevel set at h={h}")
    members = section.members[grid.mask]
    inner = members & (h - values >= BAND_WIDTH_FACTOR * grid.h)
    if not inner.any():
        logger.warning("boundary band covers the whole sublevel set at h=%g, keeping all nodes", h)
        inner = members
    best, arg = -np.inf, None
    for x, value in zip(grid.points[inner], values[inner]):
        q = gradient_ratio(f, x) * float(np.sqrt(h - value)) if np.any(x) else 0.0
        if q > best:
            best, arg = q, x
    return {
        "sup_q": float(best),
        "argmax": arg.tolist(),
        "base_point": base.tolist(),
        "nodes": int(inner.sum()),
        "spacing": grid.h,
    }


def _oracle_1d(f: Potential, h: float) -> float:
    best = 0.0
    for sign in (1.0, -1.0):
        d = np.array([sign])
        r = _level_radius(f, d, h, np.zeros(1))

        def negative_q(s: float) -> float:
            x = s * d
            return -gradient_ratio(f, x) * float(np.sqrt(max(h - f.value(x), 0.0)))

        res = scipy.optimize.minimize_scalar(
            negative_q, bounds=(1e-12 * r, r), method="bounded", options={"xatol": 1e-12 * max(r, 1.0)}
        )
        best = max(best, -float(res.fun))
    return best


def gradient_estimate_scan(f: Potential, h: float, *, nodes: int | None = None) -> StudyReport:
    """sup of Q = ratio * (h - f)^(1/2) over the sublevel set {f < h}, with one refinement."""
    if h <= 0:
        raise StudyError("level must be positive")
    graph = _as_graph(f)
    n0 = nodes or (SCAN_NODES_1D if graph.dim == 1 else SCAN_NODES_2D)
    logger.info("gradient estimate scan at h=%g on %d nodes per axis", h, n0)
    coarse = _scan(graph, h, n0)
    fine = _scan(graph, h, 2 * n0 - 1)
    change = abs(fine["sup_q"] - coarse["sup_q"]) / max(coarse["sup_q"], np.finfo(float).tiny)
    report = StudyReport(
        "gradient-estimate",
        parameters={"h": h, "nodes": n0, "dim": graph.dim},
        measurements={"coarse": coarse, "fine": fine, "refinement_change": change},
        fitted={"C": fine["sup_q"]},
        criteria={
            "finite": bool(np.isfinite(fine["sup_q"])),
            "stable": change < REFINEMENT_STABILITY or fine["sup_q"] < 1e-6,
        },
        rows=[{"h": h, "sup_q": coarse["sup_q"], "nodes": n0}, {"h": h, "sup_q": fine["sup_q"], "nodes": 2 * n0 - 1}],
    )
    if graph.dim == 1:
        oracle = _oracle_1d(graph, h)
        report.measurements["oracle"] = oracle
        report.criteria["oracle"] = oracle == 0.0 or abs(fine["sup_q"] - oracle) <= 0.01 * oracle
    return report


def divergence_study(
    f: Potential,
    direction: typing.Any,
    k_max: int,
    *,
    base: typing.Any | None = None,
) -> StudyReport:
    """Affine lengths toward the chart boundary, z_k = 1 - 10^-k (bounded charts)
    or X_k = 10^k - 1 (unbounded charts).

    Steps a grid potential does not resolve are reported as not measured and
    take no part in the criteria.
    """
    d = as_point(direction, f.dim)
    d = d / np.linalg.norm(d)
    origin = np.zeros(f.dim) if base is None else as_point(base, f.dim)
    if f.domain is not None:
        if not f.domain.contains(origin):
            raise StudyError("ray base lies outside the domain")
        d = d * f.domain.ray_exit(origin, d)
        ends = [1.0 - 10.0**-k if k else 0.0 for k in range(k_max + 1)]
        chart = "bounded"
    else:
        ends = [10.0**k - 1.0 for k in range(k_max + 1)]
        chart = "unbounded"

    lengths = [0.0]
    for k in range(1, k_max + 1):
        try:
            piece = geodesic_length(f, d, ends[k - 1], ends[k], base=origin)
        except ResolutionError as e:
            logger.info("divergence steps %d to %d not measured: %s", k, k_max, e)
            break
        except OutsideDomainError as e:
            raise StudyError(f"ray exits the domain before step {k}") from e
        lengths.append(lengths[-1] + piece)
        logger.debug("divergence step %d: length %.12g", k, lengths[-1])

    measured = len(lengths) - 1
    increments = np.diff(lengths)
    tail = increments[1:] if len(increments) > 1 else increments
    missing = [None] * (k_max - measured)
    return StudyReport(
        "divergence",
        parameters={"direction": d.tolist(), "k_max": k_max, "chart": chart, "base": origin.tolist()},
        measurements={
            "ends": ends,
            "lengths": lengths + missing,
            "increments": increments.tolist() + missing,
            "measured_steps": measured,
        },
        fitted={"increment_tail": float(increments[-1])} if measured else {},
        criteria={
            "measured": measured >= min(k_max, DIVERGENCE_MIN_MEASURED),
            "increasing": bool(measured) and bool(np.all(increments > 0)),
            "increments_bounded_below": bool(measured) and bool(np.all(tail >= DIVERGENCE_MIN_INCREMENT)),
        },
        rows=[
            {"k": k, "z": z, "length": lengths[k] if k <= measured else None, "measured": k <= measured}
            for k, z in enumerate(ends)
        ],
    )


def order_from_errors(spacings: typing.Sequence[float], errors: typing.Sequence[float]) -> dict[str, typing.Any]:
    errs = np.asarray(errors, dtype=float)
    hs = np.asarray(spacings, dtype=float)
    if len(errs) < 3:
        raise StudyError("at least three grid levels are needed")
    if np.all(errs <= EXACT_ERROR):
        return {"order": "exact", "orders": [], "monotone": True}
    with np.errstate(divide="ignore", invalid="ignore"):
        orders = np.log(errs[:-1] / errs[1:]) / np.log(hs[:-1] / hs[1:])
    monotone = bool(np.all(np.diff(errs) < 0))
    if not monotone:
        logger.warning("error sequence %s is not monotone", errs.tolist())
    return {"order": float(orders[-1]), "orders": orders.tolist(), "monotone": monotone}


def convergence_order(
    domain: ConvexDomain,
    levels: typing.Sequence[int],
    *,
    config: SolverConfig | None = None,
    radius: float = INTERIOR_REGION_RADIUS,
) -> StudyReport:
    reference = exact_solution(domain)
    if reference is None:
        raise StudyError("convergence studies need a domain with a closed-form solution")
    errors, spacings = [], []
    for nodes in levels:
        grid = GridSpec.build(domain, nodes)
        u, _ = solve_affine_sphere(domain, grid, config)
        errors.append(interior_error(u, reference, radius=radius))
        spacings.append(grid.h)
        logger.info("level %d: interior error %.3e", nodes, errors[-1])
    result = order_from_errors(spacings, errors)
    order = result["order"]
    return StudyReport(
        "convergence",
        parameters={"domain": domain.kind.value, "levels": list(levels), "radius": radius},
        measurements={"errors": errors, "spacings": spacings, **result},
        fitted={} if order == "exact" else {"order": order},
        criteria={"monotone": result["monotone"], "order": order == "exact" or order >= 1.5},
        rows=[{"nodes": n, "h": h, "error": e} for n, h, e in zip(levels, spacings, errors)],
    )


def _sample_points(domain: ConvexDomain, count: int, rng: np.random.Generator) -> np.ndarray:
    lo, hi = domain.bounding_box()
    out: list[np.ndarray] = []
    inner = 0.9 * float(domain.boundary_distance(domain.base_point[None, :])[0])
    while len(out) < count:
        cand = rng.uniform(lo, hi, size=(4 * count, domain.dim))
        keep = cand[domain.boundary_distance(cand) >= 0.1 * inner]
        out.extend(keep[: count - len(out)])
    return np.array(out)


def random_projective_maps(
    count: int,
    dim: int,
    *,
    seed: int = DEFAULT_SEED,
    projective: bool = False,
    scale: float = 0.3,
    domain: ConvexDomain | None = None,
) -> list[ProjectiveMap]:
    """Normalized random maps near the identity, keeping lambda positive on `domain`."""
    rng = np.random.default_rng(seed)
    maps: list[ProjectiveMap] = []
    while len(maps) < count:
        raw = np.eye(dim + 1) + scale * rng.standard_normal((dim + 1, dim + 1))
        if not projective:
            raw[dim, :dim] = 0.0
            raw[dim, dim] = 1.0
        try:
            a = normalize_map(raw)
        except SingularMapError:
            continue
        if domain is not None:
            lo, _, _ = lambda_range(domain, a)
            if lo <= 0.1 * abs(a.matrix[dim, dim]):
                continue
        maps.append(a)
    return maps


def equivariance_suite(
    u: Potential,
    maps: typing.Sequence[ProjectiveMap],
    *,
    samples: int = 20,
    seed: int = DEFAULT_SEED,
    tolerance: float = 1e-9,
) -> StudyReport:
    """Residual invariance, conormal law and metric pullback under each map."""
    if u.domain is None:
        raise StudyError("equivariance checks need a bounded chart")
    rng = np.random.default_rng(seed)
    points = _sample_points(u.domain, samples, rng)
    base = {
        "residual": [affine_sphere_residual(u, t) for t in points],
        "conormals": [conormals_at(u, t) for t in points],
        "metrics": {k: [metric_at(k, u, t) for t in points] for k in (METRIC_CENTROAFFINE, METRIC_AFFINE_RADIAL, METRIC_CALABI)},
    }
    rows, skipped = [], []
    for index, a in enumerate(maps):
        try:
            moved = transform_potential(u, a)
        except ChartOverflowError as e:
            logger.warning("map %d skipped: %s", index, e)
            skipped.append(index)
            continue
        eff = a if a.lam(points[0]) > 0 else -a
        res_dev = con_dev = met_dev = 0.0
        for k, t in enumerate(points):
            tt = eff.apply(t)
            res_dev = max(res_dev, abs(affine_sphere_residual(moved, tt) - base["residual"][k]))
            cn = conormals_at(moved, tt)
            ref = base["conormals"][k]
            scale = 1.0 + float(np.linalg.norm(cn.nu))
            con_dev = max(
                con_dev,
                float(np.linalg.norm(cn.nu - eff.conormal(ref.nu))) / scale,
                float(np.linalg.norm(cn.mu - eff.conormal(ref.mu))) / scale,
            )
            jac = chart_jacobian(eff, t)
            for kind, metrics in base["metrics"].items():
                pulled = jac.T @ metric_at(kind, moved, tt) @ jac
                met_dev = max(met_dev, float(np.max(np.abs(pulled - metrics[k]))) / (1.0 + float(np.max(np.abs(metrics[k])))))
        rows.append({"map": index, "residual": res_dev, "conormal": con_dev, "metric": met_dev})

    worst = {key: max((r[key] for r in rows), default=0.0) for key in ("residual", "conormal", "metric")}
    return StudyReport(
        "equivariance",
        parameters={"maps": len(maps), "samples": samples, "seed": seed},
        measurements={**worst, "skipped": skipped},
        criteria={f"{key}_law": value <= tolerance for key, value in worst.items()},
        rows=rows,
    )


def solver_equivariance(
    domain: ConvexDomain,
    a: ProjectiveMap,
    *,
    config: SolverConfig | None = None,
    nodes: int | None = None,
) -> StudyReport:
    """Solve on the domain and on its grid-aligned affine image, compare node by node."""
    cfg = config or SolverConfig()
    grid = GridSpec.build(domain, nodes or cfg.level)
    moved_grid = transform_grid(grid, a)
    u, _ = solve_affine_sphere(domain, grid, cfg)
    w, _ = solve_affine_sphere(moved_grid.domain, moved_grid, cfg)
    lam = float(a.matrix[-1, -1])
    common = grid.mask & moved_grid.mask
    region = grid.to_array(interior_region(grid).astype(float), fill=0.0).astype(bool) & common
    source = grid.to_array(u.node_values)[region] / lam
    image = moved_grid.to_array(w.node_values)[region]
    deviation = float(np.max(np.abs(image - source)))
    bound = 10.0 * grid.h**2 * max(1.0, 1.0 / lam)
    logger.info("solver equivariance deviation %.3e (bound %.3e)", deviation, bound)
    return StudyReport(
        "solver-equivariance",
        parameters={"domain": domain.kind.value, "nodes": grid.shape[0], "map": a.matrix.tolist()},
        measurements={"deviation": deviation, "spacing": grid.h, "mask_mismatch": int((grid.mask ^ moved_grid.mask).sum())},
        criteria={"within_discretization": deviation <= bound},
    )


def _box_samples(dim: int, count: int, radius: float, rng: np.random.Generator) -> np.ndarray:
    pts = rng.uniform(-radius, radius, size=(4 * count, dim))
    return pts[np.linalg.norm(pts, axis=1) <= radius][:count]


def legendre_suite(
    potentials: typing.Sequence[Potential],
    *,
    samples: int = 200,
    radius: float = 0.9,
    seed: int = DEFAULT_SEED,
) -> StudyReport:
    """Involution, gradient identity, duality gap and gradient-map injectivity."""
    rng = np.random.default_rng(seed)
    rows = []
    for index, f in enumerate(potentials):
        pts = _box_samples(f.dim, samples, radius, rng)
        pair = legendre_transform(f)
        double = LegendrePotential(pair.v)
        involution = max(abs(double.value(x) - f.value(x)) for x in pts[: max(1, samples // 10)])
        defect = max(float(np.max(np.abs(gradient_identity_defect(pair, x)))) for x in pts)
        gap = min(duality_gap(pair, x) for x in pts)
        others = rng.permutation(pts)
        lam = min(float(np.linalg.eigvalsh(f.hessian(x))[0]) for x in pts)
        margin = injectivity_margin(f, pts, others)
        rows.append(
            {"potential": index, "involution": involution, "defect": defect, "gap": gap, "margin": margin, "lambda_min": lam}
        )
    return StudyReport(
        "legendre",
        parameters={"potentials": len(potentials), "samples": samples, "seed": seed},
        measurements={
            "involution": max(r["involution"] for r in rows),
            "defect": max(r["defect"] for r in rows),
            "gap": min(r["gap"] for r in rows),
        },
        criteria={
            "involution": all(r["involution"] <= 1e-10 for r in rows),
            "gradient_identity": all(r["defect"] <= 1e-10 for r in rows),
            "gap_nonnegative": all(r["gap"] >= -DUALITY_GAP_SLACK for r in rows),
            "injective": all(r["margin"] >= r["lambda_min"] * (1.0 - 1e-9) for r in rows),
        },
        rows=rows,
    )


def fubini_pick_suite(*, dim: int = 2, samples: int = 100, seed: int = DEFAULT_SEED) -> StudyReport:
    """Cubic form and shape operator of the paraboloid (flat) and the hyperboloid (sphere)."""
    rng = np.random.default_rng(seed)
    pts = _box_samples(dim, samples, 1.0, rng)
    paraboloid = PolynomialPotential((0.0, 0.5), dim=dim)
    hyperboloid = HyperboloidPotential(dim)
    flat = [fubini_pick_at(paraboloid, x) for x in pts]
    sphere = [fubini_pick_at(hyperboloid, x) for x in pts]
    measured = {
        "paraboloid_A": max(float(np.max(np.abs(s.A))) for s in flat),
        "paraboloid_B": max(float(np.max(np.abs(s.B))) for s in flat),
        "hyperboloid_A": max(float(np.max(np.abs(s.A))) for s in sphere),
        "hyperboloid_B_plus_g": max(float(np.max(np.abs(s.B + s.g))) for s in sphere),
        "symmetry": max(s.symmetry_defect for s in sphere),
    }
    return StudyReport(
        "fubini-pick",
        parameters={"dim": dim, "samples": len(pts), "seed": seed},
        measurements=measured,
        criteria={
            "paraboloid_flat": measured["paraboloid_A"] <= 1e-8 and measured["paraboloid_B"] <= 1e-8,
            "hyperboloid_sphere": measured["hyperboloid_A"] <= 1e-6 and measured["hyperboloid_B_plus_g"] <= 1e-6,
            "symmetric": measured["symmetry"] <= 1e-6,
        },
    )


def conormal_suite(*, dim: int = 2, samples: int = 100, seed: int = DEFAULT_SEED) -> StudyReport:
    """nu = mu on the hyperboloid, nu != mu somewhere on a non-sphere graph."""
    rng = np.random.default_rng(seed)
    pts = _box_samples(dim, samples, 1.0, rng)
    sphere = max(conormals_at(HyperboloidPotential(dim), x).defect for x in pts)
    other = max(conormals_at(PolynomialPotential((1.0, 0.5), dim=dim), x).defect for x in pts)
    return StudyReport(
        "conormals",
        parameters={"dim": dim, "samples": len(pts), "seed": seed},
        measurements={"hyperboloid": sphere, "non_sphere": other},
        criteria={"sphere_coincides": sphere <= 1e-10, "non_sphere_separates": other > 0.0},
    )


def duality_suite(
    potentials: typing.Sequence[Potential],
    *,
    samples: int = 100,
    seed: int = DEFAULT_SEED,
) -> StudyReport:
    """Double centroaffine dual and the conormal of the dual hypersurface."""
    rng = np.random.default_rng(seed)
    rows = []
    for index, u in enumerate(potentials):
        pts = _sample_points(u.domain, samples, rng)
        dual = centroaffine_dual(u, pts)
        double_err = conormal_err = 0.0
        for t, s, j in zip(pts, dual.dual_points, dual.sample_jets):
            back, jj = dual_jet(j, s)
            double_err = max(double_err, float(np.max(np.abs(back - t))), abs(jj.value - u.value(t)))
            x, graph = radial_graph_jet(j, s)
            nu = conormals_from_jet(x, graph).nu
            expected = np.exp(np.linalg.slogdet(u.hessian(t))[1] / (u.dim + 2)) * np.append(t, 1.0)
            conormal_err = max(conormal_err, float(np.max(np.abs(nu - expected))))
        rows.append({"potential": index, "double_dual": double_err, "dual_conormal": conormal_err})
    return StudyReport(
        "duality",
        parameters={"potentials": len(potentials), "samples": samples, "seed": seed},
        measurements={
            "double_dual": max(r["double_dual"] for r in rows),
            "dual_conormal": max(r["dual_conormal"] for r in rows),
        },
        criteria={
            "involution": all(r["double_dual"] <= 1e-8 for r in rows),
            "dual_conormal": all(r["dual_conormal"] <= 1e-8 for r in rows),
        },
        rows=rows,
    )
