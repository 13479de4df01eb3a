"""Affine-differential fields of potentials and graph functions.

Potential-role sources (negative u on a projective chart) carry the
centroaffine, affine-radial and Calabi metrics; graph-role sources (convex f)
carry the affine graph metric, the conormals and the Fubini-Pick data.
Determinant roots are taken in log space.
"""

import dataclasses
import logging
import typing

import numpy as np
import scipy.integrate

from ..const import (
    ARC_LENGTH_RELATIVE_TOLERANCE,
    ARC_LENGTH_SUBDIVISIONS,
    DIFFERENCE_STEP,
    FRAME_CONDITION_MAX,
    METRIC_AFFINE_GRAPH,
    METRIC_AFFINE_RADIAL,
    METRIC_CALABI,
    METRIC_CENTROAFFINE,
    METRIC_KINDS,
)
from .abc import Jet, Potential, as_point
from .errors import (
    FrameDegeneracyError,
    InvariantError,
    OutsideDomainError,
    ResolutionError,
    TangencyError,
)
from .legendre import LegendrePotential
from .potentials import GridPotential, RadialGraphPotential, positive_definite, radial_graph_jet

__all__ = [
    "CentroaffineDual",
    "ConormalSample",
    "InvariantsSample",
    "affine_sphere_residual",
    "centroaffine_dual",
    "coincidence_defect",
    "conormals_at",
    "conormals_from_jet",
    "convexity_agreement",
    "dual_jet",
    "fubini_pick_at",
    "geodesic_length",
    "metric_at",
    "metric_from_jet",
]

logger = logging.getLogger(__name__)


def _log_det(hessian: np.ndarray) -> float:
    sign, logdet = np.linalg.slogdet(hessian)
    if sign <= 0:
        raise InvariantError("hessian determinant is not positive")
    return float(logdet)


def metric_from_jet(kind: str, j: Jet) -> np.ndarray:
    n = j.dim
    if kind == METRIC_AFFINE_GRAPH:
        return np.exp(-_log_det(j.hessian) / (n + 2)) * j.hessian
    if j.value >= 0:
        raise InvariantError("potential must be negative")
    if kind == METRIC_CENTROAFFINE:
        return -j.hessian / j.value
    if kind == METRIC_AFFINE_RADIAL:
        return np.exp(-_log_det(j.hessian) / (n + 2)) * j.hessian / j.value**2
    if kind == METRIC_CALABI:
        return np.exp(_log_det(j.hessian) / (n + 2)) * j.hessian
    raise ValueError(f"unknown metric kind {kind!r}, expected one of {METRIC_KINDS}")


def metric_at(kind: str, source: Potential, t: typing.Any) -> np.ndarray:
    if (kind == METRIC_AFFINE_GRAPH) != source.is_graph:
        raise ValueError(f"metric {kind!r} does not apply to a {source.role} source")
    return metric_from_jet(kind, source.jet(t))


def affine_sphere_residual(u: Potential, t: typing.Any, *, exponent_scale: float = 1.0) -> float:
    """log det(u_ij) + s (n+2) log(-u), zero exactly on hyperbolic affine spheres."""
    j = u.jet(t)
    if j.value >= 0:
        raise InvariantError("potential must be negative")
    return _log_det(j.hessian) + exponent_scale * (u.dim + 2) * float(np.log(-j.value))


def coincidence_defect(u: Potential, t: typing.Any) -> float:
    j = u.jet(t)
    if j.value >= 0:
        raise InvariantError("potential must be negative")
    return float(np.exp(-_log_det(j.hessian) / (u.dim + 2)) * (-1.0 / j.value) - 1.0)


def convexity_agreement(u: Potential, t: typing.Any) -> bool:
    """Positive definiteness of the centroaffine metric matches that of the Hessian."""
    j = u.jet(t)
    if j.value >= 0:
        raise InvariantError("potential must be negative")
    metric = -j.hessian / j.value
    return positive_definite(metric) == positive_definite(j.hessian)


@dataclasses.dataclass(frozen=True)
class ConormalSample:
    nu: np.ndarray
    mu: np.ndarray
    alpha: float

    @property
    def defect(self) -> float:
        return float(np.linalg.norm(self.nu - self.mu))


def conormals_from_jet(x: np.ndarray, j: Jet) -> ConormalSample:
    n = j.dim
    frame = np.append(-j.gradient, 1.0)
    nu = np.exp(-_log_det(j.hessian) / (n + 2)) * frame
    v = float(j.gradient @ x - j.value)
    if v == 0.0:
        raise TangencyError(f"position vector is tangent at {tuple(x)}")
    return ConormalSample(nu, -frame / v, float(nu[-1]))


def conormals_at(f: Potential, x: typing.Any) -> ConormalSample:
    """Affine and centroaffine conormals; potentials go through their radial graph."""
    if f.is_potential:
        gx, gj = radial_graph_jet(f.jet(x), f.point(x))
        return conormals_from_jet(gx, gj)
    p = f.point(x)
    return conormals_from_jet(p, f.jet(p))


def dual_jet(j: Jet, t: typing.Any) -> tuple[np.ndarray, Jet]:
    """Dual chart point and jet of the centroaffine dual potential.

    s = grad u / (u - t . grad u), u*(s) = 1 / (u - t . grad u),
    grad u*(s) = t / u and the Hessian is the inverse of the graph Hessian.
    """
    p = np.asarray(t, dtype=float)
    _, graph = radial_graph_jet(j, p)
    u_s = j.value - p @ j.gradient
    s = j.gradient / u_s
    return s, Jet(1.0 / u_s, p / j.value, np.linalg.inv(graph.hessian))


class CentroaffineDual(Potential):
    """u*(s) = v(-s) where v is the Legendre transform of the radial graph of u."""

    __slots__ = ("_source", "_legendre", "_points", "_samples")

    def __init__(self, source: Potential, points: np.ndarray, samples: list[tuple[np.ndarray, Jet]]) -> None:
        self._source = source
        self._legendre = LegendrePotential(RadialGraphPotential(source))
        self._points = points
        self._samples = samples

    @property
    def source(self) -> Potential:
        return self._source

    @property
    def dim(self) -> int:
        return self._source.dim

    @property
    def role(self) -> str:
        return self._source.role

    @property
    def source_points(self) -> np.ndarray:
        return self._points

    @property
    def dual_points(self) -> np.ndarray:
        return np.array([s for s, _ in self._samples])

    @property
    def sample_jets(self) -> list[Jet]:
        return [j for _, j in self._samples]

    def point(self, t: typing.Any) -> np.ndarray:
        return as_point(t, self.dim)

    def contains(self, s: typing.Any) -> bool:
        return self._legendre.contains(-self.point(s))

    def value(self, s: typing.Any) -> float:
        return self._legendre.value(-self.point(s))

    def gradient(self, s: typing.Any) -> np.ndarray:
        return -self._legendre.gradient(-self.point(s))

    def hessian(self, s: typing.Any) -> np.ndarray:
        return self._legendre.hessian(-self.point(s))


def centroaffine_dual(u: Potential, samples: typing.Any) -> CentroaffineDual:
    if not u.is_potential:
        raise ValueError("centroaffine duality acts on potentials")
    pts = np.atleast_2d(np.asarray(samples, dtype=float)).reshape(-1, u.dim)
    jets = [dual_jet(u.jet(p), p) for p in pts]
    logger.debug("centroaffine dual over %d samples", len(pts))
    return CentroaffineDual(u, pts, jets)


@dataclasses.dataclass(frozen=True)
class InvariantsSample:
    A: np.ndarray
    B: np.ndarray
    g: np.ndarray

    @property
    def symmetry_defect(self) -> float:
        a = self.A
        perms = ("ijk->ikj", "ijk->jik", "ijk->kji")
        return float(max(np.max(np.abs(a - np.einsum(p, a))) for p in perms))


def _third(f: Potential, x: np.ndarray, h: float) -> np.ndarray:
    t = f.third(x)
    if t is not None:
        return np.asarray(t, dtype=float)
    n = f.dim
    out = np.empty((n, n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        out[:, :, k] = (f.hessian(x + e) - f.hessian(x - e)) / (2.0 * h)
    return 0.5 * (out + np.transpose(out, (1, 0, 2)))


def _nu_and_derivatives(f: Potential, x: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """nu, its first derivatives (columns), the metric and its first derivatives."""
    n = f.dim
    j = f.jet(x)
    t = _third(f, x, h)
    inv = np.linalg.inv(j.hessian)
    a = np.exp(-_log_det(j.hessian) / (n + 2))
    da = -a / (n + 2) * np.einsum("ab,bak->k", inv, t)
    frame = np.append(-j.gradient, 1.0)
    dnu = np.outer(frame, da)
    dnu[:n, :] -= a * j.hessian
    dg = np.einsum("ij,k->ijk", j.hessian, da) + a * t
    return a * frame, dnu, a * j.hessian, dg


def fubini_pick_at(f: Potential, x: typing.Any, *, step: float = DIFFERENCE_STEP) -> InvariantsSample:
    """Cubic form A and shape operator B from nu_ij = -A_ij^k nu_k - B_ij nu."""
    if f.is_potential:
        f = RadialGraphPotential(f)
    p = f.point(x)
    n = f.dim
    nu, dnu, g, dg = _nu_and_derivatives(f, p, step)

    d2nu = np.empty((n + 1, n, n))
    for l in range(n):
        e = np.zeros(n)
        e[l] = step
        _, plus, _, _ = _nu_and_derivatives(f, p + e, step)
        _, minus, _, _ = _nu_and_derivatives(f, p - e, step)
        d2nu[:, :, l] = (plus - minus) / (2.0 * step)
    d2nu = 0.5 * (d2nu + np.transpose(d2nu, (0, 2, 1)))

    g_inv = np.linalg.inv(g)
    # dg[i, j, k] = d_k g_ij
    lowered = np.einsum("lji->lij", dg) + dg - np.einsum("ijl->lij", dg)
    gamma = 0.5 * np.einsum("kl,lij->kij", g_inv, lowered)
    covariant = d2nu - np.einsum("kij,ak->aij", gamma, dnu)

    frame = np.column_stack([dnu, nu])
    condition = float(np.linalg.cond(frame))
    if condition > FRAME_CONDITION_MAX:
        raise FrameDegeneracyError(f"conormal frame is degenerate (condition number {condition:.3e})")
    coeffs = np.linalg.solve(frame, -covariant.reshape(n + 1, n * n)).reshape(n + 1, n, n)
    a_upper = coeffs[:n]
    b = coeffs[n]
    a_lower = np.einsum("kl,lij->ijk", g, a_upper)
    return InvariantsSample(a_lower, 0.5 * (b + b.T), g)


def _integrand(source: Potential, base: np.ndarray, direction: np.ndarray) -> typing.Callable[[float], float]:
    kind = METRIC_AFFINE_GRAPH if source.is_graph else METRIC_AFFINE_RADIAL

    def speed(z: float) -> float:
        m = metric_from_jet(kind, source.jet(base + z * direction))
        return float(np.sqrt(max(direction @ m @ direction, 0.0)))

    return speed


def geodesic_length(
    f: Potential,
    direction: typing.Any,
    z0: float,
    z1: float,
    *,
    base: typing.Any | None = None,
) -> float:
    """Affine-metric length of the segment base + z * direction, z in [z0, z1].

    Graph sources use the affine graph metric; potentials use the affine metric
    of their radial graph in the chart. Grid potentials raise ResolutionError
    when z1 lies past their interpolable region.
    """
    if z1 < z0:
        raise ValueError("segment end must not precede its start")
    d = as_point(direction, f.dim)
    origin = np.zeros(f.dim) if base is None else as_point(base, f.dim)
    if z1 == z0:
        return 0.0
    if f.domain is not None and not f.domain.contains(origin + z0 * d):
        raise OutsideDomainError("segment start lies outside the domain")

    end = origin + z1 * d
    if not f.contains(end):
        raise OutsideDomainError("segment exits the domain")
    if isinstance(f, GridPotential) and not f.interpolable(end):
        raise ResolutionError(f"grid does not resolve the segment up to z = {z1:g}")
    speed = _integrand(f, origin, d)
    options = {"epsrel": ARC_LENGTH_RELATIVE_TOLERANCE, "epsabs": 0.0, "limit": ARC_LENGTH_SUBDIVISIONS}

    if f.domain is not None:
        exit_ = f.domain.ray_exit(origin, d)

        def warped(w: float) -> float:
            gap = np.exp(-w)
            return speed(exit_ - gap) * gap

        lo, hi = -np.log(exit_ - z0), -np.log(exit_ - z1)
        length, error = scipy.integrate.quad(warped, lo, hi, **options)
    else:

        def warped(w: float) -> float:
            return speed(np.sinh(w)) * np.cosh(w)

        length, error = scipy.integrate.quad(warped, np.arcsinh(z0), np.arcsinh(z1), **options)
    logger.debug("segment length %.12g (quadrature error %.3e)", length, error)
    return float(length)
