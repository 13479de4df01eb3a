import dataclasses
import logging
import typing

import numpy as np

from ..const import CHART_LAMBDA_MIN, DET_TOLERANCE, ROLE_POTENTIAL, SINGULAR_CONDITION
from .abc import Jet, Potential, as_point
from .domain import ConvexDomain, DomainKind, GridSpec
from .errors import ChartOverflowError, OutsideDomainError, SingularMapError

__all__ = [
    "ProjectiveMap",
    "TransformedPotential",
    "chart_jacobian",
    "lambda_range",
    "normalize_map",
    "transform_domain",
    "transform_grid",
    "transform_potential",
]

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True, eq=False)
class ProjectiveMap:
    """Element of SL±(n+1) acting on homogeneous coordinates (t, 1)."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 2:
            raise ValueError("projective map needs a square matrix of size n+1 >= 2")
        if abs(abs(np.linalg.det(m)) - 1.0) > DET_TOLERANCE * 10:
            raise ValueError("projective map must be normalized to |det| = 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls, n: int) -> "ProjectiveMap":
        return cls(np.eye(n + 1))

    @classmethod
    def affine(
        cls, linear: typing.Any, translation: typing.Any | None = None
    ) -> "ProjectiveMap":
        lin = np.atleast_2d(np.asarray(linear, dtype=float))
        n = lin.shape[0]
        raw = np.eye(n + 1)
        raw[:n, :n] = lin
        if translation is not None:
            raw[:n, n] = np.asarray(translation, dtype=float)
        return normalize_map(raw)

    @classmethod
    def from_entries(cls, entries: typing.Sequence[float]) -> "ProjectiveMap":
        """Row-major entries of a 2x2 (n = 1) or 3x3 (n = 2) matrix."""
        size = {4: 2, 9: 3}.get(len(entries))
        if size is None:
            raise ValueError("a map needs 4 or 9 entries")
        return normalize_map(np.asarray(entries, dtype=float).reshape(size, size))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0] - 1

    @property
    def is_affine(self) -> bool:
        n = self.dim
        return bool(np.all(self.matrix[n, :n] == 0.0))

    @property
    def linear_part(self) -> np.ndarray:
        n = self.dim
        return self.matrix[:n, :n] / self.matrix[n, n]

    @property
    def translation_part(self) -> np.ndarray:
        n = self.dim
        return self.matrix[:n, n] / self.matrix[n, n]

    def inverse(self) -> "ProjectiveMap":
        return ProjectiveMap(np.linalg.inv(self.matrix))

    def __matmul__(self, other: "ProjectiveMap") -> "ProjectiveMap":
        return ProjectiveMap(self.matrix @ other.matrix)

    def __neg__(self) -> "ProjectiveMap":
        return ProjectiveMap(-self.matrix)

    def lift(self, t: typing.Any) -> np.ndarray:
        p = as_point(t, self.dim)
        return self.matrix @ np.append(p, 1.0)

    def lam(self, t: typing.Any) -> float:
        return float(self.lift(t)[-1])

    def apply(self, t: typing.Any) -> np.ndarray:
        w = self.lift(t)
        if abs(w[-1]) <= CHART_LAMBDA_MIN:
            raise ChartOverflowError("point leaves the chart", points=[as_point(t, self.dim)])
        return w[:-1] / w[-1]

    def apply_many(self, points: typing.Any) -> tuple[np.ndarray, np.ndarray]:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        hom = np.hstack([pts, np.ones((pts.shape[0], 1))]) @ self.matrix.T
        return hom[:, :-1] / hom[:, -1:], hom[:, -1]

    def conormal(self, nu: typing.Any) -> np.ndarray:
        """Push a conormal covector forward: (A^T)^-1 nu."""
        return np.linalg.solve(self.matrix.T, np.asarray(nu, dtype=float))


def normalize_map(raw: typing.Any) -> ProjectiveMap:
    arr = np.asarray(raw, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("raw map must be a square matrix")
    det = np.linalg.det(arr)
    condition = float(np.linalg.cond(arr)) if np.all(np.isfinite(arr)) else np.inf
    if det == 0.0 or not np.isfinite(det) or condition > SINGULAR_CONDITION:
        raise SingularMapError("matrix is singular", condition=condition)
    return ProjectiveMap(arr / abs(det) ** (1.0 / arr.shape[0]))


def chart_jacobian(a: ProjectiveMap, t: typing.Any) -> np.ndarray:
    """Derivative of t -> t~ = w / lambda with (w, lambda) = A (t, 1)."""
    n = a.dim
    w = a.lift(t)
    lam = w[-1]
    tt = w[:-1] / lam
    return (a.matrix[:n, :n] - np.outer(tt, a.matrix[n, :n])) / lam


def lambda_range(domain: ConvexDomain, a: ProjectiveMap) -> tuple[float, float, np.ndarray]:
    """Minimum and maximum of lambda over the domain and the minimizing point."""
    n = a.dim
    row = a.matrix[n, :n]
    const = a.matrix[n, n]
    if domain.kind.ellipsoidal:
        c = np.asarray(domain.center)
        d = np.asarray(domain.semi_axes)
        spread = float(np.linalg.norm(d * row))
        mid = float(row @ c + const)
        if spread == 0.0:
            return mid, mid, c
        argmin = c - d * d * row / spread
        return mid - spread, mid + spread, argmin
    verts = np.asarray(domain.vertices)
    lams = verts @ row + const
    k = int(np.argmin(lams))
    return float(lams.min()), float(lams.max()), verts[k]


def transform_domain(domain: ConvexDomain | None, a: ProjectiveMap) -> ConvexDomain | None:
    """Image of a domain when it stays representable, otherwise `None`."""
    if domain is None:
        return None
    if domain.kind is DomainKind.POLYGON:
        image, _ = a.apply_many(domain.vertices)
        return ConvexDomain.polygon(image)
    lin = a.linear_part
    if not a.is_affine or np.count_nonzero(lin - np.diag(np.diag(lin))):
        return None
    center = lin @ np.asarray(domain.center) + a.translation_part
    semi = np.abs(np.diag(lin)) * np.asarray(domain.semi_axes)
    if domain.kind is DomainKind.INTERVAL:
        return ConvexDomain(DomainKind.INTERVAL, tuple(center), tuple(semi))
    kind = DomainKind.DISK if np.isclose(semi[0], semi[1]) else DomainKind.ELLIPSE
    return ConvexDomain(kind, tuple(center), tuple(semi))


def transform_grid(grid: GridSpec, a: ProjectiveMap) -> GridSpec:
    """Node-by-node image of a grid under a grid-aligned affine map."""
    lin = a.linear_part
    diag = np.diag(lin)
    if not a.is_affine or np.count_nonzero(lin - np.diag(diag)) or np.any(diag <= 0):
        raise ValueError("grid images need a positive diagonal affine map")
    domain = transform_domain(grid.domain, a)
    assert domain is not None
    origin = lin @ grid.origin + a.translation_part
    return GridSpec.build(domain, grid.shape, origin=origin, spacing=diag * grid.spacing)


class TransformedPotential(Potential):
    """u~(t~) = u(t) / lambda with (w, lambda) = A (t, 1), t~ = w / lambda.

    Derivatives come from the degree-one homogeneous extension
    U(X) = X_{n+1} u(X' / X_{n+1}) composed with A^-1, so they are exact
    whenever the source derivatives are.
    """

    __slots__ = ("_base", "_map", "_inverse", "_domain")

    def __init__(self, base: Potential, a: ProjectiveMap) -> None:
        if not base.is_potential:
            raise ValueError("only potentials transform by the projective law")
        if a.dim != base.dim:
            raise ValueError("map and potential dimensions differ")
        self._base = base
        self._map = a
        self._inverse = np.linalg.inv(a.matrix)
        self._domain = transform_domain(base.domain, a)

    @property
    def base(self) -> Potential:
        return self._base

    @property
    def map(self) -> ProjectiveMap:
        return self._map

    @property
    def dim(self) -> int:
        return self._base.dim

    @property
    def role(self) -> str:
        return ROLE_POTENTIAL

    @property
    def domain(self) -> ConvexDomain | None:
        return self._domain

    def preimage(self, t: typing.Any) -> tuple[np.ndarray, float]:
        """Source point t and the homogeneous scale s = 1 / lambda."""
        p = as_point(t, self.dim)
        x = self._inverse @ np.append(p, 1.0)
        s = x[-1]
        if s <= 0:
            raise OutsideDomainError(f"point {tuple(p)} lies outside the transformed chart")
        return x[:-1] / s, float(s)

    def contains(self, t: typing.Any) -> bool:
        try:
            src, _ = self.preimage(t)
        except OutsideDomainError:
            return False
        return self._base.contains(src)

    def jet(self, t: typing.Any) -> Jet:
        p = self.point(t)
        src, s = self.preimage(p)
        j = self._base.jet(src)
        n = self.dim
        h = j.hessian
        ht = h @ src
        d_u = np.append(j.gradient, j.value - src @ j.gradient)
        d2_u = np.empty((n + 1, n + 1))
        d2_u[:n, :n] = h
        d2_u[:n, n] = d2_u[n, :n] = -ht
        d2_u[n, n] = src @ ht
        d2_u /= s
        b = self._inverse[:, :n]
        return Jet(s * j.value, b.T @ d_u, b.T @ d2_u @ b)

    def value(self, t: typing.Any) -> float:
        src, s = self.preimage(self.point(t))
        return s * self._base.value(src)

    def gradient(self, t: typing.Any) -> np.ndarray:
        return self.jet(t).gradient

    def hessian(self, t: typing.Any) -> np.ndarray:
        return self.jet(t).hessian


def transform_potential(u: Potential, a: ProjectiveMap) -> TransformedPotential:
    """Apply the projective transformation law of sections of the dual bundle.

    lambda must keep one sign on the domain; a negative sign is absorbed by
    using -A, which acts identically on the projective chart.
    """
    if u.domain is not None:
        lo, hi, worst = lambda_range(u.domain, a)
        if lo <= CHART_LAMBDA_MIN and hi >= -CHART_LAMBDA_MIN:
            raise ChartOverflowError("lambda vanishes on the domain", points=[worst])
        if hi < 0:
            logger.debug("lambda negative on the domain, using -A")
            a = -a
    else:
        n = a.dim
        if np.any(a.matrix[n, :n] != 0.0):
            raise ChartOverflowError(
                "lambda vanishes somewhere on an unbounded chart",
                points=[np.zeros(n)],
            )
        if a.matrix[n, n] < 0:
            a = -a
    if isinstance(u, TransformedPotential):
        return TransformedPotential(u.base, a @ u.map)
    return TransformedPotential(u, a)
