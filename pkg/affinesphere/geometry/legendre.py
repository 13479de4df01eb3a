import dataclasses
import logging
import typing

import numpy as np
import scipy.interpolate
import scipy.spatial

from ..const import (
    DUALITY_GAP_SLACK,
    LEGENDRE_NEIGHBORS,
    MINIMUM_GRADIENT_TOLERANCE,
    NEWTON_MAX_HALVINGS,
    NEWTON_MAX_ITERATIONS,
    NEWTON_RELATIVE_TOLERANCE,
    ROLE_GRAPH,
)
from .abc import Jet, Potential, as_point
from .errors import ConvexityError, InversionError, OutsideDomainError, PreconditionError
from .potentials import GridPotential, positive_definite

__all__ = [
    "LegendrePair",
    "LegendrePotential",
    "ResampledPotential",
    "duality_gap",
    "gradient_identity_defect",
    "injectivity_margin",
    "invert_gradient",
    "legendre_transform",
]

logger = logging.getLogger(__name__)


def _seed(f: Potential, y: np.ndarray) -> np.ndarray:
    if f.contains(y):
        return y.copy()
    if f.domain is not None:
        return np.asarray(f.domain.base_point, dtype=float)
    return np.zeros(f.dim)


def _try_gradient(f: Potential, x: np.ndarray) -> np.ndarray | None:
    if not f.contains(x):
        return None
    try:
        return f.gradient(x)
    except OutsideDomainError:
        return None


def invert_gradient(f: Potential, y: typing.Any, *, seed: typing.Any | None = None) -> np.ndarray:
    """Solve grad f(x) = y by damped Newton iteration seeded at x = y."""
    target = as_point(y, f.dim)
    x = _seed(f, target) if seed is None else as_point(seed, f.dim)
    tolerance = NEWTON_RELATIVE_TOLERANCE * max(1.0, float(np.linalg.norm(target)))
    grad = _try_gradient(f, x)
    if grad is None:
        raise InversionError("seed lies outside the domain", point=tuple(target), residual=np.inf)
    residual = grad - target
    norm = float(np.linalg.norm(residual))

    for iteration in range(NEWTON_MAX_ITERATIONS):
        if norm <= tolerance:
            return x
        hess = f.hessian(x)
        if not positive_definite(hess):
            raise ConvexityError(f"hessian is not positive definite at {tuple(x)}")
        step = np.linalg.solve(hess, residual)
        scale = 1.0
        for _ in range(NEWTON_MAX_HALVINGS):
            candidate = x - scale * step
            g = _try_gradient(f, candidate)
            if g is not None and np.linalg.norm(g - target) < norm:
                break
            scale *= 0.5
        else:
            raise InversionError("damping exhausted", point=tuple(target), residual=norm)
        if scale < 1.0:
            logger.debug("newton inversion halved %d times at iteration %d", -np.log2(scale), iteration)
        x = candidate
        residual = g - target
        norm = float(np.linalg.norm(residual))

    if norm <= tolerance:
        return x
    raise InversionError("newton inversion did not converge", point=tuple(target), residual=norm)


class LegendrePotential(Potential):
    """v(y) = y . x - f(x) with grad f(x) = y, evaluated by gradient inversion."""

    __slots__ = ("_f", "_cache")

    def __init__(self, f: Potential) -> None:
        self._f = f
        self._cache: tuple[bytes, np.ndarray] | None = None

    @property
    def source(self) -> Potential:
        return self._f

    @property
    def dim(self) -> int:
        return self._f.dim

    @property
    def role(self) -> str:
        return ROLE_GRAPH

    def point(self, t: typing.Any) -> np.ndarray:
        return as_point(t, self.dim)

    def preimage(self, y: typing.Any) -> np.ndarray:
        p = self.point(y)
        key = p.tobytes()
        if self._cache is not None and self._cache[0] == key:
            return self._cache[1]
        x = invert_gradient(self._f, p)
        self._cache = (key, x)
        return x

    def contains(self, y: typing.Any) -> bool:
        try:
            self.preimage(y)
        except (InversionError, ConvexityError):
            return False
        return True

    def value(self, y: typing.Any) -> float:
        p = self.point(y)
        x = self.preimage(p)
        return float(p @ x - self._f.value(x))

    def gradient(self, y: typing.Any) -> np.ndarray:
        return self.preimage(y).copy()

    def hessian(self, y: typing.Any) -> np.ndarray:
        return np.linalg.inv(self._f.hessian(self.preimage(y)))

    def third(self, y: typing.Any) -> np.ndarray | None:
        x = self.preimage(y)
        t = self._f.third(x)
        if t is None:
            return None
        inv = np.linalg.inv(self._f.hessian(x))
        return -np.einsum("ia,jb,lc,abc->ijl", inv, inv, inv, t)

    def jet(self, y: typing.Any) -> Jet:
        p = self.point(y)
        x = self.preimage(p)
        fj = self._f.jet(x)
        return Jet(float(p @ x - fj.value), x.copy(), np.linalg.inv(fj.hessian))


class ResampledPotential(Potential):
    """Scattered samples of v, grad v and the Hessian of v on a regular grid.

    Values at target nodes come from inverse-distance weighting of the nearest
    samples; nodes farther than one target spacing from every sample are
    left uncovered.
    """

    __slots__ = ("_axes", "_fields", "_interpolator", "_dim")

    def __init__(
        self,
        points: np.ndarray,
        values: np.ndarray,
        gradients: np.ndarray,
        hessians: np.ndarray,
        shape: tuple[int, ...],
    ) -> None:
        n = points.shape[1]
        self._dim = n
        lo, hi = points.min(axis=0), points.max(axis=0)
        self._axes = [np.linspace(lo[k], hi[k], shape[k]) for k in range(n)]
        spacing = (hi - lo) / (np.asarray(shape) - 1)
        target = np.stack(np.meshgrid(*self._axes, indexing="ij"), axis=-1).reshape(-1, n)

        stacked = np.concatenate([values[:, None], gradients, hessians.reshape(-1, n * n)], axis=1)
        tree = scipy.spatial.cKDTree(points)
        k = min(LEGENDRE_NEIGHBORS, len(points))
        dist, idx = tree.query(target, k=k)
        dist = dist.reshape(len(target), k)
        idx = idx.reshape(len(target), k)
        exact = dist[:, 0] == 0.0
        weights = 1.0 / np.where(dist == 0.0, 1.0, dist)
        weights[exact] = 0.0
        weights[exact, 0] = 1.0
        fields = np.einsum("mk,mkc->mc", weights, stacked[idx]) / weights.sum(axis=1)[:, None]
        fields[dist[:, 0] > float(np.max(spacing))] = np.nan
        self._fields = fields.reshape(tuple(shape) + (stacked.shape[1],))
        self._interpolator = scipy.interpolate.RegularGridInterpolator(
            self._axes, self._fields, method="linear", bounds_error=False, fill_value=np.nan
        )
        logger.debug("resampled %d samples onto %s target nodes", len(points), shape)

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def role(self) -> str:
        return ROLE_GRAPH

    @property
    def covered(self) -> np.ndarray:
        return ~np.isnan(self._fields[..., 0])

    def point(self, t: typing.Any) -> np.ndarray:
        return as_point(t, self.dim)

    def jet(self, y: typing.Any) -> Jet:
        p = self.point(y)
        row = self._interpolator(p[None, :])[0]
        if np.any(np.isnan(row)):
            raise OutsideDomainError(f"point {tuple(p)} is outside the resampled gradient image")
        n = self.dim
        hess = row[1 + n :].reshape(n, n)
        return Jet(float(row[0]), row[1 : 1 + n], 0.5 * (hess + hess.T))

    def contains(self, y: typing.Any) -> bool:
        try:
            self.jet(y)
        except OutsideDomainError:
            return False
        return True

    def value(self, y: typing.Any) -> float:
        return self.jet(y).value

    def gradient(self, y: typing.Any) -> np.ndarray:
        return self.jet(y).gradient

    def hessian(self, y: typing.Any) -> np.ndarray:
        return self.jet(y).hessian


@dataclasses.dataclass(frozen=True)
class LegendrePair:
    """A convex graph function f and its Legendre transform v.

    `v_of_x` is set on the grid path: the node values x . grad f - f on the
    grid of f, differentiated in x by the grid stencils.
    """

    f: Potential
    v: Potential
    v_of_x: GridPotential | None = None

    def gradient_map(self, x: typing.Any) -> np.ndarray:
        return self.f.gradient(x)

    def inverse_map(self, y: typing.Any) -> np.ndarray:
        return self.v.gradient(y)

    def dual_value_at(self, x: typing.Any) -> float:
        """v evaluated at y = grad f(x)."""
        if self.v_of_x is not None:
            return self.v_of_x.value(x)
        return self.v.value(self.f.gradient(x))


def _grid_transform(f: GridPotential) -> LegendrePair:
    x = f.grid.points
    y = f.node_gradients
    hessians = f.node_hessians
    lam = np.linalg.eigvalsh(hessians)[:, 0]
    bad = int(np.count_nonzero(lam <= 0))
    if bad:
        raise ConvexityError(f"hessian is not positive definite at {bad} grid nodes")
    v_nodes = np.einsum("mi,mi->m", x, y) - f.node_values
    v = ResampledPotential(y, v_nodes, x, np.linalg.inv(hessians), f.grid.shape)
    return LegendrePair(f, v, GridPotential(f.grid, v_nodes, role=ROLE_GRAPH))


def legendre_transform(f: Potential) -> LegendrePair:
    if isinstance(f, GridPotential):
        logger.debug("grid legendre transform on %s nodes", f.grid.shape)
        return _grid_transform(f)
    return LegendrePair(f, LegendrePotential(f))


def gradient_identity_defect(pair: LegendrePair, x: typing.Any) -> np.ndarray:
    """dv/dx^j - x^i f_ij at x."""
    p = pair.f.point(x)
    hess = pair.f.hessian(p)
    if pair.v_of_x is not None:
        return pair.v_of_x.gradient(p) - hess @ p
    x_back = pair.v.gradient(pair.f.gradient(p))
    return hess @ x_back - hess @ p


def duality_gap(pair: LegendrePair, x: typing.Any) -> float:
    """v + f at x; non-negative on star-shaped domains when f is minimal at 0."""
    origin = np.zeros(pair.f.dim)
    if not pair.f.contains(origin):
        raise PreconditionError("origin lies outside the domain of f")
    grad = float(np.linalg.norm(pair.f.gradient(origin)))
    if grad > MINIMUM_GRADIENT_TOLERANCE * (1.0 + abs(pair.f.value(origin))):
        raise PreconditionError(f"f is not minimal at the origin (gradient norm {grad:.3e})")
    p = pair.f.point(x)
    gap = pair.dual_value_at(p) + pair.f.value(p)
    if gap < -DUALITY_GAP_SLACK:
        logger.warning("negative duality gap %.3e at %s", gap, tuple(p))
    return float(gap)


def injectivity_margin(f: Potential, a: np.ndarray, b: np.ndarray) -> float:
    """Smallest |grad f(x) - grad f(x')| / |x - x'| over paired samples."""
    ratios = []
    for p, q in zip(np.atleast_2d(a), np.atleast_2d(b)):
        d = float(np.linalg.norm(p - q))
        if d > 0:
            ratios.append(float(np.linalg.norm(f.gradient(p) - f.gradient(q))) / d)
    return min(ratios) if ratios else np.inf
