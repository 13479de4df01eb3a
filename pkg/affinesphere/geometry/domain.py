import dataclasses
import enum
import logging
import typing

import numpy as np
import scipy.ndimage
import scipy.sparse

from ..const import INSIDE_MARGIN, MINIMUM_GRADIENT_TOLERANCE
from .abc import Potential, as_point
from .errors import InvalidDomainError, NonConvexDomainError, PreconditionError

__all__ = [
    "ConvexDomain",
    "DomainKind",
    "GridSpec",
    "Stencil",
    "SublevelSet",
    "locate_base_point",
    "sublevel_set",
]

logger = logging.getLogger(__name__)


class DomainKind(enum.Enum):
    INTERVAL = "interval"
    DISK = "disk"
    ELLIPSE = "ellipse"
    POLYGON = "polygon"

    @property
    def ellipsoidal(self) -> bool:
        return self is not DomainKind.POLYGON


@dataclasses.dataclass(frozen=True)
class ConvexDomain:
    """Bounded convex domain of an inhomogeneous projective chart.

    Intervals, disks and ellipses are stored as axis-aligned ellipsoids
    (`center`, `semi_axes`); polygons by their counter-clockwise vertices.
    """

    kind: DomainKind
    center: tuple[float, ...] = ()
    semi_axes: tuple[float, ...] = ()
    vertices: tuple[tuple[float, float], ...] = ()
    base: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind.ellipsoidal:
            if len(self.center) != len(self.semi_axes) or not self.center:
                raise InvalidDomainError("center and semi-axes must match in length")
            if min(self.semi_axes) <= 0:
                raise InvalidDomainError("semi-axes must be positive")
        else:
            verts = np.asarray(self.vertices, dtype=float)
            if verts.ndim != 2 or verts.shape[0] < 3 or verts.shape[1] != 2:
                raise InvalidDomainError("a polygon needs at least 3 planar vertices")
            edges = np.roll(verts, -1, axis=0) - verts
            cross = edges[:, 0] * np.roll(edges, -1, axis=0)[:, 1] - (
                edges[:, 1] * np.roll(edges, -1, axis=0)[:, 0]
            )
            if np.all(cross > 0):
                pass
            elif np.all(cross < 0):
                object.__setattr__(self, "vertices", tuple(map(tuple, verts[::-1])))
            else:
                raise NonConvexDomainError("polygon vertices are not strictly convex")
        if self.base is not None and not self.contains(self.base):
            raise InvalidDomainError("base point must lie inside the domain")

    @classmethod
    def interval(cls, lo: float = -1.0, hi: float = 1.0) -> "ConvexDomain":
        if hi <= lo:
            raise InvalidDomainError("interval must have positive length")
        return cls(DomainKind.INTERVAL, ((lo + hi) / 2,), ((hi - lo) / 2,))

    @classmethod
    def disk(
        cls, center: typing.Sequence[float] = (0.0, 0.0), radius: float = 1.0
    ) -> "ConvexDomain":
        return cls(DomainKind.DISK, tuple(map(float, center)), (radius, radius))

    @classmethod
    def ellipse(
        cls,
        center: typing.Sequence[float] = (0.0, 0.0),
        semi_axes: typing.Sequence[float] = (2.0, 1.0),
    ) -> "ConvexDomain":
        return cls(
            DomainKind.ELLIPSE, tuple(map(float, center)), tuple(map(float, semi_axes))
        )

    @classmethod
    def polygon(
        cls, vertices: typing.Sequence[typing.Sequence[float]]
    ) -> "ConvexDomain":
        return cls(DomainKind.POLYGON, vertices=tuple(tuple(map(float, v)) for v in vertices))

    @classmethod
    def square(cls, half: float = 1.0) -> "ConvexDomain":
        return cls.polygon([(-half, -half), (half, -half), (half, half), (-half, half)])

    @property
    def dim(self) -> int:
        if self.kind.ellipsoidal:
            return len(self.center)
        return 2

    @property
    def base_point(self) -> np.ndarray:
        if self.base is not None:
            return np.asarray(self.base, dtype=float)
        if self.kind.ellipsoidal:
            return np.asarray(self.center, dtype=float)
        return np.asarray(self.vertices, dtype=float).mean(axis=0)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        if self.kind.ellipsoidal:
            c = np.asarray(self.center)
            a = np.asarray(self.semi_axes)
            return c - a, c + a
        verts = np.asarray(self.vertices)
        return verts.min(axis=0), verts.max(axis=0)

    def _half_planes(self) -> tuple[np.ndarray, np.ndarray]:
        """Unit outward normals and offsets, interior is normals @ x < offsets."""
        verts = np.asarray(self.vertices)
        edges = np.roll(verts, -1, axis=0) - verts
        normals = np.stack([edges[:, 1], -edges[:, 0]], axis=1)
        normals /= np.linalg.norm(normals, axis=1, keepdims=True)
        offsets = np.einsum("ij,ij->i", normals, verts)
        return normals, offsets

    def boundary_distance(self, points: typing.Any) -> np.ndarray:
        """Distance to the boundary, exact for disks and polygons.

        Ellipses use the radially rescaled surrogate
        `(1 - |D^-1 (t - c)|) * min(semi_axes)`. Negative outside.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.kind.ellipsoidal:
            scaled = (pts - np.asarray(self.center)) / np.asarray(self.semi_axes)
            rho = np.linalg.norm(scaled, axis=1)
            return (1.0 - rho) * min(self.semi_axes)
        normals, offsets = self._half_planes()
        return np.min(offsets[None, :] - pts @ normals.T, axis=1)

    def contains_many(self, points: typing.Any, *, margin: float = INSIDE_MARGIN) -> np.ndarray:
        return self.boundary_distance(points) > margin

    def contains(self, point: typing.Any, *, margin: float = INSIDE_MARGIN) -> bool:
        return bool(self.contains_many(as_point(point, self.dim)[None, :], margin=margin)[0])

    def ray_exit_many(self, points: typing.Any, direction: typing.Any) -> np.ndarray:
        """Smallest s > 0 with `point + s * direction` on the boundary."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        d = np.asarray(direction, dtype=float)
        if self.kind.ellipsoidal:
            inv = 1.0 / np.asarray(self.semi_axes)
            pa = (pts - np.asarray(self.center)) * inv
            da = d * inv
            a = da @ da
            b = pa @ da
            c = np.einsum("ij,ij->i", pa, pa) - 1.0
            disc = np.maximum(b * b - a * c, 0.0)
            return (-b + np.sqrt(disc)) / a
        normals, offsets = self._half_planes()
        gap = offsets[None, :] - pts @ normals.T
        rate = normals @ d
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(rate[None, :] > 0, gap / rate[None, :], np.inf)
        return np.min(s, axis=1)

    def ray_exit(self, point: typing.Any, direction: typing.Any) -> float:
        return float(self.ray_exit_many(as_point(point, self.dim)[None, :], direction)[0])


def _directions(dim: int) -> tuple[tuple[int, ...], ...]:
    if dim == 1:
        return ((1,),)
    if dim == 2:
        return ((1, 0), (0, 1), (1, 1), (1, -1))
    raise ValueError("only dimensions 1 and 2 are supported")


@dataclasses.dataclass(frozen=True, eq=False)
class Stencil:
    """Three-point differences along one lattice direction.

    Neighbours outside the domain are replaced by the boundary point on the
    same grid line (value 0) at fraction `theta` of the lattice step. Both
    the second and the first difference are exact for quadratics.
    """

    offset: tuple[int, ...]
    step: float
    left: np.ndarray
    right: np.ndarray
    theta_left: np.ndarray
    theta_right: np.ndarray

    @property
    def coefficients(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        hl = self.theta_left * self.step
        hr = self.theta_right * self.step
        c_left = 2.0 / (hl * (hl + hr))
        c_right = 2.0 / (hr * (hl + hr))
        c_center = -2.0 / (hl * hr)
        return c_left, c_center, c_right

    @property
    def first_coefficients(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        hl = self.theta_left * self.step
        hr = self.theta_right * self.step
        c_left = -hr / (hl * (hl + hr))
        c_right = hl / (hr * (hl + hr))
        c_center = (hr - hl) / (hl * hr)
        return c_left, c_center, c_right

    def apply(self, values: np.ndarray, *, rhs_boundary: float = 0.0) -> np.ndarray:
        return self._apply(self.coefficients, values, rhs_boundary)

    def apply_first(self, values: np.ndarray, *, rhs_boundary: float = 0.0) -> np.ndarray:
        return self._apply(self.first_coefficients, values, rhs_boundary)

    def matrix(self) -> scipy.sparse.csr_matrix:
        return self._matrix(self.coefficients)

    def first_matrix(self) -> scipy.sparse.csr_matrix:
        return self._matrix(self.first_coefficients)

    def _apply(
        self, coefficients: tuple[np.ndarray, ...], values: np.ndarray, rhs_boundary: float
    ) -> np.ndarray:
        c_left, c_center, c_right = coefficients
        out = c_center * values
        has_left = self.left >= 0
        has_right = self.right >= 0
        out += np.where(has_left, c_left * values[np.maximum(self.left, 0)], c_left * rhs_boundary)
        out += np.where(
            has_right, c_right * values[np.maximum(self.right, 0)], c_right * rhs_boundary
        )
        return out

    def _matrix(self, coefficients: tuple[np.ndarray, ...]) -> scipy.sparse.csr_matrix:
        m = self.left.shape[0]
        c_left, c_center, c_right = coefficients
        rows = np.arange(m)
        has_left = self.left >= 0
        has_right = self.right >= 0
        r = np.concatenate([rows, rows[has_left], rows[has_right]])
        c = np.concatenate([rows, self.left[has_left], self.right[has_right]])
        v = np.concatenate([c_center, c_left[has_left], c_right[has_right]])
        return scipy.sparse.csr_matrix((v, (r, c)), shape=(m, m))


@dataclasses.dataclass(frozen=True, eq=False)
class GridSpec:
    """Uniform grid over a convex domain with cut-cell boundary data."""

    domain: ConvexDomain
    origin: np.ndarray
    spacing: np.ndarray
    shape: tuple[int, ...]
    mask: np.ndarray
    index: np.ndarray
    stencils: tuple[Stencil, ...]

    @classmethod
    def build(
        cls,
        domain: ConvexDomain,
        nodes: int | typing.Sequence[int],
        *,
        origin: typing.Sequence[float] | None = None,
        spacing: typing.Sequence[float] | None = None,
    ) -> "GridSpec":
        dim = domain.dim
        shape = tuple([int(nodes)] * dim) if np.isscalar(nodes) else tuple(map(int, nodes))
        if len(shape) != dim or min(shape) < 3:
            raise ValueError("need at least 3 nodes per axis")

        lo, hi = domain.bounding_box()
        org = np.asarray(lo if origin is None else origin, dtype=float)
        if spacing is None:
            sp = (hi - lo) / (np.asarray(shape) - 1)
        else:
            sp = np.asarray(spacing, dtype=float)
        if np.any(sp <= 0):
            raise ValueError("spacing must be positive")

        axes = [org[k] + sp[k] * np.arange(shape[k]) for k in range(dim)]
        coords = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)
        mask = domain.contains_many(coords).reshape(shape)
        edge = np.zeros(shape, dtype=bool)
        for k in range(dim):
            sl = [slice(None)] * dim
            sl[k] = 0
            edge[tuple(sl)] = True
            sl[k] = -1
            edge[tuple(sl)] = True
        if np.any(mask & edge):
            raise InvalidDomainError("grid does not cover the domain")
        if not mask.any():
            raise InvalidDomainError("grid has no interior nodes")

        index = np.full(shape, -1, dtype=np.int64)
        index[mask] = np.arange(int(mask.sum()))
        interior = np.argwhere(mask)
        points = org + interior * sp

        stencils = []
        for offset in _directions(dim):
            off = np.asarray(offset)
            vec = off * sp
            step = float(np.linalg.norm(vec))
            sides = []
            for sign in (-1, 1):
                nb = interior + sign * off
                nb_index = index[tuple(nb.T)]
                theta = np.ones(len(points))
                cut = nb_index < 0
                if cut.any():
                    s = domain.ray_exit_many(points[cut], sign * vec)
                    theta[cut] = np.clip(s, np.finfo(float).tiny, 1.0)
                sides.append((nb_index, theta))
            (left, theta_left), (right, theta_right) = sides
            stencils.append(Stencil(offset, step, left, right, theta_left, theta_right))

        logger.debug("built grid %s with %d interior nodes", shape, len(points))
        return cls(domain, org, sp, shape, mask, index, tuple(stencils))

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return int(self.mask.sum())

    @property
    def h(self) -> float:
        return float(np.max(self.spacing))

    def axes(self) -> list[np.ndarray]:
        return [self.origin[k] + self.spacing[k] * np.arange(self.shape[k]) for k in range(self.dim)]

    def all_points(self) -> np.ndarray:
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)

    @property
    def points(self) -> np.ndarray:
        """Interior node coordinates in interior numbering order."""
        return self.origin + np.argwhere(self.mask) * self.spacing

    def to_array(self, values: np.ndarray, fill: float = np.nan) -> np.ndarray:
        out = np.full(self.shape, fill, dtype=float)
        out[self.mask] = values
        return out

    def sample(self, fn: typing.Callable[[np.ndarray], float]) -> np.ndarray:
        return np.array([fn(p) for p in self.points])

    def nearest_node(self, point: typing.Any) -> tuple[int, ...]:
        p = as_point(point, self.dim)
        idx = np.rint((p - self.origin) / self.spacing).astype(int)
        idx = np.clip(idx, 0, np.asarray(self.shape) - 1)
        return tuple(int(i) for i in idx)

    def discrete_hessian(self, values: np.ndarray) -> np.ndarray:
        """Cut-cell discrete Hessian at every interior node, shape (m, n, n)."""
        d = [st.apply(values) for st in self.stencils]
        return self._assemble(d)

    def discrete_gradient(self, values: np.ndarray) -> np.ndarray:
        """Cut-cell first differences along the axes, shape (m, n)."""
        return np.stack([st.apply_first(values) for st in self.stencils[: self.dim]], axis=1)

    def gradient_operators(self) -> list[scipy.sparse.csr_matrix]:
        return [st.first_matrix() for st in self.stencils[: self.dim]]

    def root_parts(self, psi: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Discrete gradient and Hessian of psi, and M = grad psi grad psi^T - 2 psi D^2 psi.

        For u = -sqrt(psi) the Hessian of u is M / (4 psi^(3/2)).
        """
        grad = self.discrete_gradient(psi)
        hess = self.discrete_hessian(psi)
        m = np.einsum("ki,kj->kij", grad, grad) - 2.0 * psi[:, None, None] * hess
        return grad, hess, m

    def hessian_operators(self) -> dict[tuple[int, int], scipy.sparse.csr_matrix]:
        """Sparse matrices of the discrete Hessian entries (i <= j)."""
        mats = [st.matrix() for st in self.stencils]
        if self.dim == 1:
            return {(0, 0): mats[0]}
        h1, h2 = self.spacing
        cross = (h1 * h1 + h2 * h2) / (4.0 * h1 * h2)
        return {
            (0, 0): mats[0],
            (1, 1): mats[1],
            (0, 1): ((mats[2] - mats[3]) * cross).tocsr(),
        }

    def _assemble(self, d: list[np.ndarray]) -> np.ndarray:
        m = d[0].shape[0]
        if self.dim == 1:
            return d[0].reshape(m, 1, 1)
        h1, h2 = self.spacing
        cross = (d[2] - d[3]) * (h1 * h1 + h2 * h2) / (4.0 * h1 * h2)
        out = np.empty((m, 2, 2))
        out[:, 0, 0] = d[0]
        out[:, 1, 1] = d[1]
        out[:, 0, 1] = out[:, 1, 0] = cross
        return out

    def laplacian(self) -> scipy.sparse.csr_matrix:
        mats = [st.matrix() for st in self.stencils[: self.dim]]
        return sum(mats[1:], mats[0]).tocsr()


@dataclasses.dataclass(frozen=True, eq=False)
class SublevelSet:
    """Connected component of the level-h section containing the base point."""

    level: float
    base_point: np.ndarray
    grid: GridSpec
    members: np.ndarray

    @property
    def empty(self) -> bool:
        return not self.members.any()

    @property
    def points(self) -> np.ndarray:
        return self.grid.all_points()[self.members]

    def __len__(self) -> int:
        return int(self.members.sum())

    def contains(self, point: typing.Any) -> bool:
        return bool(self.members[self.grid.nearest_node(point)])


def _node_values(u: Potential, grid: GridSpec, values: np.ndarray | None = None) -> np.ndarray:
    if values is not None:
        return values
    values = getattr(u, "node_values", None)
    if values is not None and getattr(u, "grid", None) is grid:
        return values
    return grid.sample(u.value)


def locate_base_point(u: Potential, grid: GridSpec, *, values: np.ndarray | None = None) -> np.ndarray:
    """Grid argmin of u refined by one Newton step."""
    values = _node_values(u, grid, values)
    p = grid.points[int(np.argmin(values))]
    try:
        step = np.linalg.solve(u.hessian(p), u.gradient(p))
    except np.linalg.LinAlgError:
        return p
    refined = p - step
    if np.linalg.norm(step) <= grid.h and u.contains(refined):
        return refined
    return p


def sublevel_set(
    u: Potential,
    h: float,
    p: typing.Any,
    grid: GridSpec,
    *,
    gradient_tolerance: float = MINIMUM_GRADIENT_TOLERANCE,
    values: np.ndarray | None = None,
) -> SublevelSet:
    """{u < -1/h} for potentials, {f < h} for graph functions, as grid nodes.

    Both describe the same section of the hypersurface in their own chart.
    """
    if h <= 0:
        raise PreconditionError("level h must be positive")
    base = u.point(p)
    grad = np.linalg.norm(u.gradient(base))
    if grad > gradient_tolerance * (1.0 + abs(u.value(base))):
        raise PreconditionError(f"base point is not a minimum (gradient norm {grad:.3e})")

    threshold = h if u.is_graph else -1.0 / h
    members = np.zeros(grid.shape, dtype=bool)
    if u.value(base) >= threshold:
        return SublevelSet(h, base, grid, members)

    below = grid.to_array(_node_values(u, grid, values), fill=np.inf) < threshold
    labels, _ = scipy.ndimage.label(below)
    seed = grid.nearest_node(base)
    label = labels[seed]
    if label == 0:
        logger.warning("no grid node of the sublevel set is adjacent to the base point")
        return SublevelSet(h, base, grid, members)
    return SublevelSet(h, base, grid, labels == label)
