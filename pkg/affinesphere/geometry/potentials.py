import abc
import dataclasses
import functools
import json
import logging
import pathlib
import typing

import numpy as np
import scipy.interpolate
import scipy.optimize
import voluptuous as vol

from ..const import PD_RELATIVE_TOLERANCE, ROLE_GRAPH, ROLE_POTENTIAL
from .abc import Jet, Potential, as_point
from .domain import ConvexDomain, DomainKind, GridSpec
from .errors import InvalidDomainError, OutsideDomainError, TangencyError

__all__ = [
    "BUILTINS",
    "BallPotential",
    "GridPotential",
    "HessianSample",
    "HyperboloidPotential",
    "PolynomialPotential",
    "QuadraticPotential",
    "RadialGraphPotential",
    "builtin_potential",
    "domain_from_spec",
    "exact_solution",
    "graph_jet",
    "hessian_at",
    "positive_definite",
    "radial_graph_jet",
    "load_potential_spec",
]

logger = logging.getLogger(__name__)


class RadialPotential(Potential):
    """kappa * F(|q|^2) with q = D^-1 (t - c) for a scalar profile F."""

    __slots__ = ("_center", "_inv_axes", "_scale", "_domain")

    def __init__(
        self,
        dim: int,
        *,
        center: typing.Sequence[float] | None = None,
        semi_axes: typing.Sequence[float] | None = None,
        scale: float = 1.0,
        domain: ConvexDomain | None = None,
    ) -> None:
        self._center = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
        axes = np.ones(dim) if semi_axes is None else np.asarray(semi_axes, dtype=float)
        self._inv_axes = 1.0 / axes
        self._scale = float(scale)
        self._domain = domain

    @property
    def dim(self) -> int:
        return self._center.shape[0]

    @property
    def domain(self) -> ConvexDomain | None:
        return self._domain

    @abc.abstractmethod
    def profile(self, s: float) -> tuple[float, float, float, float]:
        """F(s) and its first three derivatives."""

    def _q(self, t: np.ndarray) -> np.ndarray:
        return (t - self._center) * self._inv_axes

    def value(self, t: typing.Any) -> float:
        q = self._q(self.point(t))
        return self._scale * self.profile(q @ q)[0]

    def gradient(self, t: typing.Any) -> np.ndarray:
        q = self._q(self.point(t))
        _, f1, _, _ = self.profile(q @ q)
        return self._scale * self._inv_axes * (2.0 * f1 * q)

    def hessian(self, t: typing.Any) -> np.ndarray:
        q = self._q(self.point(t))
        _, f1, f2, _ = self.profile(q @ q)
        h = 2.0 * f1 * np.eye(self.dim) + 4.0 * f2 * np.outer(q, q)
        d = self._inv_axes
        return self._scale * h * np.outer(d, d)

    def third(self, t: typing.Any) -> np.ndarray:
        q = self._q(self.point(t))
        _, _, f2, f3 = self.profile(q @ q)
        eye = np.eye(self.dim)
        sym = (
            np.einsum("ij,k->ijk", eye, q)
            + np.einsum("ik,j->ijk", eye, q)
            + np.einsum("jk,i->ijk", eye, q)
        )
        tensor = 4.0 * f2 * sym + 8.0 * f3 * np.einsum("i,j,k->ijk", q, q, q)
        d = self._inv_axes
        return self._scale * tensor * np.einsum("i,j,k->ijk", d, d, d)

    def jet(self, t: typing.Any) -> Jet:
        p = self.point(t)
        q = self._q(p)
        f0, f1, f2, _ = self.profile(q @ q)
        d = self._inv_axes
        grad = self._scale * d * (2.0 * f1 * q)
        hess = self._scale * (2.0 * f1 * np.eye(self.dim) + 4.0 * f2 * np.outer(q, q))
        return Jet(self._scale * f0, grad, hess * np.outer(d, d))


class BallPotential(RadialPotential):
    """Dirichlet solution -kappa * sqrt(1 - |D^-1 (t - c)|^2) on an ellipsoid.

    kappa = (prod semi-axes)^(1/(n+1)); the unit ball gives u* = -sqrt(1 - |t|^2).
    """

    __slots__ = ()

    def __init__(
        self,
        dim: int = 2,
        *,
        center: typing.Sequence[float] | None = None,
        semi_axes: typing.Sequence[float] | None = None,
    ) -> None:
        c = (0.0,) * dim if center is None else tuple(map(float, center))
        a = (1.0,) * dim if semi_axes is None else tuple(map(float, semi_axes))
        if dim == 1:
            domain = ConvexDomain(DomainKind.INTERVAL, c, a)
        else:
            kind = DomainKind.DISK if len(set(a)) == 1 else DomainKind.ELLIPSE
            domain = ConvexDomain(kind, c, a)
        super().__init__(
            dim,
            center=c,
            semi_axes=a,
            scale=float(np.prod(a)) ** (1.0 / (dim + 1)),
            domain=domain,
        )

    @property
    def role(self) -> str:
        return ROLE_POTENTIAL

    def profile(self, s: float) -> tuple[float, float, float, float]:
        r = 1.0 - s
        rho = np.sqrt(r)
        return -rho, 0.5 / rho, 0.25 / (r * rho), 0.375 / (r * r * rho)


class HyperboloidPotential(RadialPotential):
    """Graph function f(x) = sqrt(1 + |x|^2) of the unit hyperboloid."""

    __slots__ = ()

    def __init__(self, dim: int = 2) -> None:
        super().__init__(dim)

    @property
    def role(self) -> str:
        return ROLE_GRAPH

    def profile(self, s: float) -> tuple[float, float, float, float]:
        r = 1.0 + s
        rho = np.sqrt(r)
        return rho, 0.5 / rho, -0.25 / (r * rho), 0.375 / (r * r * rho)


class PolynomialPotential(RadialPotential):
    """sum_k c_k |t - c|^(2k)."""

    __slots__ = ("_coefficients", "_role")

    def __init__(
        self,
        coefficients: typing.Sequence[float],
        *,
        dim: int = 2,
        role: str = ROLE_GRAPH,
        center: typing.Sequence[float] | None = None,
        domain: ConvexDomain | None = None,
    ) -> None:
        if not coefficients:
            raise ValueError("polynomial needs at least one coefficient")
        super().__init__(dim, center=center, domain=domain)
        self._coefficients = np.polynomial.Polynomial(np.asarray(coefficients, dtype=float))
        self._role = role

    @property
    def role(self) -> str:
        return self._role

    @property
    def coefficients(self) -> np.ndarray:
        return self._coefficients.coef

    def profile(self, s: float) -> tuple[float, float, float, float]:
        p = self._coefficients
        return float(p(s)), float(p.deriv(1)(s)), float(p.deriv(2)(s)), float(p.deriv(3)(s))


class QuadraticPotential(Potential):
    """offset + b . t + t^T M t / 2."""

    __slots__ = ("_offset", "_linear", "_matrix", "_role", "_domain")

    def __init__(
        self,
        offset: float,
        matrix: typing.Any,
        linear: typing.Any | None = None,
        *,
        role: str = ROLE_POTENTIAL,
        domain: ConvexDomain | None = None,
    ) -> None:
        m = np.atleast_2d(np.asarray(matrix, dtype=float))
        if m.shape[0] != m.shape[1] or not np.allclose(m, m.T):
            raise ValueError("quadratic form must be symmetric")
        self._offset = float(offset)
        self._matrix = m
        self._linear = np.zeros(m.shape[0]) if linear is None else np.asarray(linear, dtype=float)
        self._role = role
        self._domain = domain

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    @property
    def role(self) -> str:
        return self._role

    @property
    def domain(self) -> ConvexDomain | None:
        return self._domain

    def value(self, t: typing.Any) -> float:
        p = self.point(t)
        return float(self._offset + self._linear @ p + 0.5 * p @ self._matrix @ p)

    def gradient(self, t: typing.Any) -> np.ndarray:
        return self._linear + self._matrix @ self.point(t)

    def hessian(self, t: typing.Any) -> np.ndarray:
        self.point(t)
        return self._matrix.copy()

    def third(self, t: typing.Any) -> np.ndarray:
        return np.zeros((self.dim,) * 3)


def _inside(mask: np.ndarray, idx: typing.Sequence[int]) -> bool:
    return all(0 <= i < s for i, s in zip(idx, mask.shape)) and bool(mask[tuple(idx)])


def _shift(idx: tuple[int, ...], axis: int, by: int) -> tuple[int, ...]:
    out = list(idx)
    out[axis] += by
    return tuple(out)


_FIRST_CENTERED = ((-1, -0.5), (1, 0.5))
_FIRST_FORWARD = ((0, -1.5), (1, 2.0), (2, -0.5))
_FIRST_SHORT = ((0, -1.0), (1, 1.0))
_SECOND_CENTERED = ((-1, 1.0), (0, -2.0), (1, 1.0))
_SECOND_FORWARD = ((0, 2.0), (1, -5.0), (2, 4.0), (3, -1.0))
_SECOND_SHORT = ((0, 1.0), (1, -2.0), (2, 1.0))


def _weights(
    mask: np.ndarray,
    idx: tuple[int, ...],
    axis: int,
    choices: typing.Sequence[tuple[tuple[int, float], ...]],
) -> list[tuple[tuple[int, ...], float]]:
    """First stencil of `choices` whose nodes are interior, forward or mirrored."""
    for stencil in choices:
        for sign in (1, -1):
            nodes = [(_shift(idx, axis, sign * o), w) for o, w in stencil]
            if all(_inside(mask, n) for n, _ in nodes):
                odd = stencil in (_FIRST_FORWARD, _FIRST_SHORT)
                return [(n, w * sign if odd else w) for n, w in nodes]
            if stencil in (_FIRST_CENTERED, _SECOND_CENTERED):
                break
    raise OutsideDomainError(f"no finite-difference stencil fits at node {idx}")


def _first(vals, mask, idx, axis, h) -> float:
    ws = _weights(mask, idx, axis, (_FIRST_CENTERED, _FIRST_FORWARD, _FIRST_SHORT))
    return sum(w * vals[n] for n, w in ws) / h[axis]


def _second(vals, mask, idx, axis, h) -> float:
    ws = _weights(mask, idx, axis, (_SECOND_CENTERED, _SECOND_FORWARD, _SECOND_SHORT))
    return sum(w * vals[n] for n, w in ws) / h[axis] ** 2


def _cross(vals, mask, idx, h) -> float:
    diagonal = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    if all(_inside(mask, (idx[0] + a, idx[1] + b)) for a, b in diagonal):
        i, j = idx
        return (
            vals[i + 1, j + 1] - vals[i + 1, j - 1] - vals[i - 1, j + 1] + vals[i - 1, j - 1]
        ) / (4.0 * h[0] * h[1])
    ws = _weights(mask, idx, 0, (_FIRST_CENTERED, _FIRST_FORWARD, _FIRST_SHORT))
    return sum(w * _first(vals, mask, n, 1, h) for n, w in ws) / h[0]


@dataclasses.dataclass(frozen=True)
class HessianSample:
    matrix: np.ndarray
    eigenvalues: np.ndarray
    positive_definite: bool

    def __array__(self, dtype=None, copy=None) -> np.ndarray:
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[0])


def positive_definite(matrix: np.ndarray, eigenvalues: np.ndarray | None = None) -> bool:
    eig = np.linalg.eigvalsh(matrix) if eigenvalues is None else eigenvalues
    return bool(eig[0] > PD_RELATIVE_TOLERANCE * (1.0 + abs(np.trace(matrix))))


def _root_jets(psi: np.ndarray, grad: np.ndarray, hess: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Value, gradient and Hessian of u = -sqrt(psi) from the fields of psi."""
    root = np.sqrt(psi)
    m = np.einsum("ki,kj->kij", grad, grad) - 2.0 * psi[:, None, None] * hess
    return -root, -grad / (2.0 * root[:, None]), m / (4.0 * (psi * root))[:, None, None]


class GridPotential(Potential):
    """Node values on a GridSpec.

    Node derivatives use centered differences with one-sided second-order
    fallbacks near the boundary; off-node evaluation interpolates the node
    fields linearly and fails where a cell touches the exterior.

    With `dirichlet=True` the values are a negative potential vanishing on the
    boundary. Derivatives are then taken of psi = u^2 with the cut-cell
    differences of the grid, and psi fields are what gets interpolated.
    """

    __slots__ = ("_grid", "_values", "_role", "_dirichlet", "__dict__")

    def __init__(
        self, grid: GridSpec, values: typing.Any, *, role: str = ROLE_POTENTIAL, dirichlet: bool = False
    ) -> None:
        vals = np.asarray(values, dtype=float)
        if vals.shape != (grid.size,):
            raise ValueError("one value per interior node is required")
        if dirichlet and np.any(vals >= 0):
            raise ValueError("boundary-vanishing potentials must be negative at every interior node")
        self._grid = grid
        self._values = vals
        self._role = role
        self._dirichlet = dirichlet

    @property
    def grid(self) -> GridSpec:
        return self._grid

    @property
    def node_values(self) -> np.ndarray:
        return self._values

    @property
    def dim(self) -> int:
        return self._grid.dim

    @property
    def role(self) -> str:
        return self._role

    @property
    def dirichlet(self) -> bool:
        return self._dirichlet

    @property
    def domain(self) -> ConvexDomain:
        return self._grid.domain

    @functools.cached_property
    def _array(self) -> np.ndarray:
        return self._grid.to_array(self._values)

    @functools.cached_property
    def _root_fields(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        psi = self._values**2
        grad, hess, _ = self._grid.root_parts(psi)
        return psi, grad, hess

    def _node_index(self, node: tuple[int, ...]) -> int:
        if not _inside(self._grid.mask, node):
            raise OutsideDomainError(f"node {node} is not an interior node")
        return int(self._grid.index[tuple(node)])

    def node_hessian(self, node: tuple[int, ...]) -> np.ndarray:
        k = self._node_index(node)
        if self._dirichlet:
            return self.node_hessians[k]
        vals, mask, h = self._array, self._grid.mask, self._grid.spacing
        n = self.dim
        out = np.empty((n, n))
        for axis in range(n):
            out[axis, axis] = _second(vals, mask, node, axis, h)
        if n == 2:
            out[0, 1] = out[1, 0] = _cross(vals, mask, node, h)
        return out

    def node_gradient(self, node: tuple[int, ...]) -> np.ndarray:
        k = self._node_index(node)
        if self._dirichlet:
            return self.node_gradients[k]
        vals, mask, h = self._array, self._grid.mask, self._grid.spacing
        return np.array([_first(vals, mask, node, axis, h) for axis in range(self.dim)])

    @functools.cached_property
    def node_hessians(self) -> np.ndarray:
        if self._dirichlet:
            return _root_jets(*self._root_fields)[2]
        nodes = [tuple(i) for i in np.argwhere(self._grid.mask)]
        return np.array([self.node_hessian(nd) for nd in nodes])

    @functools.cached_property
    def node_gradients(self) -> np.ndarray:
        if self._dirichlet:
            return _root_jets(*self._root_fields)[1]
        nodes = [tuple(i) for i in np.argwhere(self._grid.mask)]
        return np.array([self.node_gradient(nd) for nd in nodes])

    @functools.cached_property
    def _interpolator(self) -> scipy.interpolate.RegularGridInterpolator:
        n = self.dim
        if self._dirichlet:
            # local quadratic a + b.t + t.H.t/2 of psi at every node, averaged by the interpolator
            psi, grad, hess = self._root_fields
            x = self._grid.points
            hx = np.einsum("kij,kj->ki", hess, x)
            a = psi - np.einsum("ki,ki->k", grad, x) + 0.5 * np.einsum("ki,ki->k", x, hx)
            fields = [a[:, None], grad - hx, hess.reshape(-1, n * n)]
        else:
            fields = [self._values[:, None], self.node_gradients, self.node_hessians.reshape(-1, n * n)]
        stacked = np.concatenate(fields, axis=1)
        full = np.full(self._grid.shape + (stacked.shape[1],), np.nan)
        full[self._grid.mask] = stacked
        return scipy.interpolate.RegularGridInterpolator(
            self._grid.axes(), full, method="linear", bounds_error=False, fill_value=np.nan
        )

    def node_at(self, t: typing.Any) -> tuple[int, ...] | None:
        p = as_point(t, self.dim)
        node = self._grid.nearest_node(p)
        coords = self._grid.origin + np.asarray(node) * self._grid.spacing
        if np.all(np.abs(coords - p) <= 1e-9 * self._grid.spacing) and self._grid.mask[node]:
            return node
        return None

    def jet(self, t: typing.Any) -> Jet:
        p = self.point(t)
        node = self.node_at(p)
        n = self.dim
        if node is not None:
            k = int(self._grid.index[node])
            return Jet(float(self._values[k]), self.node_gradients[k], self.node_hessians[k])
        row = self._interpolator(p[None, :])[0]
        if np.any(np.isnan(row)):
            raise OutsideDomainError(f"point {tuple(p)} is outside the interpolable region")
        value, grad, hess = row[:1], row[1 : 1 + n][None, :], row[1 + n :].reshape(1, n, n)
        hess = 0.5 * (hess + hess.transpose(0, 2, 1))
        if self._dirichlet:
            quad = hess[0]
            value = value + grad[0] @ p + 0.5 * p @ quad @ p
            grad = grad + (quad @ p)[None, :]
            if value[0] <= 0:
                raise OutsideDomainError(f"interpolated square is not positive at {tuple(p)}")
            value, grad, hess = _root_jets(value, grad, hess)
        return Jet(float(value[0]), grad[0], hess[0])

    def value(self, t: typing.Any) -> float:
        return self.jet(t).value

    def gradient(self, t: typing.Any) -> np.ndarray:
        return self.jet(t).gradient

    def hessian(self, t: typing.Any) -> np.ndarray:
        return self.jet(t).hessian

    def interpolable(self, t: typing.Any) -> bool:
        try:
            self.jet(t)
        except OutsideDomainError:
            return False
        return True

    def lambda_min(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.node_hessians)[:, 0]


def hessian_at(u: Potential, t: typing.Any) -> HessianSample:
    m = np.asarray(u.hessian(t), dtype=float)
    m = 0.5 * (m + m.T)
    eig = np.linalg.eigvalsh(m)
    return HessianSample(m, eig, positive_definite(m, eig))


def graph_jet(u: Potential, t: typing.Any) -> tuple[np.ndarray, Jet]:
    return radial_graph_jet(u.jet(t), t)


def radial_graph_jet(j: Jet, t: typing.Any) -> tuple[np.ndarray, Jet]:
    """Graph coordinates x = -t/u and the jet of f = -1/u at x.

    f is defined implicitly by U(x, f(x)) = -1 for the homogeneous extension
    U(X) = X_{n+1} u(X' / X_{n+1}); transversality needs u - t . grad u < 0.
    """
    p = np.asarray(t, dtype=float)
    if j.value >= 0:
        raise TangencyError("potential must be negative")
    u_s = j.value - p @ j.gradient
    if u_s >= 0:
        raise TangencyError(f"position vector is tangent at {tuple(p)}")
    f = -1.0 / j.value
    x = p * f
    grad_f = -j.gradient / u_s
    q = np.eye(j.dim) - np.outer(p, grad_f)
    hess_f = -(q.T @ j.hessian @ q) / (f * u_s)
    return x, Jet(f, grad_f, 0.5 * (hess_f + hess_f.T))


class RadialGraphPotential(Potential):
    """Graph function f of the radial graph of -1/u.

    The source chart point of x lies on the ray through x; it is found by
    scalar root finding on tau + |x| u(tau x/|x|) = 0, which is increasing
    under transversality.
    """

    __slots__ = ("_source",)

    def __init__(self, source: Potential) -> None:
        if not source.is_potential:
            raise ValueError("radial graphs are built from potentials")
        self._source = source

    @property
    def source(self) -> Potential:
        return self._source

    @property
    def dim(self) -> int:
        return self._source.dim

    @property
    def role(self) -> str:
        return ROLE_GRAPH

    def _ray_limit(self, direction: np.ndarray) -> float:
        dom = self._source.domain
        zero = np.zeros(self.dim)
        hi = dom.ray_exit(zero, direction) if dom is not None else 1e6
        hi *= 1.0 - 1e-12
        if self._evaluable(hi * direction):
            return hi
        lo = 0.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if self._evaluable(mid * direction):
                lo = mid
            else:
                hi = mid
        return lo

    def _evaluable(self, t: np.ndarray) -> bool:
        try:
            self._source.value(t)
        except OutsideDomainError:
            return False
        return True

    def source_point(self, x: typing.Any) -> np.ndarray:
        p = as_point(x, self.dim)
        r = float(np.linalg.norm(p))
        if r == 0.0:
            return np.zeros(self.dim)
        d = p / r
        limit = self._ray_limit(d)

        def gap(tau: float) -> float:
            return tau + r * self._source.value(tau * d)

        if gap(limit) <= 0:
            raise OutsideDomainError(f"point {tuple(p)} lies beyond the radial graph")
        tau = scipy.optimize.brentq(gap, 0.0, limit, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        return tau * d

    def contains(self, x: typing.Any) -> bool:
        try:
            self.source_point(x)
        except OutsideDomainError:
            return False
        return True

    def jet(self, x: typing.Any) -> Jet:
        return graph_jet(self._source, self.source_point(x))[1]

    def value(self, x: typing.Any) -> float:
        return -1.0 / self._source.value(self.source_point(x))

    def gradient(self, x: typing.Any) -> np.ndarray:
        return self.jet(x).gradient

    def hessian(self, x: typing.Any) -> np.ndarray:
        return self.jet(x).hessian


def exact_solution(domain: ConvexDomain) -> Potential | None:
    """Closed-form Dirichlet solution on ellipsoidal domains."""
    if not domain.kind.ellipsoidal:
        return None
    return BallPotential(domain.dim, center=domain.center, semi_axes=domain.semi_axes)


def _point_list(value: typing.Any) -> list[float]:
    return [float(v) for v in value]


DOMAIN_SCHEMA = vol.Schema(
    {
        vol.Required("kind"): vol.In([k.value for k in DomainKind] + ["square"]),
        vol.Optional("center"): _point_list,
        vol.Optional("radius"): vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False)),
        vol.Optional("semi_axes"): _point_list,
        vol.Optional("half"): vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False)),
        vol.Optional("lo"): vol.Coerce(float),
        vol.Optional("hi"): vol.Coerce(float),
        vol.Optional("vertices"): [_point_list],
    }
)

POTENTIAL_SCHEMA = vol.Schema(
    {
        vol.Required("builtin"): vol.In(["ball", "hyperboloid", "quadratic", "polynomial", "paraboloid"]),
        vol.Optional("coefficients"): [vol.Coerce(float)],
        vol.Optional("domain"): DOMAIN_SCHEMA,
        vol.Optional("n", default=2): vol.All(vol.Coerce(int), vol.In([1, 2])),
        vol.Optional("role"): vol.In([ROLE_POTENTIAL, ROLE_GRAPH]),
    }
)


def domain_from_spec(spec: dict[str, typing.Any] | str, *, dim: int = 2) -> ConvexDomain:
    """Build a domain from a spec dict or one of the shorthand names."""
    if isinstance(spec, str):
        spec = {"kind": spec}
    spec = DOMAIN_SCHEMA(spec)
    kind = spec["kind"]
    if kind == "interval" or (kind == "disk" and dim == 1):
        return ConvexDomain.interval(spec.get("lo", -1.0), spec.get("hi", 1.0))
    if kind == "disk":
        return ConvexDomain.disk(spec.get("center", (0.0, 0.0)), spec.get("radius", 1.0))
    if kind == "ellipse":
        return ConvexDomain.ellipse(spec.get("center", (0.0, 0.0)), spec.get("semi_axes", (2.0, 1.0)))
    if kind == "square":
        return ConvexDomain.square(spec.get("half", 1.0))
    if "vertices" not in spec:
        raise InvalidDomainError("polygon domains need vertices")
    return ConvexDomain.polygon(spec["vertices"])


def builtin_potential(
    name: str,
    *,
    dim: int = 2,
    coefficients: typing.Sequence[float] | None = None,
    domain: ConvexDomain | None = None,
    role: str | None = None,
) -> Potential:
    if name == "ball":
        if domain is None:
            return BallPotential(dim)
        sol = exact_solution(domain)
        if sol is None:
            raise InvalidDomainError("the ball builtin needs an ellipsoidal domain")
        return sol
    if name == "hyperboloid":
        return HyperboloidPotential(dim)
    if name == "paraboloid":
        return PolynomialPotential(coefficients or (0.0, 0.5), dim=dim, role=role or ROLE_GRAPH, domain=domain)
    if name == "quadratic":
        c0, c1 = coefficients or (-1.0, 0.25)
        dom = domain if domain is not None else (ConvexDomain.interval() if dim == 1 else ConvexDomain.disk())
        return QuadraticPotential(c0, 2.0 * c1 * np.eye(dim), role=role or ROLE_POTENTIAL, domain=dom)
    if name == "polynomial":
        return PolynomialPotential(
            coefficients or (0.0, 0.5, 0.25), dim=dim, role=role or ROLE_GRAPH, domain=domain
        )
    raise ValueError(f"unknown builtin potential {name!r}")


BUILTINS = ("ball", "hyperboloid", "quadratic", "polynomial", "paraboloid")


def load_potential_spec(source: dict[str, typing.Any] | str | pathlib.Path) -> Potential:
    if isinstance(source, dict):
        raw = source
    else:
        raw = json.loads(pathlib.Path(source).read_text(encoding="utf-8"))
    spec = POTENTIAL_SCHEMA(raw)
    dim = spec["n"]
    domain = domain_from_spec(spec["domain"], dim=dim) if "domain" in spec else None
    logger.debug("loading builtin %r (n=%d)", spec["builtin"], dim)
    return builtin_potential(
        spec["builtin"],
        dim=dim,
        coefficients=spec.get("coefficients"),
        domain=domain,
        role=spec.get("role"),
    )
