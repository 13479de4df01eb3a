import abc
import dataclasses
import typing

import numpy as np

from ..const import ROLE_GRAPH, ROLE_POTENTIAL
from .errors import OutsideDomainError

if typing.TYPE_CHECKING:
    from .domain import ConvexDomain

Point = np.ndarray


def as_point(t: typing.Any, dim: int) -> Point:
    arr = np.atleast_1d(np.asarray(t, dtype=float))
    if arr.shape != (dim,):
        raise ValueError(f"expected a point of dimension {dim}, got shape {arr.shape}")
    return arr


@dataclasses.dataclass(frozen=True, slots=True)
class Jet:
    """Value, gradient and Hessian of a potential at one point."""

    value: float
    gradient: np.ndarray
    hessian: np.ndarray

    @property
    def dim(self) -> int:
        return self.gradient.shape[0]


class Potential(abc.ABC):
    """A convex scalar field on a chart of R^n.

    `role` is either the potential role (a negative section u whose radial
    graph of -1/u is the hypersurface) or the graph role (a convex function f
    whose Euclidean graph is the hypersurface).
    """

    __slots__ = ()

    @property
    @abc.abstractmethod
    def dim(self) -> int: ...

    @property
    @abc.abstractmethod
    def role(self) -> str: ...

    @property
    def domain(self) -> "ConvexDomain | None":
        """Chart domain, `None` for the whole of R^n."""
        return None

    @abc.abstractmethod
    def value(self, t: typing.Any) -> float: ...

    @abc.abstractmethod
    def gradient(self, t: typing.Any) -> np.ndarray: ...

    @abc.abstractmethod
    def hessian(self, t: typing.Any) -> np.ndarray: ...

    def third(self, t: typing.Any) -> np.ndarray | None:
        """Third derivative tensor, `None` when no closed form is known."""
        return None

    def jet(self, t: typing.Any) -> Jet:
        p = self.point(t)
        return Jet(self.value(p), self.gradient(p), self.hessian(p))

    @property
    def is_potential(self) -> bool:
        return self.role == ROLE_POTENTIAL

    @property
    def is_graph(self) -> bool:
        return self.role == ROLE_GRAPH

    def contains(self, t: typing.Any) -> bool:
        dom = self.domain
        return dom is None or dom.contains(t)

    def point(self, t: typing.Any) -> Point:
        p = as_point(t, self.dim)
        if not self.contains(p):
            raise OutsideDomainError(f"point {tuple(p)} lies outside the domain")
        return p
