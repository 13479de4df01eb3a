import typing

__all__ = [
    "AffineSphereError",
    "ChartOverflowError",
    "ConfigError",
    "ConvexityError",
    "DampingExhaustedError",
    "FrameDegeneracyError",
    "InvalidDomainError",
    "InvariantError",
    "InversionError",
    "LinearSolveError",
    "NonConvexDomainError",
    "OutsideDomainError",
    "PreconditionError",
    "ResolutionError",
    "SingularMapError",
    "StudyError",
    "TangencyError",
]


class AffineSphereError(Exception):
    """Base class of every error raised by the library.

    `module` names the part of the library that raised it so front ends can
    print module-qualified messages.
    """

    module: typing.ClassVar[str] = "affinesphere"

    def qualified(self) -> str:
        return f"{self.module}: {self}"


class SingularMapError(AffineSphereError):
    module = "domain_core"

    def __init__(self, message: str, *, condition: float) -> None:
        super().__init__(f"{message} (condition number {condition:.3e})")
        self.condition = condition


class ChartOverflowError(AffineSphereError):
    module = "domain_core"

    def __init__(self, message: str, *, points: typing.Sequence[typing.Any]) -> None:
        shown = ", ".join(repr(tuple(float(c) for c in p)) for p in list(points)[:5])
        super().__init__(f"{message}: {shown}")
        self.points = list(points)


class OutsideDomainError(AffineSphereError):
    module = "domain_core"


class ResolutionError(OutsideDomainError):
    """Inside the domain but past the interpolable region of a grid."""

    module = "affine_invariants"


class PreconditionError(AffineSphereError):
    module = "domain_core"


class InvalidDomainError(AffineSphereError):
    module = "domain_core"


class ConvexityError(AffineSphereError):
    module = "legendre"


class InversionError(AffineSphereError):
    module = "legendre"

    def __init__(self, message: str, *, point: typing.Any, residual: float) -> None:
        super().__init__(f"{message} at {point!r} (residual {residual:.3e})")
        self.point = point
        self.residual = residual


class InvariantError(AffineSphereError):
    module = "affine_invariants"


class TangencyError(InvariantError):
    pass


class FrameDegeneracyError(InvariantError):
    pass


class LinearSolveError(AffineSphereError):
    module = "ma_solver"


class DampingExhaustedError(AffineSphereError):
    module = "ma_solver"


class NonConvexDomainError(InvalidDomainError):
    pass


class StudyError(AffineSphereError):
    module = "verify_harness"


class ConfigError(AffineSphereError):
    module = "cli"
