from .const import VERSION
from .geometry import *  # noqa: F403
from .geometry import __all__ as _geometry_all

__version__ = VERSION
__all__ = ["__version__", *_geometry_all]
