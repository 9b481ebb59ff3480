"""Exception hierarchy.

Two families matter to callers: :class:`ConfigError` (bad input, unusable
scenario) and :class:`NumericalError` (a tolerance or well-posedness check
failed during computation). The CLI maps them to exit codes 2 and 3.
"""


class ABScatterError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(ABScatterError, ValueError):
    """Invalid scenario, obstacle description or argument combination."""


class NumericalError(ABScatterError, ArithmeticError):
    """A numerical tolerance could not be met."""


# geometry
class NoIntersection(ConfigError):
    """The ray does not meet the open enclosing ball."""


class CurvesTooClose(NumericalError):
    pass


class NonIntegerLink(NumericalError):
    def __init__(self, raw):
        super().__init__(f"Gauss integral {raw!r} is not within 0.01 of an integer")
        self.raw = raw


class UnsupportedTopology(NumericalError):
    """A ray links more than one core circle."""


# fields
class OnCurve(NumericalError):
    pass


class QuadratureFailure(NumericalError):
    pass


class SupportOverlapsObstacle(ConfigError):
    pass


# xray
class RayBlocked(NumericalError):
    pass


class TailBoundUnavailable(NumericalError):
    pass


# scattering
class SupportTouchesObstacle(NumericalError):
    def __init__(self, nodes):
        nodes = [tuple(int(k) for k in n) for n in nodes]
        super().__init__(f"{len(nodes)} support node(s) lie on blocked rays: {nodes[:10]}")
        self.nodes = nodes


class GridTooCoarse(NumericalError):
    pass


class GridMismatch(ConfigError):
    pass


# reconstruction
class DegenerateFrame(ConfigError):
    pass


class EmptyPart(NumericalError):
    pass


class ResolutionInsufficient(UserWarning):
    """Sinogram sampling below the usual heuristic for the requested grid."""
