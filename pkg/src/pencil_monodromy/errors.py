"""Exception hierarchy shared by all stages."""


class PencilError(Exception):
    """Base class for every error raised by this package."""


class InadmissibleChart(PencilError):
    pass


class NoConvergence(PencilError):
    pass


class PositiveDimensional(PencilError):
    pass


class StepUnderflow(PencilError):
    pass


class Inconclusive(PencilError):
    pass


class CountMismatch(PencilError):
    pass


class Degenerate(PencilError):
    pass


class ValueCollision(PencilError):
    pass


class NonSimpleBranching(PencilError):
    pass


class NonIntegral(PencilError):
    pass


class CannotRoute(PencilError):
    pass


class RankMismatch(PencilError):
    pass


class SpecError(PencilError):
    """Malformed or inconsistent pencil input."""
