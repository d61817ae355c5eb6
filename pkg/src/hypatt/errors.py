"""Exception hierarchy shared by all hypatt modules."""


class HypattError(Exception):
    """Base class for every error raised by this package."""


class NotIncident(HypattError, ValueError):
    """Two circles do not cross or touch externally, so they have no angle."""


class GreatCircle(HypattError, ValueError):
    """A circle through the origin's plane has its dual point at infinity."""


class NoSphereIntersection(HypattError, ValueError):
    pass


class GenerationFailed(HypattError, RuntimeError):
    pass


class NormalizationFailed(HypattError, RuntimeError):
    pass


class PreconditionViolated(HypattError, ValueError):
    pass


class DegenerateInput(HypattError, ValueError):
    """Coplanar, coincident or otherwise non-generic geometric input."""


class NotStrictlyHyperideal(HypattError, ValueError):
    pass


class InvalidInput(HypattError, ValueError):
    """The cellular map itself is malformed (distinct from inadmissible)."""


class NotAdmissible(HypattError):
    def __init__(self, verdict):
        super().__init__(f"angle data is not admissible: {verdict.describe()}")
        self.verdict = verdict


class NumericalFailure(HypattError, RuntimeError):
    """The solver exhausted its restarts without converging.

    This never means the pattern does not exist; the solver is a heuristic.
    """


class ValidationFailure(HypattError, RuntimeError):
    pass
