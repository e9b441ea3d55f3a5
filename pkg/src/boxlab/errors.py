"""Exception hierarchy shared by every boxlab module."""


class BoxlabError(Exception):
    """Base class for all library errors."""


class InvalidBox(BoxlabError, ValueError):
    """A probability table failed validation."""


class NegativeProbability(InvalidBox):
    pass


class NotNormalized(InvalidBox):
    pass


class ShapeMismatch(InvalidBox):
    pass


class BadWeights(BoxlabError, ValueError):
    pass


class BadDescriptor(BoxlabError, ValueError):
    """A strategy, variant or measurement descriptor is out of range."""


class ParseError(BoxlabError, ValueError):
    pass


class NumericalFailure(BoxlabError, ArithmeticError):
    """The LP solver produced a certificate that does not verify."""


class UnsupportedClass(BoxlabError, ValueError):
    pass


class HierarchyInconsistency(BoxlabError):
    """Membership verdicts contradict the inclusion order of the classes."""
