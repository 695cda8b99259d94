"""Exception types raised across the package."""


class LomtreeError(Exception):
    """Base class for all package errors."""


class MalformedRecord(LomtreeError, ValueError):
    def __init__(self, line, reason):
        self.line = line
        self.reason = reason
        super().__init__(f"{reason}: {line!r}")


class TooFewExamples(LomtreeError, ValueError):
    pass


class NonFiniteUpdate(LomtreeError, ArithmeticError):
    """A gradient step produced a non-finite weight (step size too large)."""


class SwapUnavailable(LomtreeError):
    pass


class UntrainedTree(LomtreeError):
    pass


class EmptyLeaf(LomtreeError):
    pass


class InvalidStats(LomtreeError, ValueError):
    pass


class DegenerateBeta(LomtreeError, ValueError):
    pass


class NoExamplesReachNode(LomtreeError):
    pass


class TooFewClasses(LomtreeError, ValueError):
    pass


class UnknownLabel(LomtreeError, KeyError):
    pass


class UntrainedModel(LomtreeError):
    pass


class ModelFormatError(LomtreeError, ValueError):
    pass
