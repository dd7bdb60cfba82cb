"""Exception types shared across the package.

The CLI maps these onto its stable exit codes; library callers can catch
them individually.
"""


class GeocloseError(Exception):
    """Base class for all package errors."""


class SpecFormatError(GeocloseError):
    """A JSON spec (structure, family, witness, fuzz case) is malformed."""


class UniverseTooLarge(GeocloseError):
    """The universe exceeds a configured bound for the requested operation."""


class UnknownElement(GeocloseError):
    """A query referenced an element id outside the universe."""


class SearchBudgetExceeded(GeocloseError):
    """An exhaustive search ran out of its node budget.

    This signals "instance too large for the oracle", never a wrong answer.
    """

    def __init__(self, message, nodes=None):
        super().__init__(message)
        self.nodes = nodes


class ExchangeViolation(GeocloseError):
    """The exchange property failed; carries a replayable witness."""

    def __init__(self, witness, message="exchange property violated"):
        super().__init__(message)
        self.witness = witness


class InvalidCertificate(GeocloseError):
    """A rank certificate or coordinatization sequence fails its invariant."""


class NoGroup(GeocloseError):
    """The operation needs an automorphism group but none is attached."""


class NotInCarrier(GeocloseError):
    """A set passed to a rank-1 slice operation is not inside its carrier."""


class NotSoftEI(GeocloseError):
    """The system is not softly eliminating imaginaries.

    Raised when a check requires every element to be interalgebraic with a
    real tuple and the exhaustive witness search fails for some element.
    """

    def __init__(self, element_id, message=None):
        super().__init__(message or f"element {element_id} has no real interalgebraic tuple")
        self.element_id = element_id


class RelationNotInvariant(GeocloseError):
    """A quotient relation is not invariant under the base automorphisms."""


class NotEquivalence(GeocloseError):
    """A quotient relation does not partition the tuple space."""


class ParameterUnknown(GeocloseError):
    """A parameter tuple is not part of a definable family's orbit."""


class TheoremContradiction(GeocloseError):
    """A consequence that is provable from verified premises failed.

    This always indicates an implementation bug or a corrupted instance,
    never legitimate research output; carries the full witness.
    """

    def __init__(self, witness, message="verified premises contradict a provable consequence"):
        super().__init__(message)
        self.witness = witness


class ReplayMismatch(GeocloseError):
    """Replaying a recorded witness or fuzz case did not reproduce it."""
