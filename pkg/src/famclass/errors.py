"""Shared exception types.

The CLI maps these to exit codes: hypothesis failures exit 2, numerical
non-stabilization exits 3, everything else is an ordinary error.
"""


class FamClassError(RuntimeError):
    """Base class for engine errors."""


class HypothesisError(FamClassError):
    """A theorem hypothesis (dimension, b+, class validity) failed."""


class StabilityError(FamClassError):
    """A count or degree failed to stabilize under refinement."""


class TransversalityError(FamClassError):
    """Non-transverse zeros persisted through all shift redraws."""


class PropernessError(FamClassError):
    """The zero set reaches the declared properness boundary."""


class CocycleError(FamClassError):
    """Face transitions fail the gluing consistency condition."""


class WallError(FamClassError):
    """The wall section vanishes where it must not."""
