"""Exception types shared across the package."""


class GradechainError(Exception):
    """Base class for all errors raised by this package."""


class MixedSymbolTables(GradechainError):
    """Phases from different symbol tables were combined."""


class MissingAssignment(GradechainError):
    """Numeric evaluation hit a symbol with no assigned value."""


class ParseError(GradechainError, ValueError):
    """A phase, scalar, or monomial string did not match the grammar."""


class WrongGroup(GradechainError):
    """An element does not belong to the expected degree group."""


class InfiniteGroup(GradechainError):
    """An enumeration was requested on a group with free rank > 0."""


class AlgebraMismatch(GradechainError):
    """Sample elements from different algebras were combined."""


class BadParameter(GradechainError, ValueError):
    """A standard-sample builder received an invalid parameter."""


class ContextMismatch(GradechainError):
    """Chain elements from different chain contexts were combined."""


class NotMonotone(GradechainError):
    """A site map is not strictly increasing on the occurring sites."""


class NotPermutable(GradechainError):
    """Permutations do not act on this chain (twist is not antisymmetric)."""


class GateFailed(GradechainError):
    """The product-state existence gate rejected the sample state."""


class WindowTooSmall(GradechainError):
    """A braid-action check needs sites outside the working window."""


class BadChain(GradechainError):
    """A braid construction was asked for on the wrong kind of chain."""


class ModelMismatch(GradechainError):
    """The declared independence set is not the one the solver supports."""


class ConfigError(GradechainError):
    """An experiment configuration failed to load or validate."""
