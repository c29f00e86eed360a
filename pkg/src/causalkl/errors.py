"""Exception types shared across the package."""


class CausalklError(ValueError):
    """Base class for all domain errors raised by causalkl."""


class StructuralError(CausalklError):
    """Graph-level violation: a cycle, a bad arc, an inapplicable edit."""


class ScopeError(CausalklError):
    """Variable sets or scopes do not line up, or a name is unknown."""


class CapacityError(CausalklError):
    """An exact enumeration would exceed the configured cell budget."""


class ZeroMassError(CausalklError):
    """Conditioning event has probability zero."""
