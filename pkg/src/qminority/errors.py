"""Exception types shared across the package."""


class ValidationError(ValueError):
    """An input violates a documented precondition."""


class DomainError(ValueError):
    """An index or label lies outside its allowed domain."""


class ConstructionError(RuntimeError):
    """An internal construction produced an impossible result."""
