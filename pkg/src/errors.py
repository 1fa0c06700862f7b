"""Exception hierarchy shared by every module."""


class AgsQaoaError(Exception):
    """Base class for errors raised by this package."""


class DomainError(AgsQaoaError, ValueError):
    """An input lies outside the domain an operation is defined on."""


class UnreachableTargetError(DomainError):
    """A step-count search hit its cap before meeting the error target."""

    def __init__(self, target: float, cap: int):
        self.target = target
        self.cap = cap
        super().__init__(f"target unreachable: error {target:g} not met within R <= {cap}")
