"""Exception types raised by the library."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class UnsupportedChannelError(ValueError):
    """The channel has nu^2 <= 0 (an inverse-square tail too attractive to treat)."""


class ConvergenceError(RuntimeError):
    """A numerical procedure failed to reach its tolerance within budget."""


class UnwrapError(ConvergenceError):
    """Lambda-continuation could not resolve the phase branch within its step budget."""


class PoleError(ArithmeticError):
    """The interior log-derivative is formally infinite (R(r0) = 0)."""
