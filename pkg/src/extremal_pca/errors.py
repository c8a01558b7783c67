"""Exception types shared across the package.

The CLI maps :class:`InputError` to exit code 2 and :class:`NumericError`
(including :class:`RegimeError`) to exit code 3.
"""


class ExtremalPCAError(Exception):
    """Base class for all errors raised by this package."""


class InputError(ExtremalPCAError, ValueError):
    """Malformed data, unreadable files or arguments outside their domain."""


class NumericError(ExtremalPCAError, ValueError):
    """A computation cannot proceed on otherwise well-formed input."""


class RegimeError(NumericError):
    """The (d, k) combination is incompatible with the requested criterion."""


class ConstantColumnWarning(UserWarning):
    """A column had no variation, so every rank is tied."""
