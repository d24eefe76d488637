"""Shared exception hierarchy.

Every error raised by this package derives from TrialMatchError so batch
drivers can distinguish input problems from genuine bugs.
"""


class TrialMatchError(Exception):
    """Base class for all errors raised by trialmatch."""


class InputError(TrialMatchError):
    """A problem with user-supplied data (files, formats, arguments)."""
