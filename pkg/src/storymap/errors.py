"""Exception hierarchy shared across the pipeline.

The CLI maps these to exit codes: InputError -> 2, InfeasibleError -> 3,
InternalError -> 4.
"""


class StorymapError(Exception):
    """Base class for all storymap errors."""


class InputError(StorymapError):
    """Bad input data, file, or parameter."""


class InfeasibleError(StorymapError):
    """The requested map cannot be built under the given constraints."""

    def __init__(self, message: str, family: str = ""):
        super().__init__(message)
        self.family = family  # "coverage" | "size" | "connectivity" | ""


class InternalError(StorymapError):
    """An internal invariant was violated; indicates a bug."""
