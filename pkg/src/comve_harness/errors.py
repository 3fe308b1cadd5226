"""Exception types shared across the harness.

The CLI maps these onto exit codes: validation problems exit 1, I/O
problems (plain OSError/FileNotFoundError) exit 2, broken internal
invariants exit 3.
"""


class HarnessError(Exception):
    """Base class for all harness-raised errors."""


class ValidationError(HarnessError):
    """Bad input data or configuration: malformed rows, failed joins,
    out-of-range labels, schema violations."""


class InternalCheckError(HarnessError):
    """An internal invariant did not hold; indicates a bug, not bad input."""
