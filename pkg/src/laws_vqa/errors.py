"""Exception taxonomy shared by every module.

The CLI maps these onto exit codes: ConfigError -> 2, NumericError -> 1,
I/O failures -> 3. Everything else is a plain bug and propagates.
"""


class LawsVqaError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(LawsVqaError):
    """Invalid configuration: bad key, bad value, missing file, out-of-range setup."""


class UsageError(LawsVqaError):
    """An operation was called with inconsistent arguments (dimension or parameter mismatch)."""


class CapabilityError(LawsVqaError):
    """The request is valid but outside what this implementation supports."""


class NumericError(LawsVqaError):
    """A non-finite value appeared during optimization; the run must abort."""


class IngestionError(LawsVqaError):
    """A data file could not be parsed; message names the offending line."""
