"""Exception classes shared across the package.

The three classes partition failures the way the command line reports
them: bad configuration, bad data, and numeric breakdown. Precondition
violations on individual function arguments raise plain ``ValueError``.
"""


class ConfigError(Exception):
    """Invalid configuration: flags, schema files, spec files, option combos."""


class DataError(Exception):
    """Invalid data content: missing columns, unparseable cells, unknown levels."""


class NumericError(RuntimeError):
    """Numeric failure: factorization breakdown, overflow, non-finite gradients."""
