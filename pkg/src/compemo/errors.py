"""Error types shared across the pipeline.

The CLI maps these onto exit codes: data/config problems exit 1,
anything unexpected exits 2.
"""


class ConfigError(ValueError):
    """Invalid configuration: bad threshold, malformed compound set, bad flag."""


class DataError(RuntimeError):
    """Unusable input data: malformed vote rows, missing feature files, bad magic."""
