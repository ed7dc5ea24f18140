"""
Utils Module

Errors, logging, configuration files, seeding and binary serialization
helpers shared by the other modules.
"""

from .errors import (
    StaciError,
    ParameterError,
    ShapeError,
    SizeError,
    ConfigError,
    DataError,
    NumericalError,
)
from .log import configure_logging
from .config import (
    read_key_value_file,
    write_key_value_file,
    config_hash,
    resolve_workers,
    derive_seeds,
)

__all__ = [
    'StaciError',
    'ParameterError',
    'ShapeError',
    'SizeError',
    'ConfigError',
    'DataError',
    'NumericalError',
    'configure_logging',
    'read_key_value_file',
    'write_key_value_file',
    'config_hash',
    'resolve_workers',
    'derive_seeds',
]
