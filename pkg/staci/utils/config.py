"""
Configuration helpers

Key-value config files, config hashing, worker-count resolution and seed
derivation shared by every module.
"""

import dataclasses
import hashlib
import json
import os
import re
from typing import Any, Dict, Tuple

import numpy as np

from .errors import ConfigError

WORKERS_ENV = "STACI_WORKERS"
COMMENT = re.compile(r"(?:^|\s)#")


def read_key_value_file(path: str) -> Dict[str, Any]:
    """
    Parse a ``key = value`` configuration file.

    Values are decoded as JSON literals when possible (numbers, booleans,
    lists, ``null``) and kept as stripped strings otherwise. A ``#`` starts a
    comment only at the start of a line or after whitespace.

    Args:
        path: Path to the file

    Returns:
        Mapping of keys to decoded values
    """
    try:
        with open(path, encoding="utf-8") as handle:
            lines = handle.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file '{path}': {exc}") from exc

    values: Dict[str, Any] = {}
    for number, raw in enumerate(lines, start=1):
        line = COMMENT.split(raw, maxsplit=1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{number}: expected 'key = value', got '{raw.strip()}'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{number}: empty key")
        values[key] = parse_value(value)
    return values


def parse_value(text: str) -> Any:
    """Decode one config value (JSON literal or plain string)."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        lowered = text.lower()
        if lowered in ("true", "false"):
            return lowered == "true"
        return text


def write_key_value_file(path: str, values: Dict[str, Any]) -> None:
    """Write a mapping in the format read by :func:`read_key_value_file`."""
    with open(path, "w", encoding="utf-8") as handle:
        for key in sorted(values):
            handle.write(f"{key} = {json.dumps(values[key])}\n")


def config_hash(config: Any) -> bytes:
    """
    SHA-256 digest of a dataclass config's canonical JSON form.

    Args:
        config: Dataclass instance (nested dataclasses allowed)

    Returns:
        32-byte digest
    """
    payload = json.dumps(dataclasses.asdict(config), sort_keys=True, default=str)
    return hashlib.sha256(payload.encode("utf-8")).digest()


def resolve_workers(default: int = 1) -> int:
    """
    Worker count for thread pools, overridable through ``STACI_WORKERS``.

    Returns:
        A positive worker count
    """
    raw = os.environ.get(WORKERS_ENV)
    if raw is None or raw.strip() == "":
        return default
    try:
        workers = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got '{raw}'") from exc
    if workers < 1:
        raise ConfigError(f"{WORKERS_ENV} must be >= 1, got {workers}")
    return workers


def derive_seeds(seed: int, count: int) -> Tuple[int, ...]:
    """
    Derive independent integer seeds from a master seed.

    Args:
        seed: Master seed
        count: Number of child seeds

    Returns:
        Tuple of 32-bit seeds, stable across platforms
    """
    children = np.random.SeedSequence(seed).spawn(count)
    return tuple(int(child.generate_state(1)[0]) for child in children)
