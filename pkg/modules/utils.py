"""
Utility functions shared by the commands.

Run identifiers, timestamps, directory creation, boolean flag parsing and
the "mean (sd)" formatting used in aggregate tables.
"""

import datetime
import os
import uuid

import numpy as np


def generate_run_id() -> str:
    """
    Generate a unique run identifier using UUID4.

    Returns:
        str: A UUID string in hyphenated format

    Examples:
        >>> len(generate_run_id())
        36
    """
    return str(uuid.uuid4())


def get_timestamp() -> str:
    """
    ISO 8601 timestamp for the current UTC time, with offset.

    Examples:
        >>> get_timestamp().endswith('+00:00')
        True
    """
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def ensure_directory(directory: str) -> None:
    """
    Create a directory (and parents) if it doesn't exist.

    Raises:
        ValueError: If directory path is empty or only whitespace
        OSError: If directory creation fails
    """
    if not directory or not str(directory).strip():
        raise ValueError("Directory path cannot be empty")
    os.makedirs(str(directory).strip(), exist_ok=True)


def parse_bool(value) -> bool:
    """
    Parse a boolean flag or config value.

    Examples:
        >>> parse_bool('false'), parse_bool('Yes'), parse_bool(1)
        (False, True, True)
    """
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, np.integer)) and value in (0, 1):
        return bool(value)
    text = str(value).strip().lower()
    if text in ('true', 't', 'yes', 'y', '1', 'on'):
        return True
    if text in ('false', 'f', 'no', 'n', '0', 'off'):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def mean_sd(values) -> tuple:
    """Mean and population sd (ddof=0) of a sequence, ignoring NaN."""
    arr = np.asarray(values, dtype=float)
    return float(np.nanmean(arr)), float(np.nanstd(arr, ddof=0))


def format_mean_sd(mean: float, sd: float, decimals: int = 2) -> str:
    """
    Format as "m (s)".

    Examples:
        >>> format_mean_sd(0.0512, 0.0203)
        '0.05 (0.02)'
    """
    return f"{mean:.{decimals}f} ({sd:.{decimals}f})"
