"""Stable text formatting for CLI and experiment outputs."""

import csv
import io
import math
from typing import Any, Iterable, List, Optional, Sequence

SIGNIFICANT_DIGITS = 12
UNAVAILABLE = "n/a"


def format_number(value: Optional[float]) -> str:
    """Format a number with 12 significant digits.

    Args:
        value: Number to format; None and NaN render as ``n/a``

    Returns:
        Formatted number string
    """
    if value is None:
        return UNAVAILABLE
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    value = float(value)
    if math.isnan(value):
        return UNAVAILABLE
    text = f"{value:.{SIGNIFICANT_DIGITS}g}"
    return "0" if text == "-0" else text


def format_cell(value: Any) -> str:
    """Format one CSV cell; numbers go through format_number."""
    if value is None or isinstance(value, (int, float)):
        return format_number(value)
    return str(value)


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]], comments: Optional[List[str]] = None) -> str:
    """Render rows as CSV text with a header and optional trailing comments.

    Args:
        header: Column names
        rows: Row values, already in output order
        comments: Lines appended as ``# <line>``

    Returns:
        CSV text with ``\\n`` line endings
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(value) for value in row])
    for comment in comments or []:
        buffer.write(f"# {comment}\n")
    return buffer.getvalue()
