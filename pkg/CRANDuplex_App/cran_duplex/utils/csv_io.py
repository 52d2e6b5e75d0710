"""
CSV Output
Result tables with a leading block of '# key: value' metadata lines
"""

import io
import logging
import sys
from typing import Dict, Mapping, Optional, Tuple

import pandas as pd

logger = logging.getLogger(__name__)

METADATA_PREFIX = "# "


def render_csv(frame: pd.DataFrame, metadata: Optional[Mapping[str, object]] = None) -> str:
    """
    Render a result table as text.

    Args:
        frame (DataFrame): one row per grid point / check
        metadata (dict): written first, one '# key: value' line per entry

    Returns:
        str: UTF-8 CSV text, header row after the metadata block
    """
    buffer = io.StringIO()
    for key, value in (metadata or {}).items():
        text = str(value).replace("\n", " ")
        buffer.write(f"{METADATA_PREFIX}{key}: {text}\n")
    frame.to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()


def write_csv(frame: pd.DataFrame, path: Optional[str], metadata: Optional[Mapping[str, object]] = None) -> str:
    """Write to path, or to stdout when path is None or '-'. Returns the text written."""
    text = render_csv(frame, metadata)
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        logger.info("Wrote %d rows to %s", len(frame), path)
    return text


def csv_body(text: str) -> str:
    """Everything after the metadata block."""
    lines = text.splitlines(keepends=True)
    start = 0
    while start < len(lines) and lines[start].startswith(METADATA_PREFIX):
        start += 1
    return "".join(lines[start:])


def read_csv(path: str) -> Tuple[pd.DataFrame, Dict[str, str]]:
    """Inverse of write_csv: (table, metadata)."""
    with open(path, encoding="utf-8") as handle:
        text = handle.read()

    metadata = {}
    for line in text.splitlines():
        if not line.startswith(METADATA_PREFIX):
            break
        key, _, value = line[len(METADATA_PREFIX) :].partition(": ")
        metadata[key] = value
    return pd.read_csv(io.StringIO(csv_body(text))), metadata
