"""Code shared between all tourplanner modules."""
import json
import logging
import os
import re
import tempfile

import numpy as np
from cryptography.hazmat.primitives import hashes

from .const import SLOT_BOUNDS

_LOGGER = logging.getLogger(__name__)

CLOCK_RE = re.compile(r"^\s*(\d{1,2}):(\d{2})\s*$")
WINDOW_SPLIT_RE = re.compile(r"\s*[-–—~]\s*")


class PlannerLoggingAdapter(logging.LoggerAdapter):
    """Adapter that adds a context tag to all log points."""

    def process(self, msg, kwargs):
        """Process log point and return output."""
        return f"[{self.extra['context']}] {msg}", kwargs


class ContextualLogger:
    """Contextual logger adding a context tag to log points."""

    def __init__(self):
        """Initialize a new ContextualLogger."""
        self._logger = None

    def set_logger(self, logger, context):
        """Set base logger to use."""
        self._logger = PlannerLoggingAdapter(logger, {"context": context})

    def debug(self, msg, *args):
        """Debug level log."""
        return self._logger.log(logging.DEBUG, msg, *args)

    def info(self, msg, *args):
        """Info level log."""
        return self._logger.log(logging.INFO, msg, *args)

    def warning(self, msg, *args):
        """Warning method log."""
        return self._logger.log(logging.WARNING, msg, *args)

    def error(self, msg, *args):
        """Error level log."""
        return self._logger.log(logging.ERROR, msg, *args)

    def exception(self, msg, *args):
        """Exception level log."""
        return self._logger.exception(msg, *args)


def normalize_name(name):
    """Return name case-folded, trimmed and with internal whitespace collapsed."""
    return " ".join(str(name).split()).casefold()


def parse_clock(value):
    """Return minutes of day for a HH:MM string (24:00 allowed)."""
    match = CLOCK_RE.match(str(value))
    if match is None:
        raise ValueError(f"invalid clock time {value!r}")
    hours, minutes = int(match.group(1)), int(match.group(2))
    total = hours * 60 + minutes
    if minutes >= 60 or total > 24 * 60:
        raise ValueError(f"invalid clock time {value!r}")
    return total


def format_clock(minutes):
    """Return HH:MM for minutes of day."""
    minutes = int(round(minutes))
    return f"{minutes // 60:02d}:{minutes % 60:02d}"


def parse_window(value):
    """Return (start, end) minutes for a "HH:MM-HH:MM" window.

    En and em dashes are accepted as separators since model output uses them.
    """
    if isinstance(value, (list, tuple)) and len(value) == 2:
        parts = list(value)
    else:
        parts = WINDOW_SPLIT_RE.split(str(value).strip())
    if len(parts) != 2:
        raise ValueError(f"invalid time window {value!r}")
    start = parts[0] if isinstance(parts[0], int) else parse_clock(parts[0])
    end = parts[1] if isinstance(parts[1], int) else parse_clock(parts[1])
    return start, end


def format_window(window):
    """Return the canonical "HH:MM-HH:MM" form of a window."""
    return f"{format_clock(window[0])}-{format_clock(window[1])}"


def day_slot(depart):
    """Return the day slot a departure time (minutes) falls in."""
    for slot, low, high in SLOT_BOUNDS:
        if low <= depart < high:
            return slot
    return SLOT_BOUNDS[-1][0]


def unit_rows(vectors):
    """Return vectors as a matrix of unit rows, rejecting zero vectors."""
    matrix = np.atleast_2d(np.asarray(vectors, dtype=float))
    norms = np.linalg.norm(matrix, axis=1)
    if np.any(norms == 0):
        raise ZeroVector(f"zero vector at row {int(np.argmin(norms))}")
    return matrix / norms[:, None]


def canonical_json(document):
    """Return the canonical text form of a JSON document."""
    return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def canonical_bytes(document):
    """Return compact, key-sorted UTF-8 bytes used for hashing."""
    return json.dumps(
        document, sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


def sha256_hex(data):
    """Return the hex SHA-256 digest of bytes."""
    digest = hashes.Hash(hashes.SHA256())
    digest.update(data)
    return digest.finalize().hex()


def load_json(path):
    """Read a JSON document, raising ParseError on malformed input."""
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except json.JSONDecodeError as ex:
        raise ParseError(f"{path}: {ex}") from ex


def atomic_write(path, text):
    """Write text to path through a temporary file and an atomic rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    handle, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(handle, "w", encoding="utf-8") as out:
            out.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise
    _LOGGER.debug("Wrote %s", path)


class TourPlannerError(Exception):
    """Error to indicate a tourplanner domain failure."""


class PreconditionError(TourPlannerError, ValueError):
    """Error to indicate a violated operation precondition."""


class ParseError(TourPlannerError):
    """Error to indicate a malformed document."""


class ZeroVector(TourPlannerError):
    """Error to indicate a zero embedding vector."""


class DimensionMismatch(TourPlannerError):
    """Error to indicate vectors or matrices of incompatible shapes."""
