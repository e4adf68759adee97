"""
Atomic file writes: content goes to a temp file in the target directory and is
renamed over the destination, so readers never see a half-written file.
"""

import json
import os
import tempfile
from contextlib import contextmanager

from core.errors import FormatError


@contextmanager
def atomic_path(path):
    """Yield a temp path next to `path`; rename it into place on success."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp_", suffix=os.path.splitext(path)[1], dir=directory)
    os.close(fd)
    try:
        yield tmp
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def read_text_lines(path, encoding="utf-8"):
    """Yield (line number, text) for each line; undecodable bytes raise FormatError on that line."""
    with open(path, "rb") as f:
        for line_no, raw in enumerate(f, start=1):
            try:
                yield line_no, raw.decode(encoding)
            except UnicodeDecodeError as exc:
                raise FormatError(f"not valid {encoding} (byte {exc.start} of the line)", path=path, line=line_no) from exc


def write_text_atomic(path, text):
    with atomic_path(path) as tmp:
        with open(tmp, "w", encoding="utf-8", newline="") as f:
            f.write(text)


def write_json_atomic(path, payload):
    write_text_atomic(path, json.dumps(payload, indent=2, sort_keys=False) + "\n")


def write_csv_atomic(path, frame, **kwargs):
    """Write a pandas DataFrame atomically."""
    with atomic_path(path) as tmp:
        frame.to_csv(tmp, **kwargs)
