import contextlib
import csv
import os
import tempfile
from typing import Iterator, List, Sequence

CSV_SCHEMA_VERSION = 1


@contextlib.contextmanager
def atomic_path(path: str) -> Iterator[str]:
    """Yields a temp path next to `path`; renamed onto it only if the block succeeds."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(prefix=".tmp-", suffix=os.path.basename(path), dir=directory)
    os.close(fd)
    try:
        yield tmp_path
        os.replace(tmp_path, path)
    finally:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)


def _schema_line(kind: str) -> str:
    return f"# sepdiff {kind} csv v{CSV_SCHEMA_VERSION}"


def write_csv(path: str, kind: str, header: Sequence[str], rows: Sequence[Sequence[object]]):
    """Writes a versioned CSV atomically."""
    with atomic_path(path) as tmp:
        with open(tmp, "w", newline="", encoding="utf-8") as f:
            f.write(_schema_line(kind) + "\n")
            writer = csv.writer(f)
            writer.writerow(header)
            writer.writerows(rows)


def append_csv(path: str, kind: str, header: Sequence[str], rows: Sequence[Sequence[object]]):
    """Appends rows, writing the version line and header first if the file is new."""
    is_new = not os.path.exists(path) or os.path.getsize(path) == 0
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "a", newline="", encoding="utf-8") as f:
        if is_new:
            f.write(_schema_line(kind) + "\n")
        writer = csv.writer(f)
        if is_new:
            writer.writerow(header)
        writer.writerows(rows)
        f.flush()


def read_csv(path: str) -> List[dict]:
    """Reads a versioned CSV into dict rows, skipping comment lines."""
    if not os.path.exists(path):
        return []
    with open(path, "r", newline="", encoding="utf-8") as f:
        lines = [line for line in f if not line.startswith("#")]
    return list(csv.DictReader(lines))
