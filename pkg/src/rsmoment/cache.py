"""On-disk cache with atomic writes.

The cache root is taken from the RSMOMENT_CACHE environment variable and
defaults to ``.rsmoment-cache`` in the working directory. Library calls only
touch the disk when handed a DiskCache explicitly; the CLI always does.
"""

from __future__ import annotations

import gzip
import os
import shutil
import tempfile
from pathlib import Path

CACHE_ENV = "RSMOMENT_CACHE"
DEFAULT_CACHE_DIR = ".rsmoment-cache"
FORMAT_VERSION = 1


class DiskCache:
    def __init__(self, root: str | os.PathLike | None = None):
        if root is None:
            root = os.environ.get(CACHE_ENV) or DEFAULT_CACHE_DIR
        self.root = Path(root)

    def path(self, kind: str, name: str) -> Path:
        return self.root / kind / name

    def read(self, kind: str, name: str) -> str | None:
        p = self.path(kind, name)
        if not p.exists():
            return None
        with gzip.open(p, "rt", encoding="ascii") as fh:
            return fh.read()

    def write(self, kind: str, name: str, text: str) -> Path:
        p = self.path(kind, name)
        p.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=p.parent, prefix=".tmp-", suffix=".gz")
        try:
            with os.fdopen(fd, "wb") as raw, gzip.GzipFile(fileobj=raw, mode="wb", mtime=0) as fh:
                fh.write(text.encode("ascii"))
            os.replace(tmp, p)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return p

    def entries(self) -> list[tuple[str, int]]:
        if not self.root.exists():
            return []
        out = []
        for p in sorted(self.root.rglob("*")):
            if p.is_file() and not p.name.startswith(".tmp-"):
                out.append((str(p.relative_to(self.root)), p.stat().st_size))
        return out

    def clear(self) -> int:
        n = len(self.entries())
        if self.root.exists():
            shutil.rmtree(self.root)
        return n


def write_text_atomic(path: str | os.PathLike, text: str) -> None:
    """Write a text file via a temporary sibling and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
