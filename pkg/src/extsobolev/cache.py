"""Disk cache for expensive kernel tables.

Tables are JSON documents keyed by a sha256 hash of their canonical
parameter payload plus the library version, so a version bump invalidates
every entry.  Publication is atomic (write a temp file in the cache
directory, then rename), which makes concurrent readers of one table safe
and keeps partially written files invisible.  Corrupt entries are recomputed
with a warning rather than raised.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import warnings
from pathlib import Path
from typing import Callable, Optional

from . import __version__

ENV_VAR = "EXTSOBOLEV_CACHE"


def cache_root() -> Path:
    """The cache directory: $EXTSOBOLEV_CACHE, else ~/.cache/extsobolev."""
    override = os.environ.get(ENV_VAR)
    if override:
        return Path(override)
    return Path.home() / ".cache" / "extsobolev"


def cache_key(name: str, params: dict) -> str:
    """sha256 over (library version, table name, canonical params JSON)."""
    payload = json.dumps({"version": __version__, "name": name,
                          "params": params},
                         sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _path_for(key: str) -> Path:
    return cache_root() / f"{key}.json"


def fetch(key: str) -> Optional[dict]:
    """Load a published table; corrupt or mismatched entries return None."""
    path = _path_for(key)
    if not path.exists():
        return None
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        if doc.get("key") != key:
            raise ValueError("key header mismatch")
        return doc["table"]
    except (ValueError, KeyError, OSError) as exc:
        warnings.warn(f"discarding corrupt cache entry {path.name}: {exc}")
        return None


def publish(key: str, table: dict) -> None:
    """Atomically publish a table: write to a temp file, then rename."""
    root = cache_root()
    root.mkdir(parents=True, exist_ok=True)
    doc = {"key": key, "version": __version__, "table": table}
    fd, tmp = tempfile.mkstemp(dir=root, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, sort_keys=True)
        os.replace(tmp, _path_for(key))
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cached(name: str, params: dict, compute: Callable[[], dict]) -> dict:
    """Fetch the table for (name, params) or compute and publish it.

    The computed table must be a JSON-serializable dict of plain scalars
    and lists; floats survive the round trip exactly (repr serialization),
    so cold and warm runs produce identical downstream reports.
    """
    key = cache_key(name, params)
    hit = fetch(key)
    if hit is not None:
        return hit
    table = compute()
    publish(key, table)
    return table
