"""Append-only results store: newline-delimited JSON records in one file.

A run takes an exclusive advisory lock on the file for its whole lifetime, so
one process owns the store at a time.  Records are keyed by operation name
plus canonical parameters; re-running a cached exhaustive computation returns
the stored record unless forced.
"""

from __future__ import annotations

import fcntl
import json
import os
import time
from pathlib import Path

from .errors import StoreLocked

ENV_VAR = "ZEROSUM_STORE"
DEFAULT_PATH = "zerosum-results.ndjson"
SCHEMA = "zerosum.store_record/1"


def default_store_path(cli_value: str | None = None) -> Path:
    if cli_value:
        return Path(cli_value)
    return Path(os.environ.get(ENV_VAR, DEFAULT_PATH))


def canonical_key(params: dict) -> str:
    return json.dumps(params, sort_keys=True, separators=(",", ":"))


class ResultsStore:
    """One ndjson file, exclusively locked while open."""

    def __init__(self, path: str | Path, version: str):
        self.path = Path(path)
        self.version = version
        self._fh = open(self.path, "a+", encoding="utf-8")
        try:
            fcntl.flock(self._fh.fileno(), fcntl.LOCK_EX | fcntl.LOCK_NB)
        except OSError as exc:
            self._fh.close()
            raise StoreLocked(f"results store {self.path} is locked by another process") from exc

    def close(self) -> None:
        if not self._fh.closed:
            fcntl.flock(self._fh.fileno(), fcntl.LOCK_UN)
            self._fh.close()

    def __enter__(self) -> "ResultsStore":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _iter_records(self):
        self._fh.seek(0)
        for line in self._fh:
            line = line.strip()
            if line:
                try:
                    yield json.loads(line)
                except json.JSONDecodeError:
                    continue

    def lookup(self, operation: str, params: dict) -> dict | None:
        """Latest record for (operation, params), if any."""
        key = canonical_key(params)
        found = None
        for rec in self._iter_records():
            if rec.get("operation") == operation and rec.get("key") == key:
                found = rec
        return found

    def append(self, operation: str, params: dict, payload: dict, exhaustive: bool) -> dict:
        rec = {
            "schema": SCHEMA,
            "operation": operation,
            "key": canonical_key(params),
            "params": params,
            "payload": payload,
            "exhaustive": exhaustive,
            "created": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            "tool_version": self.version,
        }
        self._fh.seek(0, os.SEEK_END)
        self._fh.write(json.dumps(rec, sort_keys=True) + "\n")
        self._fh.flush()
        return rec

    def get_or_run(self, operation: str, params: dict, run, force: bool = False):
        """Return (record, cached_flag); ``run`` yields (payload, exhaustive)."""
        if not force:
            hit = self.lookup(operation, params)
            if hit is not None and hit.get("exhaustive"):
                return hit, True
        payload, exhaustive = run()
        return self.append(operation, params, payload, exhaustive), False
