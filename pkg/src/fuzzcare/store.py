"""Append-only line-delimited JSON store for diagnoses.

One JSON object per line, fsync after every append, ids derived from content.
A desk-scale artifact: replayable after restart, no database required. Appends
are serialized behind a lock; reads come from the in-memory replay and may
proceed concurrently.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from datetime import datetime, timezone
from pathlib import Path


class StoreError(Exception):
    """Raised when the store file cannot be read or written."""


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


class DiagnosisStore:
    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._entries: dict[str, dict] = {}
        self._order: list[str] = []
        self._seq = 0
        self._last_ts = ""
        self._replay()
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = open(self.path, "ab")
        except OSError as e:
            raise StoreError(f"cannot open store {self.path}: {e}") from e

    def _replay(self):
        if not self.path.exists():
            return
        try:
            raw = self.path.read_bytes()
        except OSError as e:
            raise StoreError(f"cannot read store {self.path}: {e}") from e
        for i, line in enumerate(raw.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                entry = json.loads(line)
            except json.JSONDecodeError as e:
                raise StoreError(f"corrupt store line {i} in {self.path}: {e}") from e
            self._entries[entry["id"]] = entry
            self._order.append(entry["id"])
            self._seq = max(self._seq, entry["seq"])
            self._last_ts = max(self._last_ts, entry["timestamp"])

    def append(self, record: dict, report: dict, kb_version: str) -> str:
        """Persist one diagnosis; returns the content-hash id."""
        with self._lock:
            ts = _utcnow()
            if ts < self._last_ts:  # clock went backwards; keep monotone
                ts = self._last_ts
            self._seq += 1
            body = {
                "seq": self._seq,
                "timestamp": ts,
                "kb_version": kb_version,
                "record": record,
                "report": report,
            }
            digest = hashlib.sha256(
                json.dumps(body, sort_keys=True, separators=(",", ":")).encode()
            ).hexdigest()[:12]
            entry = {"id": digest, **body}
            line = json.dumps(entry, separators=(",", ":")) + "\n"
            try:
                self._fh.write(line.encode("utf-8"))
                self._fh.flush()
                os.fsync(self._fh.fileno())
            except OSError as e:
                raise StoreError(f"append to {self.path} failed: {e}") from e
            self._entries[digest] = entry
            self._order.append(digest)
            self._last_ts = ts
            return digest

    def get(self, entry_id: str) -> dict | None:
        return self._entries.get(entry_id)

    def entries(self) -> list[dict]:
        return [self._entries[i] for i in self._order]

    def __len__(self) -> int:
        return len(self._order)

    def close(self):
        try:
            self._fh.close()
        except OSError:
            pass
