"""Append-only JSONL event logs, one file per session, plus an index file.

Event line format: {"seq": int, "ts": iso8601, "kind": str, "payload": object}.
The current session state is always a pure fold over its event log, so the
log is the source of truth and the in-memory state a cache.
"""

from __future__ import annotations

import json
import os
import threading
from datetime import datetime, timezone
from typing import Dict, Iterator, List, Optional


class EventLog:
    """Per-session append-only log under a shared data directory."""

    def __init__(self, data_dir: str):
        self.data_dir = data_dir
        os.makedirs(data_dir, exist_ok=True)
        self._locks: Dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def _lock(self, session_id: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(session_id, threading.Lock())

    def _path(self, session_id: str) -> str:
        return os.path.join(self.data_dir, f"{session_id}.jsonl")

    def append(self, session_id: str, kind: str, payload: dict) -> dict:
        with self._lock(session_id):
            seq = self._next_seq(session_id)
            event = {
                "seq": seq,
                "ts": datetime.now(timezone.utc).isoformat(),
                "kind": kind,
                "payload": payload,
            }
            with open(self._path(session_id), "a") as fh:
                fh.write(json.dumps(event, sort_keys=True) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            return event

    def _next_seq(self, session_id: str) -> int:
        last = -1
        for ev in self.read(session_id):
            last = ev["seq"]
        return last + 1

    def read(self, session_id: str) -> Iterator[dict]:
        path = self._path(session_id)
        if not os.path.exists(path):
            return
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if line:
                    yield json.loads(line)

    def exists(self, session_id: str) -> bool:
        return os.path.exists(self._path(session_id))

    def session_ids(self) -> List[str]:
        return sorted(
            name[: -len(".jsonl")]
            for name in os.listdir(self.data_dir)
            if name.endswith(".jsonl")
        )

    # --- idempotency-key index -------------------------------------------

    def _index_path(self) -> str:
        return os.path.join(self.data_dir, "index.json")

    def lookup_key(self, key: str) -> Optional[str]:
        idx = self._read_index()
        return idx.get(key)

    def register_key(self, key: str, session_id: str) -> None:
        with self._guard:
            idx = self._read_index()
            idx[key] = session_id
            tmp = self._index_path() + ".tmp"
            with open(tmp, "w") as fh:
                json.dump(idx, fh, sort_keys=True)
            os.replace(tmp, self._index_path())

    def _read_index(self) -> dict:
        try:
            with open(self._index_path()) as fh:
                return json.load(fh)
        except (OSError, json.JSONDecodeError):
            return {}
