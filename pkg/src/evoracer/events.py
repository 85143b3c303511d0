"""Line-delimited JSON run log.

Every run appends events to a single transcript; reports and tests consume
it.  Events carry no wall-clock fields so that identical seeded runs produce
identical transcripts.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterator, Optional


class EventLog:
    def __init__(self, path: Optional[str] = None):
        self.path = path
        self.events: list[dict[str, Any]] = []
        self._fh = None
        if path is not None:
            Path(path).parent.mkdir(parents=True, exist_ok=True)
            self._fh = open(path, "w", encoding="utf-8")

    def emit(self, event: str, **payload: Any) -> dict[str, Any]:
        record = {"event": event, **payload}
        self.events.append(record)
        if self._fh is not None:
            self._fh.write(json.dumps(record, sort_keys=True) + "\n")
            self._fh.flush()
        return record

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self) -> "EventLog":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def read_events(path: str) -> Iterator[dict[str, Any]]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)
