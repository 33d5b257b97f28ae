"""Append-only decision log.

Every decision is one JSON line, flushed and fsynced before the append call
returns, so an acknowledged decision survives a crash. State is derived by
replay; conflicting writes for the same (entry, annotator) keep the last one.
"""

from __future__ import annotations

import json
import os
import threading
import time
from pathlib import Path

from .core import AnnotationError, Decision


class DecisionStore:
    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._decisions: list[Decision] = []
        if self.path.exists():
            self._replay()

    def _replay(self) -> None:
        with self.path.open("r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    self._decisions.append(Decision.from_dict(json.loads(line)))
                except (json.JSONDecodeError, KeyError, AnnotationError) as exc:
                    raise AnnotationError(
                        f"{self.path}:{lineno}: corrupt decision log: {exc}"
                    ) from exc

    def append(self, decision: Decision) -> Decision:
        if decision.timestamp == 0.0:
            decision = Decision(
                entry_id=decision.entry_id,
                annotator_id=decision.annotator_id,
                verdict=decision.verdict,
                reason=decision.reason,
                timestamp=time.time(),
            )
        line = json.dumps(decision.as_dict(), sort_keys=True)
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            self._decisions.append(decision)
        return decision

    def decisions(self) -> list[Decision]:
        with self._lock:
            return list(self._decisions)

    def latest(self) -> dict[tuple[str, str], Decision]:
        out: dict[tuple[str, str], Decision] = {}
        for d in self.decisions():
            out[(d.entry_id, d.annotator_id)] = d
        return out

    def decided_by(self, annotator_id: str) -> set[str]:
        return {e for (e, a) in self.latest() if a == annotator_id}

    def __len__(self) -> int:
        with self._lock:
            return len(self._decisions)
