"""
Event system for JSONL progress reporting in SmoothCert.

Defines event models and the emitter that writes one JSON object per
line to stderr when the command line runs with --jsonl.
"""

import json
import logging
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from typing import Optional, Dict, Any, TextIO


class EventType(Enum):
    """Types of events that can be emitted during a run."""
    INFO = "info"
    PROGRESS = "progress"
    WARNING = "warning"
    ERROR = "error"
    RESULT = "result"


class Stage(Enum):
    """Command stages of SmoothCert."""
    CERTIFY = "certify"
    SWEEP = "sweep"
    CURVE = "curve"
    BOUNDS = "bounds"
    TIGHTNESS = "tightness"


@dataclass
class Event:
    """
    A single progress event.

    {
      "ts": "2025-08-08T07:42:01Z",           # ISO 8601 UTC timestamp
      "stage": "certify|sweep|...",            # Command stage
      "type": "info|progress|warning|error|result",
      "msg": "human-readable message",
      "progress": 0,                          # Integer 0-100 (optional)
      "data": {}                              # Stage-specific payload
    }
    """

    timestamp: datetime
    stage: Stage
    event_type: EventType
    message: str
    progress: Optional[int] = None
    data: Optional[Dict[str, Any]] = None

    def to_dict(self) -> Dict[str, Any]:
        """Wire form of the event; optional fields are omitted when unset."""
        result = {
            'ts': self.timestamp.isoformat().replace('+00:00', 'Z'),
            'stage': self.stage.value,
            'type': self.event_type.value,
            'msg': self.message,
        }

        if self.progress is not None:
            result['progress'] = self.progress

        if self.data is not None:
            result['data'] = self.data

        return result


class EventEmitter:
    """
    Writes events as JSON lines when enabled; otherwise a no-op.

    Progress events are throttled to whole-percent changes.
    """

    def __init__(self, stage: Stage, enabled: bool = False, stream: Optional[TextIO] = None):
        self.stage = stage
        self.enabled = enabled
        self._stream = stream
        self._last_progress: Optional[int] = None
        self._logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")

    def emit(self, event_type: EventType, message: str, progress: Optional[int] = None,
             data: Optional[Dict[str, Any]] = None) -> None:
        if not self.enabled:
            return
        if event_type is EventType.PROGRESS:
            if progress == self._last_progress:
                return
            self._last_progress = progress

        event = Event(datetime.now(timezone.utc), self.stage, event_type, message, progress, data)
        stream = self._stream if self._stream is not None else sys.stderr
        try:
            stream.write(json.dumps(event.to_dict()) + "\n")
            stream.flush()
        except BrokenPipeError:
            # reader went away; keep running without events
            self.enabled = False
            self._logger.debug("Event stream closed, disabling JSONL events")

    def info(self, message: str, data: Optional[Dict[str, Any]] = None) -> None:
        self.emit(EventType.INFO, message, data=data)

    def progress(self, done: int, total: int, message: str) -> None:
        percent = int(100 * done / total) if total else 100
        self.emit(EventType.PROGRESS, message, progress=percent)

    def warning(self, message: str, data: Optional[Dict[str, Any]] = None) -> None:
        self.emit(EventType.WARNING, message, data=data)

    def error(self, message: str, data: Optional[Dict[str, Any]] = None) -> None:
        self.emit(EventType.ERROR, message, data=data)

    def result(self, message: str, data: Dict[str, Any]) -> None:
        self.emit(EventType.RESULT, message, data=data)
