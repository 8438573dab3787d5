import json
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional

import pytz

# Define UTC timezone as a constant
UTC = pytz.UTC


class SweepStatus(Enum):
    PENDING = "pending"
    BOOTSTRAP = "bootstrap"
    OPTIMIZED = "optimized"
    FALLBACK = "fallback"


@dataclass
class SweepRecord:
    """Per-sweep diagnostics entry"""
    index: int
    t_begin: float
    t_end: float
    status: SweepStatus = SweepStatus.PENDING
    points: int = 0
    map_points: int = 0
    diagnostics: Dict = field(default_factory=dict)
    created_at: str = ""
    updated_at: str = ""

    def to_dict(self) -> Dict:
        return {
            "index": self.index,
            "t_begin": self.t_begin,
            "t_end": self.t_end,
            "status": self.status.value,
            "points": self.points,
            "map_points": self.map_points,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
            **self.diagnostics,
        }


class SweepLog:
    """Tracks the processing state of every sweep in a run"""

    def __init__(self):
        self.records: Dict[int, SweepRecord] = {}

    def _get_current_time(self) -> datetime:
        """Get current time in UTC"""
        return datetime.now(UTC)

    def _format_datetime(self, dt: datetime) -> str:
        """Format datetime to ISO format string"""
        return dt.isoformat()

    def open(self, index: int, t_begin: float, t_end: float, points: int = 0) -> SweepRecord:
        now = self._format_datetime(self._get_current_time())
        record = SweepRecord(index, t_begin, t_end, points=points, created_at=now, updated_at=now)
        self.records[index] = record
        return record

    def close(self, index: int, status: SweepStatus, map_points: int = 0,
              diagnostics: Optional[Dict] = None) -> SweepRecord:
        record = self.records[index]
        record.status = status
        record.map_points = map_points
        record.diagnostics = diagnostics or {}
        record.updated_at = self._format_datetime(self._get_current_time())
        return record

    def get_records(self, status: Optional[SweepStatus] = None) -> List[SweepRecord]:
        """All records in sweep order, optionally filtered by status"""
        return [self.records[i] for i in sorted(self.records)
                if status is None or self.records[i].status == status]

    def counts(self) -> Dict[str, int]:
        summary = {status.value: 0 for status in SweepStatus}
        for record in self.records.values():
            summary[record.status.value] += 1
        return summary

    def write_jsonl(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w") as handle:
            for record in self.get_records():
                handle.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")
        return path
