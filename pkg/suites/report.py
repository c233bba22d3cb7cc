"""Per-check records of a suite run and their totals."""
import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

import pandas as pd

TOOL_VERSION = "0.1.0"


def inputs_digest(inputs) -> str:
    """sha256 of the canonical JSON form of a trial's inputs"""
    text = json.dumps(inputs, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


@dataclass
class CheckRecord:
    suite: str
    check: str
    trial: int
    seed: int
    passed: bool
    inputs: Dict = field(default_factory=dict)
    residuals: Dict[str, float] = field(default_factory=dict)
    detail: Optional[str] = None

    @property
    def digest(self) -> str:
        return inputs_digest(self.inputs)

    def to_json(self) -> dict:
        doc = asdict(self)
        doc["inputs_digest"] = self.digest
        if self.passed:
            # reproduction data is only kept for failures
            doc.pop("inputs")
        return doc


@dataclass
class SuiteReport:
    """Records of one suite invocation; the exit code is derived from the records alone"""

    suite: str
    backend: str
    seed: int
    trials: int
    records: List[CheckRecord] = field(default_factory=list)
    wall_clock: Optional[float] = None
    version: str = TOOL_VERSION

    def add(self, record: CheckRecord) -> None:
        self.records.append(record)

    def totals(self) -> Dict[str, Dict[str, int]]:
        """Per-check counts via a groupby over the record table"""
        if not self.records:
            return {}
        frame = pd.DataFrame([{"check": r.check, "passed": r.passed} for r in self.records])
        summary = frame.groupby("check")["passed"].agg(["count", "sum"])
        return {
            check: {"total": int(row["count"]), "passed": int(row["sum"]), "failed": int(row["count"] - row["sum"])}
            for check, row in summary.iterrows()
        }

    @property
    def passed(self) -> int:
        return sum(1 for r in self.records if r.passed)

    @property
    def failed(self) -> int:
        return len(self.records) - self.passed

    @property
    def exit_code(self) -> int:
        return 0 if self.failed == 0 else 1

    def to_json(self) -> dict:
        records = sorted(self.records, key=lambda r: (r.trial, r.suite, r.check))
        doc = {
            "suite": self.suite,
            "backend": self.backend,
            "seed": self.seed,
            "trials": self.trials,
            "version": self.version,
            "records": [r.to_json() for r in records],
            "totals": self.totals(),
            "passed": self.passed,
            "failed": self.failed,
            "exit_code": self.exit_code,
        }
        if self.wall_clock is not None:
            doc["wall_clock"] = round(self.wall_clock, 3)
        return doc


def exit_code_of(doc: dict) -> int:
    """Re-derive the exit code from an emitted report"""
    return 0 if all(r["passed"] for r in doc.get("records", [])) else 1
