"""Machine-readable check reports and CSV plot data.

Reports are byte-stable for fixed seeds: no timestamps, sorted keys,
deterministic record order.  Every record carries the mode that produced
its numbers (enumeration mode, budget mode, candidate order), because
pattern counts and budget checks are only meaningful together with it.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field


def digest_inputs(*parts) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(repr(p).encode())
        h.update(b"\x00")
    return h.hexdigest()[:16]


@dataclass
class CheckRecord:
    name: str
    anchor: str  # stable identifier of the checked statement
    passed: bool
    numbers: dict = field(default_factory=dict)
    mode: str = ""
    inputs_digest: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "anchor": self.anchor,
            "passed": self.passed,
            "numbers": _jsonable(self.numbers),
            "mode": self.mode,
            "inputs_digest": self.inputs_digest,
        }


@dataclass
class Report:
    title: str
    records: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, name, anchor, passed, numbers=None, mode="", inputs_digest=""):
        self.records.append(
            CheckRecord(name, anchor, bool(passed), numbers or {}, mode, inputs_digest)
        )

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def summary(self) -> dict:
        return {
            "title": self.title,
            "checks": len(self.records),
            "failed": [r.name for r in self.records if not r.passed],
            "passed": self.passed,
        }

    def to_json(self) -> str:
        doc = {
            "summary": self.summary(),
            "meta": _jsonable(self.meta),
            "records": [r.to_dict() for r in self.records],
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json())


def _jsonable(obj):
    from fractions import Fraction

    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (int, float, str, bool)) or obj is None:
        return obj
    return repr(obj)


def write_csv(path, header: list, rows: list):
    """Plain deterministic CSV; documented columns, no quoting needed."""
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")
