"""Machine-readable analysis reports (JSON) and probe tables (CSV)."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List

VERSION = "0.1.0"

CONVENTIONS = {
    "dv": "Lebesgue measure in lattice coordinates",
    "dsigma": "u ^ dsigma = -dv on each facet / crease, u primitive (positive orientation)",
    "crease_weight": "weight p(z) included on creases",
    "scal_base_curve": "Scal = -C = 4(1-g)",
}


def frac_str(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass
class AnalysisReport:
    command: str
    input: Dict[str, Any] = field(default_factory=dict)
    computed: Dict[str, Any] = field(default_factory=dict)
    certificates: Dict[str, Any] = field(default_factory=dict)
    probes: Dict[str, List[Dict[str, Any]]] = field(default_factory=dict)
    verdicts: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tool": {"name": "toric_extremal", "version": VERSION},
            "conventions": CONVENTIONS,
            "command": self.command,
            "input": self.input,
            "computed": self.computed,
            "certificates": self.certificates,
            "probes": self.probes,
            "verdicts": self.verdicts,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_default) + "\n"

    def untraceable_verdicts(self) -> List[str]:
        """Verdict names whose certificate entry is missing."""
        return [k for k, v in self.verdicts.items() if v.get("certificate") not in self.certificates]


def _default(obj):
    if isinstance(obj, Fraction):
        return frac_str(obj)
    if hasattr(obj, "item"):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_csv(rows: List[Dict[str, Any]], columns: List[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row.get(k) for k in columns})
    return buf.getvalue()
