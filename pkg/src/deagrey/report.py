"""Report containers, display rounding, and JSON/CSV emission."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from decimal import ROUND_HALF_UP, Decimal

from deagrey import __version__
from deagrey.dataset import format_number

EFFICIENCY_DECIMALS = 3
ERROR_DECIMALS = 4


def paper_round(x, decimals) -> float:
    """Round half-up at ``decimals`` places on the shortest decimal text of ``x``."""
    if x is None or not math.isfinite(x):
        return x
    q = Decimal(repr(float(x))).quantize(Decimal(1).scaleb(-decimals), rounding=ROUND_HALF_UP)
    return float(q)


def paper_text(x, decimals) -> str:
    """Rounded value as the tables print it: ``0.91``, ``1``, ``0.003``, ``0.1315``."""
    return format_number(paper_round(x, decimals))


@dataclass
class Report:
    """One subcommand's output.

    ``body`` always has ``columns`` and ``rows``; an optional ``summary``
    dict carries scalars such as fitted coefficients.
    """

    command: str
    config: dict
    columns: list
    rows: list
    summary: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        from deagrey._kernels import BACKEND

        self.metadata = {
            "tool": "deagrey",
            "version": __version__,
            "command": self.command,
            "backend": BACKEND,
            "config": self.config,
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            **self.metadata,
        }

    @property
    def body(self):
        body = {"columns": list(self.columns), "rows": [list(r) for r in self.rows]}
        if self.summary:
            body["summary"] = self.summary
        return body

    def body_json(self):
        return json.dumps(_jsonable(self.body), sort_keys=True, allow_nan=False)

    def to_json(self):
        doc = {"metadata": self.metadata, "body": self.body}
        return json.dumps(_jsonable(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_cell(v) for v in row])
        if self.summary:
            w.writerow([])
            w.writerow(["key", "value"])
            for k, v in sorted(_flatten(self.summary)):
                w.writerow([k, _cell(v)])
        return buf.getvalue()

    def render(self, fmt):
        return self.to_json() if fmt == "json" else self.to_csv()


def _cell(v):
    if isinstance(v, bool) or v is None:
        return "" if v is None else str(v).lower()
    if isinstance(v, float):
        return format_number(v) if math.isfinite(v) else ""
    return str(v)


def _flatten(d, prefix=""):
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _flatten(v, key + ".")
        else:
            yield key, v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if hasattr(obj, "item"):
        return obj.item()
    return obj
