"""CSV output with a single JSON header comment line."""
from __future__ import annotations

import csv
import datetime as _dt
import io
import json
from pathlib import Path

from .estimator import CONSTANTS_MODE
from .schedule import LOG_BASE_NOTE


def _cell(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    if hasattr(v, "item"):
        return _cell(v.item())
    return str(v)


def header_for(config: dict, h_mode: str | None = None, stamp: bool = True) -> dict:
    head = {
        "config": config,
        "h_mode": h_mode if h_mode is not None else config.get("h_mode"),
        "log_base": LOG_BASE_NOTE,
        "constants_mode": CONSTANTS_MODE,
    }
    if stamp:
        head["created"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return head


def csv_body(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def csv_text(header: dict, columns, rows) -> str:
    return "# " + json.dumps(header, sort_keys=True, default=_cell) + "\n" + csv_body(columns, rows)


def write_csv(path, header: dict, columns, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(csv_text(header, columns, rows))
    return path


def prefixed(header: dict, body: str) -> str:
    """Attach a header line to a CSV body produced elsewhere."""
    return "# " + json.dumps(header, sort_keys=True, default=_cell) + "\n" + body


def read_header(path) -> dict:
    first = Path(path).read_text().split("\n", 1)[0]
    if not first.startswith("# "):
        raise ValueError(f"{path} has no header line")
    return json.loads(first[2:])


def read_body(path) -> str:
    """File contents without the header line (what determinism is judged on)."""
    text = Path(path).read_text()
    return text.split("\n", 1)[1] if text.startswith("#") else text
