"""Reading and writing the line-delimited corpus and CSV report formats."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

SCORE_HEADER = "# mintkit score v1"
TRADEOFF_HEADER = "# mintkit tradeoff v1"
MEAN_ID = "__mean__"


class DataError(ValueError):
    """Bad input data; the CLI maps it to exit code 2."""


@dataclass(frozen=True)
class CorpusRecord:
    id: str
    source: tuple[str, ...]
    summary: str | None = None
    factuality: float | None = None


def parse_record(obj, lineno: int) -> CorpusRecord:
    if not isinstance(obj, dict):
        raise DataError(f"line {lineno}: expected a JSON object")
    rid = obj.get("id")
    if not isinstance(rid, (str, int)) or str(rid) == "":
        raise DataError(f"line {lineno}: missing or empty 'id'")
    src = obj.get("source")
    if isinstance(src, str):
        src = (src,)
    elif isinstance(src, list) and all(isinstance(s, str) for s in src):
        src = tuple(src)
    else:
        raise DataError(f"line {lineno}: 'source' must be a string or a list of strings")
    if not any(s.strip() for s in src):
        raise DataError(f"line {lineno}: empty 'source'")
    summary = obj.get("summary")
    if summary is not None and not isinstance(summary, str):
        raise DataError(f"line {lineno}: 'summary' must be a string")
    fact = obj.get("factuality")
    if fact is not None:
        if isinstance(fact, bool) or not isinstance(fact, (int, float)) or not 0 <= fact <= 100:
            raise DataError(f"line {lineno}: 'factuality' must be a number in [0, 100]")
        fact = float(fact)
    return CorpusRecord(str(rid), src, summary, fact)


def read_records(path: str | Path) -> list[CorpusRecord]:
    records = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataError(f"line {lineno}: malformed JSON ({e.msg})") from None
            rec = parse_record(obj, lineno)
            if rec.id in seen:
                raise DataError(f"line {lineno}: duplicate id {rec.id!r}")
            seen.add(rec.id)
            records.append(rec)
    return records


def write_jsonl(path: str | Path, rows: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ValueError(f"non-finite value {v}")
        return repr(v)
    return str(v)


def write_csv(path: str | Path, header_line: str, columns: Sequence[str], rows: Iterable[dict]) -> None:
    buf = io.StringIO()
    buf.write(header_line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row.get(c)) for c in columns])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_csv(path: str | Path) -> tuple[str | None, list[dict[str, str]]]:
    """Rows of a CSV file; leading ``#`` lines are returned as the format tag."""
    with open(path, encoding="utf-8", newline="") as fh:
        lines = fh.read().splitlines()
    tag = None
    body = []
    for line in lines:
        if line.startswith("#"):
            tag = tag or line.strip()
        elif line.strip():
            body.append(line)
    return tag, list(csv.DictReader(body))
