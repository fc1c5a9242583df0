"""Reading estimation datasets from CSV.

Expected header: ``id,estimated,actual[,estimate_type]``. Semicolon-delimited
files are detected from the header line and accepted with a warning.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

from .measures import DomainError, EstimateType, EstimationRecord

REQUIRED = ("id", "estimated", "actual")


class DatasetError(DomainError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass
class Dataset:
    records: list[EstimationRecord]
    digest: str
    skipped: list[tuple[int, str]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def has_types(self) -> bool:
        return any(r.estimate_type is not EstimateType.UNKNOWN for r in self.records)


def _parse_row(row: dict, line: int) -> EstimationRecord:
    rid = (row.get("id") or "").strip() or f"line{line}"
    values = {}
    for key in ("estimated", "actual"):
        raw = (row.get(key) or "").strip()
        try:
            values[key] = float(raw)
        except ValueError:
            raise DatasetError(f"record {rid!r}: {key} is not a number: {raw!r}", line) from None
        if not (math.isfinite(values[key]) and values[key] > 0):
            raise DatasetError(f"record {rid!r}: {key} effort must be positive, got {raw}", line)
    try:
        etype = EstimateType.parse(row.get("estimate_type"))
    except DomainError as exc:
        raise DatasetError(str(exc), line) from None
    return EstimationRecord(rid, values["estimated"], values["actual"], etype)


def parse_dataset(text: str, skip_invalid: bool = False, digest: str = "") -> Dataset:
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise DatasetError("empty file: a header id,estimated,actual[,estimate_type] is required", 1)
    warnings = []
    delimiter = ","
    if ";" in lines[0] and "," not in lines[0]:
        delimiter = ";"
        warnings.append("semicolon-delimited input detected; comma is the standard delimiter")
    reader = csv.DictReader(io.StringIO(text), delimiter=delimiter)
    reader.fieldnames = [h.strip().lower() for h in reader.fieldnames or []]
    missing = [c for c in REQUIRED if c not in reader.fieldnames]
    if missing:
        raise DatasetError(f"header is missing column(s) {', '.join(missing)}", 1)
    records, skipped = [], []
    for row in reader:
        line = reader.line_num
        if all(not (v or "").strip() for k, v in row.items() if k is not None):
            continue
        if None in row:
            err = DatasetError("too many fields", line)
        else:
            try:
                records.append(_parse_row(row, line))
                continue
            except DatasetError as exc:
                err = exc
        if not skip_invalid:
            raise err
        skipped.append((line, str(err)))
    if not records:
        raise DatasetError("no valid records in dataset")
    if skipped:
        warnings.append(f"skipped {len(skipped)} invalid row(s)")
    return Dataset(records=records, digest=digest, skipped=skipped, warnings=warnings)


def load_dataset(path: str | Path, skip_invalid: bool = False) -> Dataset:
    raw = Path(path).read_bytes()
    digest = "sha256:" + hashlib.sha256(raw).hexdigest()
    try:
        text = raw.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise DatasetError(f"{path}: not valid UTF-8 ({exc})") from None
    return parse_dataset(text, skip_invalid=skip_invalid, digest=digest)
