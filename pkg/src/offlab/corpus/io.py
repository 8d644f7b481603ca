"""Corpus file formats: SOLID-style TSV, CCTK-style CSV, canonical JSONL.

The SOLID and CCTK readers stream rows (constant memory) so multi-million
row files are loadable; the ``load_*`` wrappers materialize lists.  The
canonical interchange format is one JSON record per line with fields
id/text/source/mean/std/label/spans; spans are serialized as sorted
inclusive index ranges such as ``"8-13,20-24"``.
"""

from __future__ import annotations

import csv
import json
import os
from typing import Iterable, Iterator

from ..codec import CharSpanSet
from ..errors import FormatError, RowError
from ..labels import CanonicalLabel, Scheme
from .types import RawInstance, SoftLabel, Source

SOLID_COLUMNS = ("id", "text", "average", "std")
CCTK_COLUMNS = ("id", "comment_text", "target")


def _header_index(header: list[str], required: tuple[str, ...], path: str | os.PathLike) -> dict[str, int]:
    index = {name: i for i, name in enumerate(header)}
    for name in required:
        if name not in index:
            raise FormatError(f"{path}: missing required column {name!r} (found {header})")
    return index


# ---------------------------------------------------------------------------
# SOLID-style TSV
# ---------------------------------------------------------------------------

def iter_solid(path: str | os.PathLike) -> Iterator[RawInstance]:
    """Stream a SOLID-style TSV (columns id, text, average, std).

    Text is preserved byte-exact except the trailing newline; tabs and
    newlines inside fields are not part of the format.
    """
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f, delimiter="\t", quoting=csv.QUOTE_NONE)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file, expected a header row") from None
        idx = _header_index(header, SOLID_COLUMNS, path)
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < len(header):
                raise RowError(line_no, f"expected {len(header)} fields, got {len(row)}")
            try:
                mean = float(row[idx["average"]])
                std = float(row[idx["std"]])
            except ValueError as exc:
                raise RowError(line_no, f"non-numeric mean/std: {exc}") from None
            yield RawInstance(
                id=row[idx["id"]],
                text=row[idx["text"]],
                source=Source.SOLID_LIKE,
                soft_label=SoftLabel(mean=mean, std=std),
            )


def load_solid(path: str | os.PathLike) -> list[RawInstance]:
    return list(iter_solid(path))


def write_solid(path: str | os.PathLike, instances: Iterable[RawInstance]) -> int:
    """Write instances with soft labels as a SOLID-style TSV; returns rows written."""
    n = 0
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write("\t".join(SOLID_COLUMNS) + "\n")
        for inst in instances:
            if inst.soft_label is None:
                raise FormatError(f"instance {inst.id!r} has no soft label")
            f.write(f"{inst.id}\t{inst.text}\t{inst.soft_label.mean!r}\t{inst.soft_label.std!r}\n")
            n += 1
    return n


# ---------------------------------------------------------------------------
# CCTK-style CSV
# ---------------------------------------------------------------------------

def iter_cctk(path: str | os.PathLike) -> Iterator[RawInstance]:
    """Stream a CCTK-style CSV (columns id, comment_text, target).

    The continuous target in [0, 1] is binarized at >= 0.5 into TOX/NOT.
    """
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file, expected a header row") from None
        idx = _header_index(header, CCTK_COLUMNS, path)
        line_no = 1
        while True:
            try:
                row = next(reader)
            except StopIteration:
                break
            except csv.Error as exc:
                raise RowError(reader.line_num, f"malformed CSV: {exc}") from None
            line_no = reader.line_num
            if not row:
                continue
            if len(row) < len(header):
                raise RowError(line_no, f"expected {len(header)} fields, got {len(row)}")
            try:
                target = float(row[idx["target"]])
            except ValueError as exc:
                raise RowError(line_no, f"non-numeric target: {exc}") from None
            if not 0.0 <= target <= 1.0:
                raise RowError(line_no, f"target {target} outside [0, 1]")
            label = CanonicalLabel("TOX" if target >= 0.5 else "NOT", Scheme.CCTK)
            yield RawInstance(
                id=row[idx["id"]],
                text=row[idx["comment_text"]],
                source=Source.CCTK_LIKE,
                hard_label=label,
            )


def load_cctk(path: str | os.PathLike) -> list[RawInstance]:
    return list(iter_cctk(path))


def write_cctk(path: str | os.PathLike, rows: Iterable[tuple[str, str, float]]) -> int:
    """Write (id, text, target) rows as a CCTK-style CSV; returns rows written."""
    n = 0
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CCTK_COLUMNS)
        for rid, text, target in rows:
            writer.writerow([rid, text, repr(float(target))])
            n += 1
    return n


# ---------------------------------------------------------------------------
# Canonical JSONL interchange
# ---------------------------------------------------------------------------

def _label_to_str(label: CanonicalLabel | None) -> str | None:
    if label is None:
        return None
    return f"{label.scheme.value}:{label.value}"


def _label_from_str(s: str | None) -> CanonicalLabel | None:
    if s is None:
        return None
    scheme_name, _, value = s.partition(":")
    return CanonicalLabel(value, Scheme(scheme_name))


def instance_to_record(inst: RawInstance) -> dict:
    return {
        "id": inst.id,
        "text": inst.text,
        "source": inst.source.value,
        "mean": inst.soft_label.mean if inst.soft_label else None,
        "std": inst.soft_label.std if inst.soft_label else None,
        "label": _label_to_str(inst.hard_label),
        "spans": inst.token_spans.to_ranges() if inst.token_spans is not None else None,
    }


def instance_from_record(record: dict) -> RawInstance:
    soft = None
    if record.get("mean") is not None:
        soft = SoftLabel(mean=record["mean"], std=record["std"])
    spans = record.get("spans")
    return RawInstance(
        id=record["id"],
        text=record["text"],
        source=Source(record["source"]),
        soft_label=soft,
        hard_label=_label_from_str(record.get("label")),
        token_spans=CharSpanSet.from_ranges(spans) if spans is not None else None,
    )


def write_canonical(path: str | os.PathLike, instances: Iterable[RawInstance]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as f:
        for inst in instances:
            f.write(json.dumps(instance_to_record(inst), ensure_ascii=False) + "\n")
            n += 1
    return n


def iter_canonical(path: str | os.PathLike) -> Iterator[RawInstance]:
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RowError(line_no, f"invalid JSON: {exc}") from None
            yield instance_from_record(record)


def load_canonical(path: str | os.PathLike) -> list[RawInstance]:
    return list(iter_canonical(path))
