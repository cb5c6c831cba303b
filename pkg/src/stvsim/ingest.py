"""Reading and writing election data.

Two formats live here:

* published preference CSVs (one row per ballot paper, one column holding
  the comma-separated marks for every box), which are parsed into mark
  sheets;
* the canonical election file used by every other module, a human-diffable
  text format described below.

Canonical election file grammar (UTF-8, LF or CRLF)::

    #stv-election v1
    [election]
    name<TAB>Election name
    seats<TAB>2
    provenance<TAB>free text (optional)
    [groups]
    <group id><TAB><group name>           # one line per ATL box, ballot order
    [candidates]
    <candidate id><TAB><name><TAB><group id><TAB><position>
    [sheets]
    <multiplicity><TAB><atl pairs><TAB><btl pairs>

Sheet pairs are space-separated ``box:mark`` tokens with marks kept as the
digit strings that were read ("07" round-trips as "07"); an empty field
means no marks in that section.  A group id of ``-`` marks an ungrouped
candidate (no ATL box).  Blank lines and ``#`` comment lines are ignored
after the version header.  Most voters mark only a handful of boxes, so
sheets are stored sparsely and identical sheets are merged by summing
multiplicity.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO

from .ballots import (
    BallotError,
    Candidate,
    ElectionMeta,
    Group,
    MarkSheet,
)

FORMAT_HEADER = "#stv-election v1"


class IngestError(ValueError):
    """A stream could not be read at all (as opposed to a bad row)."""


class SchemaError(IngestError):
    """A canonical election file violates the format."""


@dataclass(frozen=True)
class ElectionFile:
    """An election layout plus its multiplicity-compressed ballots."""

    meta: ElectionMeta
    sheets: tuple[MarkSheet, ...]
    provenance: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "sheets", tuple(self.sheets))
        group_ids = set(self.meta.group_ids)
        cand_ids = set(self.meta.candidate_ids)
        for i, sheet in enumerate(self.sheets):
            for box in sheet.atl_marks:
                if box not in group_ids:
                    raise SchemaError(f"sheet {i}: unknown group box {box!r}")
            for box in sheet.btl_marks:
                if box not in cand_ids:
                    raise SchemaError(f"sheet {i}: unknown candidate box {box!r}")

    @property
    def total_ballots(self) -> int:
        return sum(s.multiplicity for s in self.sheets)


@dataclass(frozen=True)
class ColumnMap:
    """Where to find the preference string in a CSV row.

    ``preferences`` selects the column by header name or by 0-based index.
    Within the preference string, the i-th comma-separated token is the mark
    for the i-th box, with boxes ordered ATL (group order) then BTL
    (candidate order).
    """

    preferences: str | int
    header: bool = True


@dataclass(frozen=True)
class RowIssue:
    row: int  # 1-based physical row number, header included
    reason: str


@dataclass
class IngestResult:
    election: ElectionFile
    issues: list[RowIssue] = field(default_factory=list)


def _clean_token(token: str) -> str | None:
    """Map one CSV preference token to a mark string (None = unmarked)."""
    token = token.strip()
    if not token:
        return None
    if token in ("/", "*"):  # published tick-mark conventions for a first preference
        return "1"
    if token.isdigit():
        return token
    return None


def parse_preference_csv(
    stream, meta: ElectionMeta, column_map: ColumnMap, provenance: str = ""
) -> IngestResult:
    """Parse a published preference CSV into an ElectionFile.

    Bad rows (wrong token count, missing column) are collected as issues so
    a single damaged row cannot abort a large ingest; an unreadable stream
    is a hard error.
    """
    own = isinstance(stream, (str, Path))
    text = _as_text(stream)
    boxes = list(meta.group_ids) + list(meta.candidate_ids)
    n_atl = len(meta.group_ids)
    try:
        reader = csv.reader(text)
        rows = iter(reader)
        col: int
        row_no = 0
        if column_map.header:
            header = next(rows, None)
            row_no += 1
            if header is None:
                raise IngestError("CSV is empty")
            if isinstance(column_map.preferences, int):
                col = column_map.preferences
            else:
                try:
                    col = header.index(column_map.preferences)
                except ValueError:
                    raise IngestError(
                        f"preference column {column_map.preferences!r} not in header {header}"
                    ) from None
        else:
            if not isinstance(column_map.preferences, int):
                raise IngestError("a headerless CSV needs a numeric preference column index")
            col = column_map.preferences

        issues: list[RowIssue] = []
        merged: dict[tuple, MarkSheet] = {}
        order: list[tuple] = []
        for row in rows:
            row_no += 1
            if not row:
                continue
            if col >= len(row):
                issues.append(RowIssue(row_no, f"no column {col} in row of {len(row)} fields"))
                continue
            tokens = row[col].split(",")
            if len(tokens) != len(boxes):
                issues.append(
                    RowIssue(row_no, f"expected {len(boxes)} preference tokens, got {len(tokens)}")
                )
                continue
            atl: dict[str, str] = {}
            btl: dict[str, str] = {}
            for i, raw in enumerate(tokens):
                mark = _clean_token(raw)
                if mark is None:
                    continue
                (atl if i < n_atl else btl)[boxes[i]] = mark
            sheet = MarkSheet(atl, btl)
            key = sheet.key()
            if key in merged:
                merged[key] = merged[key].replicate(merged[key].multiplicity + 1)
            else:
                merged[key] = sheet
                order.append(key)
    except (csv.Error, UnicodeDecodeError) as exc:
        raise IngestError(f"malformed CSV near row {row_no}: {exc}") from None
    finally:
        if own:
            text.close()

    election = ElectionFile(meta, tuple(merged[k] for k in order), provenance)
    return IngestResult(election, issues)


def _as_text(stream) -> IO[str]:
    if isinstance(stream, (str, Path)):
        return open(stream, "r", encoding="utf-8", newline="")
    if isinstance(stream, io.TextIOBase):
        return stream
    return io.TextIOWrapper(stream, encoding="utf-8", newline="")


def _pairs(marks: dict[str, str]) -> str:
    return " ".join(f"{box}:{mark}" for box, mark in sorted(marks.items()))


def write_election_file(election: ElectionFile, target) -> None:
    """Write the canonical format.  Output is canonical: byte-stable for equal inputs."""
    own = isinstance(target, (str, Path))
    fh = open(target, "w", encoding="utf-8", newline="\n") if own else target
    try:
        w = fh.write
        w(FORMAT_HEADER + "\n")
        w("[election]\n")
        _check_field("name", election.meta.name)
        w(f"name\t{election.meta.name}\n")
        w(f"seats\t{election.meta.seats}\n")
        if election.provenance:
            _check_field("provenance", election.provenance)
            w(f"provenance\t{election.provenance}\n")
        w("[groups]\n")
        for g in election.meta.groups:
            _check_field("group name", g.name)
            w(f"{g.id}\t{g.name}\n")
        w("[candidates]\n")
        for c in election.meta.candidates:
            _check_field("candidate name", c.name)
            w(f"{c.id}\t{c.name}\t{c.group}\t{c.position}\n")
        w("[sheets]\n")
        for sheet in election.sheets:
            w(f"{sheet.multiplicity}\t{_pairs(sheet.atl_marks)}\t{_pairs(sheet.btl_marks)}\n")
    finally:
        if own:
            fh.close()


def _check_field(kind: str, value: str) -> None:
    if "\t" in value or "\n" in value or "\r" in value:
        raise SchemaError(f"{kind} {value!r} must not contain tabs or newlines")


def _parse_pairs(text: str, lineno: int) -> dict[str, str]:
    marks: dict[str, str] = {}
    for token in text.split():
        box, sep, mark = token.partition(":")
        if not sep or not box or not mark.isdigit():
            raise SchemaError(f"line {lineno}: bad box:mark pair {token!r}")
        if box in marks:
            raise SchemaError(f"line {lineno}: box {box!r} listed twice")
        marks[box] = mark
    return marks


def read_election_file(source) -> ElectionFile:
    """Read the canonical format; raises SchemaError with a line number on violations."""
    own = isinstance(source, (str, Path))
    fh = open(source, "r", encoding="utf-8") if own else source
    try:
        lines = fh.read().splitlines()
    finally:
        if own:
            fh.close()
    if not lines or lines[0].strip() != FORMAT_HEADER:
        found = lines[0].strip() if lines else "<empty file>"
        raise SchemaError(f"line 1: expected header {FORMAT_HEADER!r}, found {found!r}")

    section = None
    fields: dict[str, str] = {}
    groups: list[Group] = []
    candidates: list[Candidate] = []
    raw_sheets: list[tuple[int, dict[str, str], dict[str, str]]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            section = stripped[1:-1]
            if section not in ("election", "groups", "candidates", "sheets"):
                raise SchemaError(f"line {lineno}: unknown section {section!r}")
            continue
        if section == "election":
            key, sep, value = line.partition("\t")
            if not sep:
                raise SchemaError(f"line {lineno}: expected key<TAB>value")
            fields[key.strip()] = value.strip()
        elif section == "groups":
            parts = line.split("\t")
            if len(parts) != 2:
                raise SchemaError(f"line {lineno}: expected id<TAB>name")
            groups.append(Group(parts[0].strip(), parts[1].strip()))
        elif section == "candidates":
            parts = line.split("\t")
            if len(parts) != 4:
                raise SchemaError(f"line {lineno}: expected id<TAB>name<TAB>group<TAB>position")
            try:
                position = int(parts[3])
            except ValueError:
                raise SchemaError(f"line {lineno}: position {parts[3]!r} is not an integer") from None
            candidates.append(Candidate(parts[0].strip(), parts[1].strip(), parts[2].strip(), position))
        elif section == "sheets":
            parts = line.split("\t")
            if len(parts) != 3:
                raise SchemaError(f"line {lineno}: expected multiplicity<TAB>atl<TAB>btl")
            try:
                mult = int(parts[0])
            except ValueError:
                raise SchemaError(f"line {lineno}: multiplicity {parts[0]!r} is not an integer") from None
            raw_sheets.append((mult, _parse_pairs(parts[1], lineno), _parse_pairs(parts[2], lineno)))
        else:
            raise SchemaError(f"line {lineno}: content before any section header")

    for key in ("name", "seats"):
        if key not in fields:
            raise SchemaError(f"missing [election] field {key!r}")
    try:
        seats = int(fields["seats"])
    except ValueError:
        raise SchemaError(f"seats {fields['seats']!r} is not an integer") from None
    try:
        meta = ElectionMeta(fields["name"], seats, tuple(groups), tuple(candidates))
        sheets = tuple(MarkSheet(atl, btl, mult) for mult, atl, btl in raw_sheets)
        return ElectionFile(meta, sheets, fields.get("provenance", ""))
    except BallotError as exc:
        raise SchemaError(str(exc)) from None
