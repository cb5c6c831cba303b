"""Domain model for Senate-style ballots.

An election ballot paper has one box per party/group "above the line" (ATL)
and one box per candidate "below the line" (BTL).  A voter writes numbers
into boxes; this module turns those raw marks into a strictly ranked
preference list and decides whether the ballot is formal (countable).

Marks are kept as digit strings rather than integers because the error
models corrupt individual digits ("12" can become "82", "1" can become
"0").  Interpretation is total: a mark of 0 or a non-numeric token is an
unmarked box, and leading zeros are ignored ("07" ranks as 7).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Hashable, Mapping

#: Reserved group id for candidates that do not belong to any group and
#: therefore have no above-the-line box.
UNGROUPED = "-"

_ID_FORBIDDEN = set(" \t\r\n:|")


class BallotError(ValueError):
    """Ballot or election data is internally inconsistent."""


class VoteStyle(Enum):
    ATL = "ATL"
    BTL = "BTL"


def _check_id(kind: str, value: str) -> None:
    if not value or any(ch in _ID_FORBIDDEN for ch in value):
        raise BallotError(
            f"invalid {kind} id {value!r}: ids must be non-empty and must not "
            "contain whitespace, ':' or '|'"
        )


@dataclass(frozen=True)
class Group:
    id: str
    name: str


@dataclass(frozen=True)
class Candidate:
    id: str
    name: str
    group: str  # group id, or UNGROUPED
    position: int  # 1-based position within the group's column


@dataclass(frozen=True)
class ElectionMeta:
    """Layout of one election: groups, candidates and the number of seats."""

    name: str
    seats: int
    groups: tuple[Group, ...]
    candidates: tuple[Candidate, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "groups", tuple(self.groups))
        object.__setattr__(self, "candidates", tuple(self.candidates))
        if not (1 <= self.seats < len(self.candidates)):
            raise BallotError(
                f"seats must satisfy 1 <= seats < candidates "
                f"(got seats={self.seats}, candidates={len(self.candidates)})"
            )
        group_ids = [g.id for g in self.groups]
        for gid in group_ids:
            _check_id("group", gid)
            if gid == UNGROUPED:
                raise BallotError(f"group id {UNGROUPED!r} is reserved for ungrouped candidates")
        if len(set(group_ids)) != len(group_ids):
            raise BallotError("duplicate group ids")
        cand_ids = [c.id for c in self.candidates]
        for cid in cand_ids:
            _check_id("candidate", cid)
        if len(set(cand_ids)) != len(cand_ids):
            raise BallotError("duplicate candidate ids")
        known = set(group_ids) | {UNGROUPED}
        positions: dict[str, list[int]] = {}
        for c in self.candidates:
            if c.group not in known:
                raise BallotError(f"candidate {c.id!r} references unknown group {c.group!r}")
            positions.setdefault(c.group, []).append(c.position)
        for gid, pos in positions.items():
            if sorted(pos) != list(range(1, len(pos) + 1)):
                raise BallotError(
                    f"candidate positions in group {gid!r} must be consecutive from 1, got {sorted(pos)}"
                )

    @cached_property
    def group_ids(self) -> tuple[str, ...]:
        return tuple(g.id for g in self.groups)

    @cached_property
    def candidate_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.candidates)

    @cached_property
    def candidate_index(self) -> dict[str, int]:
        return {c.id: i for i, c in enumerate(self.candidates)}

    @cached_property
    def group_of_candidate(self) -> dict[str, str]:
        return {c.id: c.group for c in self.candidates}

    @cached_property
    def _group_members(self) -> dict[str, tuple[str, ...]]:
        members: dict[str, list[tuple[int, str]]] = {}
        for c in self.candidates:
            members.setdefault(c.group, []).append((c.position, c.id))
        return {gid: tuple(cid for _, cid in sorted(entries)) for gid, entries in members.items()}

    def candidates_of_group(self, group_id: str) -> tuple[str, ...]:
        try:
            return self._group_members[group_id]
        except KeyError:
            raise BallotError(f"unknown group id {group_id!r}") from None


@dataclass(frozen=True)
class FormalityRules:
    """Minimum-preference requirements for a countable ballot.

    Defaults mirror the 2016/2019 Senate rules: a formal BTL vote needs the
    numbers 1..6 present exactly once; a formal ATL vote needs the number 1
    present exactly once and no formal BTL vote on the same paper.
    """

    btl_required_prefs: int = 6
    atl_required_prefs: int = 1
    btl_takes_precedence: bool = True

    def __post_init__(self) -> None:
        if not (1 <= self.btl_required_prefs <= 9):
            raise BallotError("btl_required_prefs must be in [1, 9]")
        if self.atl_required_prefs < 1:
            raise BallotError("atl_required_prefs must be >= 1")

    def required(self, style: VoteStyle) -> int:
        return self.btl_required_prefs if style is VoteStyle.BTL else self.atl_required_prefs


@dataclass(frozen=True)
class MarkSheet:
    """Raw numeric marks on one ballot paper (possibly many identical papers).

    A box absent from a map is unmarked.  Mark values are digit strings.
    """

    atl_marks: Mapping[str, str]
    btl_marks: Mapping[str, str]
    multiplicity: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "atl_marks", dict(self.atl_marks))
        object.__setattr__(self, "btl_marks", dict(self.btl_marks))
        if self.multiplicity < 1:
            raise BallotError("multiplicity must be >= 1")
        for marks in (self.atl_marks, self.btl_marks):
            for box, mark in marks.items():
                if not isinstance(mark, str) or not mark.isdigit():
                    raise BallotError(f"mark for box {box!r} must be a digit string, got {mark!r}")

    def key(self) -> tuple:
        """Hashable identity of the marks (ignoring multiplicity)."""
        return (tuple(sorted(self.atl_marks.items())), tuple(sorted(self.btl_marks.items())))

    def replicate(self, multiplicity: int) -> "MarkSheet":
        return MarkSheet(self.atl_marks, self.btl_marks, multiplicity)


@dataclass(frozen=True)
class Preferences:
    """A canonical, strictly ranked preference list.

    The ranking holds group ids for an ATL vote and candidate ids for a BTL
    vote, in preference order, with no gaps or duplicates.
    """

    style: VoteStyle
    ranking: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "ranking", tuple(self.ranking))
        if not self.ranking:
            raise BallotError("a preference list cannot be empty")
        if len(set(self.ranking)) != len(self.ranking):
            raise BallotError("preference ranking contains duplicates")

    def __len__(self) -> int:
        return len(self.ranking)


def numeric_marks(marks: Mapping[str, str]) -> dict[str, int]:
    """Parse digit-string marks to integers; non-numeric tokens become 0 (unmarked)."""
    out = {}
    for box, mark in marks.items():
        out[box] = int(mark) if isinstance(mark, str) and mark.isdigit() else 0
    return out


def interpret_marks(marks: Mapping[Hashable, int]) -> tuple:
    """Extract the longest usable preference prefix from numeric marks.

    For m = 1, 2, 3, ... the box marked m joins the ranking while exactly one
    box carries that mark; the scan stops at the first m that is absent or
    repeated.  Marks <= 0 count as unmarked.  Total: never raises, and the
    result may be empty.
    """
    boxes_by_rank: dict[int, list] = {}
    for box, value in marks.items():
        if value > 0:
            boxes_by_rank.setdefault(value, []).append(box)
    ranking = []
    rank = 1
    while True:
        boxes = boxes_by_rank.get(rank)
        if boxes is None or len(boxes) != 1:
            return tuple(ranking)
        ranking.append(boxes[0])
        rank += 1


def classify_formality(sheet: MarkSheet, rules: FormalityRules | None = None) -> Preferences | None:
    """Decide whether a mark sheet is formal, and under which vote style.

    Returns the canonical preferences of the winning style, or None for an
    informal ballot.  With ``btl_takes_precedence`` (the default), a formal
    BTL ranking beats any ATL marks; an ATL vote is only formal when no
    formal BTL ranking is present.
    """
    rules = rules or FormalityRules()
    btl = interpret_marks(numeric_marks(sheet.btl_marks))
    atl = interpret_marks(numeric_marks(sheet.atl_marks))
    ordered = [(VoteStyle.BTL, btl), (VoteStyle.ATL, atl)]
    if not rules.btl_takes_precedence:
        ordered.reverse()
    for style, ranking in ordered:
        if len(ranking) >= rules.required(style):
            return Preferences(style, ranking)
    return None


def expand_to_candidates(prefs: Preferences, meta: ElectionMeta) -> tuple[str, ...]:
    """Flatten preferences to an ordered candidate list for counting.

    A BTL ranking is returned unchanged.  An ATL ranking expands each group,
    in ranked order, to its candidates in ballot-paper position order.
    """
    if prefs.style is VoteStyle.BTL:
        for cid in prefs.ranking:
            if cid not in meta.candidate_index:
                raise BallotError(f"ranking references unknown candidate {cid!r}")
        return prefs.ranking
    out: list[str] = []
    for gid in prefs.ranking:
        if gid not in set(meta.group_ids):
            raise BallotError(f"ranking references unknown group {gid!r}")
        out.extend(meta.candidates_of_group(gid))
    return tuple(out)


def marks_from_preferences(prefs: Preferences) -> MarkSheet:
    """Render canonical preferences back to a clean mark sheet.

    Writes the ranks 1..k into the ranked boxes of the ballot's style and
    leaves every other box unmarked.  This is the substrate the digit error
    models corrupt.
    """
    marks = {box: str(rank) for rank, box in enumerate(prefs.ranking, start=1)}
    if prefs.style is VoteStyle.ATL:
        return MarkSheet(atl_marks=marks, btl_marks={})
    return MarkSheet(atl_marks={}, btl_marks=marks)
