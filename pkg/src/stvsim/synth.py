"""Synthetic elections for experiments and verification.

The builders here construct small elections with known structure: a
two-group contest engineered so that digitisation errors flip the winner,
a ladder of long and short preference lists for truncation measurements,
and uniformly random elections for cross-checking the counting engine.
"""
from __future__ import annotations

import random

from .ballots import Candidate, ElectionMeta, Group, MarkSheet, Preferences, VoteStyle
from .ingest import ElectionFile


def marks_for_ranking(boxes: list[str] | tuple[str, ...]) -> dict[str, str]:
    return {box: str(rank) for rank, box in enumerate(boxes, start=1)}


def formality_bias_election(
    atl_votes: int = 4950,
    btl_votes: int = 5050,
    name: str = "formality-bias fixture",
) -> ElectionFile:
    """A one-seat contest where the winner depends on ballot style survival.

    Candidate ``a1`` is fed entirely by single-preference ATL votes (one
    digit on the sheet) while candidate ``b1`` is fed entirely by
    six-preference BTL votes (six digits, every one of which must survive
    for the ballot to stay formal under the default rules).  With
    ``btl_votes`` slightly ahead, ``b1`` wins a clean count, but a per-digit
    error rate around 1% removes roughly 5% of the BTL ballots against 1%
    of the ATL ballots and hands the seat to ``a1``.
    """
    meta = ElectionMeta(
        name=name,
        seats=1,
        groups=(Group("A", "Group A"), Group("B", "Group B")),
        candidates=(
            Candidate("a1", "A first", "A", 1),
            Candidate("a2", "A second", "A", 2),
            Candidate("a3", "A third", "A", 3),
            Candidate("b1", "B first", "B", 1),
            Candidate("b2", "B second", "B", 2),
            Candidate("b3", "B third", "B", 3),
        ),
    )
    sheets = (
        MarkSheet({"A": "1"}, {}, atl_votes),
        MarkSheet({}, marks_for_ranking(["b1", "b2", "b3", "a3", "a2", "a1"]), btl_votes),
    )
    return ElectionFile(meta, sheets, provenance="synthetic")


def truncation_ladder_election(
    long_ballots: int = 2000,
    short_ballots: int = 2000,
    long_prefs: int = 60,
    short_prefs: int = 10,
    name: str = "truncation ladder fixture",
) -> ElectionFile:
    """Long BTL preference runs next to short ATL runs.

    ``long_ballots`` papers rank ``long_prefs`` candidates below the line
    (marks 1..60 by default) and ``short_ballots`` papers rank
    ``short_prefs`` groups above the line, giving two clean buckets for
    before/after preference-count comparisons.
    """
    n_groups = max(short_prefs, 12)
    per_group = -(-long_prefs // n_groups)  # ceil: enough BTL boxes for the long run
    groups = tuple(Group(f"G{i:02d}", f"Group {i}") for i in range(1, n_groups + 1))
    candidates = []
    for g in range(n_groups):
        for p in range(1, per_group + 1):
            candidates.append(Candidate(f"c{g * per_group + p:03d}", f"Candidate {g},{p}", groups[g].id, p))
    meta = ElectionMeta(name, 1, groups, tuple(candidates))
    long_ranking = [f"c{i:03d}" for i in range(1, long_prefs + 1)]
    short_ranking = [g.id for g in groups[:short_prefs]]
    sheets = (
        MarkSheet({}, marks_for_ranking(long_ranking), long_ballots),
        MarkSheet(marks_for_ranking(short_ranking), {}, short_ballots),
    )
    return ElectionFile(meta, sheets, provenance="synthetic")


def random_election(
    rng: random.Random,
    max_candidates: int = 5,
    max_ballots: int = 100,
    seats: int = 1,
) -> tuple[ElectionMeta, list[tuple[Preferences, int]]]:
    """A uniformly random BTL election for engine cross-checks."""
    n_candidates = rng.randint(max(2, seats + 1), max_candidates)
    n_ballots = rng.randint(1, max_ballots)
    group = Group("G", "Everyone")
    candidates = tuple(
        Candidate(f"c{i}", f"Candidate {i}", "G", i + 1) for i in range(n_candidates)
    )
    meta = ElectionMeta("random fixture", seats, (group,), candidates)
    ids = [c.id for c in candidates]
    ballots = []
    for _ in range(n_ballots):
        k = rng.randint(1, n_candidates)
        ranking = tuple(rng.sample(ids, k))
        ballots.append((Preferences(VoteStyle.BTL, ranking), 1))
    return meta, ballots
