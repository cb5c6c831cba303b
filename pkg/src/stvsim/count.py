"""Deterministic STV tabulation with an auditable round-by-round transcript.

Counting follows the classic cycle: candidates whose tallies reach the
Droop quota are elected and their surplus (tally minus quota) is passed on
at reduced weight; when nobody reaches quota the lowest-tally candidate is
eliminated and their ballots move on at current weight; the count ends when
every seat is filled or the number of continuing candidates equals the
number of unfilled seats.

Ballot weights are exact rationals throughout.  Under the default
TRUNCATE_TO_INTEGER rounding, reported tallies are integers: each
candidate's received transfer is floored and the units that vanish are
tracked as cumulative rounding loss, so the conservation identity

    sum(held votes) + exhausted + rounding loss == total formal ballots

holds exactly, in integers, after every round.  In EXACT mode the same
identity holds in rationals with zero loss.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable

from .ballots import ElectionMeta, Preferences, expand_to_candidates


class CountError(ValueError):
    """The count cannot proceed on the given inputs."""


class CountInvariantError(RuntimeError):
    """Internal bookkeeping broke; carries the transcript so far."""

    def __init__(self, message: str, transcript: "CountTranscript | None" = None):
        super().__init__(message)
        self.transcript = transcript


class SurplusMethod(Enum):
    #: Multiply every ballot's weight by surplus/tally.
    WEIGHTED_INCLUSIVE_GREGORY = "weighted-inclusive-gregory"
    #: Set every ballot's weight to surplus/papers (AEC style).
    UNWEIGHTED_INCLUSIVE_GREGORY = "unweighted-inclusive-gregory"


class TallyRounding(Enum):
    TRUNCATE_TO_INTEGER = "truncate"
    EXACT = "exact"


@dataclass(frozen=True)
class CountRules:
    surplus_method: SurplusMethod = SurplusMethod.WEIGHTED_INCLUSIVE_GREGORY
    tally_rounding: TallyRounding = TallyRounding.TRUNCATE_TO_INTEGER
    tie_break: str = "countback-then-index"
    simultaneous_surplus_order: str = "descending-tally"

    def __post_init__(self) -> None:
        if self.tie_break != "countback-then-index":
            raise CountError(f"unsupported tie_break {self.tie_break!r}")
        if self.simultaneous_surplus_order != "descending-tally":
            raise CountError(f"unsupported surplus order {self.simultaneous_surplus_order!r}")


def droop_quota(num_formal_ballots: int, seats: int) -> int:
    """floor(ballots / (seats + 1)) + 1."""
    if num_formal_ballots < 0:
        raise CountError("ballot count cannot be negative")
    if seats < 1:
        raise CountError("seats must be >= 1")
    return num_formal_ballots // (seats + 1) + 1


@dataclass
class RoundRecord:
    number: int
    # "first-preferences" | "surplus" | "elimination" | "remaining-seats"
    kind: str
    source: str | None
    transfer_value: Fraction | None
    #: Votes held after this round by every candidate not yet eliminated.
    #: Elected candidates appear at their retained amount (their full tally
    #: until their surplus is distributed, the quota afterwards).
    tallies: dict[str, int | Fraction]
    #: (candidate, surplus) for candidates elected this round; surplus is
    #: None for remaining-seat allocations, which need no quota.
    elected: list[tuple[str, int | Fraction | None]] = field(default_factory=list)
    eliminated: str | None = None
    exhausted: int | Fraction = 0  # cumulative
    rounding_loss: int | Fraction = 0  # cumulative
    tie_breaks: list[str] = field(default_factory=list)


@dataclass
class CountTranscript:
    election_name: str
    seats: int
    total_ballots: int
    quota: int
    rules: CountRules
    rounds: list[RoundRecord] = field(default_factory=list)
    elected: list[str] = field(default_factory=list)

    @property
    def exhausted(self) -> int | Fraction:
        return self.rounds[-1].exhausted if self.rounds else 0

    @property
    def rounding_loss(self) -> int | Fraction:
        return self.rounds[-1].rounding_loss if self.rounds else 0

    def final_margin(self) -> int | Fraction | None:
        """Tally gap between the last two candidates competing for the final
        seat, measured in the round that decided between them; None if the
        count never came down to a head-to-head pair."""
        done: set[str] = set()
        result: int | Fraction | None = None
        for rec in self.rounds:
            competing = [t for cid, t in rec.tallies.items() if cid not in done]
            if len(competing) == 2:
                lo, hi = sorted(competing)
                result = hi - lo
            done |= {c for c, _ in rec.elected}
        return result

    def to_text(self) -> str:
        """Stable plain-text rendering, one record per round (golden-file friendly)."""

        def fmt(v: int | Fraction | None) -> str:
            if v is None:
                return "-"
            if isinstance(v, Fraction) and v.denominator != 1:
                return f"{v.numerator}/{v.denominator}"
            return str(int(v))

        lines = [
            f"election\t{self.election_name}",
            f"seats\t{self.seats}",
            f"total-formal\t{self.total_ballots}",
            f"quota\t{self.quota}",
            f"rules\t{self.rules.surplus_method.value}\t{self.rules.tally_rounding.value}",
        ]
        for rec in self.rounds:
            head = f"round {rec.number}\t{rec.kind}"
            if rec.source is not None:
                head += f"\tfrom {rec.source}"
            if rec.transfer_value is not None:
                head += f"\ttv {fmt(rec.transfer_value)}"
            lines.append(head)
            for cid in sorted(rec.tallies):
                lines.append(f"  tally\t{cid}\t{fmt(rec.tallies[cid])}")
            for cid, surplus in rec.elected:
                lines.append(f"  elected\t{cid}\tsurplus {fmt(surplus)}")
            if rec.eliminated is not None:
                lines.append(f"  eliminated\t{rec.eliminated}")
            for note in rec.tie_breaks:
                lines.append(f"  tie\t{note}")
            lines.append(f"  exhausted\t{fmt(rec.exhausted)}\tloss\t{fmt(rec.rounding_loss)}")
        lines.append("elected\t" + " ".join(self.elected))
        return "\n".join(lines) + "\n"


@dataclass
class _Bundle:
    ranking: tuple[str, ...]
    pos: int  # index of the candidate currently holding this bundle
    weight: Fraction
    count: int


class _Count:
    def __init__(self, ballots: Iterable[tuple[Preferences, int]], meta: ElectionMeta, rules: CountRules):
        self.meta = meta
        self.rules = rules
        self.trunc = rules.tally_rounding is TallyRounding.TRUNCATE_TO_INTEGER
        self.index = meta.candidate_index

        merged: dict[tuple[str, ...], int] = {}
        total = 0
        for prefs, mult in ballots:
            if mult < 1:
                raise CountError("ballot multiplicity must be >= 1")
            ranking = expand_to_candidates(prefs, meta)
            merged[ranking] = merged.get(ranking, 0) + mult
            total += mult
        if total == 0:
            raise CountError("cannot count an election with no formal ballots")

        self.total = total
        self.quota = droop_quota(total, meta.seats)
        self.continuing: set[str] = set(meta.candidate_ids)
        self.elected: list[str] = []
        self.piles: dict[str, list[_Bundle]] = {cid: [] for cid in meta.candidate_ids}
        zero = 0 if self.trunc else Fraction(0)
        self.tallies: dict[str, int | Fraction] = {cid: zero for cid in meta.candidate_ids}
        self.exhausted: int | Fraction = zero
        self.loss: int | Fraction = zero
        self.surplus_queue: deque[str] = deque()
        self.transcript = CountTranscript(
            election_name=meta.name,
            seats=meta.seats,
            total_ballots=total,
            quota=self.quota,
            rules=rules,
        )

        for ranking, mult in merged.items():
            first = ranking[0]
            self.piles[first].append(_Bundle(ranking, 0, Fraction(1), mult))
            self.tallies[first] += mult if self.trunc else Fraction(mult)

    # -- tie-breaking ------------------------------------------------------

    def _countback(self, cid: str) -> tuple:
        """Tally history of cid, most recent round first (excluding current)."""
        hist = []
        for rec in reversed(self.transcript.rounds):
            hist.append(rec.tallies.get(cid, -1))
        return tuple(hist)

    def _order_descending(self, cids: list[str]) -> list[str]:
        # highest current tally first; ties resolved by the most recent prior
        # round where the tallies differ; a full-history tie goes to the
        # lowest candidate index
        def key(cid: str):
            return (
                -self.tallies[cid],
                tuple(-t for t in self._countback(cid)),
                self.index[cid],
            )

        return sorted(cids, key=key)

    def _pick_elimination(self, rec: RoundRecord) -> str:
        def key(cid: str):
            return (self.tallies[cid], self._countback(cid), self.index[cid])

        loser = min(self.continuing, key=key)
        tied = [c for c in self.continuing if self.tallies[c] == self.tallies[loser]]
        if len(tied) > 1:
            rec.tie_breaks.append(
                f"elimination tie among {', '.join(sorted(tied, key=self.index.get))} "
                f"at {self.tallies[loser]}; {loser} eliminated by countback/index"
            )
        return loser

    # -- transfers ---------------------------------------------------------

    def _next_holder(self, bundle: _Bundle) -> int | None:
        ranking = bundle.ranking
        for i in range(bundle.pos + 1, len(ranking)):
            if ranking[i] in self.continuing:
                return i
        return None

    def _move_pile(self, pile: list[_Bundle], new_weight, moved_out: int | Fraction, rec: RoundRecord) -> None:
        """Distribute a pile and keep the conservation ledger balanced.

        ``moved_out`` is the tally amount leaving the source (the surplus, or
        an eliminated candidate's whole tally).  Under integer rounding the
        event's loss is moved_out minus everything delivered, which can go
        negative once a pile's exact weight has drifted above its floored
        tally; the running identity stays exact either way.
        """
        receipts: dict[str, list[_Bundle]] = {}
        receipt_exact: dict[str, Fraction] = {}
        exhausted_exact = Fraction(0)
        for b in pile:
            w = new_weight(b.weight)
            if not (0 <= w <= 1):
                raise CountInvariantError(f"ballot weight {w} outside [0, 1]", self.transcript)
            nxt = self._next_holder(b)
            if nxt is None:
                exhausted_exact += w * b.count
                continue
            cid = b.ranking[nxt]
            receipts.setdefault(cid, []).append(_Bundle(b.ranking, nxt, w, b.count))
            receipt_exact[cid] = receipt_exact.get(cid, Fraction(0)) + w * b.count

        delivered: int | Fraction
        if self.trunc:
            delivered = 0
            for cid in sorted(receipt_exact, key=self.index.get):
                got = receipt_exact[cid].numerator // receipt_exact[cid].denominator
                self.tallies[cid] += got
                delivered += got
            exh = exhausted_exact.numerator // exhausted_exact.denominator
            self.exhausted += exh
            self.loss += moved_out - delivered - exh
        else:
            for cid in sorted(receipt_exact, key=self.index.get):
                self.tallies[cid] += receipt_exact[cid]
            self.exhausted += exhausted_exact
        for cid, bundles in receipts.items():
            self.piles[cid].extend(bundles)

    # -- rounds ------------------------------------------------------------

    def _snapshot(self) -> dict[str, int | Fraction]:
        alive = self.continuing | set(self.elected)
        return {cid: self.tallies[cid] for cid in sorted(alive, key=self.index.get)}

    def _close_round(self, rec: RoundRecord) -> None:
        rec.tallies = self._snapshot()
        rec.exhausted = self.exhausted
        rec.rounding_loss = self.loss
        self.transcript.rounds.append(rec)
        self._check_conservation(rec)
        self._elect_reachers(rec)

    def _check_conservation(self, rec: RoundRecord) -> None:
        held = sum(rec.tallies.values())
        if held + self.exhausted + self.loss != self.total:
            raise CountInvariantError(
                f"conservation broke in round {rec.number}: held={held} "
                f"exhausted={self.exhausted} loss={self.loss} total={self.total}",
                self.transcript,
            )

    def _elect_reachers(self, rec: RoundRecord) -> None:
        reachers = [c for c in self.continuing if self.tallies[c] >= self.quota]
        if not reachers:
            return
        ordered = self._order_descending(reachers)
        by_tally: dict[object, list[str]] = {}
        for c in reachers:
            by_tally.setdefault(self.tallies[c], []).append(c)
        for tally, group in by_tally.items():
            if len(group) > 1:
                rec.tie_breaks.append(
                    f"election-order tie among {', '.join(sorted(group, key=self.index.get))} "
                    f"at {tally}; ordered by countback/index"
                )
        for cid in ordered:
            if len(self.elected) == self.meta.seats:
                break
            self.continuing.remove(cid)
            self.elected.append(cid)
            surplus = self.tallies[cid] - self.quota
            rec.elected.append((cid, surplus))
            self.surplus_queue.append(cid)

    def _distribute_surplus(self, cid: str, number: int) -> None:
        tally = self.tallies[cid]
        surplus = tally - self.quota
        pile = self.piles.pop(cid)
        self.piles[cid] = []
        if self.rules.surplus_method is SurplusMethod.WEIGHTED_INCLUSIVE_GREGORY:
            tv = Fraction(surplus) / Fraction(tally)
            new_weight = lambda w: w * tv
        else:
            papers = sum(b.count for b in pile)
            tv = Fraction(surplus) / papers if papers else Fraction(0)
            new_weight = lambda w: tv
        if not (0 <= tv <= 1):
            raise CountInvariantError(f"transfer value {tv} outside [0, 1]", self.transcript)
        self.tallies[cid] = self.quota
        rec = RoundRecord(number=number, kind="surplus", source=cid, transfer_value=tv, tallies={})
        self._move_pile(pile, new_weight, surplus, rec)
        self._close_round(rec)

    def _eliminate(self, number: int) -> None:
        rec = RoundRecord(number=number, kind="elimination", source=None, transfer_value=None, tallies={})
        loser = self._pick_elimination(rec)
        rec.source = loser
        rec.eliminated = loser
        self.continuing.remove(loser)
        removed = self.tallies.pop(loser)
        pile = self.piles.pop(loser)
        self._move_pile(pile, lambda w: w, removed, rec)
        self._close_round(rec)

    def run(self) -> tuple[list[str], CountTranscript]:
        rec = RoundRecord(number=1, kind="first-preferences", source=None, transfer_value=None, tallies={})
        self._close_round(rec)
        for number in itertools.count(2):
            if len(self.elected) == self.meta.seats:
                break
            remaining = self.meta.seats - len(self.elected)
            if len(self.continuing) == remaining:
                rec = RoundRecord(
                    number=number, kind="remaining-seats", source=None, transfer_value=None, tallies={}
                )
                for cid in self._order_descending(list(self.continuing)):
                    self.continuing.remove(cid)
                    self.elected.append(cid)
                    rec.elected.append((cid, None))
                rec.tallies = self._snapshot()
                rec.exhausted = self.exhausted
                rec.rounding_loss = self.loss
                self.transcript.rounds.append(rec)
                break
            if self.surplus_queue:
                self._distribute_surplus(self.surplus_queue.popleft(), number)
            else:
                self._eliminate(number)
        self.transcript.elected = list(self.elected)
        if len(self.elected) != self.meta.seats or len(set(self.elected)) != self.meta.seats:
            raise CountInvariantError("terminated without filling every seat exactly once", self.transcript)
        return list(self.elected), self.transcript


def count_stv(
    ballots: Iterable[tuple[Preferences, int]],
    meta: ElectionMeta,
    rules: CountRules | None = None,
) -> tuple[list[str], CountTranscript]:
    """Count an election.  Returns (elected candidate ids in order, transcript)."""
    return _Count(ballots, meta, rules or CountRules()).run()
