"""Seeded Monte Carlo harness: sweep error models over an election.

For every grid point (error model x rate x formality-rule variant) the
harness perturbs each formal ballot independently, re-checks formality,
counts the survivors, and aggregates winner frequencies, per-ballot
formality rates and truncation statistics.

Reproducibility: the substream used for physical ballot i in run r at grid
point p is seeded with ``derive_seed(base_seed, p, r, i)``.  Fresh
substreams are drawn per grid point (perturbations are not reused across
rates), and aggregation sums fixed-indexed counters, so reports are
byte-identical no matter how runs are scheduled across processes.

One "physical ballot" is one paper: a mark sheet with multiplicity m covers
m consecutive physical indices in file order.
"""
from __future__ import annotations

import json
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .ballots import (
    BallotError,
    FormalityRules,
    Preferences,
    VoteStyle,
    classify_formality,
    interpret_marks,
)
from .count import CountRules, count_stv
from .error_models import (
    ConfusionModel,
    ErrorModel,
    TruncationModel,
    UniformDigitModel,
    corrupt_digits_batch,
    truncation_lengths_batch,
)
from .ingest import ElectionFile
from .rng import seed_vector

MODEL_FAMILIES = ("truncation", "digit", "confusion")


class SimError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    base_seed: int
    runs_per_point: int = 1000
    model: str = "digit"
    rates: tuple[float, ...] = ()
    confusion: ConfusionModel | None = None
    btl_required_grid: tuple[int, ...] = (6,)
    atl_required_prefs: int = 1
    btl_takes_precedence: bool = True
    count_rules: CountRules = field(default_factory=CountRules)
    track_candidates: tuple[str, ...] = ()
    jobs: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "rates", tuple(self.rates))
        object.__setattr__(self, "btl_required_grid", tuple(self.btl_required_grid))
        object.__setattr__(self, "track_candidates", tuple(self.track_candidates))
        if self.runs_per_point < 1:
            raise SimError("runs_per_point must be >= 1")
        if self.model not in MODEL_FAMILIES:
            raise SimError(f"model must be one of {MODEL_FAMILIES}, got {self.model!r}")
        if self.model == "confusion" and self.confusion is None:
            raise SimError("the confusion model needs a confusion matrix")
        for r in self.rates:
            if not 0.0 <= r <= 1.0:
                raise SimError(f"rates must lie in [0, 1], got {r}")
        if not self.btl_required_grid:
            raise SimError("at least one formality variant is required")
        if self.jobs < 1:
            raise SimError("jobs must be >= 1")

    def rules_for(self, btl_required: int) -> FormalityRules:
        return FormalityRules(
            btl_required_prefs=btl_required,
            atl_required_prefs=self.atl_required_prefs,
            btl_takes_precedence=self.btl_takes_precedence,
        )


@dataclass(frozen=True)
class GridPoint:
    index: int
    model_name: str
    rate: float  # label: epsilon, or the confusion table's mean change rate
    btl_required: int
    model: ErrorModel | None  # None: the always-included zero-error baseline


def _build_points(config: SimConfig) -> list[GridPoint]:
    points = []
    idx = 0
    for variant in config.btl_required_grid:
        specs: list[tuple[float, ErrorModel | None]] = [(0.0, None)]
        if config.model == "confusion":
            specs.append((config.confusion.mean_change_rate, config.confusion))
        else:
            seen = {0.0}
            for r in config.rates:
                if r in seen:
                    continue
                seen.add(r)
                model: ErrorModel = (
                    UniformDigitModel(r) if config.model == "digit" else TruncationModel(r)
                )
                specs.append((r, model))
        for rate, model in specs:
            points.append(GridPoint(idx, config.model, rate, variant, model))
            idx += 1
    return points


# -- prepared per-variant ballot data -----------------------------------------


@dataclass
class _SheetGroup:
    style: VoteStyle
    ranking: tuple[str, ...]
    box_order: tuple[str, ...]  # ranked boxes sorted by id: canonical digit order
    digits: np.ndarray  # uint8, the marks' digits flattened in box_order
    widths: tuple[int, ...]  # digits per box, aligned with box_order
    phys_start: int
    count: int


@dataclass
class _Prepared:
    rules: FormalityRules
    groups: list[_SheetGroup]
    n_physical: int
    baseline_mask: np.ndarray  # bool: formal at epsilon 0
    style_codes: np.ndarray  # int8: -1 informal, 0 ATL, 1 BTL
    orig_prefs: np.ndarray  # int32: baseline preference count (0 if informal)
    bucket_counts: dict[int, int]

    @property
    def atl_ballots(self) -> int:
        return int((self.style_codes == 0).sum())

    @property
    def btl_ballots(self) -> int:
        return int((self.style_codes == 1).sum())


def _prepare(election: ElectionFile, rules: FormalityRules) -> _Prepared:
    groups: list[_SheetGroup] = []
    n_physical = election.total_ballots
    baseline = np.zeros(n_physical, dtype=bool)
    styles = np.full(n_physical, -1, dtype=np.int8)
    orig = np.zeros(n_physical, dtype=np.int32)
    buckets: Counter = Counter()
    pos = 0
    for sheet in election.sheets:
        prefs = classify_formality(sheet, rules)
        if prefs is not None:
            rank_of = {box: rank for rank, box in enumerate(prefs.ranking, start=1)}
            box_order = tuple(sorted(prefs.ranking))
            digit_list: list[int] = []
            widths = []
            for box in box_order:
                text = str(rank_of[box])
                widths.append(len(text))
                digit_list.extend(int(ch) for ch in text)
            groups.append(
                _SheetGroup(
                    style=prefs.style,
                    ranking=prefs.ranking,
                    box_order=box_order,
                    digits=np.array(digit_list, dtype=np.uint8),
                    widths=tuple(widths),
                    phys_start=pos,
                    count=sheet.multiplicity,
                )
            )
            stop = pos + sheet.multiplicity
            baseline[pos:stop] = True
            styles[pos:stop] = 0 if prefs.style is VoteStyle.ATL else 1
            orig[pos:stop] = len(prefs.ranking)
            buckets[len(prefs.ranking)] += sheet.multiplicity
        pos += sheet.multiplicity
    return _Prepared(rules, groups, n_physical, baseline, styles, orig, dict(buckets))


def _values_from_digits(dig: np.ndarray, widths: tuple[int, ...]) -> np.ndarray:
    values = np.zeros((dig.shape[0], len(widths)), dtype=np.int32)
    pos = 0
    for j, width in enumerate(widths):
        v = np.zeros(dig.shape[0], dtype=np.int32)
        for _ in range(width):
            v = v * 10 + dig[:, pos]
            pos += 1
        values[:, j] = v
    return values


def _run_chunk(args: tuple) -> dict:
    """Simulate runs [run_lo, run_hi) of one grid point; pure and picklable."""
    (prep, meta, count_rules, model, base_seed, point_index, run_lo, run_hi, do_count) = args
    n_runs = run_hi - run_lo
    formal_runs = np.zeros(prep.n_physical, dtype=np.int64)
    atl_by_run = np.zeros(n_runs, dtype=np.int64)
    btl_by_run = np.zeros(n_runs, dtype=np.int64)
    winner_sets: Counter = Counter()
    candidate_wins: Counter = Counter()
    surviving_sums: Counter = Counter()
    no_result = 0
    atl_mask = prep.style_codes == 0
    btl_mask = prep.style_codes == 1

    for run in range(run_lo, run_hi):
        formal = np.zeros(prep.n_physical, dtype=bool)
        ballots: Counter = Counter()
        for g in prep.groups:
            required = prep.rules.required(g.style)
            stop = g.phys_start + g.count
            if model is None:
                ballots[(g.style, g.ranking)] += g.count
                formal[g.phys_start:stop] = True
                surviving_sums[len(g.ranking)] += len(g.ranking) * g.count
                continue
            seeds = seed_vector((base_seed, point_index, run), g.phys_start, g.count)
            if isinstance(model, TruncationModel):
                lens = truncation_lengths_batch(len(g.ranking), model.rate, seeds)
                row_formal = lens >= required
                formal[g.phys_start:stop] = row_formal
                surviving_sums[len(g.ranking)] += int(lens[row_formal].sum())
                kept = np.bincount(lens[row_formal], minlength=len(g.ranking) + 1)
                for length in np.nonzero(kept)[0]:
                    ballots[(g.style, g.ranking[:length])] += int(kept[length])
            else:
                corrupted = corrupt_digits_batch(g.digits, model, seeds)
                values = _values_from_digits(corrupted, g.widths)
                uniq, inverse, counts = np.unique(
                    values, axis=0, return_inverse=True, return_counts=True
                )
                inverse = inverse.reshape(-1)
                row_formal = np.zeros(len(uniq), dtype=bool)
                row_surv = np.zeros(len(uniq), dtype=np.int64)
                for i, row in enumerate(uniq):
                    ranking = interpret_marks(dict(zip(g.box_order, row.tolist())))
                    if len(ranking) >= required:
                        row_formal[i] = True
                        row_surv[i] = len(ranking)
                        ballots[(g.style, ranking)] += int(counts[i])
                formal[g.phys_start:stop] = row_formal[inverse]
                surviving_sums[len(g.ranking)] += int((row_surv * counts).sum())
        formal_runs += formal
        atl_by_run[run - run_lo] = int(formal[atl_mask].sum())
        btl_by_run[run - run_lo] = int(formal[btl_mask].sum())
        if not do_count:
            continue
        if ballots:
            prefs_list = [
                (Preferences(style, ranking), mult) for (style, ranking), mult in ballots.items()
            ]
            winners, _ = count_stv(prefs_list, meta, count_rules)
            winner_sets[tuple(sorted(winners))] += 1
            for w in winners:
                candidate_wins[w] += 1
        else:
            no_result += 1

    return {
        "run_lo": run_lo,
        "formal_runs": formal_runs,
        "atl_by_run": atl_by_run,
        "btl_by_run": btl_by_run,
        "winner_sets": dict(winner_sets),
        "candidate_wins": dict(candidate_wins),
        "surviving_sums": dict(surviving_sums),
        "no_result": no_result,
    }


# -- results -------------------------------------------------------------------


@dataclass
class PointResult:
    model: str
    rate: float
    btl_required: int
    runs: int
    atl_ballots: int
    btl_ballots: int
    bucket_counts: dict[int, int]
    winner_sets: dict[tuple[str, ...], int]
    candidate_wins: dict[str, int]
    no_result_runs: int
    formal_runs_per_ballot: np.ndarray
    atl_formal_by_run: np.ndarray
    btl_formal_by_run: np.ndarray
    surviving_sums: dict[int, int]

    @property
    def winner_set_frequencies(self) -> dict[tuple[str, ...], float]:
        return {k: v / self.runs for k, v in self.winner_sets.items()}

    @property
    def candidate_frequencies(self) -> dict[str, float]:
        return {k: v / self.runs for k, v in self.candidate_wins.items()}

    @property
    def no_result_frequency(self) -> float:
        return self.no_result_runs / self.runs

    def candidate_frequency(self, candidate: str) -> float:
        return self.candidate_wins.get(candidate, 0) / self.runs

    @property
    def mean_formality_atl(self) -> float | None:
        if not self.atl_ballots:
            return None
        return float(self.atl_formal_by_run.mean() / self.atl_ballots)

    @property
    def mean_formality_btl(self) -> float | None:
        if not self.btl_ballots:
            return None
        return float(self.btl_formal_by_run.mean() / self.btl_ballots)

    @property
    def mean_surviving(self) -> dict[int, float]:
        return {
            length: self.surviving_sums.get(length, 0) / (self.runs * count)
            for length, count in sorted(self.bucket_counts.items())
        }

    @property
    def ballot_formality_rates(self) -> np.ndarray:
        return self.formal_runs_per_ballot / self.runs


@dataclass
class VariantInfo:
    btl_required: int
    baseline_mask: np.ndarray
    style_codes: np.ndarray
    orig_prefs: np.ndarray


@dataclass
class SimReport:
    election_name: str
    base_seed: int
    runs_per_point: int
    model: str
    n_physical_ballots: int
    candidate_order: tuple[str, ...]
    points: list[PointResult]
    variants: dict[int, VariantInfo]
    position_histograms: dict[str, dict[str, dict[int, int]]] = field(default_factory=dict)

    def point(self, rate: float, btl_required: int | None = None) -> PointResult:
        for p in self.points:
            if abs(p.rate - rate) < 1e-12 and (btl_required is None or p.btl_required == btl_required):
                return p
        raise KeyError(f"no grid point with rate={rate}, btl_required={btl_required}")

    def to_json_dict(self) -> dict:
        points = []
        for p in self.points:
            order = {c: i for i, c in enumerate(self.candidate_order)}
            winner_rows = [
                {"winners": list(k), "runs": v, "frequency": v / p.runs}
                for k, v in sorted(p.winner_sets.items(), key=lambda kv: (-kv[1], kv[0]))
            ]
            candidate_rows = [
                {"candidate": c, "wins": p.candidate_wins[c], "frequency": p.candidate_wins[c] / p.runs}
                for c in sorted(p.candidate_wins, key=lambda c: (order.get(c, len(order)), c))
            ]
            points.append(
                {
                    "model": p.model,
                    "rate": p.rate,
                    "btl_required": p.btl_required,
                    "runs": p.runs,
                    "no_result_runs": p.no_result_runs,
                    "winner_sets": winner_rows,
                    "candidates": candidate_rows,
                    "formality": {
                        "atl_ballots": p.atl_ballots,
                        "btl_ballots": p.btl_ballots,
                        "mean_atl": p.mean_formality_atl,
                        "mean_btl": p.mean_formality_btl,
                    },
                    "truncation": [
                        {"original_prefs": k, "ballots": p.bucket_counts[k], "mean_surviving": v}
                        for k, v in p.mean_surviving.items()
                    ],
                }
            )
        return {
            "election": self.election_name,
            "base_seed": self.base_seed,
            "runs_per_point": self.runs_per_point,
            "model": self.model,
            "physical_ballots": self.n_physical_ballots,
            "points": points,
            "position_histograms": self.position_histograms,
        }


def run_sweep(election: ElectionFile, config: SimConfig) -> SimReport:
    """Run the full Monte Carlo sweep described by ``config``."""
    points = _build_points(config)
    prepared = {v: _prepare(election, config.rules_for(v)) for v in config.btl_required_grid}

    tasks = []
    runs = config.runs_per_point
    chunk = runs if config.jobs == 1 else max(1, -(-runs // (config.jobs * 4)))
    for point in points:
        prep = prepared[point.btl_required]
        for lo in range(0, runs, chunk):
            hi = min(runs, lo + chunk)
            tasks.append(
                (prep, election.meta, config.count_rules, point.model, config.base_seed,
                 point.index, lo, hi, True)
            )

    if config.jobs == 1:
        chunk_results = [_run_chunk(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            chunk_results = list(pool.map(_run_chunk, tasks))

    results: list[PointResult] = []
    cursor = 0
    chunks_per_point = -(-runs // chunk)
    for point in points:
        prep = prepared[point.btl_required]
        formal_runs = np.zeros(prep.n_physical, dtype=np.int64)
        atl_by_run = np.zeros(runs, dtype=np.int64)
        btl_by_run = np.zeros(runs, dtype=np.int64)
        winner_sets: Counter = Counter()
        candidate_wins: Counter = Counter()
        surviving_sums: Counter = Counter()
        no_result = 0
        for part in chunk_results[cursor:cursor + chunks_per_point]:
            lo = part["run_lo"]
            n = len(part["atl_by_run"])
            formal_runs += part["formal_runs"]
            atl_by_run[lo:lo + n] = part["atl_by_run"]
            btl_by_run[lo:lo + n] = part["btl_by_run"]
            winner_sets.update(part["winner_sets"])
            candidate_wins.update(part["candidate_wins"])
            surviving_sums.update(part["surviving_sums"])
            no_result += part["no_result"]
        cursor += chunks_per_point
        results.append(
            PointResult(
                model=point.model_name,
                rate=point.rate,
                btl_required=point.btl_required,
                runs=runs,
                atl_ballots=prep.atl_ballots,
                btl_ballots=prep.btl_ballots,
                bucket_counts=dict(sorted(prep.bucket_counts.items())),
                winner_sets=dict(sorted(winner_sets.items())),
                candidate_wins=dict(sorted(candidate_wins.items())),
                no_result_runs=no_result,
                formal_runs_per_ballot=formal_runs,
                atl_formal_by_run=atl_by_run,
                btl_formal_by_run=btl_by_run,
                surviving_sums=dict(sorted(surviving_sums.items())),
            )
        )

    histograms = {
        cid: preference_position_histogram(election, cid, config.rules_for(config.btl_required_grid[0]))
        for cid in config.track_candidates
    }
    return SimReport(
        election_name=election.meta.name,
        base_seed=config.base_seed,
        runs_per_point=runs,
        model=config.model,
        n_physical_ballots=election.total_ballots,
        candidate_order=election.meta.candidate_ids,
        points=results,
        variants={
            v: VariantInfo(v, p.baseline_mask, p.style_codes, p.orig_prefs)
            for v, p in prepared.items()
        },
        position_histograms=histograms,
    )


# -- single-point analyses ------------------------------------------------------


@dataclass
class FormalityReport:
    runs: int
    rates: np.ndarray  # per physical ballot; meaningful where style_codes >= 0
    style_codes: np.ndarray  # -1 baseline-informal, 0 ATL, 1 BTL
    mean_atl: float | None
    mean_btl: float | None


def _single_point(
    election: ElectionFile,
    model: ErrorModel,
    runs: int,
    base_seed: int,
    rules: FormalityRules | None,
    do_count: bool = False,
) -> tuple[_Prepared, dict]:
    prep = _prepare(election, rules or FormalityRules())
    part = _run_chunk((prep, election.meta, CountRules(), model, base_seed, 0, 0, runs, do_count))
    return prep, part


def formality_rate_report(
    election: ElectionFile,
    model: ErrorModel,
    runs: int,
    base_seed: int,
    rules: FormalityRules | None = None,
) -> FormalityReport:
    """Per-ballot formality rates under one error model: formal runs / runs."""
    if runs < 1:
        raise SimError("runs must be >= 1")
    prep, part = _single_point(election, model, runs, base_seed, rules)
    rates = part["formal_runs"] / runs
    mean_atl = float(part["atl_by_run"].mean() / prep.atl_ballots) if prep.atl_ballots else None
    mean_btl = float(part["btl_by_run"].mean() / prep.btl_ballots) if prep.btl_ballots else None
    return FormalityReport(runs, rates, prep.style_codes, mean_atl, mean_btl)


def truncation_stats(
    election: ElectionFile,
    model: ErrorModel,
    runs: int,
    base_seed: int,
    rules: FormalityRules | None = None,
) -> dict[int, float]:
    """Mean surviving preference count, bucketed by original preference count.

    Surviving count is the length of the re-interpreted ranking, or 0 when
    the errors left the ballot informal.
    """
    if runs < 1:
        raise SimError("runs must be >= 1")
    prep, part = _single_point(election, model, runs, base_seed, rules)
    sums = part["surviving_sums"]
    return {
        length: sums.get(length, 0) / (runs * count)
        for length, count in sorted(prep.bucket_counts.items())
    }


@dataclass
class PartitionTable:
    candidate_a: str
    candidate_b: str
    atl: tuple[int, int, int]  # prefers a, prefers b, neither
    btl: tuple[int, int, int]

    @property
    def total(self) -> int:
        return sum(self.atl) + sum(self.btl)


def partition_by_preference(
    election: ElectionFile,
    candidate_a: str,
    candidate_b: str,
    rules: FormalityRules | None = None,
) -> PartitionTable:
    """Split formal ballots by style and by which of two candidates they prefer.

    ATL ballots compare the candidates' groups; a ballot ranking neither
    candidate (or ranking both equally, e.g. group-mates on an ATL ballot)
    lands in the "neither" cell.  Every formal ballot lands in exactly one
    of the six cells.
    """
    meta = election.meta
    if candidate_a == candidate_b:
        raise BallotError("partition candidates must be distinct")
    for cid in (candidate_a, candidate_b):
        if cid not in meta.candidate_index:
            raise BallotError(f"unknown candidate {cid!r}")
    group_a = meta.group_of_candidate[candidate_a]
    group_b = meta.group_of_candidate[candidate_b]
    cells = {VoteStyle.ATL: [0, 0, 0], VoteStyle.BTL: [0, 0, 0]}
    for sheet in election.sheets:
        prefs = classify_formality(sheet, rules or FormalityRules())
        if prefs is None:
            continue
        if prefs.style is VoteStyle.ATL:
            targets = (group_a, group_b)
        else:
            targets = (candidate_a, candidate_b)
        position = {box: i for i, box in enumerate(prefs.ranking)}
        pos_a = position.get(targets[0], len(prefs.ranking))
        pos_b = position.get(targets[1], len(prefs.ranking))
        if pos_a < pos_b:
            cell = 0
        elif pos_b < pos_a:
            cell = 1
        else:
            cell = 2
        cells[prefs.style][cell] += sheet.multiplicity
    return PartitionTable(candidate_a, candidate_b, tuple(cells[VoteStyle.ATL]), tuple(cells[VoteStyle.BTL]))


def preference_position_histogram(
    election: ElectionFile,
    candidate: str,
    rules: FormalityRules | None = None,
) -> dict[str, dict[int, int]]:
    """Where a candidate sits in preference lists, weighted by multiplicity.

    Returns ``{"ATL": {rank: ballots}, "BTL": {rank: ballots}}`` where the
    ATL histogram uses the rank of the candidate's group.
    """
    meta = election.meta
    if candidate not in meta.candidate_index:
        raise BallotError(f"unknown candidate {candidate!r}")
    group = meta.group_of_candidate[candidate]
    hist = {"ATL": Counter(), "BTL": Counter()}
    for sheet in election.sheets:
        prefs = classify_formality(sheet, rules or FormalityRules())
        if prefs is None:
            continue
        target = group if prefs.style is VoteStyle.ATL else candidate
        try:
            rank = prefs.ranking.index(target) + 1
        except ValueError:
            continue
        hist[prefs.style.value][rank] += sheet.multiplicity
    return {style: dict(sorted(counter.items())) for style, counter in hist.items()}


# -- serialisation ---------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_report(report: SimReport, outdir, ballot_rates: bool = False) -> list[str]:
    """Write the plot-ready CSVs and the structured JSON document.

    Returns the file names written.  All output is deterministic for a
    given report (sorted keys, shortest round-trip float formatting).
    """
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def emit(name: str, header: list[str], rows: Iterable[list]) -> None:
        path = out / name
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        written.append(name)

    emit(
        "winners.csv",
        ["model", "rate", "btl_required", "candidate", "wins", "frequency"],
        (
            [p.model, p.rate, p.btl_required, c, w, w / p.runs]
            for p in report.points
            for c, w in sorted(p.candidate_wins.items())
        ),
    )
    emit(
        "winner_sets.csv",
        ["model", "rate", "btl_required", "winners", "runs", "frequency"],
        (
            [p.model, p.rate, p.btl_required, "|".join(k) if k else "-", v, v / p.runs]
            for p in report.points
            for k, v in list(sorted(p.winner_sets.items()))
            + ([((), p.no_result_runs)] if p.no_result_runs else [])
        ),
    )
    emit(
        "formality.csv",
        ["model", "rate", "btl_required", "atl_ballots", "btl_ballots", "mean_formality_atl", "mean_formality_btl"],
        (
            [p.model, p.rate, p.btl_required, p.atl_ballots, p.btl_ballots, p.mean_formality_atl, p.mean_formality_btl]
            for p in report.points
        ),
    )
    emit(
        "truncation.csv",
        ["model", "rate", "btl_required", "original_prefs", "ballots", "mean_surviving"],
        (
            [p.model, p.rate, p.btl_required, length, p.bucket_counts[length], mean]
            for p in report.points
            for length, mean in p.mean_surviving.items()
        ),
    )
    if report.position_histograms:
        emit(
            "histograms.csv",
            ["candidate", "style", "rank", "ballots"],
            (
                [cid, style, rank, n]
                for cid, styles in sorted(report.position_histograms.items())
                for style, counts in sorted(styles.items())
                for rank, n in sorted(counts.items())
            ),
        )
    if ballot_rates:
        for i, p in enumerate(report.points):
            info = report.variants[p.btl_required]
            rows = []
            for idx in np.nonzero(info.baseline_mask)[0]:
                style = "ATL" if info.style_codes[idx] == 0 else "BTL"
                rows.append(
                    [int(idx), style, int(info.orig_prefs[idx]),
                     int(p.formal_runs_per_ballot[idx]), p.formal_runs_per_ballot[idx] / p.runs]
                )
            emit(
                f"ballot_rates_{i:02d}.csv",
                ["ballot", "style", "original_prefs", "formal_runs", "rate"],
                rows,
            )

    with open(out / "report.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append("report.json")
    return written
