"""Reading error rates out of data you can actually get.

Published preference files only contain formal ballots, so outright errors
are hidden -- but repeated or skipped preference numbers above the
formality threshold survive into the data, and small audit samples give
binomial rate estimates.  This demo runs both tools on synthetic marks.
"""
import random

from stvsim import MarkSheet, VoteStyle, binomial_estimate, digit_budget, repeated_and_skipped_table
from stvsim.stats import anomaly_table_csv

print("== rate estimates from audit-style counts ==")
for errors, trials, label in [
    (4, 9060, "compliance inspection, 6 prefs x 1,510 papers"),
    (3, 2325, "15 hand-tracked ballots, 155 digits each"),
    (0, 500, "a clean sample of 500 digits"),
]:
    est = binomial_estimate(errors, trials)
    print(f"  {label:45} -> {est.as_percent_string()}")

print()
print("== digits at stake per ballot ==")
for candidates, marked in [(82, 82), (82, 6), (58, 12)]:
    print(f"  {marked:>3} preferences over {candidates} candidates: {digit_budget(candidates, marked)} digits")

print()
print("== repeated / skipped preference numbers ==")
rng = random.Random(1)
sheets = []
for _ in range(3000):
    # mostly clean 1..12 rankings, with occasional voter slips
    marks = {f"c{i:02d}": str(i) for i in range(1, 13)}
    if rng.random() < 0.04:
        victim = rng.randint(1, 12)
        marks[f"c{victim:02d}"] = str(rng.randint(1, 12))
    sheets.append(MarkSheet({}, marks))
rows = repeated_and_skipped_table(sheets, VoteStyle.BTL, max_pref=12)
print(anomaly_table_csv(rows))
