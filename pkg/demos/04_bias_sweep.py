"""Random errors flip a close election, systematically.

Candidate a1 lives on one-digit ATL votes; candidate b1 leads on the
baseline count but lives on six-digit BTL votes, each of which goes
informal if any digit is misread.  Sweeping the per-digit error rate shows
a sharp, one-directional transition in the winner -- and aligning the
formality rules for the two vote styles makes it disappear.

Under the hood every ballot gets its own random substream per run, so the
sweep is reproducible bit-for-bit at any parallelism level.
"""
from stvsim import SimConfig, run_sweep
from stvsim.synth import formality_bias_election

election = formality_bias_election(atl_votes=4950, btl_votes=5050)
config = SimConfig(
    base_seed=20240801,
    runs_per_point=200,
    model="digit",
    rates=(0.0025, 0.005, 0.0075, 0.01),
    btl_required_grid=(6, 1),
    jobs=2,
)
report = run_sweep(election, config)

print(f"{election.meta.name}: ATL votes 4950 (a1), 6-pref BTL votes 5050 (b1)")
print()
print("rate      rule    P(a1 wins)  P(b1 wins)  formality ATL  formality BTL")
for p in report.points:
    rule = f"BTL>={p.btl_required}"
    print(
        f"{p.rate:<8.4f}  {rule:6}  {p.candidate_frequency('a1'):>9.3f}"
        f"  {p.candidate_frequency('b1'):>9.3f}"
        f"  {p.mean_formality_atl:>12.4f}  {p.mean_formality_btl:>12.4f}"
    )

print()
print("with the default 6-preference BTL rule the seat flips to a1 around a")
print("0.5% per-digit error rate; with a 1-preference rule it never does.")
