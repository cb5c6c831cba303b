"""From raw box marks to countable preferences.

A ballot paper is just numbers in boxes.  This walk-through shows how the
interpretation rule extracts the usable prefix of a ranking, and how the
formality rules decide between the above-the-line and below-the-line
readings of the same paper.
"""
from stvsim import FormalityRules, MarkSheet, classify_formality, interpret_marks

print("== interpreting marks ==")
examples = [
    {"b1": 2, "b2": 1, "b3": 3},          # clean permutation
    {"b1": 1, "b2": 3, "b3": 3},          # 2 missing: stop after 1
    {"b1": 1, "b2": 2, "b3": 2, "b4": 4}, # 2 repeated: stop after 1
    {"b1": 0, "b2": 7},                   # 0 is an unmarked box
]
for marks in examples:
    print(f"  {marks!r:45} -> {interpret_marks(marks)}")

print()
print("== formality: BTL first, ATL as fallback ==")
rules = FormalityRules()  # 6 BTL preferences, or a single ATL first preference
papers = {
    "full BTL ranking": MarkSheet({}, {f"c{i}": str(i) for i in range(1, 7)}),
    "five BTL prefs only": MarkSheet({}, {f"c{i}": str(i) for i in range(1, 6)}),
    "five BTL prefs + ATL 1": MarkSheet({"A": "1"}, {f"c{i}": str(i) for i in range(1, 6)}),
    "two ATL first prefs": MarkSheet({"A": "1", "B": "1"}, {}),
}
for label, sheet in papers.items():
    prefs = classify_formality(sheet, rules)
    verdict = f"formal {prefs.style.value}, {len(prefs)} prefs" if prefs else "informal"
    print(f"  {label:28} -> {verdict}")

print()
print("== the same paper under a relaxed BTL rule ==")
relaxed = FormalityRules(btl_required_prefs=1)
sheet = papers["five BTL prefs only"]
print(f"  default rules: {classify_formality(sheet, rules)}")
print(f"  1-pref rule:   {classify_formality(sheet, relaxed)}")
