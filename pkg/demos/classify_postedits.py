"""Classify what a reviewer did to each dialogue: HTER, turn alignment,
three-way status fractions, and editing throughput from a timing log.
"""

from dialkit import (
    Dialogue,
    TimingEntry,
    Turn,
    aggregate_postedit_stats,
    align_and_classify,
    diff_corpora,
    hter,
    productivity,
    word_edit_distance,
)

# Word-level edit distance works on raw strings (tokenized internally).
# HTER divides the edit count by the post-edited length.
before = "le persone interessate"
after = "le persone coinvolte nel caso"
breakdown = word_edit_distance(before, after)
print(f"edits: {breakdown.substitutions} sub, {breakdown.insertions} ins, "
      f"{breakdown.deletions} del -> hter {hter(before, after):.3f}")

# A whole-dialogue comparison aligns original turns against post-edited
# turns (monotone, cost = word edit distance) and labels each original
# turn unchanged / edited / deleted, with reviewer insertions on the side.
original = Dialogue("visita", "LLM", (
    Turn("A", "Mettetevi in circolo."),
    Turn("A", "Lei chi è?"),
    Turn("B", "Sono il marito."),
    Turn("A", "Spiacente, soltanto le persone interessate sono ammesse qui."),
))
postedited = Dialogue("visita-pe", "LLM", (
    Turn("A", "Lei chi è?"),
    Turn("B", "Sono il marito."),
    Turn("A", "Spiacente, soltanto le persone coinvolte nel caso sono ammesse qui."),
    Turn("B", "Ma io sono suo marito! Non mi potete negare l'accesso."),
), provenance={"postedited_of": "visita"})

record = align_and_classify(original, postedited)
print("\nper-original-turn statuses:", [s.value for s in record.turn_statuses])
print("reviewer inserted", record.inserted_turn_count, "turn(s);",
      "hter of edited turns:", [round(h, 3) for h in record.hter_per_edited_turn])

# diff_corpora pairs corpora by id (or provenance.postedited_of) and marks
# originals that never came back as deleted.
kept = Dialogue("altro", "H+LLM", (
    Turn("A", "Com'era il concerto?"),
    Turn("B", "Lungo ma bellissimo."),
    Turn("A", "Allora ne è valsa la pena."),
))
discarded = Dialogue("scartato", "LLM", (
    Turn("A", "Testo senza capo."),
    Turn("B", "Né coda."),
    Turn("A", "Da buttare."),
))
records = diff_corpora([original, kept, discarded], [postedited, kept])

# Fractions denominate over dialogues and over ORIGINAL turns per source
# group plus a pooled Total row; hter_edited pools every edited turn.
print()
for group, agg in aggregate_postedit_stats(records).items():
    print(f"{group:7s} dial u/d/e = {agg.dial_unchanged:.2f}/{agg.dial_deleted:.2f}/"
          f"{agg.dial_edited:.2f}  turns u/d/e = {agg.turns_unchanged:.2f}/"
          f"{agg.turns_deleted:.2f}/{agg.turns_edited:.2f}  "
          f"hter_edited = {agg.hter_edited}")

# Throughput: per-mode dialogues/turns/tokens per hour from timed sessions.
log = [
    TimingEntry(mode="postedit", seconds=300.0, turns=4, tokens=40),
    TimingEntry(mode="postedit", seconds=300.0, turns=5, tokens=44),
    TimingEntry(mode="scratch", seconds=900.0, turns=6, tokens=120),
]
for mode, rates in productivity(log).items():
    print(f"\n{mode}: " + ", ".join(f"{k} {v:.1f}" for k, v in rates.items()))
