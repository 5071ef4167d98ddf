"""Pack a rating study: length-stratified survey assembly with twin
separation, evaluator payloads that hide provenance, a ratings CSV round
trip, and the aggregate report split by edit intensity.
"""

import random
import tempfile
from pathlib import Path

from dialkit import (
    Dialogue,
    Rating,
    Turn,
    aggregate_ratings,
    align_and_classify,
    build_surveys,
    edit_intensity_split,
    length_stratum,
    read_ratings_csv,
    survey_payload,
    write_ratings_csv,
)

WORDS = ("vento", "piazza", "sera", "lume", "porto", "rive", "coro", "madre")


def make_turns(rng, count):
    return tuple(
        Turn("S1" if i % 2 == 0 else "S2",
             " ".join(rng.choice(WORDS) for _ in range(5)))
        for i in range(count)
    )


rng = random.Random(7)
originals, postedits = [], []
for i, turn_count in enumerate([6, 6, 6, 6, 12, 12]):
    orig = Dialogue(f"orig-{i}", "LLM", make_turns(rng, turn_count))
    turns = list(orig.turns)
    if i % 2 == 0:
        # heavy revision: drop the opening exchange, rewrite one turn
        turns = turns[2:]
        turns[0] = Turn(turns[0].speaker, "testo interamente riscritto qui")
    else:
        # light touch: nudge a single word
        turns[1] = Turn(turns[1].speaker, turns[1].text + " davvero")
    pe = Dialogue(f"pe-{i}", "LLM", tuple(turns),
                  provenance={"postedited_of": orig.id})
    originals.append(orig)
    postedits.append(pe)

corpus = originals + postedits
twins = [(o.id, p.id) for o, p in zip(originals, postedits)]
print("pool strata:", {d.id: length_stratum(d) for d in corpus})

# Two surveys of six dialogues each, proportional per length stratum,
# with each original/post-edit pair forced into different surveys.
surveys, leftover = build_surveys(corpus, size=6, evaluator_slots=2,
                                  seed=13, twins=twins)
assert not leftover
for s in surveys:
    print(f"{s.id}: {sorted(s.dialogue_ids)}")

# What an evaluator sees: texts only. No source, no provenance.
payload = survey_payload(surveys[0], {d.id: d for d in corpus})
print("payload keys per dialogue:", sorted(payload["dialogues"][0]))

# Simulated evaluators answer two 1..5 questions per dialogue; the CSV
# is the interchange format with rating platforms.
by_id = {d.id: d for d in corpus}
ratings = []
for s in surveys:
    for slot in range(s.evaluator_slots):
        ev = f"ev-{s.id[-1]}{slot}"
        for did in s.dialogue_ids:
            polished = did.startswith("pe-")
            ratings.append(Rating(
                survey_id=s.id, dialogue_id=did, evaluator_id=ev,
                understandability=rng.randint(4, 5) if polished else rng.randint(2, 4),
                machine_probability=rng.randint(1, 2) if polished else rng.randint(3, 5),
            ))

with tempfile.TemporaryDirectory() as tmp:
    csv_path = Path(tmp) / "ratings.csv"
    write_ratings_csv(ratings, csv_path)
    assert read_ratings_csv(csv_path) == ratings
print(f"\n{len(ratings)} ratings survived the CSV round trip")

# Median split on revision effort: rank-normalized mean HTER over edited
# turns blended with the fraction of turns deleted.
records = [align_and_classify(o, p) for o, p in zip(originals, postedits)]
intensity = edit_intensity_split(records)
print("intensity:", {k: v.value for k, v in sorted(intensity.items())
                     if k.startswith("orig")})

roles = {d.id: ("postedited" if d.id.startswith("pe-") else "original")
         for d in corpus}
report = aggregate_ratings(ratings, roles, intensity=intensity, twins=twins)
print()
for cell, agg in sorted(report.as_dict()["cells"].items()):
    print(f"{cell:24s} n={agg['count']:2d}  understandability {agg['understandability']:.2f}"
          f"  machine_probability {agg['machine_probability']:.2f}")
delta = report.twin_deltas["orig-0"]
print(f"\ntwin orig-0/pe-0: post-edit shifts understandability by "
      f"{delta['understandability']:+.2f}")
