"""Text-quality metrics: repetition rate, sentence BLEU, derailment cuts.

Everything here is a pure computation on inline dialogues.
"""

from dialkit import (
    Dialogue,
    MetricConfig,
    Turn,
    bleu,
    detect_derailment,
    repetition_rate,
    tokenize,
)


def dialogue(id, *texts):
    turns = tuple(Turn("A" if i % 2 == 0 else "B", t) for i, t in enumerate(texts))
    return Dialogue(id=id, source="LLM", turns=turns)


# The tokenizer lowercases and detaches sentence punctuation, so surface
# variants of the same words count as repeats.
print("tokens:", tokenize("E’ qui! Davvero, «qui»."))

# Repetition rate is the geometric mean, over n-gram orders 1..4, of the
# fraction of repeated n-gram tokens inside fixed-size windows, times 100.
fresh = dialogue("fresh", "uno due tre", "quattro cinque sei", "sette otto nove")
loop = dialogue("loop", "il treno parte", "il treno parte", "il treno parte")
for corpus in ([fresh], [loop], [fresh, loop]):
    r = repetition_rate(corpus)
    ids = "+".join(d.id for d in corpus)
    print(f"rr({ids}) = {r.value:.3f}  per-order {[round(v, 3) for v in r.per_order]}")

# Sentence BLEU with smoothing: identical turns score 1, disjoint turns 0,
# and orders the candidate cannot populate are skipped instead of zeroing
# the whole product.
pairs = [
    ("il gatto dorme sul divano", "il gatto dorme sul divano"),
    ("il gatto dorme sul divano", "un cane abbaia in giardino"),
    ("il gatto dorme sul divano adesso", "il gatto dorme sul divano stasera"),
    ("si va", "si va"),
]
for cand, ref in pairs:
    print(f"bleu({cand!r} | {ref!r}) = {bleu(cand, ref).value:.4f}")

# Derailment: a dialogue is cut at the first turn whose BLEU against ANY
# earlier turn reaches the threshold. A verbatim loop two turns back is
# caught even though the adjacent turns differ.
derailing = dialogue(
    "d",
    "allora ci vediamo alle otto in stazione",
    "va bene porto io i biglietti",
    "allora ci vediamo alle otto in stazione",
    "perfetto a dopo",
)
cut = detect_derailment(derailing)
print(f"\nderailment cut at turn {cut} of {len(derailing.turns)}")
trimmed = derailing.replace_turns(derailing.turns[:cut])
for t in trimmed.turns:
    print(f"  kept  {t.speaker}: {t.text}")

# The threshold is configurable; 1.0 only cuts exact-scoring repeats.
for threshold in (0.3, 0.9, 1.0):
    cfg = MetricConfig(derail_threshold=threshold)
    print(f"threshold {threshold}: cut {detect_derailment(derailing, cfg)}")
