"""Score dialogue continuations with pluggable next-token scorers:
closed-form perplexities, rank accuracy, and the full report with
truncated-context variants.
"""

import math

from dialkit import (
    BigramScorer,
    Dialogue,
    LookupScorer,
    MetricConfig,
    Turn,
    UniformScorer,
    conditional_turn_perplexity,
    eval_suite,
)

# Turn 0 only conditions; scoring starts at turn 1. Under a uniform
# distribution over V tokens every position costs log V, so the
# perplexity of any continuation is exactly V.
dialogue = Dialogue("demo", "LLM", (
    Turn("S1", "a b"),
    Turn("S2", "c d a"),
    Turn("S1", "b c"),
))
per_turn, mean = conditional_turn_perplexity(dialogue, UniformScorer("abcd"))
print("uniform over 4 tokens:", [f"{p:.1f}" for p in per_turn], f"mean {mean:.1f}")

# A lookup table pins probabilities by exact context, which makes the
# geometric mean easy to do by hand:
#   ppl = exp(-(ln 0.5 + ln 0.125) / 2) = 4
table = LookupScorer(
    ("a", "b", "c", "d"),
    {("a",): {"b": 0.5}, ("a", "b"): {"c": 0.125}},
)
pinned = Dialogue("pinned", "LLM", (Turn("S1", "a"), Turn("S2", "b c")))
per_turn, mean = conditional_turn_perplexity(pinned, table)
expected = math.exp(-(math.log(0.5) + math.log(0.125)) / 2)
print(f"lookup: per-turn {per_turn[0]:.6f}, closed form {expected:.6f}")

# An add-one bigram model fit on one corpus, evaluated on another.
train = [
    Dialogue(f"t{i}", "H", (
        Turn("S1", "il treno parte adesso"),
        Turn("S2", "il treno arriva tardi"),
        Turn("S1", "parte adesso davvero"),
    ))
    for i in range(3)
]
scorer = BigramScorer.from_corpus(train)
held_out = [
    Dialogue("h1", "H", (
        Turn("S1", "il treno parte"),
        Turn("S2", "il treno arriva adesso"),
        Turn("S1", "arriva tardi davvero"),
        Turn("S2", "davvero tardi arriva il treno"),
    )),
    Dialogue("h2", "H", (
        Turn("S1", "parte tardi"),
        Turn("S2", "il treno parte adesso"),
        Turn("S1", "adesso parte il treno"),
        Turn("S2", "tardi arriva davvero tardi parte"),
        Turn("S1", "il treno arriva"),
    )),
]

report = eval_suite(
    held_out,
    scorer,
    MetricConfig(acc_n=(1, 2, 5), truncation_fractions=(0.3,)),
)
print(f"\nbigram cppl {report.cppl:.3f} over {report.turns} scored turns")
print("acc@N:", {n: round(v, 3) for n, v in report.acc_at.items()})

# Truncation variants rescore after dropping floor(f * n) trailing turns
# from each n-turn dialogue, probing whether late turns drag the score.
for fraction, variant in report.truncation_variants.items():
    print(f"drop trailing {fraction:.0%} of turns -> cppl {variant.cppl:.3f}, "
          f"acc@1 {variant.acc_at[1]:.3f} over {variant.turns} turns")

# Micro pooling weights every token equally instead of every dialogue.
micro = eval_suite(held_out, scorer, MetricConfig(acc_n=(1,)), micro=True)
print(f"micro cppl {micro.cppl:.3f} (macro was {report.cppl:.3f})")

# Out-of-vocabulary gold tokens raise unless mapped to a designated
# unknown token that the scorer's vocabulary carries.
vocab = tuple(sorted({"<unk>", *(t for d in train for u in d.turns for t in u.text.split())}))
noisy = Dialogue("n1", "H", (Turn("S1", "il treno"), Turn("S2", "parte QUANDO")))
report = eval_suite([noisy], UniformScorer(vocab), unk_token="<unk>")
print(f"with <unk> mapping: cppl {report.cppl:.3f} == |V| = {len(vocab)}")
