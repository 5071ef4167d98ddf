"""Mine two-speaker excerpts from a raw script and package them as a corpus.

Runs offline on an inline transcript; writes its outputs to a temp directory.
"""

import tempfile
from pathlib import Path

from dialkit import corpus_stats, stratified_split, validate_dialogue, write_splits
from dialkit.corpus import read_corpus, write_corpus
from dialkit.extract import ExtractionConfig, extract_corpus

# A transcript is just `Speaker: line` rows; blank lines (or ===) separate
# scenes. The third scene has a narrator crashing the conversation: the two
# lines before it are too few for a window, so only the tail survives.
SCRIPT = """\
Anna: Hai visto che nebbia stamattina?
Marco: Non si vedeva la strada davanti casa.
Anna: Io ho preso il treno per sicurezza.
Marco: Hai fatto bene, in auto era un disastro.

Luca: Il forno nuovo arriva domani.
Sara: Finalmente, quello vecchio scalda a metà.
Luca: Ho chiesto anche il ritiro del vecchio.
Sara: Perfetto, così non resta in cantina.
Luca: Appunto, spazio recuperato.

Anna: Allora, chi porta il dolce stasera?
Marco: Io, ho già ordinato la crostata.
NARRATORE: Cala la sera sulla città.
Anna: Ottimo, io penso al vino.
Marco: Affare fatto.
Anna: A stasera allora.
"""

workdir = Path(tempfile.mkdtemp(prefix="curate-"))
script_path = workdir / "serata.txt"
script_path.write_text(SCRIPT, encoding="utf-8")

# extract_corpus walks every scene with a greedy maximal two-speaker window
# (min_window lines long); a third voice simply ends the current span.
dialogues, summary = extract_corpus([script_path], ExtractionConfig(min_window=3))
print("extraction:", summary.as_dict())
for d in dialogues:
    lines = d.provenance["lines"]
    print(f"  {d.id}: {len(d.turns)} turns from scene lines {lines[0]}..{lines[1]}")

# Every excerpt satisfies the structural rules by construction.
for d in dialogues:
    report = validate_dialogue(d)
    assert report.ok, report.violations

# The JSONL round trip is byte-stable: sorted keys, compact separators.
corpus_path = workdir / "corpus.jsonl"
write_corpus(corpus_path, dialogues)
assert read_corpus(corpus_path) == dialogues
print("\ncorpus file:", corpus_path)
print(corpus_path.read_text(encoding="utf-8").splitlines()[0][:100], "...")

# Size statistics, grouped by source (these are all "H": human scripts).
print("\n" + corpus_stats(dialogues).as_markdown())

# A seeded stratified split is deterministic: same seed, same manifest bytes.
partition = stratified_split(dialogues, ratios=(0.5, 0.25, 0.25), seed=13)
manifest = write_splits(partition, dialogues, workdir / "splits")
print("split counts:", {k: v["total"] for k, v in manifest["counts"].items()})
print("manifest checksums:", sorted(manifest["checksums"]))
