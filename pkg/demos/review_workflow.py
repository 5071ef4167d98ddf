"""Walk the reviewer workflow end to end against an event-sourced store:
import, claim, pre-check a draft, submit, delete, live reporting, and
crash-safe replay from the event log.

`dialkit serve --data DIR` exposes the same store over HTTP for the
browser workbench; everything below also holds through that API.
"""

import tempfile
from pathlib import Path

from dialkit import Dialogue, Turn, read_corpus
from dialkit.service import (
    ConflictError,
    CurationStore,
    EditSubmission,
    RejectionError,
    check_submission,
)

BATCH = [
    Dialogue("mercato#0#0", "LLM", (
        Turn("A", "Quanto costano le pesche?"),
        Turn("B", "Due euro al chilo."),
        Turn("A", "Me ne dia tre chili."),
        Turn("B", "Ecco a lei, sei euro."),
    )),
    Dialogue("mercato#0#4", "LLM", (
        Turn("A", "Il banco apre alle sette?"),
        Turn("B", "Alle sette in punto."),
        Turn("A", "Perfetto, a domani."),
    )),
    Dialogue("mercato#1#0", "H+LLM", (
        Turn("A", "Hai preso il resto?"),
        Turn("B", "Sì, è già nel portafoglio."),
        Turn("A", "Allora possiamo andare."),
    )),
]

tmp = tempfile.TemporaryDirectory()
data_dir = Path(tmp.name) / "curation"

store = CurationStore(data_dir)
print("imported:", store.import_dialogues(BATCH))
print("pending:", [t["dialogue_id"] for t in store.list_tasks(state="pending")])

# Claiming locks the task to one reviewer and bumps its version; every
# later write must quote the version it saw.
view = store.claim("mercato#0#0", annotator="anna")
task = view.task
print(f"claimed {task['dialogue_id']} v{task['version']} by {task['assignee']}")

# Drafts can be held against the guidelines before submitting. A single
# mid-dialogue deletion breaks the adjacency-pair rule.
orig = view.original
bad = [(t.speaker, t.text) for i, t in enumerate(orig.turns) if i != 1]
violations, _ = check_submission(orig, bad)
print("pre-check:", "; ".join(v.message for v in violations))

# The store enforces the same rules: an illegal draft never reaches the log.
try:
    store.submit(EditSubmission(
        dialogue_id="mercato#0#0", base_version=1, annotator="anna",
        seconds=41.0, turns=tuple(bad),
    ))
except RejectionError as err:
    print("rejected:", [v.rule for v in err.violations])

# A legal revision: fix a turn, extend the ending.
good = [(t.speaker, t.text) for t in orig.turns]
good[2] = ("A", "Me ne dia due chili, per favore.")
good.append(("A", "Grazie, arrivederci."))
record = store.submit(EditSubmission(
    dialogue_id="mercato#0#0", base_version=1, annotator="anna",
    seconds=97.0, turns=tuple(good),
))
print("accepted:", [s.value for s in record.turn_statuses],
      "+", record.inserted_turn_count, "inserted")

# Stale writes bounce instead of clobbering newer state.
try:
    store.submit(EditSubmission(
        dialogue_id="mercato#0#0", base_version=1, annotator="anna",
        seconds=5.0, turns=tuple(good),
    ))
except ConflictError as err:
    print("stale write:", err)

# Whole dialogues can be discarded; deletion is final.
store.claim("mercato#0#4", annotator="bruno")
store.delete_dialogue("mercato#0#4", annotator="bruno",
                      base_version=1, seconds=12.0)

report = store.live_report()
print("\ntasks:", report["tasks"])
print("postedit Total:", {k: round(v, 3) for k, v in
                          report["postedit"]["Total"].items()
                          if k.startswith("dial")})
print("productivity:", {m: round(r["dialogues_per_hour"], 1)
                        for m, r in report["productivity"].items()})

# Exports carry reviewer attribution in provenance and round-trip through
# the corpus format.
export_path = Path(tmp.name) / "reviewed.jsonl"
export_path.write_text(store.export_jsonl(), encoding="utf-8")
exported = read_corpus(export_path)
print("\nexported:", [(d.id, d.provenance["annotator"]) for d in exported])

# The event log is the source of truth: a fresh process replays it and
# lands on the identical state, byte for byte.
replayed = CurationStore(data_dir)
assert replayed.export_jsonl() == store.export_jsonl()
assert replayed.live_report() == report
print("replay: state reproduced exactly from", data_dir.name + "/events.jsonl")

tmp.cleanup()
