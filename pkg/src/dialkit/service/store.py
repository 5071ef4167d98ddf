"""Event-sourced store behind the reviewer workflow.

Every accepted mutation is appended to ``events.jsonl`` before it is applied,
so reopening the data directory replays the log and lands on the exact same
state. Tasks move pending -> in_progress -> done or dialogue_deleted; done
tasks may be re-edited in place (another accepted write, version bumped), a
deleted dialogue is final. Writes are optimistically versioned: a submission
carrying a stale base version is refused so no edit is silently lost.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence

from ..corpus import dialogue_to_obj, dumps_dialogue
from ..metrics import tokenize
from ..model import (
    Dialogue,
    RULE_ALTERNATION,
    RULE_MIN_TURNS,
    RULE_TWO_SPEAKERS,
    Turn,
    Violation,
    validate_dialogue,
)
from ..postedit import (
    PostEditRecord,
    aggregate_postedit_stats,
    align_and_classify,
    align_turns,
)
from ..stats import TimingEntry, corpus_stats, productivity

RULE_NON_EMPTY_TEXT = "non-empty-text"
RULE_PAIR_DELETION = "pair-deletion"
RULE_BOUNDARY_INSERTION = "boundary-insertion"


def guideline_rules() -> list[dict]:
    """Machine-readable rule manifest: every rule a submission is held to."""
    return [
        {"id": RULE_TWO_SPEAKERS, "description": "exactly two distinct speakers"},
        {"id": RULE_ALTERNATION, "description": "the two speakers strictly alternate"},
        {"id": RULE_MIN_TURNS, "description": "at least 3 turns remain"},
        {
            "id": RULE_NON_EMPTY_TEXT,
            "description": "every turn keeps a speaker and non-blank text",
        },
        {
            "id": RULE_PAIR_DELETION,
            "description": "mid-dialogue turn deletions come in adjacent pairs; "
            "deletions touching the first or last turn are exempt",
        },
        {
            "id": RULE_BOUNDARY_INSERTION,
            "description": "new turns may be added only at the beginning or end",
        },
    ]


class TaskState(str, Enum):
    PENDING = "pending"
    IN_PROGRESS = "in_progress"
    DONE = "done"
    DIALOGUE_DELETED = "dialogue_deleted"


class StoreError(Exception):
    pass


class NotFoundError(StoreError):
    pass


class ConflictError(StoreError):
    pass


class RejectionError(StoreError):
    """Submission breaks guideline rules; carries the violation list."""

    def __init__(self, violations: Sequence[Violation]):
        self.violations = tuple(violations)
        rules = ", ".join(sorted({v.rule for v in self.violations}))
        super().__init__(f"submission violates: {rules}")


@dataclass(frozen=True)
class EditSubmission:
    """One reviewer write: either an edited turn list or a delete marker.

    ``turns`` is a sequence of (speaker, text) pairs; None means the whole
    dialogue is discarded. ``seconds`` is client-reported active editing time.
    """

    dialogue_id: str
    base_version: int
    annotator: str
    seconds: float
    turns: Optional[tuple[tuple[str, str], ...]]

    def __post_init__(self):
        if self.turns is not None:
            object.__setattr__(
                self,
                "turns",
                tuple((str(s), str(t)) for s, t in self.turns),
            )
        if not self.annotator or not self.annotator.strip():
            raise ValueError("annotator id is blank")
        if self.seconds <= 0:
            raise ValueError("elapsed seconds must be positive")


def check_submission(
    original: Dialogue, turns: Sequence[tuple[str, str]]
) -> tuple[list[Violation], Optional[Dialogue]]:
    """Hold a draft turn list to the guideline rules, against its original.

    Returns every violation found plus the draft as a Dialogue when one
    could be constructed (blank fields prevent construction). Structural
    rules run on the draft alone; the deletion and insertion rules come from
    the monotone alignment against the original: a maximal run of deleted
    original turns must have even length unless it touches the first or last
    original turn, and a run of inserted turns must touch the first or last
    draft position.
    """
    violations: list[Violation] = []
    for idx, (speaker, text) in enumerate(turns):
        if not speaker.strip():
            violations.append(
                Violation(RULE_NON_EMPTY_TEXT, idx, f"turn {idx} has a blank speaker")
            )
        if not text.strip():
            violations.append(
                Violation(RULE_NON_EMPTY_TEXT, idx, f"turn {idx} has blank text")
            )
    if violations:
        return violations, None
    if not turns:
        return [Violation(RULE_MIN_TURNS, None, "draft has no turns")], None
    draft = Dialogue(
        id=original.id,
        source=original.source,
        turns=tuple(Turn(speaker=s, text=t) for s, t in turns),
        provenance=dict(original.provenance),
    )
    violations.extend(validate_dialogue(draft).violations)

    pairs = align_turns(original, draft).pairs
    n_orig = len(original.turns)
    n_draft = len(draft.turns)
    run: list[int] = []
    deleted_runs: list[list[int]] = []
    inserted_runs: list[list[int]] = []
    ins_run: list[int] = []
    for oi, pj in pairs:
        if oi is not None and pj is None:
            run.append(oi)
        elif run:
            deleted_runs.append(run)
            run = []
        if oi is None and pj is not None:
            ins_run.append(pj)
        elif ins_run:
            inserted_runs.append(ins_run)
            ins_run = []
    if run:
        deleted_runs.append(run)
    if ins_run:
        inserted_runs.append(ins_run)
    for run in deleted_runs:
        touches_edge = run[0] == 0 or run[-1] == n_orig - 1
        if not touches_edge and len(run) % 2 == 1:
            violations.append(
                Violation(
                    RULE_PAIR_DELETION,
                    run[0],
                    f"{len(run)} turn(s) deleted mid-dialogue at original "
                    f"turn {run[0]}; mid-dialogue deletions come in pairs",
                )
            )
    for run in inserted_runs:
        if run[0] != 0 and run[-1] != n_draft - 1:
            violations.append(
                Violation(
                    RULE_BOUNDARY_INSERTION,
                    run[0],
                    f"turn inserted mid-dialogue at draft position {run[0]}; "
                    "insertions are allowed only at the beginning or end",
                )
            )
    return violations, draft


@dataclass
class _TaskRow:
    dialogue_id: str
    state: TaskState = TaskState.PENDING
    assignee: Optional[str] = None
    version: int = 0
    seconds: float = 0.0

    def as_dict(self) -> dict:
        return {
            "dialogue_id": self.dialogue_id,
            "state": self.state.value,
            "assignee": self.assignee,
            "version": self.version,
            "seconds": self.seconds,
        }


@dataclass(frozen=True)
class TaskView:
    """Snapshot of one task with its original and current draft."""

    task: dict
    original: Dialogue
    draft: Optional[Dialogue]
    record: Optional[PostEditRecord]

    def as_dict(self) -> dict:
        return {
            "task": dict(self.task),
            "original": dialogue_to_obj(self.original),
            "draft": dialogue_to_obj(self.draft) if self.draft else None,
            "record": self.record.as_dict() if self.record else None,
        }


class CurationStore:
    """Append-only task store; reopening a data directory replays its log."""

    def __init__(self, data_dir):
        self._dir = Path(data_dir)
        self._dir.mkdir(parents=True, exist_ok=True)
        self._events_path = self._dir / "events.jsonl"
        self._lock = threading.RLock()
        self._originals: dict[str, Dialogue] = {}
        self._tasks: dict[str, _TaskRow] = {}
        self._edited: dict[str, Dialogue] = {}
        self._records: dict[str, PostEditRecord] = {}
        self._timing: list[TimingEntry] = []
        self._order: list[str] = []
        if self._events_path.exists():
            with open(self._events_path, encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, start=1):
                    if not line.strip():
                        continue
                    try:
                        event = json.loads(line)
                    except json.JSONDecodeError as exc:
                        raise StoreError(
                            f"corrupt event log at line {lineno}: {exc}"
                        ) from exc
                    self._apply(event)

    # -- event plumbing ----------------------------------------------------

    def _append(self, event: dict) -> None:
        line = json.dumps(event, ensure_ascii=False, sort_keys=True)
        with open(self._events_path, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")

    def _apply(self, event: dict) -> None:
        kind = event["type"]
        if kind == "import":
            obj = event["dialogue"]
            d = self._dialogue_from_event(obj)
            self._originals[d.id] = d
            self._tasks[d.id] = _TaskRow(dialogue_id=d.id)
            self._order.append(d.id)
        elif kind == "claim":
            row = self._tasks[event["id"]]
            row.state = TaskState.IN_PROGRESS
            row.assignee = event["annotator"]
            row.version += 1
        elif kind == "submit":
            self._apply_submit(event)
        elif kind == "delete":
            self._apply_delete(event)
        else:
            raise StoreError(f"unknown event type {kind!r}")

    @staticmethod
    def _dialogue_from_event(obj: dict) -> Dialogue:
        return Dialogue(
            id=obj["id"],
            source=obj["source"],
            turns=tuple(Turn(t["speaker"], t["text"]) for t in obj["turns"]),
            provenance=obj.get("provenance", {}),
            deleted=obj.get("deleted", False),
        )

    def _apply_submit(self, event: dict) -> PostEditRecord:
        row = self._tasks[event["id"]]
        original = self._originals[event["id"]]
        turns = tuple((t["speaker"], t["text"]) for t in event["turns"])
        violations, draft = check_submission(original, turns)
        if violations or draft is None:
            raise StoreError(
                f"logged submission for {event['id']!r} no longer validates"
            )
        provenance = dict(draft.provenance)
        provenance["annotator"] = event["annotator"]
        draft = Dialogue(
            id=draft.id,
            source=draft.source,
            turns=draft.turns,
            provenance=provenance,
        )
        first_accept = row.state is not TaskState.DONE
        row.state = TaskState.DONE
        row.version += 1
        row.seconds += event["seconds"]
        self._edited[draft.id] = draft
        record = align_and_classify(original, draft)
        self._records[original.id] = record
        token_count = sum(len(tokenize(t.text)) for t in draft.turns)
        self._timing.append(
            TimingEntry(
                mode="postedit",
                seconds=event["seconds"],
                dialogues=1 if first_accept else 0,
                turns=len(draft.turns) if first_accept else 0,
                tokens=token_count if first_accept else 0,
                dialogue_id=draft.id,
            )
        )
        return record

    def _apply_delete(self, event: dict) -> PostEditRecord:
        row = self._tasks[event["id"]]
        original = self._originals[event["id"]]
        row.state = TaskState.DIALOGUE_DELETED
        row.version += 1
        row.seconds += event["seconds"]
        record = align_and_classify(original, None)
        self._records[original.id] = record
        self._timing.append(
            TimingEntry(
                mode="postedit",
                seconds=event["seconds"],
                dialogues=1,
                turns=0,
                tokens=0,
                dialogue_id=original.id,
            )
        )
        return record

    # -- public API ---------------------------------------------------------

    def import_dialogues(self, dialogues: Sequence[Dialogue]) -> int:
        """Register originals as pending tasks; returns how many were added."""
        with self._lock:
            for d in dialogues:
                if d.id in self._tasks:
                    raise ValueError(f"dialogue {d.id!r} is already a task")
            for d in dialogues:
                event = {"type": "import", "dialogue": dialogue_to_obj(d)}
                self._append(event)
                self._apply(event)
            return len(dialogues)

    def list_tasks(self, state: Optional[str] = None) -> list[dict]:
        if state is not None:
            try:
                state = TaskState(state).value
            except ValueError:
                raise ValueError(f"unknown task state {state!r}") from None
        with self._lock:
            out = []
            for did in self._order:
                row = self._tasks[did]
                if state is not None and row.state.value != state:
                    continue
                info = row.as_dict()
                info["source"] = self._originals[did].source.value
                info["turn_count"] = len(self._originals[did].turns)
                out.append(info)
            return out

    def _require_task(self, dialogue_id: str) -> _TaskRow:
        row = self._tasks.get(dialogue_id)
        if row is None:
            raise NotFoundError(f"no task for dialogue {dialogue_id!r}")
        return row

    def get_task(self, dialogue_id: str) -> TaskView:
        with self._lock:
            row = self._require_task(dialogue_id)
            return TaskView(
                task=row.as_dict(),
                original=self._originals[dialogue_id],
                draft=self._edited.get(dialogue_id),
                record=self._records.get(dialogue_id),
            )

    def claim(self, dialogue_id: str, annotator: str) -> TaskView:
        """Exclusively assign a pending task; a second claim conflicts."""
        if not annotator or not annotator.strip():
            raise ValueError("annotator id is blank")
        with self._lock:
            row = self._require_task(dialogue_id)
            if row.state is not TaskState.PENDING:
                raise ConflictError(
                    f"task {dialogue_id!r} is {row.state.value}"
                    + (f", assigned to {row.assignee}" if row.assignee else "")
                )
            event = {"type": "claim", "id": dialogue_id, "annotator": annotator}
            self._append(event)
            self._apply(event)
            return self.get_task(dialogue_id)

    def submit(self, submission: EditSubmission) -> PostEditRecord:
        """Validate and commit one write; only accepted writes reach the log."""
        with self._lock:
            row = self._require_task(submission.dialogue_id)
            if row.state is TaskState.PENDING:
                raise ConflictError(
                    f"task {submission.dialogue_id!r} must be claimed first"
                )
            if row.state is TaskState.DIALOGUE_DELETED:
                raise ConflictError(
                    f"dialogue {submission.dialogue_id!r} was deleted; "
                    "deletion is final"
                )
            if row.assignee != submission.annotator:
                raise ConflictError(
                    f"task {submission.dialogue_id!r} is assigned to "
                    f"{row.assignee!r}, not {submission.annotator!r}"
                )
            if submission.base_version != row.version:
                raise ConflictError(
                    f"stale base version {submission.base_version} "
                    f"(current {row.version}); refresh and retry"
                )
            if submission.turns is None:
                if row.state is TaskState.DONE:
                    raise ConflictError(
                        "a finished dialogue cannot be deleted; re-edit it instead"
                    )
                event = {
                    "type": "delete",
                    "id": submission.dialogue_id,
                    "annotator": submission.annotator,
                    "base_version": submission.base_version,
                    "seconds": submission.seconds,
                }
                self._append(event)
                return self._apply_delete(event)
            original = self._originals[submission.dialogue_id]
            violations, _ = check_submission(original, submission.turns)
            if violations:
                raise RejectionError(violations)
            event = {
                "type": "submit",
                "id": submission.dialogue_id,
                "annotator": submission.annotator,
                "base_version": submission.base_version,
                "seconds": submission.seconds,
                "turns": [
                    {"speaker": s, "text": t} for s, t in submission.turns
                ],
            }
            self._append(event)
            return self._apply_submit(event)

    def delete_dialogue(
        self, dialogue_id: str, annotator: str, base_version: int, seconds: float
    ) -> PostEditRecord:
        return self.submit(
            EditSubmission(
                dialogue_id=dialogue_id,
                base_version=base_version,
                annotator=annotator,
                seconds=seconds,
                turns=None,
            )
        )

    # -- reads over the whole store -----------------------------------------

    def export_corpus(self) -> list[Dialogue]:
        """Post-edited corpus so far: the stored drafts of done tasks."""
        with self._lock:
            return [
                self._edited[did]
                for did in self._order
                if self._tasks[did].state is TaskState.DONE
            ]

    def original_corpus(self) -> list[Dialogue]:
        with self._lock:
            return [self._originals[did] for did in self._order]

    def records(self) -> list[PostEditRecord]:
        """Records of every finished task (done or deleted), import order."""
        with self._lock:
            return [
                self._records[did] for did in self._order if did in self._records
            ]

    def timing_entries(self) -> list[TimingEntry]:
        with self._lock:
            return list(self._timing)

    def export_jsonl(self) -> str:
        return "".join(dumps_dialogue(d) + "\n" for d in self.export_corpus())

    def live_report(self) -> dict:
        """Corpus stats + post-edit aggregates + productivity, current state.

        Matches a batch recomputation over the exported corpus and records
        at any point; empty sections are empty dicts, not errors.
        """
        with self._lock:
            states = {s.value: 0 for s in TaskState}
            for row in self._tasks.values():
                states[row.state.value] += 1
            exported = self.export_corpus()
            records = self.records()
            timing = list(self._timing)
        report: dict = {"tasks": states}
        report["corpus"] = corpus_stats(exported).as_dict() if exported else {}
        if records:
            aggregates = aggregate_postedit_stats(records)
            report["postedit"] = {k: g.as_dict() for k, g in aggregates.items()}
        else:
            report["postedit"] = {}
        report["productivity"] = productivity(timing) if timing else {}
        return report

    # -- snapshots ------------------------------------------------------------

    def state_dict(self) -> dict:
        with self._lock:
            return {
                "tasks": {
                    did: self._tasks[did].as_dict() for did in sorted(self._tasks)
                },
                "originals": [
                    dialogue_to_obj(self._originals[did])
                    for did in sorted(self._originals)
                ],
                "edited": [
                    dialogue_to_obj(self._edited[did])
                    for did in sorted(self._edited)
                ],
                "records": {
                    did: self._records[did].as_dict()
                    for did in sorted(self._records)
                },
                "timing": [e.as_dict() for e in self._timing],
            }

    def snapshot_bytes(self) -> bytes:
        text = json.dumps(
            self.state_dict(), ensure_ascii=False, indent=2, sort_keys=True
        )
        return (text + "\n").encode("utf-8")

    def snapshot(self) -> Path:
        path = self._dir / "snapshot.json"
        path.write_bytes(self.snapshot_bytes())
        return path
