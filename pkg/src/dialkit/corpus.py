"""Line-delimited JSON corpus files.

One dialogue per line, UTF-8, keys written in sorted order so that
write(read(path)) is byte-stable. The only permitted top-level fields are
id, source, turns, provenance and the optional deleted flag; anything else
is treated as corruption rather than silently carried along.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Sequence, Union

from .model import Dialogue, Source, Turn

PathLike = Union[str, Path]

_REQUIRED_FIELDS = {"id", "source", "turns"}
_ALLOWED_FIELDS = _REQUIRED_FIELDS | {"provenance", "deleted"}


class CorpusFormatError(ValueError):
    """A corpus file violated the schema; the message names the line."""


def _dialogue_from_obj(obj: object, line_no: int) -> Dialogue:
    if not isinstance(obj, dict):
        raise CorpusFormatError(f"line {line_no}: expected a JSON object")
    missing = _REQUIRED_FIELDS - obj.keys()
    if missing:
        raise CorpusFormatError(
            f"line {line_no}: missing field(s) {', '.join(sorted(missing))}"
        )
    unknown = obj.keys() - _ALLOWED_FIELDS
    if unknown:
        raise CorpusFormatError(
            f"line {line_no}: unknown field(s) {', '.join(sorted(unknown))}"
        )
    if not isinstance(obj["id"], str):
        raise CorpusFormatError(f"line {line_no}: id must be a string")
    try:
        source = Source(obj["source"])
    except ValueError:
        raise CorpusFormatError(
            f"line {line_no}: unknown source {obj['source']!r}"
        ) from None
    turns_obj = obj["turns"]
    if not isinstance(turns_obj, list):
        raise CorpusFormatError(f"line {line_no}: turns must be a list")
    provenance = obj.get("provenance", {})
    if not isinstance(provenance, dict):
        raise CorpusFormatError(f"line {line_no}: provenance must be an object")
    deleted = obj.get("deleted", False)
    if not isinstance(deleted, bool):
        raise CorpusFormatError(f"line {line_no}: deleted must be a boolean")
    turns = []
    for i, t in enumerate(turns_obj):
        if not isinstance(t, dict) or t.keys() != {"speaker", "text"}:
            raise CorpusFormatError(
                f"line {line_no}: turn {i} must be an object with speaker and text"
            )
        try:
            turns.append(Turn(speaker=t["speaker"], text=t["text"]))
        except (TypeError, ValueError) as exc:
            raise CorpusFormatError(f"line {line_no}: turn {i}: {exc}") from None
    try:
        return Dialogue(
            id=obj["id"],
            source=source,
            turns=tuple(turns),
            provenance=provenance,
            deleted=deleted,
        )
    except ValueError as exc:
        raise CorpusFormatError(f"line {line_no}: {exc}") from None


def dialogue_to_obj(dialogue: Dialogue) -> dict:
    """Plain-dict form of a dialogue, matching the on-disk schema."""
    obj = {
        "id": dialogue.id,
        "source": dialogue.source.value,
        "turns": [{"speaker": t.speaker, "text": t.text} for t in dialogue.turns],
        "provenance": dialogue.provenance,
    }
    if dialogue.deleted:
        obj["deleted"] = True
    return obj


def dumps_dialogue(dialogue: Dialogue) -> str:
    """Canonical single-line serialization (sorted keys, no ASCII escapes)."""
    return json.dumps(
        dialogue_to_obj(dialogue),
        ensure_ascii=False,
        sort_keys=True,
        separators=(",", ":"),
    )


def read_corpus(path: PathLike) -> list[Dialogue]:
    """Read a corpus file.

    Raises CorpusFormatError naming the offending line for malformed JSON,
    schema violations, unknown sources and duplicate ids.
    """
    dialogues: list[Dialogue] = []
    seen_ids: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                raise CorpusFormatError(f"line {line_no}: blank line")
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(
                    f"line {line_no}: invalid JSON ({exc.msg})"
                ) from None
            dialogue = _dialogue_from_obj(obj, line_no)
            if dialogue.id in seen_ids:
                raise CorpusFormatError(
                    f"line {line_no}: duplicate id {dialogue.id!r}"
                )
            seen_ids.add(dialogue.id)
            dialogues.append(dialogue)
    return dialogues


def write_corpus(path: PathLike, dialogues: Iterable[Dialogue]) -> None:
    """Write dialogues as canonical JSONL. Duplicate ids are rejected."""
    seen_ids: set[str] = set()
    lines: list[str] = []
    for d in dialogues:
        if d.id in seen_ids:
            raise CorpusFormatError(f"duplicate id {d.id!r}")
        seen_ids.add(d.id)
        lines.append(dumps_dialogue(d))
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
