"""Descriptive corpus statistics and annotator-productivity rates."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .metrics import tokenize
from .model import Dialogue, Source

#: Fixed presentation order for source groups.
SOURCE_ORDER = (Source.HUMAN.value, Source.HYBRID.value, Source.MACHINE.value)


@dataclass(frozen=True)
class GroupStats:
    """Counts and averages for one group of dialogues.

    Averages are kept at full precision; rendering rounds them. They are
    always recomputed from the raw sums, never from rounded parts.
    """

    dialogues: int
    turns: int
    tokens: int

    @property
    def turns_per_dialogue(self) -> float:
        return self.turns / self.dialogues

    @property
    def tokens_per_dialogue(self) -> float:
        return self.tokens / self.dialogues

    @property
    def tokens_per_turn(self) -> float:
        return self.tokens / self.turns

    def as_dict(self) -> dict:
        return {
            "dialogues": self.dialogues,
            "turns": self.turns,
            "tokens": self.tokens,
            "turns_per_dialogue": self.turns_per_dialogue,
            "tokens_per_dialogue": self.tokens_per_dialogue,
            "tokens_per_turn": self.tokens_per_turn,
        }


@dataclass(frozen=True)
class CorpusStats:
    groups: dict  # source label -> GroupStats, plus "Total"

    def as_dict(self, rounded: bool = False) -> dict:
        out = {}
        for key, g in self.groups.items():
            d = g.as_dict()
            if rounded:
                for avg in (
                    "turns_per_dialogue",
                    "tokens_per_dialogue",
                    "tokens_per_turn",
                ):
                    d[avg] = round(d[avg])
            out[key] = d
        return out

    def as_markdown(self) -> str:
        cols = list(self.groups.keys())
        rows = [
            ("Dialogues", "dialogues"),
            ("Turns", "turns"),
            ("Tokens", "tokens"),
            ("Turns/Dial", "turns_per_dialogue"),
            ("Tok/Dial", "tokens_per_dialogue"),
            ("Tok/Turn", "tokens_per_turn"),
        ]
        table = self.as_dict(rounded=True)
        lines = ["| |" + "|".join(cols) + "|"]
        lines.append("|---|" + "|".join("---" for _ in cols) + "|")
        for label, field in rows:
            lines.append(
                f"|{label}|" + "|".join(str(table[c][field]) for c in cols) + "|"
            )
        return "\n".join(lines)


def _count_tokens(dialogue: Dialogue) -> int:
    return sum(len(tokenize(t.text)) for t in dialogue.turns)


def corpus_stats(corpus: Sequence[Dialogue]) -> CorpusStats:
    """Dialogue/turn/token counts and averages, grouped by source + Total.

    Token counts use the shared tokenizer. Raises ValueError on an empty
    corpus or a group without turns (averages would be undefined).
    """
    if not corpus:
        raise ValueError("empty corpus")
    groups: dict[str, GroupStats] = {}
    present = [s for s in SOURCE_ORDER if any(d.source.value == s for d in corpus)]
    for key in present + ["Total"]:
        members = [d for d in corpus if key == "Total" or d.source.value == key]
        dialogues = len(members)
        turns = sum(len(d.turns) for d in members)
        tokens = sum(_count_tokens(d) for d in members)
        if turns == 0:
            raise ValueError(f"group {key!r} has no turns")
        groups[key] = GroupStats(dialogues=dialogues, turns=turns, tokens=tokens)
    return CorpusStats(groups=groups)


@dataclass(frozen=True)
class TimingEntry:
    """Active working time spent producing dialogues in one sitting.

    ``dialogues`` defaults to 1 (one entry per dialogue is the norm) but an
    entry may cover a batch, e.g. a from-scratch writing session.
    """

    mode: str  # "scratch" | "postedit"
    seconds: float
    dialogues: int = 1
    turns: int = 0
    tokens: int = 0
    dialogue_id: Optional[str] = None

    def __post_init__(self) -> None:
        if self.mode not in ("scratch", "postedit"):
            raise ValueError(f"unknown timing mode {self.mode!r}")
        if self.seconds <= 0:
            raise ValueError("seconds must be > 0")
        if self.dialogues < 0 or self.turns < 0 or self.tokens < 0:
            raise ValueError("counts must be >= 0")

    def as_dict(self) -> dict:
        out = {
            "mode": self.mode,
            "seconds": self.seconds,
            "dialogues": self.dialogues,
            "turns": self.turns,
            "tokens": self.tokens,
        }
        if self.dialogue_id is not None:
            out["dialogue_id"] = self.dialogue_id
        return out

    @staticmethod
    def from_dict(obj: dict) -> "TimingEntry":
        return TimingEntry(
            mode=obj["mode"],
            seconds=obj["seconds"],
            dialogues=obj.get("dialogues", 1),
            turns=obj.get("turns", 0),
            tokens=obj.get("tokens", 0),
            dialogue_id=obj.get("dialogue_id"),
        )


def productivity(entries: Iterable[TimingEntry]) -> dict:
    """Per-mode hourly rates: 3600 * total count / total seconds.

    Modes with no entries are simply absent from the result.
    """
    by_mode: dict[str, list[TimingEntry]] = {}
    for e in entries:
        by_mode.setdefault(e.mode, []).append(e)
    rates: dict[str, dict] = {}
    for mode, group in by_mode.items():
        seconds = sum(e.seconds for e in group)
        if seconds <= 0:
            raise ValueError(f"mode {mode!r} has zero total seconds")
        rates[mode] = {
            "dialogues_per_hour": 3600.0 * sum(e.dialogues for e in group) / seconds,
            "turns_per_hour": 3600.0 * sum(e.turns for e in group) / seconds,
            "tokens_per_hour": 3600.0 * sum(e.tokens for e in group) / seconds,
        }
    return rates


def read_timing_log(path) -> list[TimingEntry]:
    entries = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                entries.append(TimingEntry.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ValueError(f"timing log line {line_no}: {exc}") from None
    return entries


def write_timing_log(path, entries: Iterable[TimingEntry]) -> None:
    Path(path).write_text(
        "".join(
            json.dumps(e.as_dict(), ensure_ascii=False, sort_keys=True) + "\n"
            for e in entries
        ),
        encoding="utf-8",
    )
