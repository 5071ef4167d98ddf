"""Core data model for two-speaker dialogue corpora.

Dialogues are immutable values: a dialogue is a tuple of turns plus bookkeeping
(id, authoring source, provenance). A turn's index is its position in that
tuple, so "index equals position" holds by construction and is never stored.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional


class Source(str, Enum):
    """How a dialogue was authored, before any human editing pass."""

    HUMAN = "H"
    HYBRID = "H+LLM"
    MACHINE = "LLM"


class EditStatus(str, Enum):
    """Post-editing outcome of a turn or of a whole dialogue."""

    UNCHANGED = "unchanged"
    EDITED = "edited"
    DELETED = "deleted"


@dataclass(frozen=True)
class Turn:
    """One utterance. Speaker label and text must be non-blank."""

    speaker: str
    text: str

    def __post_init__(self) -> None:
        if not self.speaker or not self.speaker.strip():
            raise ValueError("turn speaker is empty")
        if not self.text or not self.text.strip():
            raise ValueError("turn text is empty")


@dataclass(frozen=True)
class Dialogue:
    """A dialogue record as stored in corpus files.

    ``deleted`` marks an original whose edited counterpart was discarded by a
    reviewer; such records stay in original-side pools so that samples drawn
    from them represent the unfiltered authoring output.
    """

    id: str
    source: Source
    turns: tuple[Turn, ...]
    provenance: dict = field(default_factory=dict)
    deleted: bool = False

    def __post_init__(self) -> None:
        if not self.id or not self.id.strip():
            raise ValueError("dialogue id is empty")
        object.__setattr__(self, "source", Source(self.source))
        object.__setattr__(self, "turns", tuple(self.turns))

    @property
    def speakers(self) -> tuple[str, ...]:
        """Distinct speaker labels in order of first appearance."""
        seen: list[str] = []
        for turn in self.turns:
            if turn.speaker not in seen:
                seen.append(turn.speaker)
        return tuple(seen)

    def replace_turns(self, turns: Iterable[Turn]) -> "Dialogue":
        return Dialogue(
            id=self.id,
            source=self.source,
            turns=tuple(turns),
            provenance=dict(self.provenance),
            deleted=self.deleted,
        )


@dataclass(frozen=True)
class Violation:
    """A single failed validation rule; ``turn_index`` is None for
    dialogue-level rules."""

    rule: str
    turn_index: Optional[int]
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def rules(self) -> tuple[str, ...]:
        """Distinct violated rule names, first occurrence order."""
        seen: list[str] = []
        for v in self.violations:
            if v.rule not in seen:
                seen.append(v.rule)
        return tuple(seen)


#: Rule identifiers, shared with the curation service and its clients.
RULE_TWO_SPEAKERS = "two-speakers"
RULE_ALTERNATION = "alternation"
RULE_MIN_TURNS = "min-turns"


def validate_dialogue(dialogue: Dialogue, min_turns: int = 3) -> ValidationReport:
    """Check the structural rules a publishable dialogue must satisfy.

    Rules: exactly two distinct speakers, strict speaker alternation, and at
    least ``min_turns`` turns. Every failed rule is reported; alternation is
    reported once per offending turn index.

    Args:
      dialogue: the dialogue to check; must be structurally well formed
        (construction already guarantees non-blank speakers and texts).
      min_turns: minimum number of turns, 3 unless a caller relaxes it.

    Returns:
      A ValidationReport whose ``ok`` is True iff no rule failed.
    """
    violations: list[Violation] = []
    speakers = dialogue.speakers
    if len(speakers) != 2:
        violations.append(
            Violation(
                rule=RULE_TWO_SPEAKERS,
                turn_index=None,
                message=f"expected exactly 2 speakers, found {len(speakers)}",
            )
        )
    for i in range(1, len(dialogue.turns)):
        if dialogue.turns[i].speaker == dialogue.turns[i - 1].speaker:
            violations.append(
                Violation(
                    rule=RULE_ALTERNATION,
                    turn_index=i,
                    message=f"turn {i} repeats speaker {dialogue.turns[i].speaker!r}",
                )
            )
    if len(dialogue.turns) < min_turns:
        violations.append(
            Violation(
                rule=RULE_MIN_TURNS,
                turn_index=None,
                message=f"dialogue has {len(dialogue.turns)} turns, needs {min_turns}",
            )
        )
    return ValidationReport(violations=tuple(violations))


def merge_consecutive_turns(dialogue: Dialogue) -> Dialogue:
    """Fuse maximal runs of same-speaker turns into single turns.

    Texts inside a run are joined with a single space. Identity on dialogues
    that already alternate, hence idempotent.
    """
    merged: list[Turn] = []
    for turn in dialogue.turns:
        if merged and merged[-1].speaker == turn.speaker:
            merged[-1] = Turn(merged[-1].speaker, merged[-1].text + " " + turn.text)
        else:
            merged.append(turn)
    if len(merged) == len(dialogue.turns):
        return dialogue
    return dialogue.replace_turns(merged)


@dataclass(frozen=True)
class MetricConfig:
    """Shared knobs for the text metrics and evaluation helpers.

    Defaults match the measurement protocol used across the toolkit: 1-4-gram
    repetition over 1000-token windows, 4-gram sentence BLEU with a 0.9
    repetition cutoff, rank accuracies at 1/5/10, and 20%/30% tail truncation.
    """

    rr_ngram_min: int = 1
    rr_ngram_max: int = 4
    rr_window: int = 1000
    bleu_max_order: int = 4
    derail_threshold: float = 0.9
    acc_n: tuple[int, ...] = (1, 5, 10)
    truncation_fractions: tuple[float, ...] = (0.2, 0.3)
    min_window: int = 3
    max_eval_turns: int = 20

    def __post_init__(self) -> None:
        if not (1 <= self.rr_ngram_min <= self.rr_ngram_max):
            raise ValueError("need 1 <= rr_ngram_min <= rr_ngram_max")
        if self.rr_window < self.rr_ngram_max:
            raise ValueError("rr_window shorter than the longest n-gram")
        if self.bleu_max_order < 1:
            raise ValueError("bleu_max_order must be >= 1")
        if not (0.0 < self.derail_threshold <= 1.0):
            raise ValueError("derail_threshold must be in (0, 1]")
        if any(n < 1 for n in self.acc_n) or list(self.acc_n) != sorted(set(self.acc_n)):
            raise ValueError("acc_n must be strictly increasing positive ints")
        if any(not (0.0 < f < 1.0) for f in self.truncation_fractions):
            raise ValueError("truncation fractions must be in (0, 1)")
        if self.min_window < 1:
            raise ValueError("min_window must be >= 1")
        if self.max_eval_turns < 1:
            raise ValueError("max_eval_turns must be >= 1")
