"""Original-vs-post-edited dialogue comparison.

Turns are aligned with a monotone edit script over the turn sequences, with
word-level edit distance as the pair cost and the gapped turn's token count
as the gap cost. Aligned-but-different turns are "edited" and get an HTER
value; gaps classify as deleted (original side) or inserted (edited side).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .metrics import tokenize
from .model import Dialogue, EditStatus, Turn


def _as_tokens(value: Union[str, Turn, Sequence[str]]) -> list[str]:
    if isinstance(value, Turn):
        return tokenize(value.text)
    if isinstance(value, str):
        return tokenize(value)
    return list(value)


@dataclass(frozen=True)
class EditBreakdown:
    substitutions: int
    insertions: int
    deletions: int

    @property
    def total(self) -> int:
        return self.substitutions + self.insertions + self.deletions


def word_edit_distance(
    a: Union[str, Turn, Sequence[str]], b: Union[str, Turn, Sequence[str]]
) -> EditBreakdown:
    """Minimal unit-cost edit script turning token sequence a into b.

    Operations are substitution, insertion and deletion only (no block
    shifts). The total is unique; when several scripts are co-minimal the
    breakdown prefers substitutions, then deletions, then insertions.
    Strings are tokenized with the shared tokenizer first.
    """
    src = _as_tokens(a)
    dst = _as_tokens(b)
    n, m = len(src), len(dst)
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dist[i][0] = i
    for j in range(1, m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        row = dist[i]
        prev = dist[i - 1]
        for j in range(1, m + 1):
            sub = prev[j - 1] + (src[i - 1] != dst[j - 1])
            row[j] = min(sub, prev[j] + 1, row[j - 1] + 1)
    subs = ins = dels = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dist[i][j] == dist[i - 1][j - 1] + (
            src[i - 1] != dst[j - 1]
        ):
            subs += src[i - 1] != dst[j - 1]
            i, j = i - 1, j - 1
        elif i > 0 and dist[i][j] == dist[i - 1][j] + 1:
            dels += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return EditBreakdown(substitutions=subs, insertions=ins, deletions=dels)


def hter(
    original: Union[str, Turn, Sequence[str]],
    postedited: Union[str, Turn, Sequence[str]],
) -> float:
    """Word edits needed to turn ``original`` into ``postedited``, divided by
    the post-edited (reference) token count. Both sides must be non-empty."""
    src = _as_tokens(original)
    ref = _as_tokens(postedited)
    if not ref:
        raise ValueError("hter reference is empty")
    if not src:
        raise ValueError("hter original is empty")
    return word_edit_distance(src, ref).total / len(ref)


@dataclass(frozen=True)
class TurnAlignment:
    """Monotone alignment between original and post-edited turn indices.

    A pair is (i, j) for aligned turns, (i, None) for a deleted original
    turn, (None, j) for an inserted turn. Indices strictly increase on each
    side and every turn appears exactly once.
    """

    pairs: tuple[tuple[Optional[int], Optional[int]], ...]
    cost: int


def align_turns(original: Dialogue, postedited: Dialogue) -> TurnAlignment:
    """Minimum-cost monotone turn alignment.

    Pair cost is the word edit distance between the two turns; gapping a turn
    costs its full token count. Among co-minimal alignments the backtrace
    prefers pairing, then deletion, then insertion.
    """
    src = [tokenize(t.text) for t in original.turns]
    dst = [tokenize(t.text) for t in postedited.turns]
    n, m = len(src), len(dst)
    pair_cost = [
        [word_edit_distance(src[i], dst[j]).total for j in range(m)]
        for i in range(n)
    ]
    dp = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dp[i][0] = dp[i - 1][0] + len(src[i - 1])
    for j in range(1, m + 1):
        dp[0][j] = dp[0][j - 1] + len(dst[j - 1])
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            dp[i][j] = min(
                dp[i - 1][j - 1] + pair_cost[i - 1][j - 1],
                dp[i - 1][j] + len(src[i - 1]),
                dp[i][j - 1] + len(dst[j - 1]),
            )
    pairs: list[tuple[Optional[int], Optional[int]]] = []
    i, j = n, m
    while i > 0 or j > 0:
        if (
            i > 0
            and j > 0
            and dp[i][j] == dp[i - 1][j - 1] + pair_cost[i - 1][j - 1]
        ):
            pairs.append((i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and dp[i][j] == dp[i - 1][j] + len(src[i - 1]):
            pairs.append((i - 1, None))
            i -= 1
        else:
            pairs.append((None, j - 1))
            j -= 1
    pairs.reverse()
    return TurnAlignment(pairs=tuple(pairs), cost=dp[n][m])


@dataclass(frozen=True)
class PostEditRecord:
    """Outcome of post-editing one dialogue.

    ``turn_statuses`` covers the ORIGINAL turns (unchanged/edited/deleted);
    turns the reviewer added are counted in ``inserted_turn_count`` only, so
    the three-way statuses always sum to the original turn count.
    ``hter_per_edited_turn`` lists HTER values of edited turns in original
    order.
    """

    original_id: str
    postedited_id: Optional[str]
    source: str
    dialogue_status: EditStatus
    turn_statuses: tuple[EditStatus, ...]
    hter_per_edited_turn: tuple[float, ...]
    deleted_turn_count: int
    inserted_turn_count: int

    def as_dict(self) -> dict:
        return {
            "original_id": self.original_id,
            "postedited_id": self.postedited_id,
            "source": self.source,
            "dialogue_status": self.dialogue_status.value,
            "turn_statuses": [s.value for s in self.turn_statuses],
            "hter_per_edited_turn": list(self.hter_per_edited_turn),
            "deleted_turn_count": self.deleted_turn_count,
            "inserted_turn_count": self.inserted_turn_count,
        }

    @staticmethod
    def from_dict(obj: dict) -> "PostEditRecord":
        return PostEditRecord(
            original_id=obj["original_id"],
            postedited_id=obj["postedited_id"],
            source=obj["source"],
            dialogue_status=EditStatus(obj["dialogue_status"]),
            turn_statuses=tuple(EditStatus(s) for s in obj["turn_statuses"]),
            hter_per_edited_turn=tuple(obj["hter_per_edited_turn"]),
            deleted_turn_count=obj["deleted_turn_count"],
            inserted_turn_count=obj["inserted_turn_count"],
        )


def align_and_classify(
    original: Dialogue, postedited: Optional[Dialogue]
) -> PostEditRecord:
    """Classify a post-editing outcome. ``postedited=None`` marks a dialogue
    the reviewer discarded: every original turn counts as deleted."""
    if postedited is None:
        return PostEditRecord(
            original_id=original.id,
            postedited_id=None,
            source=original.source.value,
            dialogue_status=EditStatus.DELETED,
            turn_statuses=tuple(EditStatus.DELETED for _ in original.turns),
            hter_per_edited_turn=(),
            deleted_turn_count=len(original.turns),
            inserted_turn_count=0,
        )
    alignment = align_turns(original, postedited)
    statuses: dict[int, EditStatus] = {}
    hters: dict[int, float] = {}
    inserted = 0
    for oi, pj in alignment.pairs:
        if oi is None:
            inserted += 1
        elif pj is None:
            statuses[oi] = EditStatus.DELETED
        else:
            distance = word_edit_distance(
                tokenize(original.turns[oi].text),
                tokenize(postedited.turns[pj].text),
            ).total
            if distance == 0:
                statuses[oi] = EditStatus.UNCHANGED
            else:
                statuses[oi] = EditStatus.EDITED
                hters[oi] = hter(
                    original.turns[oi].text, postedited.turns[pj].text
                )
    turn_statuses = tuple(statuses[i] for i in range(len(original.turns)))
    deleted = sum(1 for s in turn_statuses if s is EditStatus.DELETED)
    all_unchanged = (
        all(s is EditStatus.UNCHANGED for s in turn_statuses)
        and inserted == 0
        and deleted == 0
    )
    return PostEditRecord(
        original_id=original.id,
        postedited_id=postedited.id,
        source=original.source.value,
        dialogue_status=(
            EditStatus.UNCHANGED if all_unchanged else EditStatus.EDITED
        ),
        turn_statuses=turn_statuses,
        hter_per_edited_turn=tuple(
            hters[i] for i in sorted(hters)
        ),
        deleted_turn_count=deleted,
        inserted_turn_count=inserted,
    )


@dataclass(frozen=True)
class GroupAggregate:
    """Edit-outcome fractions for one source group (or the Total pool)."""

    dialogues: int
    turns: int
    dial_unchanged: float
    dial_deleted: float
    dial_edited: float
    turns_unchanged: float
    turns_deleted: float
    turns_edited: float
    hter_edited: Optional[float]
    inserted_turns: int

    def as_dict(self) -> dict:
        return {
            "dialogues": self.dialogues,
            "turns": self.turns,
            "dial_unchanged": self.dial_unchanged,
            "dial_deleted": self.dial_deleted,
            "dial_edited": self.dial_edited,
            "turns_unchanged": self.turns_unchanged,
            "turns_deleted": self.turns_deleted,
            "turns_edited": self.turns_edited,
            "hter_edited": self.hter_edited,
            "inserted_turns": self.inserted_turns,
        }


def aggregate_postedit_stats(
    records: Sequence[PostEditRecord],
) -> dict[str, GroupAggregate]:
    """Fractions of unchanged/deleted/edited dialogues and turns per source.

    Turn fractions denominate over ORIGINAL turns, so turns of wholly-deleted
    dialogues count as deleted; reviewer-inserted turns are reported
    separately and stay out of the three-way fractions. ``hter_edited``
    pools every edited turn in the group (None when the group has none).
    Returns one entry per source present plus "Total".
    """
    if not records:
        raise ValueError("no post-edit records to aggregate")
    group_keys: list[str] = []
    for r in records:
        if r.source not in group_keys:
            group_keys.append(r.source)
    out: dict[str, GroupAggregate] = {}
    for key in group_keys + ["Total"]:
        group = [r for r in records if key == "Total" or r.source == key]
        n_dial = len(group)
        n_turns = sum(len(r.turn_statuses) for r in group)
        if n_turns == 0:
            raise ValueError(f"group {key!r} has no turns")
        dial_counts = {status: 0 for status in EditStatus}
        turn_counts = {status: 0 for status in EditStatus}
        hter_values: list[float] = []
        inserted = 0
        for r in group:
            dial_counts[r.dialogue_status] += 1
            for s in r.turn_statuses:
                turn_counts[s] += 1
            hter_values.extend(r.hter_per_edited_turn)
            inserted += r.inserted_turn_count
        out[key] = GroupAggregate(
            dialogues=n_dial,
            turns=n_turns,
            dial_unchanged=dial_counts[EditStatus.UNCHANGED] / n_dial,
            dial_deleted=dial_counts[EditStatus.DELETED] / n_dial,
            dial_edited=dial_counts[EditStatus.EDITED] / n_dial,
            turns_unchanged=turn_counts[EditStatus.UNCHANGED] / n_turns,
            turns_deleted=turn_counts[EditStatus.DELETED] / n_turns,
            turns_edited=turn_counts[EditStatus.EDITED] / n_turns,
            hter_edited=(
                sum(hter_values) / len(hter_values) if hter_values else None
            ),
            inserted_turns=inserted,
        )
    return out


def diff_corpora(
    originals: Sequence[Dialogue], postedited: Sequence[Dialogue]
) -> list[PostEditRecord]:
    """Pair corpora by id and classify each original.

    An original whose id is absent from the post-edited corpus counts as
    deleted. Post-edited dialogues are matched by identical id, or by a
    `postedited_of` provenance key pointing at the original id.
    """
    by_original: dict[str, Dialogue] = {}
    for d in postedited:
        key = d.provenance.get("postedited_of", d.id)
        if key in by_original:
            raise ValueError(f"two post-edited dialogues claim original {key!r}")
        by_original[key] = d
    known = {d.id for d in originals}
    orphans = sorted(set(by_original) - known)
    if orphans:
        raise ValueError(
            f"post-edited dialogues without originals: {', '.join(orphans)}"
        )
    return [align_and_classify(d, by_original.get(d.id)) for d in originals]
