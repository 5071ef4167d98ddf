"""Human-evaluation survey assembly and 5-point rating aggregation.

Dialogues are bundled into fixed-size surveys stratified by length, with the
constraint that an original dialogue and its post-edited twin never land in
the same survey. Ratings come back as one row per (dialogue, evaluator) and
are aggregated as micro-averages over individual ratings.
"""

from __future__ import annotations

import csv
import json
import random
import statistics
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Optional, Sequence

from scipy.stats import rankdata

from .model import Dialogue, EditStatus
from .postedit import PostEditRecord

STRATA = ("short", "medium", "long")

ROLE_ORIGINAL = "original"
ROLE_POSTEDITED = "postedited"


def length_stratum(dialogue: Dialogue) -> str:
    """Length class by turn count: short <= 10, medium 11..15, long >= 16."""
    n = len(dialogue.turns)
    if n <= 10:
        return "short"
    if n <= 15:
        return "medium"
    return "long"


class EditIntensityLabel(str, Enum):
    LOW = "low"
    HIGH = "high"


@dataclass(frozen=True)
class Survey:
    id: str
    dialogue_ids: tuple[str, ...]
    evaluator_slots: int = 3

    def __post_init__(self):
        object.__setattr__(self, "dialogue_ids", tuple(self.dialogue_ids))
        if not self.dialogue_ids:
            raise ValueError("survey has no dialogues")
        if len(set(self.dialogue_ids)) != len(self.dialogue_ids):
            raise ValueError(f"survey {self.id} repeats a dialogue")
        if self.evaluator_slots < 1:
            raise ValueError("evaluator_slots must be >= 1")


@dataclass(frozen=True)
class Rating:
    survey_id: str
    dialogue_id: str
    evaluator_id: str
    understandability: int
    machine_probability: int

    def __post_init__(self):
        for name in ("understandability", "machine_probability"):
            score = getattr(self, name)
            if isinstance(score, bool) or not isinstance(score, int):
                raise ValueError(f"{name} must be an integer in 1..5")
            if not 1 <= score <= 5:
                raise ValueError(f"{name} must be in 1..5, got {score}")


def _normalize_twins(twins) -> dict[str, str]:
    # symmetric id <-> id map, whichever direction the pair comes in
    pairs = twins.items() if isinstance(twins, Mapping) else twins
    out: dict[str, str] = {}
    for a, b in pairs:
        if a == b:
            raise ValueError(f"dialogue {a!r} is its own twin")
        out[a] = b
        out[b] = a
    return out


def _pool_with_strata(pool) -> list[tuple[str, str]]:
    if isinstance(pool, Mapping):
        items = list(pool.items())
    else:
        items = [(d.id, length_stratum(d)) for d in pool]
    seen = set()
    for did, stratum in items:
        if did in seen:
            raise ValueError(f"duplicate dialogue id {did!r} in pool")
        seen.add(did)
        if stratum not in STRATA:
            raise ValueError(f"unknown stratum {stratum!r} for {did!r}")
    return items


def build_surveys(
    pool,
    size: int = 8,
    evaluator_slots: int = 3,
    seed: int = 13,
    twins=(),
    remainder: str = "error",
) -> tuple[list[Survey], list[str]]:
    """Partition a dialogue pool into surveys of ``size``, stratified by length.

    ``pool`` is either a sequence of Dialogue or a mapping id -> stratum.
    Assignment shuffles each stratum (one seeded generator, strata in fixed
    order) and deals ids round-robin across surveys with a continuing cursor,
    so every survey's per-stratum count is within 1 of the pool proportion.
    Twin pairs landing in one survey are separated by deterministic
    same-stratum swaps. When the pool does not divide evenly, ``remainder``
    chooses: "error" rejects, "drop" sets aside leftover ids (trimmed from
    the largest strata) and returns them. Returns (surveys, leftover ids).
    """
    if size < 2:
        raise ValueError("size must be >= 2")
    if remainder not in ("error", "drop"):
        raise ValueError(f"unknown remainder policy {remainder!r}")
    items = _pool_with_strata(pool)
    twin_of = _normalize_twins(twins)
    n = len(items)
    count = n // size
    if count == 0:
        raise ValueError(f"pool of {n} cannot fill one survey of {size}")
    leftover = n - count * size
    if leftover and remainder == "error":
        raise ValueError(
            f"pool of {n} does not divide into surveys of {size}; "
            "pass remainder='drop' to set the excess aside"
        )

    rng = random.Random(seed)
    by_stratum: dict[str, list[str]] = {s: [] for s in STRATA}
    for did, stratum in items:
        by_stratum[stratum].append(did)
    for stratum in STRATA:
        ids = sorted(by_stratum[stratum])
        rng.shuffle(ids)
        by_stratum[stratum] = ids

    dropped: list[str] = []
    for _ in range(leftover):
        # peel from whichever stratum is currently largest
        stratum = max(STRATA, key=lambda s: len(by_stratum[s]))
        dropped.append(by_stratum[stratum].pop())

    surveys: list[list[str]] = [[] for _ in range(count)]
    cursor = 0
    for stratum in STRATA:
        for did in by_stratum[stratum]:
            surveys[cursor % count].append(did)
            cursor += 1

    _separate_twins(surveys, twin_of, {d: s for d, s in items})

    built = [
        Survey(
            id=f"survey-{i + 1:03d}",
            dialogue_ids=tuple(members),
            evaluator_slots=evaluator_slots,
        )
        for i, members in enumerate(surveys)
    ]
    return built, sorted(dropped)


def _separate_twins(
    surveys: list[list[str]],
    twin_of: Mapping[str, str],
    stratum_of: Mapping[str, str],
) -> None:
    """Swap colliding twins into other surveys, preserving the stratum mix."""
    if not twin_of:
        return
    member_of = {
        did: i for i, members in enumerate(surveys) for did in members
    }

    def collisions() -> list[tuple[int, str]]:
        found = []
        for did, twin in twin_of.items():
            if did < twin and member_of.get(did) == member_of.get(twin):
                if member_of.get(did) is not None:
                    found.append((member_of[did], twin))
        return sorted(found)

    pending = collisions()
    guard = 0
    while pending:
        guard += 1
        if guard > len(twin_of) * len(surveys) + 16:
            raise ValueError("twin separation did not converge")
        si, mover = pending[0]
        stratum = stratum_of[mover]
        here = set(surveys[si])
        swapped = False
        for sj, members in enumerate(surveys):
            if sj == si:
                continue
            if twin_of[mover] in members:
                continue
            for k, cand in enumerate(members):
                if stratum_of[cand] != stratum:
                    continue
                cand_twin = twin_of.get(cand)
                # the swap must not pull the candidate's own twin alongside it
                if cand_twin is not None and cand_twin in (here - {mover}):
                    continue
                pos = surveys[si].index(mover)
                surveys[si][pos] = cand
                members[k] = mover
                member_of[cand] = si
                member_of[mover] = sj
                swapped = True
                break
            if swapped:
                break
        if not swapped:
            raise ValueError(
                f"cannot separate twin pair around {mover!r}; "
                "pool has no safe same-stratum swap"
            )
        pending = collisions()


def survey_payload(survey: Survey, corpus_by_id: Mapping[str, Dialogue]) -> dict:
    """Evaluator-facing JSON body: texts inlined, source labels withheld."""
    dialogues = []
    for did in survey.dialogue_ids:
        if did not in corpus_by_id:
            raise ValueError(f"survey {survey.id} references unknown id {did!r}")
        d = corpus_by_id[did]
        dialogues.append(
            {
                "id": d.id,
                "turns": [
                    {"speaker": t.speaker, "text": t.text} for t in d.turns
                ],
            }
        )
    return {
        "id": survey.id,
        "evaluator_slots": survey.evaluator_slots,
        "dialogues": dialogues,
    }


def export_surveys(
    surveys: Sequence[Survey],
    corpus: Sequence[Dialogue],
    out_dir,
) -> list[str]:
    """Write one JSON file per survey; returns the filenames written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    by_id = {d.id: d for d in corpus}
    written = []
    for survey in surveys:
        payload = survey_payload(survey, by_id)
        name = f"{survey.id}.json"
        text = json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True)
        (out / name).write_text(text + "\n", encoding="utf-8")
        written.append(name)
    return written


_RATING_COLUMNS = ("survey_id", "dialogue_id", "evaluator_id", "q1", "q2")


def write_ratings_csv(ratings: Sequence[Rating], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_RATING_COLUMNS)
        for r in ratings:
            writer.writerow(
                (
                    r.survey_id,
                    r.dialogue_id,
                    r.evaluator_id,
                    r.understandability,
                    r.machine_probability,
                )
            )


def read_ratings_csv(path) -> list[Rating]:
    """Parse q1 (understandability) / q2 (machine probability) rating rows."""
    ratings = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(_RATING_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"ratings file lacks columns: {sorted(missing)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                ratings.append(
                    Rating(
                        survey_id=row["survey_id"],
                        dialogue_id=row["dialogue_id"],
                        evaluator_id=row["evaluator_id"],
                        understandability=int(row["q1"]),
                        machine_probability=int(row["q2"]),
                    )
                )
            except (TypeError, ValueError) as exc:
                raise ValueError(f"line {lineno}: {exc}") from exc
    return ratings


@dataclass(frozen=True)
class CellAggregate:
    count: int
    understandability: float
    machine_probability: float

    def as_dict(self) -> dict:
        return {
            "count": self.count,
            "understandability": self.understandability,
            "machine_probability": self.machine_probability,
        }


def _cell(rows: Sequence[Rating]) -> CellAggregate:
    return CellAggregate(
        count=len(rows),
        understandability=sum(r.understandability for r in rows) / len(rows),
        machine_probability=sum(r.machine_probability for r in rows) / len(rows),
    )


@dataclass(frozen=True)
class RatingsReport:
    by_role: dict
    by_cell: dict
    per_dialogue: dict
    twin_deltas: dict

    def as_dict(self) -> dict:
        cells = {role: agg.as_dict() for role, agg in self.by_role.items()}
        for (role, label), agg in self.by_cell.items():
            cells[f"{role}/{label}"] = agg.as_dict()
        return {
            "cells": cells,
            "per_dialogue": {
                did: agg.as_dict() for did, agg in self.per_dialogue.items()
            },
            "twin_deltas": dict(self.twin_deltas),
        }


def aggregate_ratings(
    ratings: Sequence[Rating],
    roles: Mapping[str, str],
    intensity: Optional[Mapping[str, object]] = None,
    twins=(),
) -> RatingsReport:
    """Micro-average ratings by dialogue role and, when given, edit intensity.

    ``roles`` maps every rated dialogue id to "original" or "postedited";
    ``intensity`` (optional) maps ids to low/high labels; ``twins`` pairs
    each original with its post-edited counterpart so the report can carry
    per-pair deltas (post-edited mean minus original mean). Cells with no
    ratings are simply absent. Micro means each individual rating counts
    once, regardless of how ratings spread over dialogues.
    """
    if not ratings:
        raise ValueError("no ratings to aggregate")
    for role in roles.values():
        if role not in (ROLE_ORIGINAL, ROLE_POSTEDITED):
            raise ValueError(f"unknown role {role!r}")
    by_role_rows: dict[str, list[Rating]] = {}
    by_cell_rows: dict[tuple[str, str], list[Rating]] = {}
    by_dialogue: dict[str, list[Rating]] = {}
    for r in ratings:
        role = roles.get(r.dialogue_id)
        if role is None:
            raise ValueError(f"no role for rated dialogue {r.dialogue_id!r}")
        by_role_rows.setdefault(role, []).append(r)
        by_dialogue.setdefault(r.dialogue_id, []).append(r)
        if intensity is not None and r.dialogue_id in intensity:
            label = intensity[r.dialogue_id]
            label = label.value if isinstance(label, EditIntensityLabel) else str(label)
            by_cell_rows.setdefault((role, label), []).append(r)

    per_dialogue = {did: _cell(rows) for did, rows in by_dialogue.items()}
    twin_of = _normalize_twins(twins)
    deltas: dict[str, dict] = {}
    for did, twin in twin_of.items():
        if roles.get(did) != ROLE_ORIGINAL:
            continue
        if did in per_dialogue and twin in per_dialogue:
            orig, pe = per_dialogue[did], per_dialogue[twin]
            deltas[did] = {
                "understandability": pe.understandability - orig.understandability,
                "machine_probability": pe.machine_probability - orig.machine_probability,
            }
    return RatingsReport(
        by_role={role: _cell(rows) for role, rows in sorted(by_role_rows.items())},
        by_cell={key: _cell(rows) for key, rows in sorted(by_cell_rows.items())},
        per_dialogue=per_dialogue,
        twin_deltas=deltas,
    )


def _rank_normalized(values: Sequence[float]) -> list[float]:
    # average-rank ties, then squashed onto [0, 1]
    n = len(values)
    if n == 1:
        return [0.5]
    ranks = rankdata(values, method="average")
    return [(r - 1.0) / (n - 1.0) for r in ranks]


def edit_intensity_split(
    records: Sequence[PostEditRecord],
) -> dict[str, EditIntensityLabel]:
    """Median split on a composite of edit effort and turn deletion.

    The composite is the mean of two rank-normalized signals per record:
    mean HTER over edited turns (0 when nothing was edited) and the fraction
    of original turns deleted. Records at or below the median composite are
    labeled low, the rest high. Both the original id and, when present, the
    post-edited id map to the pair's label.
    """
    if not records:
        raise ValueError("no records to split")
    hters = []
    deleted_fractions = []
    for rec in records:
        per_turn = rec.hter_per_edited_turn
        hters.append(sum(per_turn) / len(per_turn) if per_turn else 0.0)
        if not rec.turn_statuses:
            raise ValueError(f"record {rec.original_id!r} covers no turns")
        deleted = sum(1 for s in rec.turn_statuses if s is EditStatus.DELETED)
        deleted_fractions.append(deleted / len(rec.turn_statuses))
    norm_h = _rank_normalized(hters)
    norm_d = _rank_normalized(deleted_fractions)
    composites = [(h + d) / 2.0 for h, d in zip(norm_h, norm_d)]
    cut = statistics.median(composites)
    labels: dict[str, EditIntensityLabel] = {}
    for rec, score in zip(records, composites):
        label = EditIntensityLabel.HIGH if score > cut else EditIntensityLabel.LOW
        labels[rec.original_id] = label
        if rec.postedited_id is not None:
            labels[rec.postedited_id] = label
    return labels
