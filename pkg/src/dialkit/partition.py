"""Deterministic dataset splitting and original-side matched sampling."""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .corpus import write_corpus
from .model import Dialogue, EditStatus
from .postedit import PostEditRecord
from .stats import SOURCE_ORDER

SPLIT_NAMES = ("train", "validation", "test")


def largest_remainder_counts(total: int, ratios: Sequence[float]) -> list[int]:
    """Integer quotas for ``total`` items under ``ratios``.

    Floors the exact quotas, then hands the leftover items to the largest
    fractional parts; ties go to the earlier ratio. Sum equals ``total`` and
    each count is within 1 of its exact quota.
    """
    exact = [r * total for r in ratios]
    counts = [int(q) for q in exact]
    leftover = total - sum(counts)
    order = sorted(
        range(len(ratios)), key=lambda i: (-(exact[i] - counts[i]), i)
    )
    for i in order[:leftover]:
        counts[i] += 1
    return counts


@dataclass(frozen=True)
class CorpusPartition:
    """Train/validation/test assignment, stratified by source.

    ``splits`` keeps ids in their seeded shuffled order (strata concatenated
    in fixed source order), which is also the file order on export: training
    runs that must share a data order can rely on it.
    """

    splits: dict  # split name -> tuple of ids
    stratum: dict  # id -> source label
    seed: int
    ratios: tuple[float, ...]

    def assignment(self) -> dict:
        out = {}
        for name, ids in self.splits.items():
            for i in ids:
                out[i] = name
        return out


def stratified_split(
    corpus: Sequence[Dialogue],
    ratios: Sequence[float] = (0.8, 0.1, 0.1),
    seed: int = 13,
) -> CorpusPartition:
    """Split a corpus 3 ways, stratified by source.

    Within each source the ids are shuffled by a generator seeded with
    ``seed`` and cut at largest-remainder quota boundaries, so the same seed
    always reproduces the same partition. Raises ValueError when ratios do
    not sum to 1, on duplicate ids, or when any stratum has fewer than 3
    dialogues (it could not populate all three splits).
    """
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != len(SPLIT_NAMES):
        raise ValueError(f"expected {len(SPLIT_NAMES)} ratios")
    if any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError("ratios must be non-negative and sum to 1")
    ids_seen: set[str] = set()
    strata: dict[str, list[str]] = {}
    for d in corpus:
        if d.id in ids_seen:
            raise ValueError(f"duplicate id {d.id!r}")
        ids_seen.add(d.id)
        strata.setdefault(d.source.value, []).append(d.id)
    if not strata:
        raise ValueError("empty corpus")
    for label, members in strata.items():
        if len(members) < 3:
            raise ValueError(
                f"stratum {label!r} has {len(members)} dialogues, needs >= 3"
            )
    rng = random.Random(seed)
    splits: dict[str, list[str]] = {name: [] for name in SPLIT_NAMES}
    stratum_of: dict[str, str] = {}
    for label in SOURCE_ORDER:
        if label not in strata:
            continue
        members = sorted(strata[label])
        rng.shuffle(members)
        counts = largest_remainder_counts(len(members), ratios)
        cursor = 0
        for name, count in zip(SPLIT_NAMES, counts):
            splits[name].extend(members[cursor : cursor + count])
            cursor += count
        for i in members:
            stratum_of[i] = label
    return CorpusPartition(
        splits={name: tuple(ids) for name, ids in splits.items()},
        stratum=stratum_of,
        seed=seed,
        ratios=ratios,
    )


def write_splits(
    partition: CorpusPartition,
    corpus: Sequence[Dialogue],
    out_dir,
) -> dict:
    """Write one corpus file per split plus a manifest.

    The manifest records seed, ratios, per-split per-stratum counts and
    sha256 checksums of the written files; it is byte-identical across runs
    with the same seed and corpus.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    by_id = {d.id: d for d in corpus}
    manifest = {
        "seed": partition.seed,
        "ratios": list(partition.ratios),
        "counts": {},
        "checksums": {},
    }
    for name in SPLIT_NAMES:
        ids = partition.splits[name]
        filename = f"{name}.jsonl"
        write_corpus(out_dir / filename, [by_id[i] for i in ids])
        digest = hashlib.sha256((out_dir / filename).read_bytes()).hexdigest()
        counts: dict[str, int] = {"total": len(ids)}
        for i in ids:
            label = partition.stratum[i]
            counts[label] = counts.get(label, 0) + 1
        manifest["counts"][name] = counts
        manifest["checksums"][filename] = digest
    manifest_text = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    (out_dir / "manifest.json").write_text(manifest_text, encoding="utf-8")
    return manifest


@dataclass(frozen=True)
class MatchedSample:
    """Original-side sample mirroring a post-edited partition.

    Same size and stratum mix as the partition, but composed the way the raw
    original pool is: deleted originals appear at their per-stratum pool
    share, displacing that many counterparts.
    """

    selected_ids: tuple[str, ...]
    matched_ids: tuple[str, ...]
    deleted_ids: tuple[str, ...]
    seed: int

    @property
    def matched_fraction(self) -> float:
        return len(self.matched_ids) / len(self.selected_ids)

    @property
    def deleted_fraction(self) -> float:
        return len(self.deleted_ids) / len(self.selected_ids)


def matched_original_sample(
    pe_partition_ids: Sequence[str],
    orig_pool: Sequence[Dialogue],
    records: Sequence[PostEditRecord],
    seed: int = 13,
) -> MatchedSample:
    """Sample originals to pair with one post-edited split.

    Per stratum: the quota is the split's stratum size; round(quota * deleted
    share of the original pool in that stratum) slots go to seeded-sampled
    deleted originals, the rest to a seeded subsample of the split's own
    counterparts. With no deleted originals in the pool this selects exactly
    the counterparts (matched fraction 1.0). Raises ValueError when the pool
    lacks enough deleted originals for a stratum, reporting the shortfall.
    """
    if not pe_partition_ids:
        raise ValueError("empty post-edited partition")
    by_pe_id: dict[str, PostEditRecord] = {}
    deleted_by_stratum: dict[str, list[str]] = {}
    for r in records:
        if r.postedited_id is not None:
            by_pe_id[r.postedited_id] = r
        elif r.dialogue_status is EditStatus.DELETED:
            deleted_by_stratum.setdefault(r.source, []).append(r.original_id)
    pool_ids = {d.id for d in orig_pool}
    pool_by_stratum: dict[str, int] = {}
    for d in orig_pool:
        pool_by_stratum[d.source.value] = pool_by_stratum.get(d.source.value, 0) + 1
    counterparts: dict[str, list[str]] = {}
    for pe_id in pe_partition_ids:
        record = by_pe_id.get(pe_id)
        if record is None:
            raise ValueError(f"no post-edit record for partition id {pe_id!r}")
        if record.original_id not in pool_ids:
            raise ValueError(
                f"original {record.original_id!r} missing from the pool"
            )
        counterparts.setdefault(record.source, []).append(record.original_id)
    rng = random.Random(seed)
    matched: list[str] = []
    deleted: list[str] = []
    for label in SOURCE_ORDER:
        if label not in counterparts:
            continue
        quota = len(counterparts[label])
        pool_total = pool_by_stratum.get(label, 0)
        deleted_pool = sorted(
            i for i in deleted_by_stratum.get(label, ()) if i in pool_ids
        )
        share = len(deleted_pool) / pool_total if pool_total else 0.0
        take_deleted = round(quota * share)
        if take_deleted > len(deleted_pool):
            raise ValueError(
                f"stratum {label!r}: need {take_deleted} deleted originals, "
                f"pool has {len(deleted_pool)} "
                f"(short by {take_deleted - len(deleted_pool)})"
            )
        take_matched = quota - take_deleted
        matched.extend(rng.sample(sorted(counterparts[label]), take_matched))
        deleted.extend(rng.sample(deleted_pool, take_deleted))
    return MatchedSample(
        selected_ids=tuple(matched + deleted),
        matched_ids=tuple(matched),
        deleted_ids=tuple(deleted),
        seed=seed,
    )
