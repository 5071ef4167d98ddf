import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dialkit import (
    Dialogue,
    Turn,
    align_and_classify,
    largest_remainder_counts,
    matched_original_sample,
    stratified_split,
    write_splits,
)
from conftest import make_corpus, make_dialogue
import oracles


class TestLargestRemainder:
    def test_exact_division(self):
        assert largest_remainder_counts(100, (0.8, 0.1, 0.1)) == [80, 10, 10]

    def test_small_total(self):
        assert largest_remainder_counts(10, (0.8, 0.1, 0.1)) == [8, 1, 1]

    def test_odd_total(self):
        assert largest_remainder_counts(7, (0.8, 0.1, 0.1)) == oracles.largest_remainder(
            7, (0.8, 0.1, 0.1)
        )

    @given(
        st.integers(min_value=0, max_value=500),
        st.lists(st.floats(min_value=0.01, max_value=1.0), min_size=1, max_size=5),
    )
    @settings(max_examples=300)
    def test_matches_oracle_and_sums(self, total, raw):
        ratios = tuple(r / sum(raw) for r in raw)
        got = largest_remainder_counts(total, ratios)
        assert got == oracles.largest_remainder(total, ratios)
        assert sum(got) == total
        for count, r in zip(got, ratios):
            assert abs(count - r * total) < 1.0 + 1e-9


class TestStratifiedSplit:
    def test_exact_quotas_per_stratum(self, rng):
        corpus = make_corpus(rng, 120)  # 40 per source
        part = stratified_split(corpus, ratios=(0.8, 0.1, 0.1), seed=5)
        assert len(part.splits["train"]) == 96
        assert len(part.splits["validation"]) == 12
        assert len(part.splits["test"]) == 12
        for name, want in (("train", 32), ("validation", 4), ("test", 4)):
            for label in ("H", "H+LLM", "LLM"):
                got = sum(1 for i in part.splits[name] if part.stratum[i] == label)
                assert got == want

    def test_splits_partition_the_corpus(self, rng):
        corpus = make_corpus(rng, 47)
        part = stratified_split(corpus, seed=3)
        all_ids = [i for name in ("train", "validation", "test") for i in part.splits[name]]
        assert sorted(all_ids) == sorted(d.id for d in corpus)
        assert len(set(all_ids)) == len(all_ids)

    def test_same_seed_same_partition(self, rng):
        corpus = make_corpus(rng, 60)
        a = stratified_split(corpus, seed=99)
        b = stratified_split(list(reversed(corpus)), seed=99)
        assert a.splits == b.splits

    def test_different_seeds_differ(self, rng):
        corpus = make_corpus(rng, 60)
        a = stratified_split(corpus, seed=1)
        b = stratified_split(corpus, seed=2)
        assert a.splits != b.splits

    def test_rejects_bad_ratios(self, rng):
        corpus = make_corpus(rng, 12)
        with pytest.raises(ValueError):
            stratified_split(corpus, ratios=(0.5, 0.5))
        with pytest.raises(ValueError):
            stratified_split(corpus, ratios=(0.8, 0.3, 0.1))
        with pytest.raises(ValueError):
            stratified_split(corpus, ratios=(1.2, -0.1, -0.1))

    def test_rejects_duplicate_ids(self, rng):
        d = make_dialogue(rng, "same")
        corpus = [d, Dialogue("same", "H", d.turns)] + list(make_corpus(rng, 6))
        with pytest.raises(ValueError, match="same"):
            stratified_split(corpus)

    def test_rejects_tiny_stratum(self, rng):
        corpus = list(make_corpus(rng, 9, sources=("H",)))
        corpus.append(make_dialogue(rng, "only-llm", source="LLM"))
        with pytest.raises(ValueError, match="LLM"):
            stratified_split(corpus)

    def test_assignment_inverts_splits(self, rng):
        corpus = make_corpus(rng, 21)
        part = stratified_split(corpus)
        assignment = part.assignment()
        for name, ids in part.splits.items():
            for i in ids:
                assert assignment[i] == name


class TestWriteSplits:
    def test_manifest_counts_and_checksums(self, rng, tmp_path):
        corpus = make_corpus(rng, 30)
        part = stratified_split(corpus, seed=7)
        manifest = write_splits(part, corpus, tmp_path)
        assert manifest["seed"] == 7
        assert manifest["counts"]["train"]["total"] == len(part.splits["train"])
        assert set(manifest["checksums"]) == {"train.jsonl", "validation.jsonl", "test.jsonl"}
        on_disk = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
        assert on_disk == manifest

    def test_reruns_are_byte_identical(self, rng, tmp_path):
        corpus = make_corpus(rng, 30)
        part = stratified_split(corpus, seed=7)
        write_splits(part, corpus, tmp_path / "a")
        write_splits(part, corpus, tmp_path / "b")
        for name in ("train.jsonl", "validation.jsonl", "test.jsonl", "manifest.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_split_files_hold_the_assigned_dialogues(self, rng, tmp_path):
        from dialkit import read_corpus

        corpus = make_corpus(rng, 30)
        part = stratified_split(corpus, seed=7)
        write_splits(part, corpus, tmp_path)
        got = read_corpus(tmp_path / "test.jsonl")
        assert tuple(d.id for d in got) == part.splits["test"]


def _pool_with_deleted(rng, n_pe, n_deleted, source="LLM"):
    """Original pool of n_pe post-edited counterparts plus n_deleted deleted
    originals, all in one stratum, with post-edit records for both kinds."""
    originals = []
    records = []
    pe_ids = []
    for i in range(n_pe):
        orig = make_dialogue(rng, f"orig-{i}", source=source)
        pe = Dialogue(f"pe-{i}", source, orig.turns, provenance={"postedited_of": orig.id})
        originals.append(orig)
        records.append(align_and_classify(orig, pe))
        pe_ids.append(pe.id)
    for i in range(n_deleted):
        orig = make_dialogue(rng, f"del-{i}", source=source)
        originals.append(orig)
        records.append(align_and_classify(orig, None))
    return originals, records, pe_ids


class TestMatchedSample:
    def test_deleted_share_of_pool(self, rng):
        # pool: 100 kept + 20 deleted -> share 1/6; quota 100 -> 17 deleted
        originals, records, pe_ids = _pool_with_deleted(rng, 100, 20)
        sample = matched_original_sample(pe_ids, originals, records, seed=4)
        assert len(sample.selected_ids) == 100
        assert len(sample.deleted_ids) == 17
        assert len(sample.matched_ids) == 83
        assert sample.matched_fraction == pytest.approx(0.83)
        assert sample.deleted_fraction == pytest.approx(0.17)

    def test_fractions_sum_to_one(self, rng):
        originals, records, pe_ids = _pool_with_deleted(rng, 40, 10)
        sample = matched_original_sample(pe_ids, originals, records, seed=4)
        assert sample.matched_fraction + sample.deleted_fraction == pytest.approx(1.0)

    def test_no_deleted_means_all_matched(self, rng):
        originals, records, pe_ids = _pool_with_deleted(rng, 25, 0)
        sample = matched_original_sample(pe_ids, originals, records, seed=4)
        assert sample.matched_fraction == 1.0
        assert sorted(sample.matched_ids) == sorted(f"orig-{i}" for i in range(25))

    def test_matched_come_from_the_splits_own_counterparts(self, rng):
        originals, records, pe_ids = _pool_with_deleted(rng, 30, 12)
        subset = pe_ids[:10]
        sample = matched_original_sample(subset, originals, records, seed=4)
        assert set(sample.matched_ids) <= {f"orig-{i}" for i in range(10)}
        assert set(sample.deleted_ids) <= {f"del-{i}" for i in range(12)}

    def test_seed_determinism(self, rng):
        originals, records, pe_ids = _pool_with_deleted(rng, 40, 10)
        a = matched_original_sample(pe_ids, originals, records, seed=8)
        b = matched_original_sample(pe_ids, originals, records, seed=8)
        c = matched_original_sample(pe_ids, originals, records, seed=9)
        assert a == b
        assert a.selected_ids != c.selected_ids

    def test_shortfall_reported(self, rng):
        # triple-counted partition ids inflate the quota past what the
        # deleted pool can supply: round(60 * 2/22) = 5 > 2
        originals, records, pe_ids = _pool_with_deleted(rng, 20, 2)
        with pytest.raises(ValueError, match="short by"):
            matched_original_sample(pe_ids * 3, originals, records, seed=4)

    def test_unknown_partition_id_errors(self, rng):
        originals, records, _ = _pool_with_deleted(rng, 5, 0)
        with pytest.raises(ValueError, match="ghost"):
            matched_original_sample(["ghost"], originals, records)

    def test_empty_partition_errors(self, rng):
        originals, records, _ = _pool_with_deleted(rng, 5, 0)
        with pytest.raises(ValueError):
            matched_original_sample([], originals, records)
