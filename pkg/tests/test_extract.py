import random

import pytest

from dialkit import (
    ExtractionConfig,
    Scene,
    dynamic_sliding_window,
    extract_corpus,
    parse_script,
)
import oracles


def scene_of(speakers, min_index=0):
    lines = tuple((s, f"battuta {i}") for i, s in enumerate(speakers))
    return Scene(lines=lines, source_file="test", index=min_index)


class TestParseScript:
    def test_blank_line_separates_scenes(self):
        parsed = parse_script("A: hi\nB: yo\n\nC: new")
        assert [len(s.lines) for s in parsed.scenes] == [2, 1]
        assert parsed.dropped_lines == 0

    def test_directions_dropped_without_breaking_scene(self):
        parsed = parse_script("(he exits)\nA: hi\nB: yo\nA: ok")
        assert len(parsed.scenes) == 1
        assert len(parsed.scenes[0].lines) == 3
        assert parsed.dropped_lines == 1

    def test_equals_rule_separates_scenes(self):
        parsed = parse_script("A: hi\nB: yo\n===\nA: later\nB: sure")
        assert len(parsed.scenes) == 2

    def test_empty_input_errors(self):
        with pytest.raises(ValueError, match="no dialogue content"):
            parse_script("")

    def test_only_directions_errors(self):
        with pytest.raises(ValueError, match="no dialogue content"):
            parse_script("(fade in)\n(fade out)")

    def test_speaker_and_text_stripped(self):
        parsed = parse_script("  MARIA :  ciao a tutti  ")
        assert parsed.scenes[0].lines[0] == ("MARIA", "ciao a tutti")


class TestDynamicSlidingWindow:
    def test_two_speaker_prefix_before_third(self):
        out = dynamic_sliding_window(scene_of("ABABC"), ExtractionConfig())
        assert len(out) == 1
        assert out[0].provenance["lines"] == [0, 4]
        assert len(out[0].turns) == 4

    def test_below_min_window_is_empty(self):
        assert dynamic_sliding_window(scene_of("AB"), ExtractionConfig()) == []

    def test_whole_scene_at_exact_minimum(self):
        out = dynamic_sliding_window(scene_of("ABA"), ExtractionConfig())
        assert len(out) == 1
        assert len(out[0].turns) == 3

    def test_single_speaker_run_never_emitted(self):
        assert dynamic_sliding_window(scene_of("AAAAAA"), ExtractionConfig()) == []

    def test_same_speaker_lines_merge_in_output(self):
        out = dynamic_sliding_window(scene_of("AABBA"), ExtractionConfig())
        assert len(out) == 1
        # five source lines, three merged turns
        assert [t.speaker for t in out[0].turns] == ["A", "B", "A"]

    def test_spans_never_overlap_and_stay_in_order(self):
        out = dynamic_sliding_window(scene_of("ABABCDCDAB"), ExtractionConfig())
        spans = [d.provenance["lines"] for d in out]
        assert spans == sorted(spans)
        for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
            assert e1 <= s2

    def test_matches_oracle_on_random_scenes(self):
        rng = random.Random(7)
        cfg = ExtractionConfig()
        for _ in range(300):
            speakers = [
                rng.choice("ABCDE") for _ in range(rng.randint(1, 30))
            ]
            got = [
                tuple(d.provenance["lines"])
                for d in dynamic_sliding_window(scene_of(speakers), cfg)
            ]
            want = oracles.greedy_two_speaker_spans(speakers, 3)
            assert got == want, speakers


class TestExtractCorpus:
    def test_ids_and_summary(self, tmp_path):
        script = tmp_path / "film.txt"
        script.write_text("(intro)\nA: uno\nB: due\nA: tre\nB: quattro\nC: basta\n")
        dialogues, summary = extract_corpus([script], ExtractionConfig())
        assert len(dialogues) == 1
        assert dialogues[0].id == "film#0#0"
        assert dialogues[0].source.value == "H"
        assert len(dialogues[0].turns) == 4
        s = summary.as_dict()
        assert s == {"files": 1, "scenes": 1, "excerpts": 1, "dropped_lines": 1}

    def test_two_files_have_distinct_prefixes(self, tmp_path):
        for name in ("one.txt", "two.txt"):
            (tmp_path / name).write_text("A: uno\nB: due\nA: tre\n")
        dialogues, _ = extract_corpus(
            [tmp_path / "one.txt", tmp_path / "two.txt"], ExtractionConfig()
        )
        assert {d.id.split("#")[0] for d in dialogues} == {"one", "two"}

    def test_unreadable_file_names_path(self, tmp_path):
        missing = tmp_path / "gone.txt"
        with pytest.raises(OSError, match="gone.txt"):
            extract_corpus([missing], ExtractionConfig())

    def test_scene_with_no_excerpt_counts(self, tmp_path):
        script = tmp_path / "solo.txt"
        script.write_text("A: monologo\nA: ancora\nA: sempre io\n")
        dialogues, summary = extract_corpus([script], ExtractionConfig())
        assert dialogues == []
        assert summary.as_dict()["excerpts"] == 0


class TestConfig:
    def test_min_window_floor(self):
        with pytest.raises(ValueError):
            ExtractionConfig(min_window=1)

    def test_min_window_two_allows_pairs(self):
        out = dynamic_sliding_window(scene_of("AB"), ExtractionConfig(min_window=2))
        assert len(out) == 1
