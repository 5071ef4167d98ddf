import math
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dialkit import (
    BigramScorer,
    Dialogue,
    LookupScorer,
    SubprocessScorer,
    Turn,
    UniformScorer,
    accuracy_at_n,
    conditional_turn_perplexity,
    eval_suite,
    score_dialogue,
)
from conftest import make_corpus, make_dialogue


def dlg(texts, id="d"):
    return Dialogue(
        id, "LLM", tuple(Turn(("S1", "S2")[i % 2], t) for i, t in enumerate(texts))
    )


VOCAB10 = tuple(f"w{i}" for i in range(10))


def uniform_corpus(rng, count):
    """Dialogues whose every token is in VOCAB10."""
    out = []
    for k in range(count):
        texts = [
            " ".join(rng.choices(VOCAB10, k=rng.randint(1, 6)))
            for _ in range(rng.randint(3, 8))
        ]
        out.append(dlg(texts, id=f"u{k}"))
    return out


class TestUniformScorer:
    def test_distribution(self):
        s = UniformScorer(VOCAB10)
        dist = s.next_distribution(["w0"])
        assert dist.shape == (10,)
        assert np.allclose(dist, 0.1)

    def test_empty_vocabulary_rejected(self):
        with pytest.raises(ValueError):
            UniformScorer(())

    def test_ppl_equals_vocab_size(self, rng):
        s = UniformScorer(VOCAB10)
        for d in uniform_corpus(rng, 10):
            _, mean = conditional_turn_perplexity(d, s)
            assert mean == pytest.approx(10.0, abs=1e-9)

    def test_rank_accuracy_follows_vocabulary_order(self):
        # equal probabilities everywhere: rank of token w_i is i + 1
        vocab = tuple(f"w{i:02d}" for i in range(100))
        s = UniformScorer(vocab)
        d = dlg(["w00", "w00 w04 w09 w49 w50"])
        acc = accuracy_at_n(d, s, acc_n=(1, 5, 10, 50))
        assert acc == {1: pytest.approx(1 / 5), 5: pytest.approx(2 / 5),
                       10: pytest.approx(3 / 5), 50: pytest.approx(4 / 5)}


class TestLookupScorer:
    def test_certain_gold_means_ppl_one(self):
        s = LookupScorer(
            ("a", "b", "c"),
            {("a",): {"b": 1.0}, ("a", "b"): {"c": 1.0}},
        )
        per_turn, mean = conditional_turn_perplexity(dlg(["a", "b c"]), s)
        assert per_turn == (1.0,)
        assert mean == 1.0

    def test_two_token_turn_worked_example(self):
        # exp(-(ln 0.5 + ln 0.125) / 2) = sqrt(16) = 4
        s = LookupScorer(
            ("a", "b", "c", "d"),
            {("a",): {"b": 0.5}, ("a", "b"): {"c": 0.125}},
        )
        per_turn, mean = conditional_turn_perplexity(dlg(["a", "b c"]), s)
        assert per_turn[0] == pytest.approx(4.0, abs=1e-12)
        assert mean == pytest.approx(4.0, abs=1e-12)

    def test_leftover_mass_spread_uniformly(self):
        s = LookupScorer(("a", "b", "c", "d"), {("a",): {"b": 0.4}})
        dist = s.next_distribution(("a",))
        assert dist[1] == pytest.approx(0.4)
        assert dist[0] == dist[2] == dist[3] == pytest.approx(0.2)
        assert dist.sum() == pytest.approx(1.0)

    def test_unknown_context_falls_back_to_uniform(self):
        s = LookupScorer(("a", "b"), {})
        assert np.allclose(s.next_distribution(("zzz",)), 0.5)

    def test_rejects_bad_specs(self):
        with pytest.raises(ValueError):
            LookupScorer(("a", "b"), {("a",): {"a": 0.7, "b": 0.7}})
        with pytest.raises(ValueError):
            LookupScorer(("a", "b"), {("a",): {"ghost": 0.5}})
        with pytest.raises(ValueError):
            LookupScorer(("a", "a"), {})


class TestRanking:
    def test_rank_matches_stable_sort_oracle(self, rng):
        import oracles

        tokens = tuple(f"t{i}" for i in range(8))
        vocab = ("ctx",) + tokens
        for trial in range(60):
            weights = [rng.randint(1, 10) for _ in tokens]
            total = sum(weights)
            spec = {tok: w / total for tok, w in zip(tokens, weights)}
            s = LookupScorer(vocab, {("ctx",): spec})
            gold = rng.choice(tokens)
            scores = score_dialogue(dlg(["ctx", gold]), s, acc_n=tuple(range(1, 10)))
            acc = scores.per_turn_acc[0]
            got_rank = min(n for n in acc if acc[n] == 1.0)
            dist = s.next_distribution(("ctx",))
            want = oracles.gold_rank(list(dist), vocab.index(gold))
            assert got_rank == want

    def test_accuracy_monotone_in_n(self, rng):
        corpus = make_corpus(rng, 8)
        scorer = BigramScorer.from_corpus(corpus)
        for d in corpus:
            acc = accuracy_at_n(d, scorer, acc_n=(1, 5, 10))
            assert acc[1] <= acc[5] <= acc[10]


class TestScoreDialogue:
    def test_too_short_dialogue_errors(self, rng):
        with pytest.raises(ValueError, match="tiny"):
            score_dialogue(make_dialogue(rng, "tiny", turns=1), UniformScorer(VOCAB10))

    def test_oov_error_names_the_token(self):
        s = UniformScorer(("a", "b"))
        with pytest.raises(ValueError, match="'zzz'"):
            score_dialogue(dlg(["a", "zzz"]), s)

    def test_unk_mapping_rescues_oov(self):
        s = LookupScorer(("a", "b", "<unk>"), {("a",): {"<unk>": 0.5}})
        scores = score_dialogue(dlg(["a", "zzz"]), s, unk_token="<unk>")
        assert scores.per_turn_ppl[0] == pytest.approx(2.0)

    def test_unk_must_be_in_vocabulary(self):
        s = UniformScorer(("a", "b"))
        with pytest.raises(ValueError, match="<unk>"):
            score_dialogue(dlg(["a", "zzz"]), s, unk_token="<unk>")

    def test_turn_zero_is_context_only(self):
        # nothing is scored for turn 0, so its probabilities never matter
        s = LookupScorer(("a", "b"), {("a",): {"b": 1.0}})
        scores = score_dialogue(dlg(["a", "b"]), s)
        assert len(scores.per_turn_ppl) == 1
        assert scores.token_count == 1

    def test_history_spans_turn_boundaries(self):
        table = {
            ("a",): {"b": 0.5},
            ("a", "b"): {"a": 0.25},
        }
        s = LookupScorer(("a", "b"), table)
        scores = score_dialogue(dlg(["a", "b", "a"]), s)
        # second scored turn conditions on [a, b], not just [b]
        assert scores.per_turn_ppl[1] == pytest.approx(4.0)


class TestBigramScorer:
    def test_fit_counts(self):
        s = BigramScorer.fit([["a", "b", "a"]])
        assert s.vocabulary() == ("a", "b")
        assert np.allclose(s.next_distribution([]), [0.6, 0.4])
        assert np.allclose(s.next_distribution(["a"]), [1 / 3, 2 / 3])
        assert np.allclose(s.next_distribution(["b"]), [2 / 3, 1 / 3])

    def test_only_last_context_token_matters(self):
        s = BigramScorer.fit([["a", "b", "a", "c"]])
        long = s.next_distribution(["c", "b", "a"])
        short = s.next_distribution(["a"])
        assert np.allclose(long, short)

    @given(st.lists(st.sampled_from("a b c d".split()), min_size=2, max_size=30))
    @settings(max_examples=100)
    def test_distributions_sum_to_one(self, seq):
        s = BigramScorer.fit([seq])
        for context in ([], [seq[0]], ["a"], ["zzz"]):
            dist = s.next_distribution(context)
            assert dist.sum() == pytest.approx(1.0, abs=1e-9)
            assert (dist > 0).all()

    def test_from_corpus_uses_whitespace_tokens(self, rng):
        corpus = make_corpus(rng, 5)
        s = BigramScorer.from_corpus(corpus)
        seen = {tok for d in corpus for t in d.turns for tok in t.text.split()}
        assert set(s.vocabulary()) == seen

    def test_rejects_bad_alpha(self):
        with pytest.raises(ValueError):
            BigramScorer.fit([["a", "b"]], alpha=0.0)


SCORER_CHILD = """\
import json, math, sys
for line in sys.stdin:
    ctx = json.loads(line)["context"]
    if ctx and ctx[-1] == "a":
        reply = {"logprobs": {"b": math.log(0.5)}}
    else:
        reply = {"top": [["a", 0.25]]}
    sys.stdout.write(json.dumps(reply) + "\\n")
    sys.stdout.flush()
"""


class TestSubprocessScorer:
    @pytest.fixture
    def child(self, tmp_path):
        script = tmp_path / "scorer_child.py"
        script.write_text(SCORER_CHILD, encoding="utf-8")
        return [sys.executable, str(script)]

    def test_logprobs_reply(self, child):
        with SubprocessScorer(child, ("a", "b", "c")) as s:
            dist = s.next_distribution(["a"])
        assert dist[1] == pytest.approx(0.5)
        assert dist[0] == dist[2] == pytest.approx(0.25)

    def test_top_reply(self, child):
        with SubprocessScorer(child, ("a", "b", "c")) as s:
            dist = s.next_distribution([])
        assert dist[0] == pytest.approx(0.25)
        assert dist[1] == dist[2] == pytest.approx(0.375)

    def test_drives_a_full_evaluation(self, child):
        with SubprocessScorer(child, ("a", "b", "c")) as s:
            per_turn, mean = conditional_turn_perplexity(dlg(["a", "b"]), s)
        assert mean == pytest.approx(2.0)

    def test_requires_vocabulary(self, child):
        with pytest.raises(ValueError):
            SubprocessScorer(child, ())

    def test_close_is_idempotent(self, child):
        s = SubprocessScorer(child, ("a", "b"))
        s.close()
        s.close()


class TestEvalSuite:
    def test_uniform_cppl_is_vocab_size(self, rng):
        corpus = uniform_corpus(rng, 12)
        report = eval_suite(corpus, UniformScorer(VOCAB10))
        assert report.cppl == pytest.approx(10.0, abs=1e-9)
        assert report.dialogues == 12
        assert report.skipped_dialogues == 0

    def test_truncation_leaves_uniform_cppl_unchanged(self, rng):
        corpus = uniform_corpus(rng, 10)
        report = eval_suite(corpus, UniformScorer(VOCAB10))
        assert set(report.truncation_variants) == {0.2, 0.3}
        for variant in report.truncation_variants.values():
            assert variant.cppl == pytest.approx(10.0, abs=1e-9)
            assert variant.turns <= report.turns

    def test_truncation_drops_scored_turns(self, rng):
        corpus = [dlg([f"w{i}" for i in range(10)], id="ten")]
        report = eval_suite(corpus, UniformScorer(VOCAB10))
        assert report.turns == 9
        assert report.truncation_variants[0.2].turns == 7
        assert report.truncation_variants[0.3].turns == 6

    def test_macro_vs_micro(self):
        table = {
            ("a",): {"b": 0.5},
            ("a", "b"): {"b": 0.25},
        }
        s = LookupScorer(("a", "b"), table)
        corpus = [dlg(["a", "b"], id="one"), dlg(["a", "b b"], id="two")]
        macro = eval_suite(corpus, s)
        micro = eval_suite(corpus, s, micro=True)
        ppl1 = 2.0
        ppl2 = math.exp(-(math.log(0.5) + math.log(0.25)) / 2)
        assert macro.cppl == pytest.approx((ppl1 + ppl2) / 2)
        want_micro = math.exp(-(math.log(0.5) * 2 + math.log(0.25)) / 3)
        assert micro.cppl == pytest.approx(want_micro)

    def test_short_dialogues_skipped_and_counted(self, rng):
        corpus = uniform_corpus(rng, 4) + [dlg(["w0"], id="tiny")]
        report = eval_suite(corpus, UniformScorer(VOCAB10))
        assert report.skipped_dialogues == 1
        assert report.dialogues == 4

    def test_empty_corpus_errors(self):
        with pytest.raises(ValueError):
            eval_suite([], UniformScorer(VOCAB10))

    def test_as_dict_stringifies_keys(self, rng):
        corpus = uniform_corpus(rng, 3)
        table = eval_suite(corpus, UniformScorer(VOCAB10)).as_dict()
        assert set(table["acc_at"]) == {"1", "5", "10"}
        assert set(table["truncation_variants"]) == {"0.2", "0.3"}
