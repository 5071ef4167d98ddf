"""Conditional turn perplexity and rank accuracy against pluggable scorers.

A scorer supplies a fixed vocabulary and a next-token distribution given a
token context; it also owns tokenization of the gold text (its units need
not match the metrics tokenizer). Turn 0 of every dialogue is pure context:
nothing precedes it to condition on, so scoring starts at turn 1.
"""

from __future__ import annotations

import json
import math
import shlex
import subprocess
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .metrics import truncate_last_fraction
from .model import Dialogue, MetricConfig


class TokenScorer:
    """Interface: a probability distribution over a fixed vocabulary."""

    #: scorers that tolerate concurrent next_distribution calls may say so
    concurrent_safe = False

    def vocabulary(self) -> Sequence[str]:
        raise NotImplementedError

    def next_distribution(self, context: Sequence[str]) -> np.ndarray:
        """Probability vector aligned with vocabulary(); sums to 1 ± 1e-9."""
        raise NotImplementedError

    def encode(self, text: str) -> list[str]:
        """Companion tokenizer; plain whitespace split unless overridden."""
        return text.split()


class UniformScorer(TokenScorer):
    concurrent_safe = True

    def __init__(self, vocabulary: Sequence[str]):
        self._vocab = tuple(vocabulary)
        if not self._vocab:
            raise ValueError("empty vocabulary")
        self._dist = np.full(len(self._vocab), 1.0 / len(self._vocab))

    def vocabulary(self) -> tuple[str, ...]:
        return self._vocab

    def next_distribution(self, context: Sequence[str]) -> np.ndarray:
        return self._dist


class LookupScorer(TokenScorer):
    """Distribution table keyed by exact context tuples.

    Each table entry maps some tokens to probabilities; leftover mass is
    spread uniformly over the unmentioned vocabulary. Contexts absent from
    the table fall back to uniform. Handy for closed-form tests.
    """

    concurrent_safe = True

    def __init__(self, vocabulary: Sequence[str], table: dict):
        self._vocab = tuple(vocabulary)
        self._index = {tok: i for i, tok in enumerate(self._vocab)}
        if len(self._index) != len(self._vocab):
            raise ValueError("vocabulary has duplicates")
        self._table = {tuple(k): dict(v) for k, v in table.items()}
        for key, spec in self._table.items():
            mass = sum(spec.values())
            if mass > 1.0 + 1e-9 or any(p < 0 for p in spec.values()):
                raise ValueError(f"bad probability spec for context {key!r}")
            unknown = set(spec) - set(self._vocab)
            if unknown:
                raise ValueError(f"spec tokens outside vocabulary: {unknown}")

    def vocabulary(self) -> tuple[str, ...]:
        return self._vocab

    def next_distribution(self, context: Sequence[str]) -> np.ndarray:
        spec = self._table.get(tuple(context))
        n = len(self._vocab)
        if spec is None:
            return np.full(n, 1.0 / n)
        dist = np.zeros(n)
        for tok, p in spec.items():
            dist[self._index[tok]] = p
        rest = [i for i, tok in enumerate(self._vocab) if tok not in spec]
        leftover = 1.0 - sum(spec.values())
        if rest:
            dist[rest] = leftover / len(rest)
        elif abs(leftover) > 1e-9:
            raise ValueError("probabilities do not sum to 1")
        return dist


class BigramScorer(TokenScorer):
    """Add-alpha bigram model fitted on token sequences."""

    concurrent_safe = True

    def __init__(
        self,
        vocabulary: Sequence[str],
        bigram_counts: dict,
        unigram_counts: dict,
        alpha: float = 1.0,
    ):
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        self._vocab = tuple(sorted(set(vocabulary)))
        self._index = {tok: i for i, tok in enumerate(self._vocab)}
        self._bigrams = bigram_counts
        self._unigrams = unigram_counts
        self._total = sum(unigram_counts.values())
        self._alpha = alpha

    @classmethod
    def fit(cls, sequences: Sequence[Sequence[str]], alpha: float = 1.0):
        unigrams: dict[str, int] = {}
        bigrams: dict[str, dict[str, int]] = {}
        for seq in sequences:
            for tok in seq:
                unigrams[tok] = unigrams.get(tok, 0) + 1
            for prev, tok in zip(seq, seq[1:]):
                row = bigrams.setdefault(prev, {})
                row[tok] = row.get(tok, 0) + 1
        if not unigrams:
            raise ValueError("no tokens to fit on")
        return cls(tuple(unigrams), bigrams, unigrams, alpha)

    @classmethod
    def from_corpus(cls, corpus: Sequence[Dialogue], alpha: float = 1.0):
        sequences = [
            [tok for turn in d.turns for tok in turn.text.split()]
            for d in corpus
        ]
        return cls.fit(sequences, alpha)

    def vocabulary(self) -> tuple[str, ...]:
        return self._vocab

    def next_distribution(self, context: Sequence[str]) -> np.ndarray:
        n = len(self._vocab)
        a = self._alpha
        if context:
            prev = context[-1]
            row = self._bigrams.get(prev, {})
            denom = sum(row.values()) + a * n
            dist = np.fromiter(
                ((row.get(tok, 0) + a) / denom for tok in self._vocab),
                dtype=float,
                count=n,
            )
        else:
            denom = self._total + a * n
            dist = np.fromiter(
                ((self._unigrams.get(tok, 0) + a) / denom for tok in self._vocab),
                dtype=float,
                count=n,
            )
        return dist


class SubprocessScorer(TokenScorer):
    """Scorer bridged to an external process over line-delimited JSON.

    Each request is one line {"context": [tokens]}; the reply line is either
    {"logprobs": {token: logprob}} or {"top": [[token, p], ...]}. The wire
    format never carries a vocabulary, so one must be supplied here. Mass the
    reply leaves unassigned is spread uniformly over unmentioned tokens;
    reply tokens outside the vocabulary are ignored.
    """

    def __init__(self, cmd, vocabulary: Sequence[str]):
        self._vocab = tuple(vocabulary)
        if not self._vocab:
            raise ValueError("SubprocessScorer needs an explicit vocabulary")
        self._index = {tok: i for i, tok in enumerate(self._vocab)}
        args = shlex.split(cmd) if isinstance(cmd, str) else list(cmd)
        self._proc = subprocess.Popen(
            args,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )

    def vocabulary(self) -> tuple[str, ...]:
        return self._vocab

    def next_distribution(self, context: Sequence[str]) -> np.ndarray:
        if self._proc.poll() is not None:
            raise RuntimeError("scorer process exited")
        request = json.dumps({"context": list(context)}) + "\n"
        self._proc.stdin.write(request)
        self._proc.stdin.flush()
        line = self._proc.stdout.readline()
        if not line:
            raise RuntimeError("scorer process closed its output")
        reply = json.loads(line)
        if "logprobs" in reply:
            probs = {t: math.exp(lp) for t, lp in reply["logprobs"].items()}
        elif "top" in reply:
            probs = {t: p for t, p in reply["top"]}
        else:
            raise RuntimeError("scorer reply has neither logprobs nor top")
        dist = np.zeros(len(self._vocab))
        assigned = 0.0
        for tok, p in probs.items():
            i = self._index.get(tok)
            if i is not None:
                dist[i] = p
                assigned += p
        if assigned > 1.0 + 1e-6:
            raise RuntimeError("scorer probabilities exceed 1")
        rest = [i for i, tok in enumerate(self._vocab) if tok not in probs]
        if rest:
            dist[rest] = max(0.0, 1.0 - assigned) / len(rest)
        elif assigned > 0:
            dist /= assigned
        return dist

    def close(self) -> None:
        if self._proc.poll() is None:
            self._proc.stdin.close()
            self._proc.wait(timeout=10)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _checked_turn_tokens(
    dialogue: Dialogue, scorer: TokenScorer, unk_token: Optional[str]
) -> list[list[str]]:
    index = {tok: i for i, tok in enumerate(scorer.vocabulary())}
    if unk_token is not None and unk_token not in index:
        raise ValueError(f"unk token {unk_token!r} not in scorer vocabulary")
    out: list[list[str]] = []
    for turn in dialogue.turns:
        tokens = []
        for tok in scorer.encode(turn.text):
            if tok not in index:
                if unk_token is None:
                    raise ValueError(
                        f"token {tok!r} (dialogue {dialogue.id}) not in "
                        "scorer vocabulary; pass an UNK token to map it"
                    )
                tok = unk_token
            tokens.append(tok)
        out.append(tokens)
    return out


@dataclass(frozen=True)
class DialogueScores:
    """Per-turn scores for turns 1..n-1 of one dialogue."""

    per_turn_ppl: tuple[float, ...]
    per_turn_acc: tuple[dict, ...]
    token_count: int
    log_prob_sum: float
    correct_counts: dict

    @property
    def mean_ppl(self) -> float:
        return sum(self.per_turn_ppl) / len(self.per_turn_ppl)

    def mean_acc(self) -> dict:
        n_turns = len(self.per_turn_acc)
        return {
            n: sum(acc[n] for acc in self.per_turn_acc) / n_turns
            for n in self.per_turn_acc[0]
        }


def score_dialogue(
    dialogue: Dialogue,
    scorer: TokenScorer,
    acc_n: Sequence[int] = (1, 5, 10),
    unk_token: Optional[str] = None,
) -> DialogueScores:
    """Walk the dialogue once, collecting per-turn perplexity and rank hits.

    The context for a token is every gold token before it (previous turns
    plus the current turn's prefix). Gold rank ties are broken by vocabulary
    order, which makes rank accuracy deterministic for any scorer. Raises
    ValueError on dialogues with fewer than 2 turns (nothing to score) and
    on out-of-vocabulary tokens unless ``unk_token`` is given.
    """
    if len(dialogue.turns) < 2:
        raise ValueError(f"dialogue {dialogue.id} has no scorable turns")
    turn_tokens = _checked_turn_tokens(dialogue, scorer, unk_token)
    index = {tok: i for i, tok in enumerate(scorer.vocabulary())}
    history: list[str] = list(turn_tokens[0])
    per_turn_ppl: list[float] = []
    per_turn_acc: list[dict] = []
    log_prob_sum = 0.0
    token_count = 0
    correct_totals = {n: 0 for n in acc_n}
    for tokens in turn_tokens[1:]:
        turn_log = 0.0
        correct = {n: 0 for n in acc_n}
        for tok in tokens:
            dist = scorer.next_distribution(history)
            gi = index[tok]
            p = float(dist[gi])
            turn_log += math.log(p) if p > 0.0 else -math.inf
            # rank = 1 + (# strictly better) + (# equal with smaller index)
            rank = 1 + int(np.sum(dist > p)) + int(np.sum(dist[:gi] == p))
            for n in acc_n:
                if rank <= n:
                    correct[n] += 1
            history.append(tok)
        per_turn_ppl.append(math.exp(-turn_log / len(tokens)))
        per_turn_acc.append({n: correct[n] / len(tokens) for n in acc_n})
        log_prob_sum += turn_log
        token_count += len(tokens)
        for n in acc_n:
            correct_totals[n] += correct[n]
    return DialogueScores(
        per_turn_ppl=tuple(per_turn_ppl),
        per_turn_acc=tuple(per_turn_acc),
        token_count=token_count,
        log_prob_sum=log_prob_sum,
        correct_counts=correct_totals,
    )


def conditional_turn_perplexity(
    dialogue: Dialogue, scorer: TokenScorer, unk_token: Optional[str] = None
) -> tuple[tuple[float, ...], float]:
    """Per-turn perplexities (turns 1..n-1) and their arithmetic mean."""
    scores = score_dialogue(dialogue, scorer, acc_n=(1,), unk_token=unk_token)
    return scores.per_turn_ppl, scores.mean_ppl


def accuracy_at_n(
    dialogue: Dialogue,
    scorer: TokenScorer,
    acc_n: Sequence[int] = (1, 5, 10),
    unk_token: Optional[str] = None,
) -> dict:
    """Per-N fraction of gold tokens ranked in the scorer's top N,
    averaged per turn then over turns."""
    scores = score_dialogue(dialogue, scorer, acc_n=acc_n, unk_token=unk_token)
    return scores.mean_acc()


@dataclass(frozen=True)
class EvalReport:
    cppl: float
    acc_at: dict
    dialogues: int
    turns: int
    skipped_dialogues: int
    truncation_variants: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "cppl": self.cppl,
            "acc_at": {str(n): v for n, v in self.acc_at.items()},
            "dialogues": self.dialogues,
            "turns": self.turns,
            "skipped_dialogues": self.skipped_dialogues,
            "truncation_variants": {
                str(f): report.as_dict()
                for f, report in self.truncation_variants.items()
            },
        }


def _aggregate(
    corpus: Sequence[Dialogue],
    scorer: TokenScorer,
    acc_n: Sequence[int],
    micro: bool,
    unk_token: Optional[str],
) -> EvalReport:
    scored: list[DialogueScores] = []
    skipped = 0
    for d in corpus:
        if len(d.turns) < 2:
            skipped += 1
            continue
        scored.append(score_dialogue(d, scorer, acc_n, unk_token))
    if not scored:
        raise ValueError("no dialogue has at least 2 turns")
    turns = sum(len(s.per_turn_ppl) for s in scored)
    if micro:
        tokens = sum(s.token_count for s in scored)
        cppl = math.exp(-sum(s.log_prob_sum for s in scored) / tokens)
        acc = {
            n: sum(s.correct_counts[n] for s in scored) / tokens for n in acc_n
        }
    else:
        cppl = sum(s.mean_ppl for s in scored) / len(scored)
        acc = {
            n: sum(s.mean_acc()[n] for s in scored) / len(scored)
            for n in acc_n
        }
    return EvalReport(
        cppl=cppl,
        acc_at=acc,
        dialogues=len(scored),
        turns=turns,
        skipped_dialogues=skipped,
    )


def eval_suite(
    corpus: Sequence[Dialogue],
    scorer: TokenScorer,
    config: MetricConfig = MetricConfig(),
    micro: bool = False,
    unk_token: Optional[str] = None,
) -> EvalReport:
    """Full-corpus CPPL and Acc@N, plus one variant per truncation fraction.

    Averaging is macro by default (per-turn values averaged within each
    dialogue, dialogue values averaged over the corpus); ``micro=True pools
    tokens instead. Dialogues left with fewer than 2 turns are skipped and
    counted.
    """
    if not corpus:
        raise ValueError("empty corpus")
    base = _aggregate(corpus, scorer, config.acc_n, micro, unk_token)
    variants = {}
    for fraction in config.truncation_fractions:
        truncated = [truncate_last_fraction(d, fraction) for d in corpus]
        variants[fraction] = _aggregate(
            truncated, scorer, config.acc_n, micro, unk_token
        )
    return EvalReport(
        cppl=base.cppl,
        acc_at=base.acc_at,
        dialogues=base.dialogues,
        turns=base.turns,
        skipped_dialogues=base.skipped_dialogues,
        truncation_variants=variants,
    )
