"""Surface text metrics.

The tokenizer here is the single authority for word-level token streams:
post-edit distances, corpus statistics and repetition all run on its output,
so their numbers stay comparable.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .model import Dialogue, MetricConfig

DEFAULT_METRICS = MetricConfig()

TokenSequence = Sequence[str]

# Detached punctuation. The curly apostrophe is included alongside the ASCII
# one because OCR'd and typeset Italian text mixes both.
_PUNCT = ".,;:!?…\"'«»’"
_PUNCT_RE = re.compile("([" + re.escape(_PUNCT) + "])")


def tokenize(text: str) -> list[str]:
    """Lowercase word tokenization with punctuation split off.

    "Ciao, come va?" -> [ciao, ",", come, va, "?"]. Ellipsis typed as three
    dots yields three "." tokens; the single-char ellipsis stays one token.
    """
    return _PUNCT_RE.sub(r" \1 ", text.lower()).split()


def _as_tokens(value: Union[str, TokenSequence]) -> list[str]:
    if isinstance(value, str):
        return tokenize(value)
    return list(value)


def _iter_texts(item) -> Iterable[str]:
    if isinstance(item, str):
        yield item
    elif isinstance(item, Dialogue):
        for turn in item.turns:
            yield turn.text
    else:
        for sub in item:
            yield from _iter_texts(sub)


def token_stream(source) -> list[str]:
    """Concatenated token stream of a text, a dialogue, or any nesting of
    them (e.g. a corpus slice)."""
    out: list[str] = []
    for text in _iter_texts(source):
        out.extend(tokenize(text))
    return out


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


@dataclass(frozen=True)
class RRResult:
    """Repetition rate over a token stream.

    ``value`` is 100 times the geometric mean, over n-gram orders, of the
    fraction of n-gram types that occur more than once inside a window;
    numerators and denominators are pooled across windows before the mean.
    Any order with zero repeated types forces the value to 0.
    """

    value: float
    per_order: tuple[float, ...]
    window_count: int
    token_count: int


def repetition_rate(source, config: MetricConfig = DEFAULT_METRICS) -> RRResult:
    """Windowed n-gram repetition rate of a text, dialogue or corpus slice.

    The stream is tiled into consecutive windows of ``rr_window`` tokens; a
    final partial window is kept only when it has at least ``rr_ngram_max``
    tokens (otherwise it cannot contribute the longest n-grams).

    Raises ValueError on an empty token stream.
    """
    stream = token_stream(source)
    if not stream:
        raise ValueError("repetition rate of an empty token stream")
    windows = [
        stream[i : i + config.rr_window]
        for i in range(0, len(stream), config.rr_window)
    ]
    if len(windows) > 1 and len(windows[-1]) < config.rr_ngram_max:
        windows.pop()
    orders = range(config.rr_ngram_min, config.rr_ngram_max + 1)
    repeated = {n: 0 for n in orders}
    types = {n: 0 for n in orders}
    for window in windows:
        for n in orders:
            counts = _ngrams(window, n)
            repeated[n] += sum(1 for c in counts.values() if c > 1)
            types[n] += len(counts)
    rates = tuple(
        (repeated[n] / types[n]) if types[n] else 0.0 for n in orders
    )
    if any(rate == 0.0 for rate in rates):
        value = 0.0
    else:
        value = 100.0 * math.exp(sum(math.log(r) for r in rates) / len(rates))
    return RRResult(
        value=value,
        per_order=rates,
        window_count=len(windows),
        token_count=len(stream),
    )


@dataclass(frozen=True)
class BleuScore:
    """Sentence-level BLEU of one candidate against one reference."""

    value: float
    precisions: tuple[float, ...]
    brevity_penalty: float


def bleu(
    candidate: Union[str, TokenSequence],
    reference: Union[str, TokenSequence],
    config: MetricConfig = DEFAULT_METRICS,
) -> BleuScore:
    """Sentence BLEU with modified n-gram precision up to ``bleu_max_order``.

    Orders the candidate is too short to populate are skipped, so a sequence
    always scores 1.0 against itself. A zero match count at order >= 2 is
    smoothed to 1/(2 * candidate n-gram count); zero unigram overlap scores 0.

    Raises ValueError when either side has no tokens.
    """
    cand = _as_tokens(candidate)
    ref = _as_tokens(reference)
    if not cand or not ref:
        raise ValueError("bleu needs a non-empty candidate and reference")
    precisions: list[float] = []
    for n in range(1, config.bleu_max_order + 1):
        cand_counts = _ngrams(cand, n)
        total = sum(cand_counts.values())
        if total == 0:
            break
        ref_counts = _ngrams(ref, n)
        matched = sum(min(c, ref_counts[g]) for g, c in cand_counts.items())
        if matched > 0:
            precisions.append(matched / total)
        elif n == 1:
            precisions.append(0.0)
        else:
            precisions.append(1.0 / (2.0 * total))
    bp = 1.0 if len(cand) >= len(ref) else math.exp(1.0 - len(ref) / len(cand))
    if precisions[0] == 0.0:
        value = 0.0
    else:
        value = bp * math.exp(
            sum(math.log(p) for p in precisions) / len(precisions)
        )
    return BleuScore(
        value=value, precisions=tuple(precisions), brevity_penalty=bp
    )


def detect_derailment(
    dialogue: Dialogue, config: MetricConfig = DEFAULT_METRICS
) -> int:
    """Index of the first turn that loops back onto an earlier one.

    A turn derails when its BLEU against ANY earlier turn of the dialogue
    reaches ``derail_threshold``; comparing against the single previous turn
    misses loops with period > 1. Returns the number of turns to keep, i.e.
    len(turns) when no turn derails.
    """
    turn_tokens = [tokenize(t.text) for t in dialogue.turns]
    for t in range(1, len(turn_tokens)):
        best = max(
            bleu(turn_tokens[t], turn_tokens[s], config).value for s in range(t)
        )
        if best >= config.derail_threshold:
            return t
    return len(turn_tokens)


def truncate_last_fraction(dialogue: Dialogue, fraction: float) -> Dialogue:
    """Drop floor(fraction * turn_count) trailing turns, keeping at least one.

    ``fraction`` must lie strictly inside (0, 1); the dialogue must have turns.
    """
    if not (0.0 < fraction < 1.0):
        raise ValueError("fraction must be in (0, 1)")
    n = len(dialogue.turns)
    if n == 0:
        raise ValueError("cannot truncate an empty dialogue")
    keep = max(1, n - math.floor(fraction * n))
    if keep == n:
        return dialogue
    return dialogue.replace_turns(dialogue.turns[:keep])


def cap_turn_count(dialogue: Dialogue, max_turns: int) -> Dialogue:
    """Keep only the first ``max_turns`` turns (evaluation-form capping)."""
    if max_turns < 1:
        raise ValueError("max_turns must be >= 1")
    if len(dialogue.turns) <= max_turns:
        return dialogue
    return dialogue.replace_turns(dialogue.turns[:max_turns])
