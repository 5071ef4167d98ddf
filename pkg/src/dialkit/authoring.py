"""Machine authoring of dialogues through a chat-completion endpoint.

Two flows share the same machinery: rewriting an existing dialogue in full,
and generating a fresh dialogue from a short context text. Templates are
stored in Italian (the operational language) with English reference copies;
the engine itself is language-agnostic.
"""

from __future__ import annotations

import hashlib
import json
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import requests

from .model import Dialogue, Source, Turn, merge_consecutive_turns, validate_dialogue

REWRITE_PLACEHOLDER = "{{DIALOGUE}}"
CONTEXT_PLACEHOLDER = "[[CONTEXT]]"

REWRITE_BODY_EN = (
    "Rewrite the following dialogue in its entirety in a way that is "
    "meaningful, natural, realistic, coherent, comprehensible and "
    "self-conclusive.\n{{DIALOGUE}}"
)

REWRITE_BODY_IT = (
    "Riscrivi il seguente dialogo nella sua interezza in modo che sia "
    "sensato, naturale, realistico, coerente, comprensibile e "
    "autoconclusivo.\n{{DIALOGUE}}"
)

CONTEXT_BODY_EN = (
    "Given the text that follows >>>, come up with two characters connected "
    "to it and describe their personality. Make then a dialogue between the "
    "two that is natural, realistic, coherent, comprehensible and "
    "self-contained. In the dialogue, there can be only the two actors and "
    "their turns. The two actors do not necessarily have to agree with each "
    "other. The dialogue must not be artificial and excessively friendly.\n"
    "\n"
    "The output structure is:\n"
    "\n"
    "Character description:\n"
    "\n"
    "Speaker1: description\n"
    "Speaker2: description\n"
    "\n"
    "Dialogue:\n"
    "\n"
    "Speaker1: turn\n"
    "Speaker2: turn\n"
    "\n"
    ">>> [[CONTEXT]]"
)

CONTEXT_BODY_IT = (
    "Dato il testo che segue >>>, inventa due personaggi ad esso collegati e "
    "descrivine la personalità. Crea poi un dialogo tra i due che sia "
    "naturale, realistico, coerente, comprensibile e autoconclusivo. Nel "
    "dialogo possono esserci solo i due attori e i loro turni. I due attori "
    "non devono necessariamente essere d'accordo tra loro. Il dialogo non "
    "deve essere artificiale ed eccessivamente amichevole.\n"
    "\n"
    "La struttura dell'output è:\n"
    "\n"
    "Descrizione dei personaggi:\n"
    "\n"
    "Speaker1: descrizione\n"
    "Speaker2: descrizione\n"
    "\n"
    "Dialogo:\n"
    "\n"
    "Speaker1: turno\n"
    "Speaker2: turno\n"
    "\n"
    ">>> [[CONTEXT]]"
)


@dataclass(frozen=True)
class PromptTemplate:
    """A chat prompt with exactly one payload placeholder."""

    kind: str  # "rewrite" | "context_generate"
    body: str

    def __post_init__(self) -> None:
        if self.kind not in ("rewrite", "context_generate"):
            raise ValueError(f"unknown template kind {self.kind!r}")
        if not self.body:
            raise ValueError("template body is empty")
        if self.body.count(self.placeholder) != 1:
            raise ValueError(
                f"template must contain {self.placeholder} exactly once"
            )

    @property
    def placeholder(self) -> str:
        return (
            REWRITE_PLACEHOLDER
            if self.kind == "rewrite"
            else CONTEXT_PLACEHOLDER
        )

    @property
    def output_source(self) -> Source:
        """Author-strategy label of dialogues this template produces."""
        return Source.HYBRID if self.kind == "rewrite" else Source.MACHINE


def rewrite_template(lang: str = "it") -> PromptTemplate:
    body = {"it": REWRITE_BODY_IT, "en": REWRITE_BODY_EN}[lang]
    return PromptTemplate(kind="rewrite", body=body)


def context_template(lang: str = "it") -> PromptTemplate:
    body = {"it": CONTEXT_BODY_IT, "en": CONTEXT_BODY_EN}[lang]
    return PromptTemplate(kind="context_generate", body=body)


@dataclass(frozen=True)
class DecodingConfig:
    top_p: float = 0.9
    temperature: float = 0.8
    repetition_penalty: Optional[float] = None

    def __post_init__(self) -> None:
        if not (0.0 < self.top_p <= 1.0):
            raise ValueError("top_p must be in (0, 1]")
        if self.temperature <= 0.0:
            raise ValueError("temperature must be positive")
        if self.repetition_penalty is not None and self.repetition_penalty <= 0:
            raise ValueError("repetition_penalty must be positive")

    def as_request_fields(self) -> dict:
        fields = {"top_p": self.top_p, "temperature": self.temperature}
        if self.repetition_penalty is not None:
            fields["repetition_penalty"] = self.repetition_penalty
        return fields


#: Settings used when authoring dialogues through the chat endpoint.
AUTHORING_DECODING = DecodingConfig(top_p=0.9, temperature=0.8)
#: Settings recorded as metadata for free-running model output sampling.
SAMPLING_DECODING = DecodingConfig(
    top_p=0.9, temperature=1.0, repetition_penalty=2.0
)


def render_prompt(template: PromptTemplate, payload: str) -> str:
    """Inline ``payload`` into the template, altering nothing else."""
    if not payload or not payload.strip():
        raise ValueError("payload is empty")
    if template.placeholder not in template.body:
        raise ValueError(f"template lacks placeholder {template.placeholder}")
    return template.body.replace(template.placeholder, payload)


def dialogue_as_text(dialogue: Dialogue) -> str:
    """`Speaker: text` lines, the payload form for the rewrite flow."""
    return "\n".join(f"{t.speaker}: {t.text}" for t in dialogue.turns)


class ChatTransportError(RuntimeError):
    """The endpoint could not produce a reply (network, HTTP, protocol)."""


class ChatClient:
    """Interface: turn a prompt into raw reply text."""

    def complete(self, prompt: str, decoding: DecodingConfig) -> str:
        raise NotImplementedError


class HttpChatClient(ChatClient):
    """POSTs {prompt, top_p, temperature} as JSON and expects {text} back.

    Safe for concurrent use (no shared mutable state per request).
    """

    def __init__(self, url: str, token: Optional[str] = None, timeout: float = 120.0):
        self.url = url
        self.token = token
        self.timeout = timeout

    def complete(self, prompt: str, decoding: DecodingConfig) -> str:
        headers = {}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        body = {"prompt": prompt, **decoding.as_request_fields()}
        try:
            resp = requests.post(
                self.url, json=body, headers=headers, timeout=self.timeout
            )
        except requests.RequestException as exc:
            raise ChatTransportError(str(exc)) from exc
        if resp.status_code != 200:
            raise ChatTransportError(
                f"endpoint returned HTTP {resp.status_code}"
            )
        try:
            return resp.json()["text"]
        except (ValueError, KeyError) as exc:
            raise ChatTransportError(f"malformed reply: {exc}") from exc


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


class ReplayChatClient(ChatClient):
    """Deterministic client replaying recorded replies keyed by prompt hash."""

    def __init__(self, replies: dict):
        self.replies = dict(replies)

    @classmethod
    def from_file(cls, path) -> "ReplayChatClient":
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh))

    def complete(self, prompt: str, decoding: DecodingConfig) -> str:
        key = prompt_hash(prompt)
        if key not in self.replies:
            raise ChatTransportError(f"no recorded reply for prompt hash {key}")
        return self.replies[key]


class FailingChatClient(ChatClient):
    """Always fails; exercises retry and error-accounting paths."""

    def __init__(self, message: str = "injected failure"):
        self.message = message
        self.calls = 0

    def complete(self, prompt: str, decoding: DecodingConfig) -> str:
        self.calls += 1
        raise ChatTransportError(self.message)


class ParseRejection(Exception):
    """A raw reply that could not become a valid dialogue.

    Carries the raw text for audit; rejected outputs are collected, never
    silently dropped.
    """

    def __init__(self, reason: str, raw: str, context_id: Optional[str] = None):
        super().__init__(reason)
        self.reason = reason
        self.raw = raw
        self.context_id = context_id


_TURN_LINE_RE = re.compile(r"^\s*([^:]{1,64}?)\s*:\s*(\S.*?)\s*$")
_DIALOGUE_HEADER_RE = re.compile(r"^\s*(dialogue|dialogo)\s*:\s*$", re.IGNORECASE)


def parse_generated(
    raw: str,
    id: str,
    source: Source = Source.MACHINE,
    provenance: Optional[dict] = None,
) -> tuple[Optional[str], Dialogue]:
    """Parse a raw model reply into (character descriptions, dialogue).

    The section after a `Dialogue:`/`Dialogo:` header line is the dialogue
    body (the whole text when no header is present, as in rewrite replies).
    Each `Name: text` line becomes a turn; other lines are ignored. The two
    labels, ordered most frequent first, are normalized to S1/S2 with the
    originals kept in provenance. Raises ParseRejection when the reply does
    not yield exactly two speakers and at least three merged, alternating
    turns.
    """
    lines = raw.splitlines()
    header_at = next(
        (i for i, line in enumerate(lines) if _DIALOGUE_HEADER_RE.match(line)),
        None,
    )
    if header_at is None:
        descriptions = None
        body_lines = lines
    else:
        descriptions = "\n".join(lines[:header_at]).strip() or None
        body_lines = lines[header_at + 1 :]
    pairs = [
        (m.group(1), m.group(2))
        for m in (_TURN_LINE_RE.match(line) for line in body_lines)
        if m
    ]
    if not pairs:
        raise ParseRejection("no speaker-prefixed lines", raw)
    labels: list[str] = []
    counts: dict[str, int] = {}
    for speaker, _ in pairs:
        if speaker not in counts:
            labels.append(speaker)
        counts[speaker] = counts.get(speaker, 0) + 1
    if len(labels) > 2:
        raise ParseRejection(
            f"{len(labels)} speaker labels: {', '.join(labels)}", raw
        )
    if len(labels) < 2:
        raise ParseRejection("fewer than 2 distinct speakers", raw)
    ranked = sorted(labels, key=lambda s: (-counts[s], labels.index(s)))
    mapping = {ranked[0]: "S1", ranked[1]: "S2"}
    dialogue = Dialogue(
        id=id,
        source=source,
        turns=tuple(Turn(speaker=mapping[s], text=t) for s, t in pairs),
        provenance={
            **(provenance or {}),
            "speaker_labels": {"S1": ranked[0], "S2": ranked[1]},
        },
    )
    dialogue = merge_consecutive_turns(dialogue)
    report = validate_dialogue(dialogue)
    if not report.ok:
        raise ParseRejection(
            "invalid dialogue: " + ", ".join(report.rules), raw
        )
    return descriptions, dialogue


@dataclass(frozen=True)
class GenerationError:
    context_id: str
    message: str


@dataclass
class BatchResult:
    dialogues: list[Dialogue] = field(default_factory=list)
    rejections: list[ParseRejection] = field(default_factory=list)
    errors: list[GenerationError] = field(default_factory=list)


def generate_batch(
    contexts: Sequence[str],
    ids: Sequence[str],
    template: PromptTemplate,
    decoding: DecodingConfig,
    client: ChatClient,
    max_attempts: int = 3,
    backoff_base: float = 1.0,
    sleep: Callable[[float], None] = time.sleep,
    max_concurrency: int = 1,
) -> BatchResult:
    """One completion per context, with per-item retry and accounting.

    Transient transport failures are retried up to ``max_attempts`` with
    exponential backoff; an exhausted item becomes a GenerationError and the
    batch continues. Output order is input order regardless of completion
    order, and every output carries its context id in provenance.
    """
    if len(contexts) != len(ids):
        raise ValueError("contexts and ids must be parallel")
    if max_attempts < 1:
        raise ValueError("max_attempts must be >= 1")

    def run_one(item: tuple[int, str, str]):
        index, context_id, payload = item
        prompt = render_prompt(template, payload)
        last_error: Optional[ChatTransportError] = None
        for attempt in range(max_attempts):
            try:
                raw = client.complete(prompt, decoding)
                break
            except ChatTransportError as exc:
                last_error = exc
                if attempt + 1 < max_attempts:
                    sleep(backoff_base * (2**attempt))
        else:
            return index, None, None, GenerationError(context_id, str(last_error))
        try:
            _, dialogue = parse_generated(
                raw,
                id=context_id,
                source=template.output_source,
                provenance={"context_id": context_id, "template": template.kind},
            )
            return index, dialogue, None, None
        except ParseRejection as rej:
            rej.context_id = context_id
            return index, None, rej, None

    items = [(i, ids[i], contexts[i]) for i in range(len(contexts))]
    if max_concurrency > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=max_concurrency) as pool:
            outcomes = list(pool.map(run_one, items))
    else:
        outcomes = [run_one(item) for item in items]
    outcomes.sort(key=lambda o: o[0])
    result = BatchResult()
    for _, dialogue, rejection, error in outcomes:
        if dialogue is not None:
            result.dialogues.append(dialogue)
        elif rejection is not None:
            result.rejections.append(rejection)
        else:
            result.errors.append(error)
    return result
