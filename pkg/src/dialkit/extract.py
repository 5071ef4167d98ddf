"""Two-speaker excerpt extraction from script-style transcripts.

House input format: one `SPEAKER: text` line per utterance; a blank line or a
line of === separates scenes; anything else (stage directions, headings) is
dropped but counted. Real scraped scripts must be converted to this format
first.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .model import Dialogue, Source, Turn, merge_consecutive_turns

_SPEAKER_LINE_RE = re.compile(r"^\s*([^:]{1,64}?)\s*:\s*(\S.*?)\s*$")
_SCENE_BREAK_RE = re.compile(r"^\s*={3,}\s*$")


@dataclass(frozen=True)
class Scene:
    """A contiguous run of speaker lines from one source file."""

    lines: tuple[tuple[str, str], ...]
    source_file: str
    index: int


@dataclass(frozen=True)
class ExtractionConfig:
    min_window: int = 3

    def __post_init__(self) -> None:
        if self.min_window < 2:
            raise ValueError("min_window must be >= 2")


@dataclass(frozen=True)
class ScriptParse:
    scenes: tuple[Scene, ...]
    dropped_lines: int


@dataclass
class ExtractionSummary:
    files: int = 0
    scenes: int = 0
    excerpts: int = 0
    dropped_lines: int = 0

    def as_dict(self) -> dict:
        return {
            "files": self.files,
            "scenes": self.scenes,
            "excerpts": self.excerpts,
            "dropped_lines": self.dropped_lines,
        }


def parse_script(text: str, source_file: str = "<memory>") -> ScriptParse:
    """Split raw transcript text into scenes of (speaker, text) lines.

    Raises ValueError when no line parses as dialogue at all.
    """
    scenes: list[Scene] = []
    current: list[tuple[str, str]] = []
    dropped = 0

    def close() -> None:
        nonlocal current
        if current:
            scenes.append(
                Scene(
                    lines=tuple(current),
                    source_file=source_file,
                    index=len(scenes),
                )
            )
            current = []

    for raw_line in text.splitlines():
        if not raw_line.strip() or _SCENE_BREAK_RE.match(raw_line):
            close()
            continue
        m = _SPEAKER_LINE_RE.match(raw_line)
        if m:
            current.append((m.group(1), m.group(2)))
        else:
            dropped += 1
    close()
    if not scenes:
        raise ValueError(f"no dialogue content in {source_file}")
    return ScriptParse(scenes=tuple(scenes), dropped_lines=dropped)


def _two_speaker_spans(
    speakers: Sequence[str], min_window: int
) -> list[tuple[int, int]]:
    """Greedy left-to-right selection of maximal two-speaker spans.

    From each start position the span is grown until a third speaker label
    (or the scene end) stops it. A span is kept when it covers at least
    min_window lines AND holds exactly two distinct speakers; the next scan
    then starts past it (no overlap). Otherwise the start shifts by one line.
    A tail span that reaches the scene end is kept under the same two
    conditions, nothing special about it.
    """
    spans: list[tuple[int, int]] = []
    n = len(speakers)
    begin = 0
    while begin + min_window <= n:
        seen: set[str] = set()
        end = begin
        while end < n:
            label = speakers[end]
            if label not in seen and len(seen) == 2:
                break
            seen.add(label)
            end += 1
        if end - begin >= min_window and len(seen) == 2:
            spans.append((begin, end))
            begin = end
        else:
            begin += 1
    return spans


def dynamic_sliding_window(scene: Scene, config: ExtractionConfig) -> list[Dialogue]:
    """Extract every greedy maximal two-speaker excerpt of a scene.

    Each saved span becomes a source-H dialogue (consecutive same-speaker
    lines merged); id is `<file>#<scene>#<span-start>` and provenance records
    the covered line range. An empty result is normal for crowded scenes.
    """
    speakers = [speaker for speaker, _ in scene.lines]
    dialogues: list[Dialogue] = []
    for start, end in _two_speaker_spans(speakers, config.min_window):
        turns = tuple(
            Turn(speaker=s, text=t) for s, t in scene.lines[start:end]
        )
        raw = Dialogue(
            id=f"{scene.source_file}#{scene.index}#{start}",
            source=Source.HUMAN,
            turns=turns,
            provenance={
                "script": scene.source_file,
                "scene": scene.index,
                "lines": [start, end],
            },
        )
        dialogues.append(merge_consecutive_turns(raw))
    return dialogues


def extract_corpus(
    paths: Iterable, config: ExtractionConfig = ExtractionConfig()
) -> tuple[list[Dialogue], ExtractionSummary]:
    """Run extraction over script files, in input order.

    Returns the concatenated excerpt list and a summary of scenes seen,
    excerpts emitted and non-dialogue lines dropped. Unreadable files raise
    OSError naming the path; a file with no dialogue content raises
    ValueError.
    """
    summary = ExtractionSummary()
    dialogues: list[Dialogue] = []
    for path in paths:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot read script file {path}: {exc}") from exc
        parse = parse_script(text, source_file=path.stem)
        summary.files += 1
        summary.scenes += len(parse.scenes)
        summary.dropped_lines += parse.dropped_lines
        for scene in parse.scenes:
            excerpts = dynamic_sliding_window(scene, config)
            summary.excerpts += len(excerpts)
            dialogues.extend(excerpts)
    if summary.files == 0:
        raise ValueError("no script files given")
    return dialogues, summary
