"""Regenerate the JSON fixtures served by the /rules endpoint.

The fixtures are a cross-implementation contract: any client that re-implements
word-level HTER or the submission rules (for instant feedback in an editor UI)
can replay these cases and compare outcomes number-for-number. Expected values
are produced by the library itself, whose own behavior is pinned by the unit
test suite on independent hand-worked cases; the fixtures freeze that behavior
so ports can be checked against it.

Run from the repository root:

    python3 tools/make_shared_fixtures.py
"""

from __future__ import annotations

import json
import random
from pathlib import Path

from dialkit import Dialogue, Turn, hter
from dialkit.service import check_submission

OUT_DIR = Path(__file__).resolve().parent.parent / "src" / "dialkit" / "service" / "data"

WORDS = (
    "ciao come stai bene grazie oggi domani casa lavoro tempo pioggia sole "
    "andiamo certo forse niente tutto qualcosa chi cosa quando dove perché "
    "sempre mai già ancora però quindi davvero insieme"
).split()

PUNCTUATED = [
    "Ciao, come stai?",
    "Bene, grazie! E tu?",
    "E’ qui da stamattina.",
    "«Davvero?» disse piano.",
    "No… non credo proprio.",
    'Ha detto: "torno subito".',
    "Perché no; vediamo domani.",
    "D'accordo, alle 9:30 allora.",
]


def make_hter_goldens() -> list[dict]:
    rng = random.Random(7)
    cases: list[dict] = []

    def add(original: str, postedited: str) -> None:
        cases.append(
            {
                "original": original,
                "postedited": postedited,
                "hter": hter(original, postedited),
            }
        )

    # hand-picked shapes: identity, replacement growth, punctuation handling
    add("le persone interessate", "le persone coinvolte nel caso")
    add("ciao come stai", "ciao come stai")
    add("ciao come stai oggi", "ciao come va")
    add("Ciao, come stai?", "Ciao... come stai?")
    add("E’ qui da ieri", "è qui da ieri sera")
    add("«Davvero?» disse piano.", "«Davvero?» disse ridendo, piano.")
    add("torno subito a casa", "casa")
    add("no", "no no no no")
    for text in PUNCTUATED:
        add(text, rng.choice(PUNCTUATED))

    # randomized token-level mutations over a fixed word pool
    while len(cases) < 60:
        n = rng.randint(3, 12)
        original = [rng.choice(WORDS) for _ in range(n)]
        edited = list(original)
        for _ in range(rng.randint(0, 5)):
            op = rng.choice(("sub", "ins", "del"))
            if op == "sub" and edited:
                edited[rng.randrange(len(edited))] = rng.choice(WORDS)
            elif op == "ins":
                edited.insert(rng.randint(0, len(edited)), rng.choice(WORDS))
            elif op == "del" and len(edited) > 1:
                del edited[rng.randrange(len(edited))]
        add(" ".join(original), " ".join(edited))
    return cases


def turn_objs(turns) -> list[dict]:
    return [{"speaker": s, "text": t} for s, t in turns]


SIX = (
    ("A", "allora, da dove cominciamo"),
    ("B", "direi dal sopralluogo di ieri"),
    ("A", "va bene, raccontami tutto"),
    ("B", "la porta sul retro era aperta"),
    ("A", "qualcuno ha visto qualcosa"),
    ("B", "il vicino dice di no"),
)

EIGHT = SIX + (
    ("A", "sentiamo anche il portiere"),
    ("B", "lo chiamo subito allora"),
)

TEN = EIGHT + (
    ("A", "ottima idea, procediamo"),
    ("B", "ci aggiorniamo più tardi"),
)


def make_validation_cases() -> list[dict]:
    rng = random.Random(11)
    cases: list[dict] = []

    def add(name: str, original_turns, draft_turns) -> None:
        original = Dialogue(
            id=f"case-{len(cases):03d}",
            source="LLM",
            turns=tuple(Turn(s, t) for s, t in original_turns),
        )
        violations, _ = check_submission(original, tuple(draft_turns))
        cases.append(
            {
                "name": name,
                "original": {
                    "id": original.id,
                    "source": original.source.value,
                    "turns": turn_objs(original_turns),
                },
                "draft": turn_objs(draft_turns),
                "violations": sorted({v.rule for v in violations}),
            }
        )

    # accepted shapes
    add("unchanged", SIX, SIX)
    add("text-edits-only", SIX, (SIX[0], ("B", "si parte dal sopralluogo"), *SIX[2:]))
    add("speakers-relabeled", SIX, tuple(("X" if s == "A" else "Y", t) for s, t in SIX))
    add("opening-deletion", SIX, SIX[1:])
    add("closing-deletion", SIX, SIX[:5])
    add("both-ends-deleted", EIGHT, EIGHT[1:7])
    add("mid-pair-deletion", SIX, SIX[:2] + SIX[4:])
    add("two-mid-pair-deletions", TEN, TEN[:2] + TEN[4:6] + TEN[8:])
    add("opening-insertion", SIX, (("B", "premessa breve"),) + SIX)
    add("closing-insertion", SIX, SIX + (("A", "chiudiamo qui per oggi"),))
    add(
        "insertions-at-both-ends",
        SIX,
        (("B", "prima di tutto"),) + SIX + (("B", "a domani"),),
    )
    add(
        "pair-deletion-with-merge",
        SIX,
        (SIX[0], SIX[1], ("A", SIX[2][1] + " " + SIX[4][1]), SIX[5]),
    )
    add("minimum-three-turns", SIX, SIX[:3])

    # refused shapes
    add("empty-draft", SIX, ())
    add("one-turn", SIX, SIX[:1])
    add("two-turns", SIX, SIX[:2])
    add("blank-text", SIX, (SIX[0], ("B", "   "), *SIX[2:]))
    add("blank-speaker", SIX, (("", "testo presente"), *SIX[1:]))
    add("blank-text-and-speaker", SIX, (("", ""), *SIX[1:]))
    add("third-speaker", SIX, SIX[:5] + (("C", "mi intrometto"),))
    add("broken-alternation", SIX, SIX[:3] + (("A", "parlo di nuovo io"),) + SIX[3:])
    add("single-mid-deletion", SIX, SIX[:2] + SIX[3:])
    add("single-mid-deletion-deeper", EIGHT, EIGHT[:4] + EIGHT[5:])
    add(
        "mid-insertion-pair",
        SIX,
        SIX[:2] + (("A", "inciso fuori posto"), ("B", "replica fuori posto")) + SIX[2:],
    )
    add("mid-insertion-single", SIX, SIX[:2] + (("A", "inciso isolato"),) + SIX[2:])
    add("all-one-speaker", SIX, tuple(("A", t) for _, t in SIX))

    # randomized mutations; labels recorded straight from the validator
    mutators = ("noop", "edit", "drop-one", "drop-pair", "append", "prepend", "blank", "relabel")
    while len(cases) < 60:
        base = SIX if rng.random() < 0.5 else EIGHT
        draft = [list(t) for t in base]
        ops = rng.sample(mutators, k=rng.randint(1, 2))
        for op in ops:
            if op == "edit":
                k = rng.randrange(len(draft))
                draft[k][1] = " ".join(rng.choice(WORDS) for _ in range(rng.randint(2, 6)))
            elif op == "drop-one" and len(draft) > 3:
                del draft[rng.randrange(1, len(draft) - 1)]
            elif op == "drop-pair" and len(draft) > 5:
                k = rng.randrange(1, len(draft) - 2)
                del draft[k : k + 2]
            elif op == "append":
                speaker = "A" if draft[-1][0] == "B" else "B"
                draft.append([speaker, "aggiunta in coda"])
            elif op == "prepend":
                speaker = "A" if draft[0][0] == "B" else "B"
                draft.insert(0, [speaker, "aggiunta in testa"])
            elif op == "blank":
                draft[rng.randrange(len(draft))][1] = ""
            elif op == "relabel":
                draft[rng.randrange(len(draft))][0] = "C"
        add(f"random-{len(cases):03d}-{'+'.join(ops)}", base, tuple(tuple(t) for t in draft))
    return cases


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    goldens = make_hter_goldens()
    cases = make_validation_cases()
    for name, payload in (
        ("hter_goldens.json", goldens),
        ("validation_cases.json", cases),
    ):
        text = json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True)
        (OUT_DIR / name).write_text(text + "\n", encoding="utf-8")
        print(f"wrote {name}: {len(payload)} cases")
    accepted = sum(1 for c in cases if not c["violations"])
    print(f"accepted validation cases: {accepted}")


if __name__ == "__main__":
    main()
