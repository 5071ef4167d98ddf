import random

import pytest

from dialkit import Dialogue, Source, Turn

WORDS = (
    "ciao come stai bene grazie oggi domani casa lavoro tempo "
    "pioggia sole andiamo certo forse niente tutto qualcosa chi cosa"
).split()


def make_turns(rng: random.Random, count: int, speakers=("S1", "S2")):
    return tuple(
        Turn(
            speaker=speakers[i % 2],
            text=" ".join(rng.choices(WORDS, k=rng.randint(2, 8))),
        )
        for i in range(count)
    )


def make_dialogue(rng: random.Random, id: str, source="LLM", turns=None):
    count = turns if turns is not None else rng.randint(3, 12)
    return Dialogue(id=id, source=source, turns=make_turns(rng, count))


def make_corpus(rng: random.Random, count: int, sources=("H", "H+LLM", "LLM")):
    return [
        make_dialogue(rng, f"d{i:04d}", source=sources[i % len(sources)])
        for i in range(count)
    ]


@pytest.fixture
def rng():
    return random.Random(20240)
