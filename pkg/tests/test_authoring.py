import json

import pytest

from dialkit import (
    AUTHORING_DECODING,
    SAMPLING_DECODING,
    BatchResult,
    ChatTransportError,
    DecodingConfig,
    Dialogue,
    FailingChatClient,
    HttpChatClient,
    ParseRejection,
    PromptTemplate,
    ReplayChatClient,
    Source,
    Turn,
    context_template,
    dialogue_as_text,
    generate_batch,
    parse_generated,
    prompt_hash,
    render_prompt,
    rewrite_template,
)

GOOD_REPLY = """\
Character description:

Marco: un meccanico curioso
Anna: una cliente sbrigativa

Dialogue:

Marco: buongiorno, mi dica pure
Anna: ho un rumore strano al motore
Marco: diamo subito un'occhiata
Anna: grazie, sono di fretta
"""


class TestTemplates:
    def test_rewrite_placeholder_present_once(self):
        t = rewrite_template()
        assert t.body.count("{{DIALOGUE}}") == 1
        assert t.kind == "rewrite"

    def test_context_placeholder_present_once(self):
        t = context_template()
        assert t.body.count("[[CONTEXT]]") == 1
        assert t.kind == "context_generate"

    def test_both_languages_available(self):
        assert rewrite_template("en").body != rewrite_template("it").body
        assert context_template("en").body != context_template("it").body
        with pytest.raises(KeyError):
            rewrite_template("de")

    def test_output_source_labels(self):
        assert rewrite_template().output_source is Source.HYBRID
        assert context_template().output_source is Source.MACHINE

    def test_rejects_malformed_templates(self):
        with pytest.raises(ValueError):
            PromptTemplate(kind="rewrite", body="no placeholder here")
        with pytest.raises(ValueError):
            PromptTemplate(kind="rewrite", body="{{DIALOGUE}} and {{DIALOGUE}}")
        with pytest.raises(ValueError):
            PromptTemplate(kind="other", body="{{DIALOGUE}}")
        with pytest.raises(ValueError):
            PromptTemplate(kind="rewrite", body="")

    def test_english_bodies_describe_the_flows(self):
        rewrite = rewrite_template("en").body
        assert "Rewrite the following dialogue in its entirety" in rewrite
        assert "self-conclusive" in rewrite
        generate = context_template("en").body
        assert "come up with two characters connected" in generate
        assert "only the two actors and their turns" in generate
        assert "must not be artificial and excessively friendly" in generate
        assert "Character description:" in generate
        assert "Dialogue:" in generate


class TestRenderPrompt:
    def test_payload_inlined_verbatim(self):
        t = rewrite_template()
        payload = "S1: ciao\nS2: salve"
        prompt = render_prompt(t, payload)
        assert payload in prompt
        assert "{{DIALOGUE}}" not in prompt
        # everything around the placeholder is untouched
        before, after = t.body.split("{{DIALOGUE}}")
        assert prompt == before + payload + after

    def test_distinct_payloads_distinct_prompts(self):
        t = context_template()
        assert render_prompt(t, "uno") != render_prompt(t, "due")

    def test_empty_payload_rejected(self):
        with pytest.raises(ValueError):
            render_prompt(rewrite_template(), "")
        with pytest.raises(ValueError):
            render_prompt(rewrite_template(), "   ")

    def test_dialogue_as_text_format(self):
        d = Dialogue(
            "x", "H", (Turn("A", "ciao"), Turn("B", "salve"), Turn("A", "come va"))
        )
        assert dialogue_as_text(d) == "A: ciao\nB: salve\nA: come va"


class TestDecodingConfig:
    def test_authoring_settings(self):
        assert AUTHORING_DECODING.top_p == 0.9
        assert AUTHORING_DECODING.temperature == 0.8
        assert AUTHORING_DECODING.repetition_penalty is None
        assert AUTHORING_DECODING.as_request_fields() == {
            "top_p": 0.9,
            "temperature": 0.8,
        }

    def test_sampling_settings(self):
        assert SAMPLING_DECODING.top_p == 0.9
        assert SAMPLING_DECODING.temperature == 1.0
        assert SAMPLING_DECODING.repetition_penalty == 2.0
        assert "repetition_penalty" in SAMPLING_DECODING.as_request_fields()

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(top_p=0.0),
            dict(top_p=1.2),
            dict(temperature=0.0),
            dict(temperature=-1.0),
            dict(repetition_penalty=0.0),
        ],
    )
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ValueError):
            DecodingConfig(**kwargs)


class TestParseGenerated:
    def test_full_reply_with_header(self):
        descriptions, d = parse_generated(GOOD_REPLY, id="g1")
        assert descriptions is not None
        assert "Marco: un meccanico curioso" in descriptions
        assert len(d.turns) == 4
        assert d.source is Source.MACHINE
        assert [t.speaker for t in d.turns] == ["S1", "S2", "S1", "S2"]

    def test_labels_normalized_most_frequent_first(self):
        raw = "Anna: uno\nMarco: due\nAnna: tre\nMarco: quattro\nAnna: cinque"
        _, d = parse_generated(raw, id="g")
        labels = d.provenance["speaker_labels"]
        assert labels == {"S1": "Anna", "S2": "Marco"}

    def test_tie_broken_by_first_appearance(self):
        raw = "Marco: uno\nAnna: due\nMarco: tre\nAnna: quattro"
        _, d = parse_generated(raw, id="g")
        assert d.provenance["speaker_labels"]["S1"] == "Marco"

    def test_no_header_treats_whole_text_as_dialogue(self):
        raw = "A: primo\nB: secondo\nA: terzo"
        descriptions, d = parse_generated(raw, id="g")
        assert descriptions is None
        assert len(d.turns) == 3

    def test_italian_header_recognized(self):
        raw = "descrizioni qui\n\nDialogo:\nA: uno\nB: due\nA: tre"
        descriptions, d = parse_generated(raw, id="g")
        assert descriptions == "descrizioni qui"
        assert len(d.turns) == 3

    def test_consecutive_same_speaker_lines_merge(self):
        raw = "A: uno\nA: ancora\nB: due\nA: tre"
        _, d = parse_generated(raw, id="g")
        assert len(d.turns) == 3
        assert d.turns[0].text == "uno ancora"

    def test_three_labels_rejected(self):
        raw = "A: uno\nB: due\nC: tre\nA: quattro"
        with pytest.raises(ParseRejection, match="3 speaker labels"):
            parse_generated(raw, id="g")

    def test_single_label_rejected(self):
        raw = "A: uno\nA: due\nA: tre"
        with pytest.raises(ParseRejection, match="fewer than 2"):
            parse_generated(raw, id="g")

    def test_too_few_merged_turns_rejected(self):
        raw = "A: uno\nB: due"
        with pytest.raises(ParseRejection, match="min-turns"):
            parse_generated(raw, id="g")

    def test_no_turn_lines_rejected(self):
        with pytest.raises(ParseRejection, match="no speaker-prefixed"):
            parse_generated("nessun dialogo qui", id="g")

    def test_rejection_keeps_raw_text(self):
        raw = "solo prosa senza turni"
        try:
            parse_generated(raw, id="g")
        except ParseRejection as rej:
            assert rej.raw == raw
        else:
            pytest.fail("expected rejection")

    def test_provenance_merged_not_replaced(self):
        raw = "A: uno\nB: due\nA: tre"
        _, d = parse_generated(raw, id="g", provenance={"context_id": "c9"})
        assert d.provenance["context_id"] == "c9"
        assert "speaker_labels" in d.provenance


class TestClients:
    def test_replay_client_round_trip(self):
        t = rewrite_template()
        prompt = render_prompt(t, "S1: ciao\nS2: salve\nS1: come va")
        client = ReplayChatClient({prompt_hash(prompt): "A: uno\nB: due\nA: tre"})
        assert client.complete(prompt, AUTHORING_DECODING) == "A: uno\nB: due\nA: tre"

    def test_replay_client_unknown_prompt(self):
        client = ReplayChatClient({})
        with pytest.raises(ChatTransportError):
            client.complete("anything", AUTHORING_DECODING)

    def test_replay_client_from_file(self, tmp_path):
        path = tmp_path / "replies.json"
        path.write_text(json.dumps({prompt_hash("p"): "reply"}), encoding="utf-8")
        client = ReplayChatClient.from_file(path)
        assert client.complete("p", AUTHORING_DECODING) == "reply"

    def test_prompt_hash_is_stable_and_injective_enough(self):
        assert prompt_hash("ciao") == prompt_hash("ciao")
        assert prompt_hash("ciao") != prompt_hash("ciao ")
        assert len(prompt_hash("x")) == 64

    def test_http_client_posts_prompt_and_decoding(self, monkeypatch):
        seen = {}

        class FakeResponse:
            status_code = 200

            def json(self):
                return {"text": "A: uno\nB: due\nA: tre"}

        def fake_post(url, json=None, headers=None, timeout=None):
            seen.update(url=url, body=json, headers=headers, timeout=timeout)
            return FakeResponse()

        import requests

        monkeypatch.setattr(requests, "post", fake_post)
        client = HttpChatClient("http://chat.local/complete", token="tok", timeout=5.0)
        reply = client.complete("il prompt", SAMPLING_DECODING)
        assert reply == "A: uno\nB: due\nA: tre"
        assert seen["url"] == "http://chat.local/complete"
        assert seen["body"] == {
            "prompt": "il prompt",
            "top_p": 0.9,
            "temperature": 1.0,
            "repetition_penalty": 2.0,
        }
        assert seen["headers"]["Authorization"] == "Bearer tok"
        assert seen["timeout"] == 5.0

    def test_http_client_wraps_failures(self, monkeypatch):
        import requests

        class FakeResponse:
            status_code = 503

            def json(self):
                return {}

        monkeypatch.setattr(requests, "post", lambda *a, **k: FakeResponse())
        client = HttpChatClient("http://chat.local/complete")
        with pytest.raises(ChatTransportError, match="503"):
            client.complete("p", AUTHORING_DECODING)

        def raise_timeout(*a, **k):
            raise requests.ConnectionError("down")

        monkeypatch.setattr(requests, "post", raise_timeout)
        with pytest.raises(ChatTransportError, match="down"):
            client.complete("p", AUTHORING_DECODING)

    def test_http_client_rejects_malformed_reply(self, monkeypatch):
        import requests

        class FakeResponse:
            status_code = 200

            def json(self):
                return {"unexpected": True}

        monkeypatch.setattr(requests, "post", lambda *a, **k: FakeResponse())
        client = HttpChatClient("http://chat.local/complete")
        with pytest.raises(ChatTransportError, match="malformed"):
            client.complete("p", AUTHORING_DECODING)


class _ScriptedClient:
    """Returns queued replies per prompt hash; raises when queue says so."""

    def __init__(self, script):
        self.script = dict(script)
        self.calls = []

    def complete(self, prompt, decoding):
        self.calls.append(prompt)
        entry = self.script[prompt_hash(prompt)]
        if isinstance(entry, list):
            step = entry.pop(0)
        else:
            step = entry
        if step is None:
            raise ChatTransportError("flaky")
        return step


class TestGenerateBatch:
    def make_inputs(self, n):
        template = context_template()
        contexts = [f"contesto numero {i}" for i in range(n)]
        ids = [f"ctx-{i}" for i in range(n)]
        return template, contexts, ids

    def reply_for(self, i):
        return f"A: apertura {i}\nB: risposta {i}\nA: chiusura {i}"

    def test_happy_path_order_and_provenance(self):
        template, contexts, ids = self.make_inputs(3)
        script = {
            prompt_hash(render_prompt(template, c)): self.reply_for(i)
            for i, c in enumerate(contexts)
        }
        result = generate_batch(
            contexts, ids, template, AUTHORING_DECODING, _ScriptedClient(script)
        )
        assert [d.id for d in result.dialogues] == ids
        assert all(d.source is Source.MACHINE for d in result.dialogues)
        for i, d in enumerate(result.dialogues):
            assert d.provenance["context_id"] == f"ctx-{i}"
            assert d.provenance["template"] == "context_generate"
        assert result.rejections == []
        assert result.errors == []

    def test_mixed_rejections_kept(self):
        template, contexts, ids = self.make_inputs(3)
        script = {
            prompt_hash(render_prompt(template, contexts[0])): self.reply_for(0),
            prompt_hash(render_prompt(template, contexts[1])): "prosa senza turni",
            prompt_hash(render_prompt(template, contexts[2])): self.reply_for(2),
        }
        result = generate_batch(
            contexts, ids, template, AUTHORING_DECODING, _ScriptedClient(script)
        )
        assert [d.id for d in result.dialogues] == ["ctx-0", "ctx-2"]
        assert len(result.rejections) == 1
        assert result.rejections[0].context_id == "ctx-1"
        assert result.rejections[0].raw == "prosa senza turni"

    def test_retry_with_exponential_backoff(self):
        template, contexts, ids = self.make_inputs(1)
        key = prompt_hash(render_prompt(template, contexts[0]))
        script = {key: [None, None, self.reply_for(0)]}
        naps = []
        result = generate_batch(
            contexts,
            ids,
            template,
            AUTHORING_DECODING,
            _ScriptedClient(script),
            max_attempts=3,
            backoff_base=0.5,
            sleep=naps.append,
        )
        assert len(result.dialogues) == 1
        assert naps == [0.5, 1.0]

    def test_exhausted_retries_become_errors(self):
        template, contexts, ids = self.make_inputs(2)
        client = FailingChatClient("endpoint down")
        naps = []
        result = generate_batch(
            contexts,
            ids,
            template,
            AUTHORING_DECODING,
            client,
            max_attempts=3,
            sleep=naps.append,
        )
        assert result.dialogues == []
        assert [e.context_id for e in result.errors] == ids
        assert all("endpoint down" in e.message for e in result.errors)
        assert client.calls == 6
        assert len(naps) == 4  # 2 retries per item, no sleep after the last

    def test_concurrent_run_preserves_input_order(self):
        template, contexts, ids = self.make_inputs(8)
        script = {
            prompt_hash(render_prompt(template, c)): self.reply_for(i)
            for i, c in enumerate(contexts)
        }
        result = generate_batch(
            contexts,
            ids,
            template,
            AUTHORING_DECODING,
            _ScriptedClient(script),
            max_concurrency=4,
        )
        assert [d.id for d in result.dialogues] == ids

    def test_parallel_inputs_must_match(self):
        template, contexts, ids = self.make_inputs(2)
        with pytest.raises(ValueError):
            generate_batch(contexts, ids[:1], template, AUTHORING_DECODING, FailingChatClient())

    def test_result_is_a_plain_container(self):
        empty = BatchResult()
        assert (empty.dialogues, empty.rejections, empty.errors) == ([], [], [])
