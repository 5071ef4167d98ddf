"""Author new dialogues with a chat model, fully offline: prompt
rendering, replayed completions, reply parsing with label normalization,
and batch generation with retry accounting.

Swap ReplayChatClient for HttpChatClient(url, token) to hit a live
chat endpoint; nothing else changes.
"""

from dialkit import Dialogue, Turn
from dialkit.authoring import (
    AUTHORING_DECODING,
    FailingChatClient,
    ReplayChatClient,
    context_template,
    dialogue_as_text,
    generate_batch,
    parse_generated,
    prompt_hash,
    render_prompt,
    rewrite_template,
)

# Two flows, two templates. Context generation invents a dialogue from a
# situation description; rewrite recasts an existing dialogue. Their
# outputs are labeled LLM and H+LLM respectively.
ctx_tpl = context_template("it")
rw_tpl = rewrite_template("it")
print(f"{ctx_tpl.kind}: payload slot {ctx_tpl.placeholder}, "
      f"output source {ctx_tpl.output_source.value}")
print(f"{rw_tpl.kind}: payload slot {rw_tpl.placeholder}, "
      f"output source {rw_tpl.output_source.value}")

context = ("Un cliente chiede al farmacista qualcosa per il mal di gola "
           "prima di un viaggio.")
prompt = render_prompt(ctx_tpl, context)
print("\nprompt tail:", prompt.splitlines()[-1][:60], "...")

# Model replies: free text before the header describes the characters;
# speaker-labeled lines after it are the dialogue body. Labels are
# whatever the model picked; parsing maps them onto S1/S2 by frequency
# and keeps the originals in provenance.
REPLY = """Paolo è un cliente frettoloso. Gianna è la farmacista.

Dialogo:
Paolo: Buongiorno, parto stasera e ho la gola in fiamme.
Gianna: Le preparo uno spray e delle pastiglie al miele.
Paolo: Le pastiglie posso portarle in aereo?
Gianna: Certo, sono sotto i cento millilitri... anzi, sono solide!
Paolo: Perfetto, prendo entrambi.
Gianna: Buon viaggio, e beva molto.
"""
descriptions, generated = parse_generated(REPLY, id="farmacia-1")
print("\ncharacters:", descriptions.splitlines()[0])
print("speakers normalized:", generated.provenance["speaker_labels"])
for turn in generated.turns[:2]:
    print(f"  {turn.speaker}: {turn.text}")

# A replay client answers from a recorded prompt-hash -> reply table, so
# batches are reproducible and testable without network access.
contexts = [context, "Due amici discutono quale film vedere stasera."]
replies = {prompt_hash(render_prompt(ctx_tpl, c)): REPLY for c in contexts}
client = ReplayChatClient(replies)

result = generate_batch(
    contexts,
    ids=["farmacia-1", "cinema-1"],
    template=ctx_tpl,
    decoding=AUTHORING_DECODING,
    client=client,
)
print(f"\nbatch: {len(result.dialogues)} generated, "
      f"{len(result.rejections)} rejected, {len(result.errors)} failed")

# Transport failures retry with backoff, then land in errors; the batch
# itself never raises. (sleep is injected here to keep the demo instant.)
result = generate_batch(
    ["qualunque contesto"], ["boom-1"], ctx_tpl, AUTHORING_DECODING,
    FailingChatClient("endpoint unreachable"), sleep=lambda s: None,
)
print("failure accounting:", result.errors[0].context_id,
      "->", result.errors[0].message)

# The rewrite flow feeds an existing dialogue back through the model.
seed = Dialogue("seed-1", "H", (
    Turn("S1", "Allora, andiamo al mare domenica?"),
    Turn("S2", "Solo se non piove."),
    Turn("S1", "Controllo subito le previsioni."),
))
rw_prompt = render_prompt(rw_tpl, dialogue_as_text(seed))
print("\nrewrite payload embedded:", seed.turns[0].text in rw_prompt)
