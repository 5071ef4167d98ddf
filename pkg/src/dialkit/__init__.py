"""dialkit: dialogue corpus curation and evaluation toolkit.

Builds two-speaker dialogue corpora from film scripts and chat-model output,
supports the human post-editing workflow (validation service, edit diffing,
HTER), and evaluates corpora and language models over them (repetition rate,
derailment, conditional turn perplexity, rank accuracy, survey assembly).
"""

from .model import (
    Dialogue,
    EditStatus,
    MetricConfig,
    Source,
    Turn,
    ValidationReport,
    Violation,
    merge_consecutive_turns,
    validate_dialogue,
)
from .corpus import (
    CorpusFormatError,
    dialogue_to_obj,
    dumps_dialogue,
    read_corpus,
    write_corpus,
)
from .metrics import (
    BleuScore,
    RRResult,
    bleu,
    cap_turn_count,
    detect_derailment,
    repetition_rate,
    token_stream,
    tokenize,
    truncate_last_fraction,
)
from .extract import (
    ExtractionConfig,
    ExtractionSummary,
    Scene,
    ScriptParse,
    dynamic_sliding_window,
    extract_corpus,
    parse_script,
)
from .authoring import (
    AUTHORING_DECODING,
    SAMPLING_DECODING,
    BatchResult,
    ChatClient,
    ChatTransportError,
    DecodingConfig,
    FailingChatClient,
    GenerationError,
    HttpChatClient,
    ParseRejection,
    PromptTemplate,
    ReplayChatClient,
    context_template,
    dialogue_as_text,
    generate_batch,
    parse_generated,
    prompt_hash,
    render_prompt,
    rewrite_template,
)
from .postedit import (
    EditBreakdown,
    GroupAggregate,
    PostEditRecord,
    TurnAlignment,
    aggregate_postedit_stats,
    align_and_classify,
    align_turns,
    diff_corpora,
    hter,
    word_edit_distance,
)
from .stats import (
    SOURCE_ORDER,
    CorpusStats,
    GroupStats,
    TimingEntry,
    corpus_stats,
    productivity,
    read_timing_log,
    write_timing_log,
)
from .partition import (
    CorpusPartition,
    MatchedSample,
    largest_remainder_counts,
    matched_original_sample,
    stratified_split,
    write_splits,
)
from .lmeval import (
    BigramScorer,
    DialogueScores,
    EvalReport,
    LookupScorer,
    SubprocessScorer,
    TokenScorer,
    UniformScorer,
    accuracy_at_n,
    conditional_turn_perplexity,
    eval_suite,
    score_dialogue,
)
from .survey import (
    EditIntensityLabel,
    Rating,
    RatingsReport,
    Survey,
    aggregate_ratings,
    build_surveys,
    edit_intensity_split,
    export_surveys,
    length_stratum,
    read_ratings_csv,
    survey_payload,
    write_ratings_csv,
)

__version__ = "0.1.0"

__all__ = [
    "AUTHORING_DECODING",
    "BatchResult",
    "BigramScorer",
    "BleuScore",
    "ChatClient",
    "ChatTransportError",
    "CorpusFormatError",
    "CorpusPartition",
    "CorpusStats",
    "DecodingConfig",
    "Dialogue",
    "DialogueScores",
    "EditBreakdown",
    "EditIntensityLabel",
    "EditStatus",
    "EvalReport",
    "ExtractionConfig",
    "ExtractionSummary",
    "FailingChatClient",
    "GenerationError",
    "GroupAggregate",
    "GroupStats",
    "HttpChatClient",
    "LookupScorer",
    "MatchedSample",
    "MetricConfig",
    "ParseRejection",
    "PostEditRecord",
    "PromptTemplate",
    "RRResult",
    "Rating",
    "RatingsReport",
    "ReplayChatClient",
    "SAMPLING_DECODING",
    "SOURCE_ORDER",
    "Scene",
    "ScriptParse",
    "Source",
    "SubprocessScorer",
    "Survey",
    "TimingEntry",
    "TokenScorer",
    "Turn",
    "TurnAlignment",
    "UniformScorer",
    "ValidationReport",
    "Violation",
    "accuracy_at_n",
    "aggregate_postedit_stats",
    "aggregate_ratings",
    "align_and_classify",
    "align_turns",
    "bleu",
    "build_surveys",
    "cap_turn_count",
    "conditional_turn_perplexity",
    "context_template",
    "corpus_stats",
    "detect_derailment",
    "dialogue_as_text",
    "dialogue_to_obj",
    "diff_corpora",
    "dumps_dialogue",
    "dynamic_sliding_window",
    "edit_intensity_split",
    "eval_suite",
    "export_surveys",
    "extract_corpus",
    "generate_batch",
    "hter",
    "largest_remainder_counts",
    "length_stratum",
    "matched_original_sample",
    "merge_consecutive_turns",
    "parse_generated",
    "parse_script",
    "productivity",
    "prompt_hash",
    "read_corpus",
    "read_ratings_csv",
    "read_timing_log",
    "render_prompt",
    "repetition_rate",
    "rewrite_template",
    "score_dialogue",
    "stratified_split",
    "survey_payload",
    "token_stream",
    "tokenize",
    "truncate_last_fraction",
    "validate_dialogue",
    "word_edit_distance",
    "write_corpus",
    "write_ratings_csv",
    "write_splits",
    "write_timing_log",
]
