"""Token-level hallucination detection toolkit.

Synthetic labeled-data generation (noise, infill, edit-distance pseudo
labels), training-example assembly, and the measurement stack (PRF,
sentence scores, correlations, agreement, alignment baseline).
"""

from .corpus import (
    MASK_TOKEN,
    RATINGS,
    SEP_TOKEN,
    AnnotationRecord,
    BitextRecord,
    EvalRecord,
    LabeledSeq,
    TokenSeq,
    consolidate_annotations,
    gather_annotations,
    load_annotation_file,
    load_bitext,
    load_eval_records,
    majority_vote,
    parse_annotation_line,
    serialize_annotation_line,
    write_annotation_file,
    write_bitext_tsv,
    write_eval_records,
)
from .errors import (
    DegenerateMetricError,
    HallucError,
    ParseError,
    ProtocolError,
    RemoteServiceError,
    SentinelOutputError,
    TransportError,
)
from .infill import (
    InfillRequest,
    InfillResult,
    RemoteInfiller,
    infill_identity,
    infill_stochastic,
    make_infiller,
)
from .labeling import (
    EditOp,
    EditScript,
    MlmExample,
    SubwordMap,
    SynthesisOutput,
    TrainConfig,
    TrainingExample,
    assign_labels,
    build_synthetic_dataset,
    edit_script,
    make_mlm_example,
    make_training_example,
    project_word_labels,
)
from .metrics import (
    EvalReport,
    RatingMatrix,
    TokenPRF,
    align_score,
    build_report,
    corpus_hallucination_pct,
    corpus_token_prf,
    fleiss_kappa,
    harden,
    identity_similarity,
    ingest_external_score,
    sentence_score_prob,
    sentence_score_ratio,
    spearman,
    token_prf,
    token_rating_matrix,
    sentence_rating_matrix,
    write_report,
)
from .noising import (
    NoiseConfig,
    NoisedSeq,
    SampledRates,
    Vocab,
    apply_noise,
    build_vocab,
    record_rng,
    sample_rates,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
