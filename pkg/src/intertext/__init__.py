"""Cross-lingual sentence-embedding distillation and exact cosine retrieval.

Pipeline: ingest parallel corpora, distill a frozen teacher embedding store
into a small student encoder so that translations land near each other,
then evaluate translation-retrieval accuracy and search verse corpora.
"""

from .corpus import (
    CitedLine,
    PairRecord,
    SplitSpec,
    align_lines,
    deduplicate,
    merge_augmented,
    parse_cited_jsonl,
    parse_pairs_jsonl,
    split,
    stats,
    write_cited_jsonl,
    write_pairs_jsonl,
)
from .encoder import (
    EncoderConfig,
    StudentModel,
    encode,
    encode_batch,
    featurize,
    init_student,
    load_model,
    save_model,
)
from .errors import (
    CorpusError,
    EvalError,
    IntertextError,
    SearchError,
    StoreFormatError,
    TrainingError,
)
from .evaluation import (
    CaseHit,
    CaseStudyRow,
    EvalReport,
    evaluate_encoder,
    evaluate_model,
    render_case_study,
    render_report,
    run_case_study,
    translation_accuracy,
)
from .index import Hit, VectorIndex, build, cosine, load_index, save_index, top_k
from .teacher import (
    EmbeddingStore,
    load_store,
    lookup,
    pseudo_store,
    pseudo_teacher,
    save_store,
)
from .trainer import (
    AdamWState,
    EpochRecord,
    Gradients,
    TrainingBatch,
    TrainingConfig,
    TrainingHistory,
    adamw_step,
    distill_loss,
    init_opt_state,
    loss_gradients,
    lr_at,
    select_best,
    train,
)

__version__ = "0.1.0"
