"""
smilesqa - SMILES quality assurance toolkit
Parsing, validation, tokenization, scaffolds and evaluation statistics for
chemical language model corpora
"""

__version__ = "0.1.0"

from .evalharness import (
    CvPlan,
    MetricSummary,
    PairwiseComparison,
    auc_roc,
    class_weights,
    compare_matrix,
    hyperparameter_grid,
    macro_auc_ovr,
    mcc,
    plan_cv,
    select_best,
    summarize,
    summarize_runs,
    welch_t,
)
from .genmetrics import EvaluationReport, ReferenceIndex, build_reference, evaluate_corpus, report_table
from .scaffold import (
    ScaffoldKey,
    SplitPlan,
    ZipfFit,
    murcko_scaffold,
    random_split,
    scaffold_jaccard_matrix,
    scaffold_set_jaccard,
    scaffold_split,
    zipf_fit,
)
from .smiles_graph import (
    Atom,
    Bond,
    BondOrder,
    Chirality,
    MolecularGraph,
    canonical_key,
    canonical_smiles,
    kekulize,
    parse_smiles,
    standardize_corpus,
    to_smiles,
)
from .taxonomy import (
    CATEGORIES,
    DomainError,
    ErrorCategory,
    ErrorKind,
    KekulizationFailure,
    SmilesParseError,
    SmilesQAError,
    SmilesSyntaxError,
    ValenceError,
    VocabularyError,
)
from .tokenizers import (
    MergeList,
    Scheme,
    TokenSequence,
    Tokenizer,
    Vocabulary,
    decode,
    encode,
    tokenize_ais,
    tokenize_bpe,
    tokenize_char,
    train_bpe,
    vocab_jaccard,
)
from .validator import ErrorProfile, ValidationMode, ValidationOutcome, classify_long_range, error_profile, validate
