"""salid: two-stage text language identification for the 11 official South
African languages.

A character n-gram naive Bayes stage picks a language (and with it a language
family); a family-scoped lexicon dominance vote refines the choice between
closely related languages. The package also ships the corpus preparation,
evaluation and serialization machinery around the classifiers, plus a ``salid``
command line tool.
"""

from .corpus import (
    CorpusFormatError,
    DatasetSplit,
    InsufficientDataError,
    LabeledText,
    clean_text,
    corpora_by_language,
    group_by_language,
    load_corpus,
    save_corpus_tsv,
    split_train_test,
    truncate_word_boundary,
)
from .evaluation import (
    ClassMetrics,
    ConfusionMatrix,
    EvalReport,
    compare_external,
    emit_report,
    evaluate,
    length_sweep,
    report_from_json,
)
from .features import (
    BinaryNgramVectorizer,
    NGramVocabulary,
    build_vocabulary,
    extract_ngrams,
    texts_to_csr,
    vectorize,
)
from .languages import (
    ALL_FAMILIES,
    ALL_LANGUAGES,
    LanguageCode,
    LanguageFamily,
    UnknownLanguageError,
    family_members,
    family_of,
    parse_language,
)
from .lexicon import (
    Lexicon,
    LexiconVoteClassifier,
    build_lexicon,
    count_hits,
    dominant_language,
    load_lexicon,
    save_lexicon,
)
from .naive_bayes import CharNgramNaiveBayes, Prediction, load_model, save_model
from .stacked import (
    StackedLanguageClassifier,
    StackedPrediction,
    load_bundle,
    save_bundle,
)

__version__ = "1.0.0"

__all__ = [
    "__version__",
    # languages
    "LanguageCode",
    "LanguageFamily",
    "UnknownLanguageError",
    "ALL_LANGUAGES",
    "ALL_FAMILIES",
    "parse_language",
    "family_of",
    "family_members",
    # corpus
    "LabeledText",
    "DatasetSplit",
    "CorpusFormatError",
    "InsufficientDataError",
    "clean_text",
    "truncate_word_boundary",
    "load_corpus",
    "save_corpus_tsv",
    "group_by_language",
    "corpora_by_language",
    "split_train_test",
    # features
    "NGramVocabulary",
    "BinaryNgramVectorizer",
    "extract_ngrams",
    "build_vocabulary",
    "vectorize",
    "texts_to_csr",
    # classifiers
    "CharNgramNaiveBayes",
    "Prediction",
    "save_model",
    "load_model",
    "Lexicon",
    "LexiconVoteClassifier",
    "build_lexicon",
    "count_hits",
    "dominant_language",
    "save_lexicon",
    "load_lexicon",
    "StackedLanguageClassifier",
    "StackedPrediction",
    "save_bundle",
    "load_bundle",
    # evaluation
    "ConfusionMatrix",
    "ClassMetrics",
    "EvalReport",
    "evaluate",
    "length_sweep",
    "compare_external",
    "emit_report",
    "report_from_json",
]
