"""Two-level degree-of-understanding measurement for M2M semantic communication.

Word-level understanding is validated by semantic checksums over a shared
lexical database and scored by importance- and difficulty-weighted sense
agreement; sentence-level understanding by cosine similarity between the
parties' restatements. A feedback wire protocol carries both stages, and a
seeded simulator reproduces the masking and paraphrase-optimization
behavior as controlled experiments.
"""

from .dou import DouReport, MeaningSelection, difficulty_vector, match_vector, objective, sdou, wdou
from .lexicon import LexicalDatabase, Synset, SynsetId, load_lexicon, load_lexicon_dir
from .paraphrase import (
    SynonymParaphraser,
    VariantSet,
    filter_top_k,
    select_best_transmission,
    synonym_paraphrase,
)
from .pipeline import Token, WordUnit, extract_word_units, porter_stem, remove_stopwords, tokenize
from .protocol import (
    FrameCodec,
    PerfectReceiver,
    Providers,
    SenderPolicy,
    SessionReport,
    compute_checksum,
    receiver_run,
    run_local_session,
    sender_run,
)
from .similarity import BagOfSynsetsEmbedder, SentenceVector, cosine, embed_bag_of_synsets
from .simulator import (
    ExperimentConfig,
    ImpairedReceiver,
    ImpairmentConfig,
    impair,
    run_experiment_a,
    run_experiment_b,
)

__version__ = "0.1.0"
