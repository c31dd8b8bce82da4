"""currikit: curriculum corpus preparation for masked-LM pretraining.

Pipeline stages: ingest raw text, train a Unigram subword vocabulary, encode,
cut fixed-size context chunks, score six-feature linguistic complexity, order
(curriculum / none / reversed), partition into phased shards with a JSON
manifest, and transfer character embeddings to the subword vocabulary.
"""

__version__ = "0.1.0"

from .chunker import ContextSize, EncodedStream, TextChunk, chunk_stream, shuffle_chunks
from .complexity import (
    ComplexityScore,
    FeatureVector,
    FrequencyTable,
    MinMaxScaler,
    build_frequency_table,
    compute_features,
    fit_minmax,
    score,
    word_rarity,
)
from .config import Hyperparameters, PipelineConfig
from .corpus import Corpus, Document, SurfaceToken, TokenKind, load_corpus, split_sentences, tokenize_surface
from .scheduler import OrderingMode, build_plan, inspect_extremes, order_chunks, phase_partition
from .transfer import EmbeddingMatrix, TransferReport, read_embeddings, transfer_embeddings, write_embeddings
from .vocab import (
    UnigramModel,
    build_char_vocab,
    decode,
    em_step,
    encode_viterbi,
    prune,
    read_vocab,
    seed_candidates,
    train_unigram,
    write_vocab,
)
