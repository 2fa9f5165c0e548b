"""Sentence vectors behind a provider contract.

The built-in embedder is fully deterministic: a bag of candidate synsets.
Each known content word spreads unit weight uniformly across all of its
candidate senses, so no sense disambiguation happens at embedding time, yet
substituting a word with a lemma from one of its synsets still lands weight
on a shared dimension. Unknown words fall back to a stem dimension. The
remote provider trades this determinism for a real model behind the HTTP
contract of the model server.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Protocol

from . import remote
from .lexicon import LexicalDatabase
from .pipeline import lookup_lemma, porter_stem, remove_stopwords, tokenize

MODEL_SERVER_ENV = "SEMCOM_MODEL_SERVER_URL"
DEFAULT_TIMEOUT = 10.0


@dataclass(frozen=True)
class SentenceVector:
    """Sparse non-negative feature weights keyed by string dimension."""

    weights: dict = field(default_factory=dict)

    @classmethod
    def from_weights(cls, mapping) -> "SentenceVector":
        return cls({k: float(v) for k, v in mapping.items() if v != 0.0})

    def norm(self) -> float:
        return math.sqrt(sum(v * v for v in self.weights.values()))

    def is_zero(self) -> bool:
        return not self.weights


def cosine(a: SentenceVector, b: SentenceVector) -> float:
    """Standard cosine; 0.0 whenever either vector is zero (or underflows to it)."""
    scale = a.norm() * b.norm()
    if scale == 0.0:
        return 0.0
    small, large = (a.weights, b.weights) if len(a.weights) <= len(b.weights) else (b.weights, a.weights)
    dot = sum(v * large.get(k, 0.0) for k, v in small.items())
    return dot / scale


def embed_bag_of_synsets(db: LexicalDatabase, sentence: str) -> SentenceVector:
    """Deterministic sentence embedding over candidate-synset dimensions."""
    weights: dict[str, float] = {}
    for token in remove_stopwords(tokenize(sentence)):
        lemma = lookup_lemma(db, token.surface)
        senses = db.senses(lemma)
        if senses:
            share = 1.0 / len(senses)
            for sid in senses:
                key = str(sid)
                weights[key] = weights.get(key, 0.0) + share
        else:
            key = f"stem:{porter_stem(token.surface)}"
            weights[key] = weights.get(key, 0.0) + 1.0
    return SentenceVector.from_weights(weights)


class EmbeddingProvider(Protocol):
    identity: str

    def embed(self, sentences: list[str]) -> list[SentenceVector]:
        ...


class BagOfSynsetsEmbedder:
    """The deterministic built-in provider; pure function of (db, sentence)."""

    def __init__(self, db: LexicalDatabase):
        self._db = db
        self.identity = "bag-of-synsets/1"

    def embed(self, sentences: list[str]) -> list[SentenceVector]:
        return [embed_bag_of_synsets(self._db, s) for s in sentences]


def remote_embed(endpoint: str, sentences: list[str], timeout: float = DEFAULT_TIMEOUT) -> list[SentenceVector]:
    """POST /embed on the model server; dense vectors come back as e0, e1, ... keys."""
    payload = remote.post_json(endpoint, "/embed", {"texts": list(sentences)}, timeout)
    vectors = payload.get("vectors")
    if not isinstance(vectors, list):
        raise remote.ProtocolError("embed response missing 'vectors' list")
    if len(vectors) != len(sentences):
        raise remote.ProtocolError(
            f"embed response has {len(vectors)} vectors for {len(sentences)} texts"
        )
    out = []
    for vec in vectors:
        if not isinstance(vec, list) or not all(isinstance(x, (int, float)) and math.isfinite(x) for x in vec):
            raise remote.ProtocolError("embed response vector is not a list of finite numbers")
        out.append(SentenceVector.from_weights({f"e{i}": float(x) for i, x in enumerate(vec)}))
    return out


class RemoteEmbedder:
    """Client provider for the model server's /embed endpoint."""

    def __init__(self, endpoint: str, timeout: float = DEFAULT_TIMEOUT):
        self._endpoint = endpoint
        self._timeout = timeout
        self.identity = f"remote-embed:{endpoint}"

    def embed(self, sentences: list[str]) -> list[SentenceVector]:
        return remote_embed(self._endpoint, sentences, self._timeout)


def default_embedder(db: LexicalDatabase, env=os.environ) -> EmbeddingProvider:
    """Remote provider when SEMCOM_MODEL_SERVER_URL is set, else the built-in."""
    url = env.get(MODEL_SERVER_ENV)
    if url:
        return RemoteEmbedder(url)
    return BagOfSynsetsEmbedder(db)
