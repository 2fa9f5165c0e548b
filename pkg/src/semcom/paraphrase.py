"""Paraphrase providers, the top-k similarity filter, and variant selection.

The built-in generator substitutes synonyms from the shared lexicon: per
variant and per word it flips a fair coin to keep the surface form or to
pick a uniform sense and then a uniform lemma of that sense. Every draw
comes from an independent stream keyed by (seed, variant index, token
index), so generation is reproducible and insensitive to evaluation order.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Callable, Optional, Protocol, Sequence

from . import remote
from .dou import DouReport, sdou
from .lexicon import LexicalDatabase
from .pipeline import load_stopwords, lookup_lemma
from .rng import stream
from .similarity import DEFAULT_TIMEOUT, EmbeddingProvider

KEEP_PROBABILITY = 0.5
DEFAULT_VARIANT_COUNT = 35
DEFAULT_TOP_K = 20

_STRIP = string.punctuation


@dataclass(frozen=True)
class VariantSet:
    """l generated rewrites of one sentence; the original rides alongside."""

    original: str
    variants: tuple[str, ...]
    generator: str
    seed: Optional[int] = None


class TrialError(RuntimeError):
    """A candidate evaluation failed; the offending sentence is attached."""

    def __init__(self, candidate: str, cause: Exception):
        super().__init__(f"trial failed for candidate {candidate!r}: {cause}")
        self.candidate = candidate


def _normalize(chunk: str) -> str:
    return chunk.strip(_STRIP).lower()


def synonym_paraphrase(db: LexicalDatabase, sentence: str, l: int, seed: int) -> VariantSet:
    """l synonym-substitution variants of a sentence, reproducible from seed."""
    if l < 1:
        raise ValueError("variant count must be >= 1")
    stopwords = load_stopwords()
    raw_tokens = sentence.split()
    eligible: dict[int, list] = {}
    for i, chunk in enumerate(raw_tokens):
        word = _normalize(chunk)
        if not word or word in stopwords:
            continue
        senses = db.senses(lookup_lemma(db, word))
        if senses:
            eligible[i] = senses
    variants = []
    for k in range(l):
        tokens = list(raw_tokens)
        changed = False
        for i, senses in eligible.items():
            draw = stream(seed, k, i)
            if draw.random() < KEEP_PROBABILITY:
                continue
            synset = senses[draw.randrange(len(senses))]
            lemmas = db.lemmas_of(synset)
            replacement = lemmas[draw.randrange(len(lemmas))].replace("_", " ")
            if replacement != tokens[i]:
                tokens[i] = replacement
                changed = True
        variants.append(" ".join(tokens) if changed else sentence)
    return VariantSet(original=sentence, variants=tuple(variants), generator="synonym-subst/1", seed=seed)


class ParaphraseProvider(Protocol):
    identity: str

    def generate(self, sentence: str, l: int, seed: Optional[int] = None) -> VariantSet:
        ...

    def reference(self, sentence: str) -> str:
        """The provider's restatement of a sentence the sender fully understands."""
        ...


class SynonymParaphraser:
    """Deterministic built-in provider over the shared lexicon."""

    def __init__(self, db: LexicalDatabase, seed: int = 0):
        self._db = db
        self._seed = seed
        self.identity = "synonym-subst/1"

    def generate(self, sentence: str, l: int, seed: Optional[int] = None) -> VariantSet:
        return synonym_paraphrase(self._db, sentence, l, self._seed if seed is None else seed)

    def reference(self, sentence: str) -> str:
        # Deterministic mode transmits the sentence itself as the reference.
        return sentence


def remote_paraphrase(
    endpoint: str,
    sentence: str,
    l: int,
    timeout: float = DEFAULT_TIMEOUT,
    seed: Optional[int] = None,
) -> VariantSet:
    """POST /paraphrase on the model server; exactly l variants or ProtocolError."""
    body = {"text": sentence, "n": l}
    if seed is not None:
        body["seed"] = seed
    payload = remote.post_json(endpoint, "/paraphrase", body, timeout)
    variants = payload.get("variants")
    if not isinstance(variants, list) or not all(isinstance(v, str) for v in variants):
        raise remote.ProtocolError("paraphrase response missing 'variants' list of strings")
    if len(variants) != l:
        raise remote.ProtocolError(f"asked for {l} variants, server sent {len(variants)}")
    model = payload.get("model", "unknown")
    return VariantSet(original=sentence, variants=tuple(variants), generator=f"remote:{model}", seed=seed)


class RemoteParaphraser:
    """Client provider for the model server's /paraphrase endpoint."""

    def __init__(self, endpoint: str, timeout: float = DEFAULT_TIMEOUT):
        self._endpoint = endpoint
        self._timeout = timeout
        self.identity = f"remote-paraphrase:{endpoint}"

    def generate(self, sentence: str, l: int, seed: Optional[int] = None) -> VariantSet:
        return remote_paraphrase(self._endpoint, sentence, l, self._timeout, seed)

    def reference(self, sentence: str) -> str:
        return self.generate(sentence, 1).variants[0]


def filter_top_k(
    original: str,
    vs: VariantSet,
    provider: EmbeddingProvider,
    k: int,
) -> list[tuple[str, float]]:
    """Variants scored against the original, best first, ties by variant order."""
    if k < 1:
        raise ValueError("k must be >= 1")
    vectors = provider.embed([original, *vs.variants])
    origin, rest = vectors[0], vectors[1:]
    scored = [(variant, sdou(origin, vec)) for variant, vec in zip(vs.variants, rest)]
    ranked = sorted(range(len(scored)), key=lambda i: (-scored[i][1], i))
    return [scored[i] for i in ranked[: min(k, len(scored))]]


def select_best_transmission(
    original: str,
    candidates: Sequence[str],
    trial: Callable[[str], DouReport],
) -> tuple[str, DouReport]:
    """Evaluate every candidate (the original first) and keep the lowest objective.

    The original is always prepended, so the chosen transmission can never
    score worse than sending the sentence unmodified.
    """
    if not candidates:
        raise ValueError("candidate list must be non-empty")
    pool = [original, *candidates]
    best: Optional[tuple[str, DouReport]] = None
    for candidate in pool:
        try:
            report = trial(candidate)
        except Exception as exc:
            raise TrialError(candidate, exc) from exc
        if best is None or report.objective_f < best[1].objective_f:
            best = (candidate, report)
    return best
