"""Embedding and paraphrase backends.

The hash backends run anywhere with zero model downloads and are fully
deterministic; the neural backends load pretrained models when weights are
available. All backends expose `name`, `ready`, and one inference method.
"""

from __future__ import annotations

import hashlib
import math
import re
import threading

_TOKEN_RE = re.compile(r"[a-z0-9']+")

MASK64 = (1 << 64) - 1


def _splitmix64(seed: int):
    state = seed & MASK64
    while True:
        state = (state + 0x9E3779B97F4A7C15) & MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        yield z ^ (z >> 31)


class HashEmbedBackend:
    """Random-indexing embedder: each token owns a pseudo-random unit vector.

    Sentences map to the normalized sum of their token vectors, so token
    overlap drives cosine similarity. Deterministic by construction.
    """

    def __init__(self, dim: int = 64):
        self.dim = dim
        self.name = f"hash-rindex-{dim}"
        self.ready = True
        self._cache: dict[str, list[float]] = {}

    def _token_vector(self, token: str) -> list[float]:
        cached = self._cache.get(token)
        if cached is not None:
            return cached
        seed = int.from_bytes(hashlib.sha256(token.encode("utf-8")).digest()[:8], "big")
        gen = _splitmix64(seed)
        raw = [((next(gen) >> 11) / (1 << 53)) * 2.0 - 1.0 for _ in range(self.dim)]
        norm = math.sqrt(sum(x * x for x in raw)) or 1.0
        vec = [x / norm for x in raw]
        self._cache[token] = vec
        return vec

    def embed(self, texts: list[str]) -> list[list[float]]:
        out = []
        for text in texts:
            tokens = _TOKEN_RE.findall(text.lower())
            acc = [0.0] * self.dim
            for token in tokens:
                for i, x in enumerate(self._token_vector(token)):
                    acc[i] += x
            norm = math.sqrt(sum(x * x for x in acc))
            out.append([x / norm for x in acc] if norm else acc)
        return out


class RotationParaphraseBackend:
    """Model-free paraphrase sampler: seeded token rotations and swaps.

    Variant 0 is always the text itself, so single-variant requests (used
    for reference restatements) are meaning-preserving.
    """

    def __init__(self):
        self.name = "rotation-sampler"
        self.ready = True

    def paraphrase(self, text: str, n: int, seed: int | None = None) -> list[str]:
        tokens = text.split()
        if len(tokens) < 2:
            return [text] * n
        gen = _splitmix64(0 if seed is None else seed)
        variants = [text]
        while len(variants) < n:
            k = len(variants)
            rotation = 1 + (next(gen) % (len(tokens) - 1)) if k else 0
            rotated = tokens[rotation:] + tokens[:rotation]
            swap = next(gen) % (len(tokens) - 1)
            rotated[swap], rotated[swap + 1] = rotated[swap + 1], rotated[swap]
            variants.append(" ".join(rotated))
        return variants[:n]


class SentenceTransformerBackend:
    """Dense embeddings from a pretrained sentence-transformers model."""

    def __init__(self, model_name: str):
        self.name = model_name
        self.ready = False
        self._model = None
        self._lock = threading.Lock()
        thread = threading.Thread(target=self._load, daemon=True)
        thread.start()

    def _load(self):
        from sentence_transformers import SentenceTransformer

        model = SentenceTransformer(self.name)
        with self._lock:
            self._model = model
            self.ready = True

    def embed(self, texts: list[str]) -> list[list[float]]:
        with self._lock:
            model = self._model
        if model is None:
            raise RuntimeError(f"model {self.name} is still loading")
        vectors = model.encode(texts, convert_to_numpy=True, normalize_embeddings=True)
        return [[float(x) for x in row] for row in vectors]


class Seq2SeqParaphraseBackend:
    """Sampled paraphrases from a pretrained seq2seq model."""

    def __init__(self, model_name: str):
        self.name = model_name
        self.ready = False
        self._pipe = None
        self._lock = threading.Lock()
        thread = threading.Thread(target=self._load, daemon=True)
        thread.start()

    def _load(self):
        from transformers import pipeline

        pipe = pipeline("text2text-generation", model=self.name)
        with self._lock:
            self._pipe = pipe
            self.ready = True

    def paraphrase(self, text: str, n: int, seed: int | None = None) -> list[str]:
        with self._lock:
            pipe = self._pipe
        if pipe is None:
            raise RuntimeError(f"model {self.name} is still loading")
        if seed is not None:
            import torch

            torch.manual_seed(seed)
        outputs = pipe(
            f"paraphrase: {text}",
            num_return_sequences=n,
            do_sample=True,
            num_beams=1,
            max_length=96,
        )
        return [o["generated_text"] for o in outputs]


def make_embed_backend(kind: str, model_name: str | None = None):
    if kind == "hash":
        return HashEmbedBackend()
    if kind == "minilm":
        return SentenceTransformerBackend(model_name or "sentence-transformers/all-MiniLM-L6-v2")
    raise ValueError(f"unknown embed backend {kind!r}")


def make_paraphrase_backend(kind: str, model_name: str | None = None):
    if kind == "rotation":
        return RotationParaphraseBackend()
    if kind == "seq2seq":
        return Seq2SeqParaphraseBackend(model_name or "humarin/chatgpt_paraphraser_on_T5_base")
    raise ValueError(f"unknown paraphrase backend {kind!r}")
