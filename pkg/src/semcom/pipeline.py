"""Deterministic preprocessing shared by sender and receiver.

Tokenization, stopword removal, Porter stemming, and extraction of the
polysemous word units whose senses the protocol compares. Both parties must
run byte-identical versions of these steps; the stopword list is a bundled
file whose digest travels in every frame header.
"""

from __future__ import annotations

import hashlib
import string
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Callable, Optional

from .lexicon import LexicalDatabase, SynsetId

_PUNCT = string.punctuation


@dataclass(frozen=True)
class Token:
    surface: str
    index: int


@dataclass(frozen=True)
class WordUnit:
    """A polysemous content word: the unit of word-level understanding."""

    token_index: int
    surface: str
    stem: str
    lookup_lemma: str
    candidates: tuple[SynsetId, ...]
    importance: float = 1.0

    @property
    def sense_count(self) -> int:
        return len(self.candidates)


def tokenize(text: str) -> list[Token]:
    """Whitespace split, outer ASCII punctuation stripped, lowercased.

    Tokens that strip to nothing are dropped and indices are assigned after
    dropping, so indices are always consecutive here.
    """
    out = []
    for chunk in text.split():
        word = chunk.strip(_PUNCT).lower()
        if word:
            out.append(Token(word, len(out)))
    return out


def default_stopwords_path():
    return resources.files("semcom").joinpath("data/stopwords.txt")


@lru_cache(maxsize=8)
def _load_stopwords_cached(path_key: Optional[str]) -> frozenset:
    data = stopwords_bytes(path_key)
    return frozenset(line.strip() for line in data.decode("utf-8").splitlines() if line.strip())


def load_stopwords(path=None) -> frozenset:
    return _load_stopwords_cached(str(path) if path is not None else None)


def stopwords_bytes(path=None) -> bytes:
    if path is None:
        return default_stopwords_path().read_bytes()
    with open(path, "rb") as fh:
        return fh.read()


def stopword_digest(path=None) -> bytes:
    """SHA-256 of the stopword file bytes; its first 4 bytes ride in frame headers."""
    return hashlib.sha256(stopwords_bytes(path)).digest()


def remove_stopwords(tokens: list[Token], stopwords=None) -> list[Token]:
    words = load_stopwords() if stopwords is None else stopwords
    return [t for t in tokens if t.surface not in words]


# --- Porter stemmer (original algorithm, steps 1a-5b) ---------------------

_VOWELS = set("aeiou")


def _is_consonant(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        return i == 0 or not _is_consonant(word, i - 1)
    return True


def _form(stem: str) -> str:
    runs = []
    for i in range(len(stem)):
        mark = "c" if _is_consonant(stem, i) else "v"
        if not runs or runs[-1] != mark:
            runs.append(mark)
    return "".join(runs)


def _measure(stem: str) -> int:
    return _form(stem).count("vc")


def _has_vowel(stem: str) -> bool:
    return "v" in _form(stem)


def _ends_double_consonant(word: str) -> bool:
    return len(word) >= 2 and word[-1] == word[-2] and _is_consonant(word, len(word) - 1)


def _ends_cvc(word: str) -> bool:
    if len(word) < 3 or word[-1] in "wxy":
        return False
    return (
        _is_consonant(word, len(word) - 3)
        and not _is_consonant(word, len(word) - 2)
        and _is_consonant(word, len(word) - 1)
    )


def _apply_rules(word: str, rules) -> str:
    """Apply the single rule with the longest matching suffix, if its condition holds."""
    for suffix, replacement, condition in sorted(rules, key=lambda r: -len(r[0])):
        if word.endswith(suffix):
            stem = word[: len(word) - len(suffix)]
            if condition is None or condition(stem):
                return stem + replacement
            return word
    return word


def _step1ab(word: str) -> str:
    word = _apply_rules(
        word,
        [("sses", "ss", None), ("ies", "i", None), ("ss", "ss", None), ("s", "", None)],
    )
    if word.endswith("eed"):
        stem = word[:-3]
        if _measure(stem) > 0:
            word = stem + "ee"
        return word
    fired = False
    for suffix in ("ed", "ing"):
        if word.endswith(suffix):
            stem = word[: len(word) - len(suffix)]
            if _has_vowel(stem):
                word = stem
                fired = True
            break
    if fired:
        if word.endswith(("at", "bl", "iz")):
            word += "e"
        elif _ends_double_consonant(word) and word[-1] not in "lsz":
            word = word[:-1]
        elif _measure(word) == 1 and _ends_cvc(word):
            word += "e"
    return word


def _step1c(word: str) -> str:
    if word.endswith("y") and _has_vowel(word[:-1]):
        return word[:-1] + "i"
    return word


_M_GT_0 = lambda stem: _measure(stem) > 0
_M_GT_1 = lambda stem: _measure(stem) > 1

_STEP2 = [
    ("ational", "ate", _M_GT_0), ("tional", "tion", _M_GT_0),
    ("enci", "ence", _M_GT_0), ("anci", "ance", _M_GT_0),
    ("izer", "ize", _M_GT_0), ("abli", "able", _M_GT_0),
    ("alli", "al", _M_GT_0), ("entli", "ent", _M_GT_0),
    ("eli", "e", _M_GT_0), ("ousli", "ous", _M_GT_0),
    ("ization", "ize", _M_GT_0), ("ation", "ate", _M_GT_0),
    ("ator", "ate", _M_GT_0), ("alism", "al", _M_GT_0),
    ("iveness", "ive", _M_GT_0), ("fulness", "ful", _M_GT_0),
    ("ousness", "ous", _M_GT_0), ("aliti", "al", _M_GT_0),
    ("iviti", "ive", _M_GT_0), ("biliti", "ble", _M_GT_0),
]

_STEP3 = [
    ("icate", "ic", _M_GT_0), ("ative", "", _M_GT_0), ("alize", "al", _M_GT_0),
    ("iciti", "ic", _M_GT_0), ("ical", "ic", _M_GT_0), ("ful", "", _M_GT_0),
    ("ness", "", _M_GT_0),
]

_STEP4 = [
    ("al", "", _M_GT_1), ("ance", "", _M_GT_1), ("ence", "", _M_GT_1),
    ("er", "", _M_GT_1), ("ic", "", _M_GT_1), ("able", "", _M_GT_1),
    ("ible", "", _M_GT_1), ("ant", "", _M_GT_1), ("ement", "", _M_GT_1),
    ("ment", "", _M_GT_1), ("ent", "", _M_GT_1),
    ("ion", "", lambda stem: _M_GT_1(stem) and stem[-1:] in ("s", "t")),
    ("ou", "", _M_GT_1), ("ism", "", _M_GT_1), ("ate", "", _M_GT_1),
    ("iti", "", _M_GT_1), ("ous", "", _M_GT_1), ("ive", "", _M_GT_1),
    ("ize", "", _M_GT_1),
]


def _step5(word: str) -> str:
    if word.endswith("e"):
        stem = word[:-1]
        m = _measure(stem)
        if m > 1 or (m == 1 and not _ends_cvc(stem)):
            word = stem
    if _measure(word) > 1 and _ends_double_consonant(word) and word.endswith("l"):
        word = word[:-1]
    return word


def porter_stem(word: str) -> str:
    """Porter stem of a lowercase ASCII-alphabetic word; other input returned as is."""
    if len(word) <= 2 or not word.isascii() or not word.isalpha() or not word.islower():
        return word
    word = _step1ab(word)
    word = _step1c(word)
    word = _apply_rules(word, _STEP2)
    word = _apply_rules(word, _STEP3)
    word = _apply_rules(word, _STEP4)
    return _step5(word)


# --- word unit extraction --------------------------------------------------


def lookup_lemma(db: LexicalDatabase, surface: str) -> str:
    """Surface form if the lexicon knows it, else its Porter stem."""
    return surface if db.senses(surface) else porter_stem(surface)


def extract_word_units(
    db: LexicalDatabase,
    sentence: str,
    importance: Optional[Callable[[Token], float]] = None,
    stopwords=None,
) -> list[WordUnit]:
    """The sentence's polysemous content words, in token order.

    Monosemous and out-of-lexicon words carry no sense choice and are
    dropped; a sentence may therefore yield no units at all. Importance
    defaults to 1.0 per unit unless a weighting hook is supplied.
    """
    units = []
    for token in remove_stopwords(tokenize(sentence), stopwords):
        lemma = lookup_lemma(db, token.surface)
        candidates = tuple(db.senses(lemma))
        if len(candidates) <= 1:
            continue
        weight = 1.0 if importance is None else float(importance(token))
        units.append(
            WordUnit(
                token_index=token.index,
                surface=token.surface,
                stem=porter_stem(token.surface),
                lookup_lemma=lemma,
                candidates=candidates,
                importance=weight,
            )
        )
    return units
