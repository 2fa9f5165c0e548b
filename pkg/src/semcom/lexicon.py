"""WordNet-style lexical database: wndb plain-text parsing and sense queries.

Both communication parties share one of these databases; it is the source
of per-word sense inventories (and their counts), synonym lemmas, and the
hypernym taxonomy used for path similarity. Only hypernym pointers (`@`)
are retained; everything else in the data files is skipped.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

POS_TAGS = ("n", "v", "a", "r", "s")
MAX_OFFSET = 10**8


class FormatError(ValueError):
    """Malformed wndb line; carries file path and 1-based line number."""

    def __init__(self, path, lineno: int, message: str):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = str(path)
        self.lineno = lineno


class DanglingReferenceError(ValueError):
    """An index entry or hypernym pointer cites a synset that was never loaded."""


class UnknownSynsetError(KeyError):
    """Query for a synset id that does not resolve in this database."""


@dataclass(frozen=True, order=True)
class SynsetId:
    pos: str
    offset: int

    def __post_init__(self):
        if self.pos not in POS_TAGS:
            raise ValueError(f"bad pos tag {self.pos!r}")
        if not 0 <= self.offset < MAX_OFFSET:
            raise ValueError(f"offset {self.offset} out of range")

    def __str__(self) -> str:
        return f"{self.pos}:{self.offset:08d}"

    @classmethod
    def parse(cls, text: str) -> "SynsetId":
        pos, _, offset = text.partition(":")
        return cls(pos, int(offset))


@dataclass(frozen=True)
class Synset:
    id: SynsetId
    lemmas: tuple[str, ...]
    gloss: str
    hypernyms: tuple[SynsetId, ...]


class LexicalDatabase:
    """Immutable lemma->senses index plus synset records.

    `index` is keyed by (lemma, pos-as-written-in-index-file); `synsets` by
    the id derived from the data files. Adjective satellites keep `s` as
    their identity pos but are found by `a` lookups.
    """

    def __init__(self, index, synsets):
        self._index = dict(index)
        self._synsets = dict(synsets)

    @property
    def synsets(self):
        return self._synsets

    @property
    def index(self):
        return self._index

    def _index_list(self, lemma: str, pos: str) -> tuple[SynsetId, ...]:
        return self._index.get((lemma, pos), ())

    def senses(self, lemma: str, pos: Optional[str] = None) -> list[SynsetId]:
        """Sense-ordered synset ids for a lemma; [] when unknown.

        Lookup normalizes case and spaces, merges `a` and `s`, and with no
        pos concatenates in the fixed order n, v, a, r, s.
        """
        lemma = normalize_lemma(lemma)
        if pos is None:
            out = []
            for tag in POS_TAGS:
                out.extend(self._index_list(lemma, tag))
            return out
        if pos in ("a", "s"):
            return list(self._index_list(lemma, "a") + self._index_list(lemma, "s"))
        return list(self._index_list(lemma, pos))

    def sense_count(self, lemma: str) -> int:
        return len(self.senses(lemma))

    def synset(self, sid: SynsetId) -> Synset:
        found = self._synsets.get(sid)
        if found is None and sid.pos in ("a", "s"):
            sibling = SynsetId("s" if sid.pos == "a" else "a", sid.offset)
            found = self._synsets.get(sibling)
        if found is None:
            raise UnknownSynsetError(str(sid))
        return found

    def lemmas_of(self, sid: SynsetId) -> list[str]:
        return list(self.synset(sid).lemmas)

    def path_similarity(self, a: SynsetId, b: SynsetId) -> float:
        """1 / (1 + L) for the shortest undirected hypernym-graph path; 0 if none."""
        a = self.synset(a).id
        b = self.synset(b).id
        if a == b:
            return 1.0
        dist = self._shortest_path(a, b)
        return 0.0 if dist is None else 1.0 / (1.0 + dist)

    def _neighbors(self, sid: SynsetId):
        edges = self._edges
        return edges.get(sid, ())

    def _shortest_path(self, a: SynsetId, b: SynsetId) -> Optional[int]:
        seen = {a}
        frontier = deque([(a, 0)])
        while frontier:
            node, d = frontier.popleft()
            for nxt in self._neighbors(node):
                if nxt == b:
                    return d + 1
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append((nxt, d + 1))
        return None

    @property
    def _edges(self):
        edges = getattr(self, "_edge_cache", None)
        if edges is None:
            edges = {}
            for sid, syn in self._synsets.items():
                for hyp in syn.hypernyms:
                    hyp = self.synset(hyp).id
                    edges.setdefault(sid, set()).add(hyp)
                    edges.setdefault(hyp, set()).add(sid)
            self._edge_cache = edges
        return edges


def normalize_lemma(lemma: str) -> str:
    return lemma.strip().lower().replace(" ", "_")


def _data_lines(path):
    # License/comment header lines in wndb files start with whitespace.
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip() or raw[0] == " ":
                continue
            yield lineno, raw.rstrip("\n")


def _parse_offset(path, lineno: int, token: str) -> int:
    if not token.isdigit():
        raise FormatError(path, lineno, f"non-numeric synset offset {token!r}")
    value = int(token)
    if value >= MAX_OFFSET:
        raise FormatError(path, lineno, f"synset offset {value} >= 10^8")
    return value


def _parse_data_line(path, lineno: int, line: str):
    body, _, gloss = line.partition(" | ")
    fields = body.split()
    try:
        offset = _parse_offset(path, lineno, fields[0])
        ss_type = fields[2]
        if ss_type not in POS_TAGS:
            raise FormatError(path, lineno, f"bad ss_type {ss_type!r}")
        w_cnt = int(fields[3], 16)
        if w_cnt < 1:
            raise FormatError(path, lineno, "synset has no words")
        words = []
        for i in range(w_cnt):
            word = fields[4 + 2 * i]
            # Strip adjective syntax markers like "(p)"; keep inner punctuation.
            if word.endswith(")") and "(" in word:
                word = word[: word.rindex("(")]
            word = word.lower()
            if word and word not in words:
                words.append(word)
        cursor = 4 + 2 * w_cnt
        p_cnt = int(fields[cursor])
        hypernyms = []
        for i in range(p_cnt):
            sym, ptr_offset, ptr_pos = fields[cursor + 1 + 4 * i : cursor + 4 + 4 * i]
            if sym == "@":
                hypernyms.append(SynsetId(ptr_pos, _parse_offset(path, lineno, ptr_offset)))
        # Verb frame section and anything after the pointers is ignored.
    except FormatError:
        raise
    except (IndexError, ValueError) as exc:
        raise FormatError(path, lineno, f"malformed data line: {exc}") from None
    sid = SynsetId(ss_type, offset)
    return sid, tuple(words), gloss.strip(), tuple(hypernyms)


def _parse_index_line(path, lineno: int, line: str):
    fields = line.split()
    try:
        lemma = normalize_lemma(fields[0])
        pos = fields[1]
        if pos not in POS_TAGS:
            raise FormatError(path, lineno, f"bad pos {pos!r}")
        synset_cnt = int(fields[2])
        p_cnt = int(fields[3])
        offsets_at = 6 + p_cnt  # skip ptr symbols, sense_cnt, tagsense_cnt
        int(fields[offsets_at - 2])
        int(fields[offsets_at - 1])
        raw_offsets = fields[offsets_at : offsets_at + synset_cnt]
        if len(raw_offsets) != synset_cnt:
            raise FormatError(path, lineno, f"expected {synset_cnt} offsets, found {len(raw_offsets)}")
        offsets = [_parse_offset(path, lineno, tok) for tok in raw_offsets]
    except FormatError:
        raise
    except (IndexError, ValueError) as exc:
        raise FormatError(path, lineno, f"malformed index line: {exc}") from None
    if len(set(offsets)) != len(offsets):
        raise FormatError(path, lineno, f"duplicate sense offsets for {lemma!r}")
    return lemma, pos, offsets


def load_lexicon(index_paths: Iterable, data_paths: Iterable) -> LexicalDatabase:
    """Parse wndb index/data files into an immutable LexicalDatabase.

    Raises OSError for unreadable paths, FormatError (with path:line) for
    malformed lines, and DanglingReferenceError when an index entry or a
    hypernym pointer cites an offset absent from the data files.
    """
    synsets: dict[SynsetId, Synset] = {}
    for path in data_paths:
        for lineno, line in _data_lines(path):
            sid, words, gloss, hypernyms = _parse_data_line(path, lineno, line)
            if sid in synsets:
                raise FormatError(path, lineno, f"duplicate synset {sid}")
            synsets[sid] = Synset(sid, words, gloss, hypernyms)

    def resolve(pos: str, offset: int) -> Optional[SynsetId]:
        sid = SynsetId(pos, offset)
        if sid in synsets:
            return sid
        if pos in ("a", "s"):
            sibling = SynsetId("s" if pos == "a" else "a", offset)
            if sibling in synsets:
                return sibling
        return None

    for syn in synsets.values():
        for hyp in syn.hypernyms:
            if resolve(hyp.pos, hyp.offset) is None:
                raise DanglingReferenceError(f"hypernym {hyp} of {syn.id} not in database")

    index: dict[tuple[str, str], tuple[SynsetId, ...]] = {}
    for path in index_paths:
        for lineno, line in _data_lines(path):
            lemma, pos, offsets = _parse_index_line(path, lineno, line)
            resolved = []
            for offset in offsets:
                sid = resolve(pos, offset)
                if sid is None:
                    raise DanglingReferenceError(
                        f"{path}:{lineno}: index entry {lemma!r} cites missing synset {pos}:{offset:08d}"
                    )
                resolved.append(sid)
            key = (lemma, pos)
            merged = list(index.get(key, ())) + resolved
            deduped = tuple(dict.fromkeys(merged))
            index[key] = deduped
    return LexicalDatabase(index, synsets)


def load_lexicon_dir(directory) -> LexicalDatabase:
    """Load the conventional eight wndb files from one directory."""
    directory = Path(directory)
    suffixes = ("noun", "verb", "adj", "adv")
    index_paths = [directory / f"index.{s}" for s in suffixes if (directory / f"index.{s}").exists()]
    data_paths = [directory / f"data.{s}" for s in suffixes if (directory / f"data.{s}").exists()]
    if not index_paths or not data_paths:
        raise FileNotFoundError(f"no wndb index/data files under {directory}")
    return load_lexicon(index_paths, data_paths)
