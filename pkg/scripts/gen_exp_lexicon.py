#!/usr/bin/env python3
"""Regenerate the experiment lexicon (fixtures/exp-wndb) and corpus.

The vocabulary is built so masking experiments have measurable structure:

* every corpus content word ("head") is polysemous, and its first listed
  sense is the intended one;
* the intended sense pairs the head with one monosemous synonym, so a
  receiver that understands the word can emit a substitute whose entire
  embedding weight lands on a dimension shared with the sender;
* wrong senses pair the head with synonyms that are themselves ambiguous
  (each also appears in a distractor synset), so misunderstanding leaks
  weight onto dimensions the sender never mentions.

The corpus is composed from validated five-token clauses; longer sentences
chain clauses with connectors so token counts are exact at 5, 15, and 25.
Running this script rewrites the fixtures and re-audits every property the
simulator relies on.
"""

from pathlib import Path

from semcom.lexicon import load_lexicon_dir
from semcom.pipeline import extract_word_units, tokenize

ROOT = Path(__file__).resolve().parents[1]
OUT_DB = ROOT / "fixtures" / "exp-wndb"
OUT_CORPUS = ROOT / "fixtures" / "corpus" / "sentences.txt"

# head word, monosemous synonym of the intended sense,
# then per wrong sense a pair of ambiguous synonyms.
VOCABULARY = [
    ("bank", "lender", [("verge", "brink"), ("tier", "row")]),
    ("spring", "fountain", [("coil", "recoil")]),
    ("light", "lamp", [("glow", "sheen")]),
    ("train", "railcar", [("tutor", "mentor")]),
    ("wave", "ripple", [("gesture", "salute")]),
    ("seal", "gasket", [("stamp", "imprint")]),
    ("match", "rival", [("bout", "fixture")]),
    ("park", "commons", [("depot", "lot")]),
    ("bar", "tavern", [("rod", "ingot")]),
    ("note", "memo", [("tone", "key")]),
    ("scale", "gauge", [("crust", "flake")]),
    ("ring", "circlet", [("chime", "peal")]),
    ("board", "plank", [("panel", "committee")]),
    ("pitch", "tar", [("toss", "lob")]),
    ("file", "dossier", [("rasp", "queue")]),
    ("track", "trail", [("groove", "rut")]),
    ("staff", "crew", [("cane", "wand")]),
    ("charge", "levy", [("rush", "assault")]),
    ("band", "ensemble", [("strip", "loop")]),
    ("post", "mail", [("pole", "stake")]),
    ("mine", "quarry", [("bomb", "shell")]),
    ("press", "media", [("crush", "squeeze")]),
    ("stock", "inventory", [("broth", "lineage")]),
    ("check", "audit", [("bill", "tab")]),
    ("bolt", "dash", [("screw", "rivet")]),
    ("crane", "hoist", [("heron", "stork")]),
    ("dock", "wharf", [("stand", "bench")]),
    ("fence", "paling", [("parry", "duel")]),
    ("grave", "tomb", [("solemn", "somber")]),
    ("hatch", "brood", [("trapdoor", "scuttle")]),
    ("jam", "marmalade", [("gridlock", "snarl")]),
    ("lap", "circuit", [("fold", "flap")]),
    ("mold", "fungus", [("cast", "form")]),
    ("nail", "spike", [("claw", "talon")]),
    ("pool", "pond", [("kitty", "fund")]),
    ("punch", "wallop", [("awl", "borer")]),
    ("race", "contest", [("current", "torrent")]),
    ("palm", "frond", [("hand", "paw")]),
    ("trunk", "torso", [("chest", "valise")]),
    ("vault", "strongroom", [("leap", "bound")]),
]

CATEGORIES = ["object", "act", "place", "state", "quality"]

CLAUSES = [
    "the bank near the spring",
    "a light above the train",
    "the wave broke the seal",
    "a match beside the park",
    "the bar took a note",
    "the scale hid the ring",
    "the board kept the pitch",
    "the file marked the track",
    "the staff paid the charge",
    "a band crossed the post",
    "the mine fed the press",
    "the stock passed the check",
    "a bolt struck the crane",
    "the dock faced the fence",
    "the grave hid the hatch",
    "the jam blocked the lap",
    "the mold stained the nail",
    "the pool swallowed the punch",
    "the race passed the palm",
    "the trunk filled the vault",
]

TAILS4 = [
    "deep in the dark", "far by the sea", "out at the gate", "right near the door",
    "high under the sky", "up on the hill", "just past the wall", "out at the edge",
    "lost in the fog", "down by the road", "soon after the storm", "just before the rain",
    "hard against the wind", "deep within the yard", "far beyond the river",
    "out along the path", "back behind the mill", "low beneath the tower",
    "deep inside the barn", "right around the bend",
]

TAILS2 = [
    "at dawn", "by night", "at noon", "in turn", "at last", "in peace",
    "at once", "in silence", "at dusk", "in spite", "at length", "in vain",
    "at sunrise", "by evening", "in daylight", "at midnight", "by morning",
    "in autumn", "at sundown", "by winter",
]


def build_synsets():
    """Yield (offset, lemmas, hypernym_offset, gloss) rows."""
    rows = []
    rows.append((1, ["entity"], None, "that which exists"))
    for i, name in enumerate(CATEGORIES):
        rows.append((101 + i, [name], 1, f"a broad class of {name}s"))
    seen = {}
    distractor = 50000
    for head_idx, (head, mono, wrong_senses) in enumerate(VOCABULARY):
        for word in [head, mono] + [w for pair in wrong_senses for w in pair]:
            assert seen.setdefault(word, head) == head, f"{word!r} reused across heads"
        base = 10000 + head_idx * 100
        category = 101 + (head_idx % len(CATEGORIES))
        rows.append((base, [head, mono], category, f"the {mono} sense of {head}"))
        for si, (syn_a, syn_b) in enumerate(wrong_senses, start=1):
            category_w = 101 + ((head_idx + si) % len(CATEGORIES))
            rows.append((base + si, [head, syn_a, syn_b], category_w, f"another sense of {head}"))
            for syn in (syn_a, syn_b):
                rows.append((distractor, [syn], 101, f"an unrelated sense of {syn}"))
                distractor += 1
    return rows


def write_db(rows):
    OUT_DB.mkdir(parents=True, exist_ok=True)
    header = "  1 Generated experiment lexicon in wndb plain-text format.\n"
    data_lines = [header]
    index: dict[str, list[int]] = {}
    for offset, lemmas, hypernym, gloss in rows:
        w_cnt = f"{len(lemmas):02x}"
        words = " ".join(f"{lemma} 0" for lemma in lemmas)
        if hypernym is None:
            ptr = "000"
        else:
            ptr = f"001 @ {hypernym:08d} n 0000"
        data_lines.append(f"{offset:08d} 03 n {w_cnt} {words} {ptr} | {gloss}\n")
        for lemma in lemmas:
            index.setdefault(lemma, []).append(offset)
    (OUT_DB / "data.noun").write_text("".join(data_lines), encoding="utf-8")
    index_lines = [header]
    for lemma in sorted(index):
        offsets = index[lemma]
        joined = " ".join(f"{o:08d}" for o in offsets)
        index_lines.append(f"{lemma} n {len(offsets)} 1 @ {len(offsets)} 0 {joined}\n")
    (OUT_DB / "index.noun").write_text("".join(index_lines), encoding="utf-8")


def build_corpus():
    assert len(CLAUSES) == len(TAILS4) == len(TAILS2) == 20
    sentences = [clause.capitalize() + "." for clause in CLAUSES]
    for i in range(20):
        a, b = CLAUSES[i], CLAUSES[(i + 7) % 20]
        sentence = f"{a} and {b} {TAILS4[i]}"
        sentences.append(sentence.capitalize() + ".")
    for i in range(20):
        a = CLAUSES[i]
        b = CLAUSES[(i + 5) % 20]
        c = CLAUSES[(i + 11) % 20]
        d = CLAUSES[(i + 16) % 20]
        sentence = f"{a} and {b} and {c} and {d} {TAILS2[i]}"
        sentences.append(sentence.capitalize() + ".")
    return sentences


def audit(sentences):
    db = load_lexicon_dir(OUT_DB)
    for head, mono, wrong_senses in VOCABULARY:
        f = 1 + len(wrong_senses)
        assert db.sense_count(head) == f, head
        assert db.sense_count(mono) == 1, mono
        first = db.senses(head)[0]
        assert db.lemmas_of(first) == [head, mono], head
        for syn_a, syn_b in wrong_senses:
            assert db.sense_count(syn_a) == 2, syn_a
            assert db.sense_count(syn_b) == 2, syn_b
    for lemma, pos in db.index:
        for sid in db.senses(lemma, pos):
            assert lemma in db.lemmas_of(sid), (lemma, sid)
    lengths = {5: 0, 15: 0, 25: 0}
    for sentence in sentences:
        n = len(tokenize(sentence))
        assert n in lengths, f"{n} tokens: {sentence!r}"
        lengths[n] += 1
        units = extract_word_units(db, sentence)
        assert len(units) >= 2, sentence
        for unit in units:
            assert unit.candidates[0] == db.senses(unit.lookup_lemma)[0]
    assert lengths == {5: 20, 15: 20, 25: 20}, lengths
    print(f"audit ok: {len(db.synsets)} synsets, "
          f"{len({lemma for lemma, _ in db.index})} lemmas, {sum(lengths.values())} sentences")


def main():
    rows = build_synsets()
    write_db(rows)
    sentences = build_corpus()
    OUT_CORPUS.parent.mkdir(parents=True, exist_ok=True)
    OUT_CORPUS.write_text("\n".join(sentences) + "\n", encoding="utf-8")
    audit(sentences)


if __name__ == "__main__":
    main()
