import re

import pytest
from hypothesis import given, strategies as st

from semcom.lexicon import (
    DanglingReferenceError,
    FormatError,
    SynsetId,
    UnknownSynsetError,
    load_lexicon,
    load_lexicon_dir,
)

from conftest import FIXTURES

MINI = FIXTURES / "mini-wndb"


def test_fixture_counts(mini_db):
    assert len({lemma for lemma, _ in mini_db.index}) == 12
    assert len(mini_db.synsets) == 20


def test_senses_bank(mini_db):
    assert [str(s) for s in mini_db.senses("bank", "n")] == ["n:00001001", "n:00001002"]


def test_senses_case_insensitive(mini_db):
    assert mini_db.senses("Bank", "n") == mini_db.senses("bank", "n")


def test_senses_unknown_lemma(mini_db):
    assert mini_db.senses("zzzz") == []


def test_senses_space_normalization(mini_db):
    assert mini_db.senses("depository institution") == mini_db.senses("depository_institution")


def test_sense_counts(mini_db):
    assert mini_db.sense_count("bank") == 2
    assert mini_db.sense_count("run") == 3
    assert mini_db.sense_count("zzzz") == 0


def test_lemmas_of(mini_db):
    assert mini_db.lemmas_of(SynsetId("n", 1001)) == ["bank", "depository_institution"]
    assert mini_db.lemmas_of(SynsetId("n", 5003)) == ["club"]
    with pytest.raises(UnknownSynsetError):
        mini_db.lemmas_of(SynsetId("n", 99999999))


def test_satellite_merged_for_lookup(mini_db):
    ids = mini_db.senses("steep", "a")
    assert [str(s) for s in ids] == ["a:20001001", "s:20001002"]
    assert mini_db.senses("steep", "s") == ids
    assert mini_db.senses("steep") == ids


def test_path_similarity_identity(mini_db):
    x = SynsetId("n", 1001)
    assert mini_db.path_similarity(x, x) == 1.0


def test_path_similarity_direct_hypernym(mini_db):
    assert mini_db.path_similarity(SynsetId("n", 1002), SynsetId("n", 3002)) == 0.5


def test_path_similarity_common_ancestor_two_up(mini_db):
    # bank#1 -> institution -> organization <- association <- club: L = 4.
    got = mini_db.path_similarity(SynsetId("n", 1001), SynsetId("n", 5002))
    assert got == pytest.approx(0.2)


def test_path_similarity_disconnected(mini_db):
    assert mini_db.path_similarity(SynsetId("n", 6001), SynsetId("n", 1001)) == 0.0


def test_path_similarity_symmetric_all_pairs(mini_db):
    ids = sorted(mini_db.synsets)
    for a in ids:
        for b in ids:
            assert mini_db.path_similarity(a, b) == mini_db.path_similarity(b, a)


def test_sense_count_matches_index_file_grep(mini_db):
    # Brute-force oracle: count distinct offsets per lemma straight from the
    # index files, bypassing the parser's data structures.
    counts = {}
    for name in ("index.noun", "index.verb", "index.adj", "index.adv"):
        for line in (MINI / name).read_text().splitlines():
            if line.startswith(" ") or not line.strip():
                continue
            fields = line.split()
            lemma, synset_cnt = fields[0], int(fields[2])
            counts[lemma] = counts.get(lemma, 0) + synset_cnt
    for lemma, expected in counts.items():
        assert mini_db.sense_count(lemma) == expected


def test_senses_order_matches_index_byte_order(mini_db):
    for line in (MINI / "index.noun").read_text().splitlines():
        if line.startswith(" ") or not line.strip():
            continue
        fields = line.split()
        lemma, cnt, p_cnt = fields[0], int(fields[2]), int(fields[3])
        offsets = [int(o) for o in fields[6 + p_cnt : 6 + p_cnt + cnt]]
        assert [s.offset for s in mini_db.senses(lemma, "n")] == offsets


def test_load_is_deterministic(mini_db):
    again = load_lexicon_dir(MINI)
    assert set(again.synsets) == set(mini_db.synsets)
    for (lemma, pos) in mini_db.index:
        assert again.senses(lemma, pos) == mini_db.senses(lemma, pos)
    for sid in mini_db.synsets:
        assert again.lemmas_of(sid) == mini_db.lemmas_of(sid)


def test_empty_files_give_empty_db(tmp_path):
    idx = tmp_path / "index.noun"
    dat = tmp_path / "data.noun"
    idx.write_text("")
    dat.write_text("")
    db = load_lexicon([idx], [dat])
    assert db.senses("anything") == []
    assert len(db.synsets) == 0


def test_dangling_index_reference(tmp_path):
    idx = tmp_path / "index.noun"
    dat = tmp_path / "data.noun"
    dat.write_text("00000001 03 n 01 thing 0 000 | a thing\n")
    idx.write_text("thing n 2 0 2 0 00000001 00000002\n")
    with pytest.raises(DanglingReferenceError):
        load_lexicon([idx], [dat])


def test_dangling_hypernym_reference(tmp_path):
    dat = tmp_path / "data.noun"
    dat.write_text("00000001 03 n 01 thing 0 001 @ 00000099 n 0000 | a thing\n")
    with pytest.raises(DanglingReferenceError):
        load_lexicon([], [dat])


@pytest.mark.parametrize(
    "line",
    [
        "00000001 03 n xx thing 0 000 | bad word count",
        "100000000 03 n 01 thing 0 000 | offset too large",
        "00000001 03 q 01 thing 0 000 | bad ss_type",
        "00000001 03 n 02 thing 0 000 | word count lies",
    ],
)
def test_malformed_data_lines(tmp_path, line):
    dat = tmp_path / "data.noun"
    dat.write_text(line + "\n")
    with pytest.raises(FormatError) as err:
        load_lexicon([], [dat])
    assert re.search(r":1: ", str(err.value))


def test_malformed_index_line_reports_lineno(tmp_path):
    idx = tmp_path / "index.noun"
    dat = tmp_path / "data.noun"
    dat.write_text("00000001 03 n 01 thing 0 000 | a thing\n")
    idx.write_text("thing n notanumber 0 1 0 00000001\n")
    with pytest.raises(FormatError):
        load_lexicon([idx], [dat])


def test_duplicate_sense_offsets_rejected(tmp_path):
    idx = tmp_path / "index.noun"
    dat = tmp_path / "data.noun"
    dat.write_text("00000001 03 n 01 thing 0 000 | a thing\n")
    idx.write_text("thing n 2 0 2 0 00000001 00000001\n")
    with pytest.raises(FormatError):
        load_lexicon([idx], [dat])


def test_unreadable_path_raises_oserror(tmp_path):
    with pytest.raises(OSError):
        load_lexicon([tmp_path / "missing.noun"], [])


@given(st.sampled_from(["n", "v", "a", "r", "s"]), st.integers(0, 10**8 - 1))
def test_synset_id_str_roundtrip(pos, offset):
    sid = SynsetId(pos, offset)
    assert SynsetId.parse(str(sid)) == sid


def test_synset_id_validation():
    with pytest.raises(ValueError):
        SynsetId("x", 1)
    with pytest.raises(ValueError):
        SynsetId("n", 10**8)
    with pytest.raises(ValueError):
        SynsetId("n", -1)
