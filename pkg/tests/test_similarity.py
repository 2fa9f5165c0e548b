import math

import pytest
from hypothesis import given, strategies as st

from semcom.similarity import (
    BagOfSynsetsEmbedder,
    SentenceVector,
    cosine,
    default_embedder,
    embed_bag_of_synsets,
)


def vec(**weights):
    return SentenceVector.from_weights(weights)


def test_cosine_identity():
    a = vec(x=1.0, y=2.0)
    assert cosine(a, a) == pytest.approx(1.0)


def test_cosine_disjoint_support():
    assert cosine(vec(x=1.0), vec(y=1.0)) == 0.0


def test_cosine_hand_value():
    # dot 24, norms 5 and 5.
    assert cosine(vec(x=3.0, y=4.0), vec(x=4.0, y=3.0)) == pytest.approx(0.96)


def test_cosine_zero_vector():
    assert cosine(SentenceVector(), vec(x=1.0)) == 0.0
    assert cosine(SentenceVector(), SentenceVector()) == 0.0


def test_from_weights_drops_zero_entries():
    v = SentenceVector.from_weights({"a": 0.0, "b": 1.5})
    assert v.weights == {"b": 1.5}


@given(
    st.dictionaries(st.text(max_size=4), st.floats(0, 100, allow_nan=False), max_size=8),
    st.dictionaries(st.text(max_size=4), st.floats(0, 100, allow_nan=False), max_size=8),
)
def test_cosine_symmetric_and_bounded_for_nonnegative(wa, wb):
    a, b = SentenceVector.from_weights(wa), SentenceVector.from_weights(wb)
    assert cosine(a, b) == cosine(b, a)
    assert -1e-12 <= cosine(a, b) <= 1.0 + 1e-12


def test_embed_empty_sentence(mini_db):
    v = embed_bag_of_synsets(mini_db, "")
    assert v.is_zero()
    assert cosine(v, embed_bag_of_synsets(mini_db, "the bank")) == 0.0


def test_embed_identical_sentences(mini_db):
    a = embed_bag_of_synsets(mini_db, "the bank is steep")
    b = embed_bag_of_synsets(mini_db, "the bank is steep")
    assert a == b
    assert cosine(a, b) == pytest.approx(1.0)


def test_embed_bank_weights(mini_db):
    v = embed_bag_of_synsets(mini_db, "bank")
    assert v.weights == {"n:00001001": 0.5, "n:00001002": 0.5}


def test_embed_synonym_shares_dimension(mini_db):
    a = embed_bag_of_synsets(mini_db, "bank")
    b = embed_bag_of_synsets(mini_db, "depository_institution")
    assert b.weights == {"n:00001001": 1.0}
    assert set(a.weights) & set(b.weights) == {"n:00001001"}
    assert cosine(a, b) > 0.0


def test_embed_unknown_word_uses_stem_dimension(mini_db):
    v = embed_bag_of_synsets(mini_db, "granites")
    assert v.weights == {"stem:granit": 1.0}


def test_embed_is_a_bag(mini_db):
    a = embed_bag_of_synsets(mini_db, "the bank is steep and the club can run")
    b = embed_bag_of_synsets(mini_db, "run can club the and the steep bank is")
    assert a == b
    assert cosine(a, b) == pytest.approx(1.0)


def test_embed_accumulates_repeats(mini_db):
    one = embed_bag_of_synsets(mini_db, "bank")
    two = embed_bag_of_synsets(mini_db, "bank bank")
    assert two.weights == {k: 2 * v for k, v in one.weights.items()}


def test_embedder_provider(mini_db):
    provider = BagOfSynsetsEmbedder(mini_db)
    out = provider.embed(["bank", "the bank is steep"])
    assert out[0] == embed_bag_of_synsets(mini_db, "bank")
    assert len(out) == 2
    assert provider.identity.startswith("bag-of-synsets")


def test_default_embedder_env_switch(mini_db):
    local = default_embedder(mini_db, env={})
    assert isinstance(local, BagOfSynsetsEmbedder)
    remote = default_embedder(mini_db, env={"SEMCOM_MODEL_SERVER_URL": "http://127.0.0.1:1"})
    assert remote.identity.startswith("remote-embed:")
