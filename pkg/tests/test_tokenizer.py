import json

import pytest
from hypothesis import given, strategies as st

from knight.errors import EmptyCorpus, MalformedLine
from knight.tokenizer import (
    BOS_ID,
    EOS_ID,
    PAD_ID,
    RESERVED_TOKENS,
    UNK_ID,
    UNK_TOKEN,
    Vocabulary,
    build_vocabulary,
    tokenize,
)

WORDS = st.text(alphabet="abcdefghij", min_size=1, max_size=6)


class TestTokenize:
    def test_lowercases(self):
        assert tokenize("A Red DOG") == ["a", "red", "dog"]

    def test_punctuation_separate(self):
        assert tokenize("dog, run!") == ["dog", ",", "run", "!"]

    def test_digits_kept(self):
        assert tokenize("route 66") == ["route", "66"]

    def test_empty(self):
        assert tokenize("") == []
        assert tokenize("   ") == []

    def test_mixed_alnum_splits_on_punct(self):
        assert tokenize("it's") == ["it", "'", "s"]


class TestBuildVocabulary:
    def test_reserved_prefix(self):
        vocab = build_vocabulary(["a b", "b c"])
        assert tuple(vocab.id_to_token[:4]) == RESERVED_TOKENS
        assert (PAD_ID, BOS_ID, EOS_ID, UNK_ID) == (0, 1, 2, 3)

    def test_frequency_then_alpha_order(self):
        # b occurs twice; a and c once each -> b first, then a, c alphabetical
        vocab = build_vocabulary(["b a", "b c"])
        assert vocab.id_to_token[4:] == ["b", "a", "c"]

    def test_min_count_filters(self):
        vocab = build_vocabulary(["a a b"], min_count=2)
        assert "a" in vocab.token_to_id
        assert "b" not in vocab.token_to_id

    def test_empty_corpus(self):
        with pytest.raises(EmptyCorpus):
            build_vocabulary([])

    @given(st.lists(st.lists(WORDS, min_size=1, max_size=6), min_size=1, max_size=10))
    def test_ids_contiguous_and_reversible(self, texts):
        corpus = [" ".join(ws) for ws in texts]
        vocab = build_vocabulary(corpus)
        assert vocab.id_to_token[PAD_ID] == "<pad>"
        for token, idx in vocab.token_to_id.items():
            assert vocab.id_to_token[idx] == token
        assert len(set(vocab.id_to_token)) == len(vocab.id_to_token)


class TestEncodeDecode:
    def test_round_trip(self):
        vocab = build_vocabulary(["the red dog runs"])
        ids = vocab.encode("the red dog runs")
        assert vocab.decode(ids) == "the red dog runs"

    def test_unknown_token_maps_to_unk(self):
        vocab = build_vocabulary(["a b"])
        assert vocab.encode("z") == [UNK_ID]
        assert vocab.decode([UNK_ID]) == UNK_TOKEN

    def test_decode_skips_control_ids(self):
        vocab = build_vocabulary(["dog"])
        dog = vocab.encode_token("dog")
        assert vocab.decode([BOS_ID, dog, EOS_ID, PAD_ID]) == "dog"

    def test_decode_empty(self):
        vocab = build_vocabulary(["dog"])
        assert vocab.decode([]) == ""


class TestSaveLoad:
    def test_round_trip(self, tmp_path):
        vocab = build_vocabulary(["the red dog runs near the river"])
        path = tmp_path / "vocab.jsonl"
        vocab.save(path)
        loaded = Vocabulary.load(path)
        assert loaded.id_to_token == vocab.id_to_token
        assert loaded.token_to_id == vocab.token_to_id

    def test_rejects_gap_in_ids(self, tmp_path):
        path = tmp_path / "vocab.jsonl"
        rows = [{"id": i, "token": t} for i, t in enumerate(RESERVED_TOKENS)]
        rows.append({"id": 5, "token": "dog"})  # gap: skips id 4
        path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        with pytest.raises(MalformedLine):
            Vocabulary.load(path)

    def test_rejects_missing_reserved_prefix(self, tmp_path):
        path = tmp_path / "vocab.jsonl"
        path.write_text(json.dumps({"id": 0, "token": "dog"}) + "\n")
        with pytest.raises(MalformedLine):
            Vocabulary.load(path)

    def test_rejects_garbage_line(self, tmp_path):
        path = tmp_path / "vocab.jsonl"
        path.write_text("not json\n")
        with pytest.raises(MalformedLine) as err:
            Vocabulary.load(path)
        assert err.value.line == 1
