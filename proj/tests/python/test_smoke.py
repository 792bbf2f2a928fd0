import numpy as np
import pytest

import threadforge as tf


def test_normalize_and_keys():
    p = tf.normalize_tweet("@bbc Breaking: #flood near me https://t.co/x \U0001F602")
    assert p.tokens[0] == "@USER"
    assert "HTTPURL" in p.tokens
    assert ":face_with_tears_of_joy:" in p.tokens
    assert p.keyword_count() == 3
    assert tf.text_key("@bbc Breaking: #flood near me https://t.co/x \U0001F602") == tf.text_key_of_tokens(p.tokens)
    # FNV-1a of the empty string.
    assert tf.text_key_of_tokens([]) == 0xCBF29CE484222325


def test_embedding_table_round_trip(tmp_path):
    keys = np.array([tf.text_key("hello world"), 7], dtype=np.uint64)
    vectors = np.arange(6, dtype=np.float32).reshape(2, 3) / 7
    path = tmp_path / "emb.bin"
    tf.save_embedding_table(path, keys, vectors)
    data = path.read_bytes()
    assert data[:4] == b"EMB1"
    assert len(data) == 4 + 4 + 8 + 2 * (8 + 3 * 4)
    got_keys, got_vectors = tf.load_embedding_table(path)
    assert got_keys.tolist() == keys.tolist()
    assert np.array_equal(got_vectors, vectors)
    path.write_bytes(data[:-1])
    with pytest.raises(tf.DataError):
        tf.load_embedding_table(path)


def test_candidate_table_round_trip(tmp_path):
    entries = {(11, 0): ["round", "square"], (11, 4): ["café"], (2**63, 65535): ["x"]}
    path = tmp_path / "cand.bin"
    tf.save_candidate_table(path, entries)
    assert path.read_bytes()[:4] == b"CND1"
    assert tf.load_candidate_table(path) == entries


def test_oversampling_and_metrics():
    assert tf.plan_oversample(458, 1163, 3) == (2, 247, 0)
    weights, probs = tf.influence_weights(["@USER HTTPURL", "the earth is flat", "no way \U0001F602"])
    assert weights == [0, 4, 2]
    assert probs == pytest.approx([0, 2 / 3, 1 / 3])
    m = tf.compute_metrics([0, 1, 1], [0, 0, 1], "binary")
    assert m["accuracy"] == pytest.approx(2 / 3)
    assert m["macro_f1"] == pytest.approx(2 / 3)
    with pytest.raises(tf.UsageError):
        tf.compute_metrics([], [], "binary")


def test_cli_pipeline(tmp_path):
    code, out, _ = tf.run(["--help"])
    assert code == 0 and "augment" in out
    code, _, err = tf.run(["ingest", "--input", str(tmp_path), "--output", str(tmp_path / "t.jsonl")])
    assert code == 2
    assert "no events found" in err
    assert tf.run(["train"])[0] == 1
