import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dpmisspec import ingestion as io
from dpmisspec.errors import EmptyCorpus, ParseError, RangeError, ValidationError
from dpmisspec.factors import DependencySpec
from dpmisspec.model import ModelParams
from dpmisspec.sampling import sample_exact

WORTH = io.KeywordLF("worth", "worth", 1)
NOT_WORTH = io.KeywordLF("not worth", "not worth", -1)


def test_keyword_lf_examples():
    assert io.apply_keyword_lfs(["well worth watching"], [WORTH]).tolist() == [[1]]
    assert io.apply_keyword_lfs(["worth every penny"], [NOT_WORTH]).tolist() == [[0]]
    assert io.apply_keyword_lfs(["it was not worth it"], [NOT_WORTH, WORTH]).tolist() == [[-1, 1]]


def test_bigram_order_and_adjacency():
    assert io.apply_keyword_lfs(["worth not", "not really worth"], [NOT_WORTH]).tolist() == [[0], [0]]
    # Adjacent tokens match even across sentence punctuation.
    assert io.apply_keyword_lfs(["I would not. Worth it!"], [NOT_WORTH]).tolist() == [[-1]]


def test_whitespace_and_case_do_not_matter():
    docs = ["It was NOT   worth\tit", "it was not worth it"]
    out = io.apply_keyword_lfs(docs, [NOT_WORTH, WORTH])
    assert np.array_equal(out[0], out[1])


def test_apostrophes_split_tokens():
    lf = io.KeywordLF("dont waste", "don't waste", -1)
    assert lf.tokens == ("don", "t", "waste")
    assert io.apply_keyword_lfs(["Don't waste your time"], [lf]).tolist() == [[-1]]


@given(st.text(max_size=60))
def test_tokenize_idempotent(s):
    toks = io.tokenize(s)
    assert io.tokenize(" ".join(toks)) == toks


def test_invalid_lfs_and_corpus():
    with pytest.raises(ValidationError):
        io.KeywordLF("x", "Worth", 1)
    with pytest.raises(ValidationError):
        io.KeywordLF("x", "a b c", 1)
    with pytest.raises(ValidationError):
        io.KeywordLF("x", "worth", 0)
    with pytest.raises(EmptyCorpus):
        io.apply_keyword_lfs([], [WORTH])
    with pytest.raises(ValidationError):
        io.apply_keyword_lfs(["a"], [])


def test_votes_csv_parsing(tmp_path):
    p = tmp_path / "v.csv"
    p.write_text("1,0,-1\n")
    assert io.load_votes_csv(p).tolist() == [[1, 0, -1]]
    p.write_text("1,0,-1\n0,2,1\n")
    with pytest.raises(RangeError) as exc:
        io.load_votes_csv(p)
    assert exc.value.line == 2 and exc.value.column == 3 and exc.value.value == 2
    p.write_text("1,x\n")
    with pytest.raises(ParseError) as exc:
        io.load_votes_csv(p)
    assert exc.value.line == 1 and exc.value.column == 3
    p.write_text("1,0\n1\n")
    with pytest.raises(ParseError):
        io.load_votes_csv(p)


def test_truth_csv_range(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("1\n0\n")
    with pytest.raises(RangeError):
        io.load_truth_csv(p)


def test_round_trips(tmp_path, rng):
    votes = rng.integers(-1, 2, size=(40, 6))
    io.save_votes_csv(votes, tmp_path / "v.csv")
    assert np.array_equal(io.load_votes_csv(tmp_path / "v.csv"), votes)
    truth = np.where(rng.random(40) < 0.5, -1, 1)
    io.save_truth_csv(truth, tmp_path / "t.csv")
    assert np.array_equal(io.load_truth_csv(tmp_path / "t.csv"), truth)
    feats = rng.normal(size=(7, 3))
    io.save_features_csv(feats, tmp_path / "f.csv")
    assert np.array_equal(io.load_features_csv(tmp_path / "f.csv"), feats)
    params = ModelParams([0.1, -1 / 3, 2.5], [0.7], [DependencySpec(2, 0, "negated")])
    io.save_model_json(params, tmp_path / "m.json")
    assert io.load_model_json(tmp_path / "m.json") == params
    io.save_lfs_json([WORTH, NOT_WORTH], tmp_path / "lfs.json")
    assert io.load_lfs_json(tmp_path / "lfs.json") == [WORTH, NOT_WORTH]


def test_dataset_directory_round_trip(tmp_path):
    data = sample_exact(ModelParams([0.5, 0.2]), 30, seed=3)
    io.save_dataset(data, tmp_path / "d")
    assert io.load_dataset(tmp_path / "d") == data


def test_bad_json(tmp_path):
    p = tmp_path / "m.json"
    p.write_text("{\"m\": 2,\n oops}")
    with pytest.raises(ParseError) as exc:
        io.load_model_json(p)
    assert exc.value.line == 2


def test_posteriors_range(tmp_path):
    p = tmp_path / "p.csv"
    p.write_text("0.2\n1.5\n")
    with pytest.raises(ValidationError):
        io.load_posteriors_csv(p)


def test_corpus_loading(tmp_path):
    (tmp_path / "c.txt").write_text("good movie\nbad movie\n")
    (tmp_path / "t.csv").write_text("1\n-1\n")
    corpus = io.load_corpus(tmp_path / "c.txt", tmp_path / "t.csv")
    assert corpus.documents == ["good movie", "bad movie"] and corpus.truth.tolist() == [1, -1]
