import numpy as np
import pytest
import scipy.sparse as sp

from ktreedoc.classify import (PegasosSVM, committee, kfold_splits, predict_scores,
                               read_split, recall, train_test_split, write_split)


def toy():
    X = np.array([[-1.0], [-1.0], [-1.0], [1.0], [1.0], [1.0]])
    y = np.array(["neg", "neg", "neg", "pos", "pos", "pos"])
    return X, y


def test_separable_toy_fits_perfectly():
    X, y = toy()
    model = PegasosSVM(lam=1e-2, epochs=20, random_state=0).fit(X, y)
    assert recall(model.predict(X), y) == 1.0
    assert list(model.classes_) == ["neg", "pos"]
    assert np.all(np.isfinite(model.coef_))


def test_sparse_and_dense_agree(rng):
    X = rng.random((40, 6))
    X[X < 0.5] = 0
    y = rng.integers(0, 3, 40)
    a = PegasosSVM(lam=1e-2, random_state=3).fit(X, y)
    b = PegasosSVM(lam=1e-2, random_state=3).fit(sp.csr_matrix(X), y)
    np.testing.assert_allclose(a.coef_, b.coef_, atol=1e-12)
    np.testing.assert_allclose(a.intercept_, b.intercept_, atol=1e-12)


def test_deterministic_under_seed(rng):
    X = rng.normal(size=(50, 4))
    y = (X[:, 0] > 0).astype(int)
    a = PegasosSVM(random_state=5).fit(X, y)
    b = PegasosSVM(random_state=5).fit(X, y)
    np.testing.assert_array_equal(a.coef_, b.coef_)


def test_single_class_rejected():
    with pytest.raises(ValueError):
        PegasosSVM().fit(np.ones((3, 2)), ["a", "a", "a"])
    with pytest.raises(ValueError):
        PegasosSVM().fit(np.ones((3, 2)), ["a", "b"])
    with pytest.raises(ValueError):
        PegasosSVM(lam=0).fit(np.ones((2, 2)), ["a", "b"])


def test_huge_lambda_shrinks_weights():
    X, y = toy()
    model = PegasosSVM(lam=1e6, epochs=5, random_state=0).fit(X, y)
    assert np.abs(model.coef_).max() < 1e-5


def test_zero_weights_scores_are_biases():
    X, y = toy()
    model = PegasosSVM(random_state=0).fit(X, y)
    model.coef_ = np.zeros_like(model.coef_)
    model.intercept_ = np.array([0.3, -0.2])
    np.testing.assert_allclose(predict_scores(model, X), np.tile([0.3, -0.2], (6, 1)))


def test_argmax_ties_to_first_class():
    X, y = toy()
    model = PegasosSVM(random_state=0).fit(X, y)
    model.coef_[:] = 0
    model.intercept_[:] = 0
    assert set(model.predict(X)) == {"neg"}


def test_score_shift_invariance(rng):
    X = rng.normal(size=(30, 3))
    y = rng.integers(0, 4, 30)
    model = PegasosSVM(random_state=0).fit(X, y)
    s = predict_scores(model, X)
    shifted = s + rng.normal(size=(30, 1))
    np.testing.assert_array_equal(np.argmax(s, axis=1), np.argmax(shifted, axis=1))


def test_dimension_mismatch():
    X, y = toy()
    model = PegasosSVM(random_state=0).fit(X, y)
    with pytest.raises(ValueError):
        model.decision_function(np.ones((2, 3)))


def test_committee_agreement_and_identity(rng):
    s = rng.normal(size=(20, 4))
    classes = list("abcd")
    expect = np.array(classes)[np.argmax(s, axis=1)]
    np.testing.assert_array_equal(committee(s, s, classes), expect)


def test_committee_follows_nonconstant_model(rng):
    s = rng.normal(size=(10, 3))
    classes = ["x", "y", "z"]
    expect = np.array(classes)[np.argmax(s, axis=1)]
    np.testing.assert_array_equal(committee(np.zeros((10, 3)), s, classes), expect)
    np.testing.assert_array_equal(committee(s, np.zeros((10, 3)), classes), expect)


def test_committee_link_margin_wins():
    text = np.array([[0.1, 0.0], [1.0, -1.0], [0.0, 0.1]])
    link = np.array([[0.0, 9.0], [0.0, 0.0], [0.0, 0.0]])
    out = committee(text, link, ["a", "b"])
    assert out[0] == "b"
    assert out[1] == "a"


def test_committee_errors():
    with pytest.raises(ValueError):
        committee(np.ones((2, 2)), np.ones((2, 2)), ["a", "b"], classes_link=["b", "a"])
    with pytest.raises(ValueError):
        committee(np.eye(2), np.eye(3), ["a", "b"])


def test_recall_hand_scored():
    pred = list("aabbccaabb")
    truth = list("abbbcaaabc")
    # positions 0,2,3,4,6,7,8 agree
    assert recall(pred, truth) == pytest.approx(0.7)
    with pytest.raises(ValueError):
        recall([], [])


def test_train_test_split_fraction():
    ids = ["d%d" % i for i in range(100)]
    split = train_test_split(ids, 0.1, rng=0)
    assert list(split) == ids
    assert sum(v == "train" for v in split.values()) == 10
    assert split == train_test_split(ids, 0.1, rng=0)
    with pytest.raises(ValueError):
        train_test_split(ids, 1.0)


@pytest.mark.parametrize("inverted", [False, True])
def test_kfold_partitions_every_document_once(inverted):
    ids = ["d%d" % i for i in range(53)]
    seen = []
    for train, test in kfold_splits(ids, 10, rng=1, inverted=inverted):
        assert set(train).isdisjoint(test)
        assert len(train) + len(test) == 53
        seen.extend(train if inverted else test)
        if inverted:
            assert len(train) < len(test)
    assert sorted(seen) == sorted(ids)
    with pytest.raises(ValueError):
        list(kfold_splits(ids, 1))


def test_split_io(tmp_path):
    split = {"a": "train", "b": "test"}
    p = tmp_path / "split.txt"
    write_split(p, split)
    assert read_split(p) == split
    p.write_text("a\tvalidate\n")
    with pytest.raises(ValueError):
        read_split(p)
