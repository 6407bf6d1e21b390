import numpy as np
import pytest

from viewclean.classifier import (
    EnsembleScore,
    LabeledPair,
    Model,
    binary_entropy,
    ensemble_scores,
    f1_on_holdout,
    predict,
    train,
)
from viewclean.errors import ConfigError


def taught(points, labels):
    return [
        LabeledPair((i, i + 1000), np.array(p, dtype=float), bool(lab))
        for i, (p, lab) in enumerate(zip(points, labels))
    ]


@pytest.fixture
def separable():
    pos = [(0.9, 0.9), (0.85, 0.95), (0.95, 0.8)]
    neg = [(0.1, 0.1), (0.2, 0.05), (0.05, 0.2)]
    return taught(pos + neg, [1] * 3 + [0] * 3)


def test_train_separable_perfect(separable):
    model = train(separable)
    X = np.array([lp.features for lp in separable])
    preds = predict(model, [lp.pair for lp in separable], X)
    assert [p.label for p in preds] == [lp.label for lp in separable]
    assert all(abs(p.decision) > 0 for p in preds)


def test_label_decision_consistency(separable):
    model = train(separable)
    rng = np.random.default_rng(0)
    X = rng.random((50, 2))
    preds = predict(model, [(i, i + 1) for i in range(50)], X)
    for p in preds:
        assert p.label == (p.decision > 0)


def test_single_class_constant_model():
    data = taught([(0.1, 0.2), (0.3, 0.1)], [0, 0])
    model = train(data)
    assert model.constant == -1.0
    preds = predict(model, [(0, 1)], np.array([[0.9, 0.9]]))
    assert preds[0].label is False and preds[0].decision == -1.0
    all_pos = train(taught([(0.9, 0.9)], [1]))
    assert all_pos.constant == 1.0


def test_class_weight_ratio():
    data = taught(
        [(0.9, 0.9)] * 4 + [(0.1, 0.1)] * 96, [1] * 4 + [0] * 96
    )
    model = train(data)
    w_neg, w_pos = model.class_weights
    assert w_pos / w_neg == pytest.approx(96 / 4)


def test_imbalanced_separable_positives_classified():
    data = taught([(0.9, 0.9)] * 3 + [(0.1, 0.1)] * 60, [1] * 3 + [0] * 60)
    model = train(data)
    X = np.array([lp.features for lp in data])
    preds = predict(model, [lp.pair for lp in data], X)
    assert all(p.label for p, lp in zip(preds, data) if lp.label)


def test_empty_training_set():
    with pytest.raises(ConfigError):
        train([])


def test_predict_empty_and_arity(separable):
    model = train(separable)
    assert predict(model, [], np.zeros((0, 2))) == []
    with pytest.raises(ConfigError):
        predict(model, [(0, 1)], np.zeros((1, 3)))


def test_determinism(separable):
    m1, m2 = train(separable), train(separable)
    X = np.random.default_rng(5).random((20, 2))
    np.testing.assert_array_equal(m1.decision_values(X), m2.decision_values(X))


def test_gaussian_kernel(separable):
    model = train(separable, kernel="gaussian")
    X = np.array([lp.features for lp in separable])
    preds = predict(model, [lp.pair for lp in separable], X)
    assert [p.label for p in preds] == [lp.label for lp in separable]


def test_ensemble_unanimous(separable):
    cands = [(100, 101), (102, 103)]
    X = np.array([[0.9, 0.9], [0.1, 0.1]])
    scores = ensemble_scores(separable, cands, X, k=10, seed=42)
    for s in scores:
        assert s.uncertainty == 0.0
        assert s.entropy == 0.0


def test_ensemble_formulas():
    # p = 0.5 -> both scores maximal; p = 0.8 -> entropy ~ 0.722
    s = EnsembleScore((0, 1), 1 - abs(2 * 0.5 - 1), binary_entropy(0.5))
    assert s.uncertainty == 1.0 and s.entropy == 1.0
    assert binary_entropy(0.8) == pytest.approx(0.7219, abs=1e-4)
    assert binary_entropy(0.0) == 0.0


def test_ensemble_deterministic(separable):
    cands = [(1, 2)]
    X = np.array([[0.5, 0.45]])
    a = ensemble_scores(separable, cands, X, seed=7)
    b = ensemble_scores(separable, cands, X, seed=7)
    assert a == b


def test_uncertainty_entropy_rank_together():
    # both are monotone decreasing in |p - 0.5|, so they order any two
    # candidates the same way (up to ties)
    ps = [0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0]
    unc = [1 - abs(2 * p - 1) for p in ps]
    ent = [binary_entropy(p) for p in ps]
    tol = 1e-9
    for i in range(len(ps)):
        for j in range(len(ps)):
            assert (unc[i] < unc[j] - tol) == (ent[i] < ent[j] - tol)


def test_describe_dumps_model_text(separable):
    from viewclean.classifier import describe

    text = describe(train(separable))
    assert "kernel: linear" in text
    assert "weights:" in text
    constant = describe(train(taught([(0.1, 0.1)], [0])))
    assert "single-class" in constant


def test_f1_perfect_and_zero(separable):
    model = train(separable)
    assert f1_on_holdout(model, separable) == 1.0
    flipped = [LabeledPair(lp.pair, lp.features, not lp.label) for lp in separable]
    assert f1_on_holdout(model, flipped) == 0.0


def test_f1_formula():
    # TP=2, FP=1, FN=1 -> 2/3
    model = Model("linear", 1, (1.0, 1.0), None, constant=1.0)
    data = taught([(0.1,)] * 3, [1, 1, 0]) + [
        LabeledPair((9, 10), np.array([0.2]), True)
    ]
    # constant-positive model: predicts all four positive -> TP=3, FP=1
    assert f1_on_holdout(model, data) == pytest.approx(2 * (3 / 4) / (3 / 4 + 1))
    neg_model = Model("linear", 1, (1.0, 1.0), None, constant=-1.0)
    all_neg = taught([(0.5,)] * 2, [0, 0])
    assert f1_on_holdout(neg_model, all_neg) == 1.0
    with pytest.raises(ConfigError):
        f1_on_holdout(model, [])
