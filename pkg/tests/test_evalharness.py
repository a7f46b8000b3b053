"""
Evaluation harness tests
Covers cross-validation plans, class weights, MCC, AUC-ROC, Welch comparisons
and run summaries
"""

import itertools
import math

import numpy as np
import pandas as pd
import pytest
from scipy import stats
from sklearn.metrics import matthews_corrcoef

from smilesqa.evalharness import (
    CvPlan,
    auc_roc,
    class_weights,
    compare_matrix,
    compare_pairs,
    fold_means,
    generalized_mcc,
    grid_label,
    hyperparameter_grid,
    macro_auc_ovr,
    mcc,
    mcc_from_labels,
    plan_cv,
    run_samples,
    select_best,
    significance_stars,
    summarize,
    summarize_runs,
    welch_t,
)
from smilesqa.scaffold import scaffold_keys
from smilesqa.taxonomy import DomainError
from utils.data_generator import SmilesCorpusGenerator


def _pairwise_auc(scores, labels):
    """Count positive/negative pairs directly"""
    positives = [s for s, y in zip(scores, labels) if y == 1]
    negatives = [s for s, y in zip(scores, labels) if y == 0]
    wins = 0.0
    for p, n in itertools.product(positives, negatives):
        wins += 1.0 if p > n else 0.5 if p == n else 0.0
    return wins / (len(positives) * len(negatives))


def _direct_mcc(matrix):
    """Covariance form of the K-class correlation in exact integer arithmetic"""
    k = len(matrix)
    total = sum(sum(row) for row in matrix)
    correct = sum(matrix[i][i] for i in range(k))
    truth = [sum(row) for row in matrix]
    predicted = [sum(matrix[i][j] for i in range(k)) for j in range(k)]
    numerator = correct * total - sum(t * p for t, p in zip(truth, predicted))
    left = total * total - sum(p * p for p in predicted)
    right = total * total - sum(t * t for t in truth)
    if left == 0 or right == 0:
        return 0.0
    return numerator / math.sqrt(left * right)


def _metric_frame():
    rows = []
    for run_id, offset in (("char", 0.0), ("ais", 0.1)):
        for repeat in range(5):
            for fold in range(5):
                value = 0.5 + offset + 0.01 * fold + 0.001 * repeat
                rows.append({"run_id": run_id, "fold": fold, "repeat": repeat, "metric": "mcc", "value": value})
    return pd.DataFrame(rows)


def test_random_plan_covers_every_record_once():
    plan = plan_cv(list(range(100)), seed=42)
    assert [len(fold) for fold in plan.folds] == [20] * 5
    assert sorted(i for fold in plan.folds for i in fold) == list(range(100))
    runs = plan.runs()
    assert len(runs) == 25
    assert len({run.seed for run in runs}) == 5
    for run in runs:
        assert not set(run.train) & set(run.test)
        assert len(run.train) + len(run.test) == 100


def test_plan_is_deterministic_and_round_trips():
    first = plan_cv(list(range(37)), seed=3)
    assert plan_cv(list(range(37)), seed=3).folds == first.folds
    assert plan_cv(list(range(37)), seed=4).folds != first.folds
    restored = CvPlan.from_dict(first.to_dict())
    assert restored == first
    assert first.to_dict()["repeat_seeds"] == [first.repeat_seed(r) for r in range(5)]


def test_scaffold_plan_keeps_groups_in_one_fold():
    records = SmilesCorpusGenerator(seed=14).generate_scaffold_corpus(200, n_scaffolds=12)
    plan = plan_cv(records, mode="scaffold", seed=1)
    keys = scaffold_keys(records)
    fold_of = {}
    for k, fold in enumerate(plan.folds):
        for i in fold:
            assert fold_of.setdefault(keys[i], k) == k
    assert sorted(i for fold in plan.folds for i in fold) == list(range(len(records)))
    assert plan_cv(records, mode="scaffold", seed=1, workers=4).folds == plan.folds


def test_plan_errors():
    with pytest.raises(ValueError):
        plan_cv(list(range(10)), mode="stratified")
    with pytest.raises(DomainError):
        plan_cv(list(range(3)))
    with pytest.raises(DomainError):
        plan_cv(["CCc1ccccc1"] * 10, mode="scaffold")


def test_class_weights():
    weights = class_weights(["A"] * 75 + ["B"] * 25)
    assert weights["A"] == pytest.approx(100 / 150)
    assert weights["B"] == pytest.approx(2.0)
    with pytest.raises(DomainError):
        class_weights([])


def test_mcc_extremes():
    assert mcc([[50, 0], [0, 50]]) == pytest.approx(1.0)
    assert mcc([[0, 50], [50, 0]]) == pytest.approx(-1.0)
    assert mcc([[10, 0], [10, 0]]) == 0.0


def test_mcc_binary_formula():
    tp, tn, fp, fn = 90, 80, 20, 10
    expected = (tp * tn - fp * fn) / math.sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn))
    matrix = [[tn, fp], [fn, tp]]
    assert mcc(matrix) == pytest.approx(expected)
    assert generalized_mcc(matrix) == pytest.approx(expected)


def test_mcc_matches_sklearn_on_three_classes():
    rng = np.random.default_rng(0)
    truth = rng.integers(0, 3, size=200)
    predicted = np.where(rng.random(200) < 0.6, truth, rng.integers(0, 3, size=200))
    assert mcc_from_labels(truth.tolist(), predicted.tolist()) == pytest.approx(matthews_corrcoef(truth, predicted))
    with pytest.raises(ValueError):
        mcc([[1, 2, 3]])


@pytest.mark.parametrize("seed", range(1000))
def test_mcc_matches_direct_formula(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 6))
    matrix = rng.integers(0, 50, size=(k, k)).tolist()
    assert mcc(matrix) == pytest.approx(_direct_mcc(matrix), abs=1e-12)
    assert generalized_mcc(matrix) == pytest.approx(_direct_mcc(matrix), abs=1e-12)


@pytest.mark.parametrize("seed", range(1000))
def test_auc_matches_pair_counting(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 80))
    labels = [0, 1] + rng.integers(0, 2, size=n - 2).tolist()
    # odd seeds round coarsely, giving tied scores
    scores = rng.random(n)
    scores = np.round(scores, 1 if seed % 2 else 6).tolist()
    assert auc_roc(scores, labels) == pytest.approx(_pairwise_auc(scores, labels), abs=1e-12)


def test_auc_edge_cases():
    assert auc_roc([0.5] * 4, [0, 1, 0, 1]) == pytest.approx(0.5)
    assert auc_roc([0.1, 0.9], ["no", "yes"]) == pytest.approx(1.0)
    scores = [0.2, 0.4, 0.3, 0.9, 0.7]
    labels = [0, 0, 1, 1, 1]
    assert auc_roc([s**3 + 1 for s in scores], labels) == pytest.approx(auc_roc(scores, labels))
    with pytest.raises(DomainError):
        auc_roc([0.1, 0.2], [1, 1])
    with pytest.raises(ValueError):
        auc_roc([0.1], [0, 1])


def test_macro_auc_ovr():
    scores = np.eye(3)[[0, 1, 2, 0, 1, 2]]
    assert macro_auc_ovr(scores, [0, 1, 2, 0, 1, 2]) == pytest.approx(1.0)


@pytest.mark.parametrize("p,stars", [(0.0005, "***"), (0.005, "**"), (0.03, "*"), (0.05, ""), (0.2, "")])
def test_significance_stars(p, stars):
    assert significance_stars(p) == stars


def test_welch_matches_scipy():
    a, b = [1.0, 2.0, 3.0], [2.0, 3.0, 4.0, 5.0]
    result = welch_t(a, b)
    reference = stats.ttest_ind(a, b, equal_var=False)
    assert result.t == pytest.approx(reference.statistic)
    assert result.p == pytest.approx(reference.pvalue)
    assert result.mean_diff == pytest.approx(-1.5)
    mirrored = welch_t(b, a)
    assert mirrored.t == pytest.approx(-result.t)
    assert mirrored.p == pytest.approx(result.p)


def test_welch_edge_cases():
    assert welch_t([1, 2, 3], [1, 2, 3]).p == pytest.approx(1.0)
    with pytest.raises(DomainError):
        welch_t([1.0], [1.0, 2.0])
    with pytest.raises(DomainError):
        welch_t([2, 2, 2], [2, 2])


def test_summarize():
    summary = summarize([1.0, 2.0, 3.0, 4.0])
    assert summary.mean == pytest.approx(2.5)
    assert summary.std == pytest.approx(np.std([1, 2, 3, 4], ddof=1))
    assert summary.se == pytest.approx(summary.std / 2)
    single = summarize([0.7])
    assert (single.std, single.se, single.n) == (0.0, 0.0, 1)
    with pytest.raises(DomainError):
        summarize([])


def test_summarize_runs_and_fold_means():
    frame = _metric_frame()
    table = summarize_runs(frame)
    assert list(table["run_id"]) == ["ais", "char"]
    assert list(table["n"]) == [25, 25]
    assert table.loc[table["run_id"] == "char", "mean"].item() == pytest.approx(0.522)
    means = fold_means(frame)
    assert len(means) == 10
    with pytest.raises(DomainError):
        summarize_runs(frame.drop(columns=["fold"]))


def test_compare_matrix_layout():
    samples = run_samples(_metric_frame(), "mcc")
    matrix = compare_matrix(samples)
    assert matrix.loc["ais", "ais"] == ""
    assert matrix.loc["ais", "char"].startswith("+0.1000")
    assert matrix.loc["ais", "char"].endswith("***")
    assert matrix.loc["char", "ais"].startswith("-0.1000")
    pairs = compare_pairs(samples)
    assert len(pairs) == 2
    with pytest.raises(DomainError):
        run_samples(_metric_frame(), "auc")


def test_compare_matrix_leaves_undefined_cells_empty():
    matrix = compare_matrix({"a": [1.0, 1.0], "b": [1.0, 1.0]})
    assert matrix.loc["a", "b"] == ""


def test_hyperparameter_grid():
    grid = hyperparameter_grid()
    assert len(grid) == 6
    assert {g["batch_size"] for g in grid} == {8, 16}
    assert grid_label(grid[0]) == "lr=0.0001,bs=8"


def test_select_best_prefers_earlier_on_ties():
    best = select_best({"first": [0.25, 0.75], "second": [0.5, 0.5], "third": [0.1]})
    assert best == ("first", 0.5)
    with pytest.raises(DomainError):
        select_best({"empty": []})
