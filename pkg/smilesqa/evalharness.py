"""
Evaluation harness
Repeated k-fold plans over random or scaffold folds, class weights, MCC, AUC-ROC,
Welch's t-test comparisons and run summaries for property-prediction experiments.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Hashable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import special
from sklearn.metrics import confusion_matrix, roc_auc_score
from sklearn.model_selection import KFold
from sklearn.utils.class_weight import compute_class_weight

from .config import DEFAULT_FOLDS, DEFAULT_REPEATS, DEFAULT_SEED, STAGE_CV, derive_seed, rng_for
from .scaffold import scaffold_keys
from .taxonomy import DomainError

logger = logging.getLogger(__name__)

LEARNING_RATES = (1e-4, 1e-5, 5e-5)
BATCH_SIZES = (8, 16)
MULTICLASS_AUC = "macro one-vs-rest"
MULTICLASS_MCC = "generalized (K-class)"
METRIC_COLUMNS = ["run_id", "fold", "repeat", "metric", "value"]


@dataclass
class CvRun:
    fold: int
    repeat: int
    seed: int
    train: List[int]
    test: List[int]


@dataclass
class CvPlan:
    mode: str
    seed: int
    folds: List[List[int]]
    repeats: int = DEFAULT_REPEATS

    def repeat_seed(self, repeat: int) -> int:
        return derive_seed(self.seed, STAGE_CV, repeat + 1)

    def runs(self) -> List[CvRun]:
        """Every (fold, repeat) pair, the fold held out as test"""
        runs = []
        for repeat in range(self.repeats):
            seed = self.repeat_seed(repeat)
            for k, test in enumerate(self.folds):
                train = sorted(i for j, fold in enumerate(self.folds) if j != k for i in fold)
                runs.append(CvRun(k, repeat, seed, train, list(test)))
        return runs

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mode": self.mode,
            "seed": self.seed,
            "repeats": self.repeats,
            "folds": [list(fold) for fold in self.folds],
            "repeat_seeds": [self.repeat_seed(r) for r in range(self.repeats)],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "CvPlan":
        return cls(str(data["mode"]), int(data["seed"]), [list(map(int, f)) for f in data["folds"]], int(data["repeats"]))


def _scaffold_folds(records: Sequence[str], n_folds: int, seed: int, workers: int) -> List[List[int]]:
    groups: Dict[str, List[int]] = {}
    for i, key in enumerate(scaffold_keys(records, workers)):
        groups.setdefault(key, []).append(i)
    if len(groups) < n_folds:
        raise DomainError(f"Scaffold folds need at least {n_folds} scaffold groups, got {len(groups)}")
    ordered = sorted(groups)
    shuffled = [ordered[i] for i in rng_for(seed, STAGE_CV).permutation(len(ordered))]
    shuffled.sort(key=lambda key: -len(groups[key]))
    folds: List[List[int]] = [[] for _ in range(n_folds)]
    for key in shuffled:
        target = min(range(n_folds), key=lambda k: (len(folds[k]), k))
        folds[target].extend(groups[key])
    return [sorted(fold) for fold in folds]


def plan_cv(
    records: Sequence[Any],
    mode: str = "random",
    seed: int = DEFAULT_SEED,
    n_folds: int = DEFAULT_FOLDS,
    repeats: int = DEFAULT_REPEATS,
    workers: int = 1,
) -> CvPlan:
    """
    Plan repeated k-fold cross-validation.

    Args:
        records: Records to fold; SMILES strings in scaffold mode
        mode: "random" for shuffled folds of near-equal size, "scaffold" to keep
            every scaffold group inside one fold
        seed: Seed for fold assignment and per-repeat seeds

    Returns:
        The plan; folds are sorted index lists

    Raises:
        DomainError: Fewer records (or scaffold groups) than folds
    """
    if mode not in ("random", "scaffold"):
        raise ValueError(f"Unknown cross-validation mode: {mode}")
    if len(records) < n_folds:
        raise DomainError(f"Cross-validation needs at least {n_folds} records, got {len(records)}")
    if mode == "scaffold":
        folds = _scaffold_folds([str(r) for r in records], n_folds, seed, workers)
    else:
        splitter = KFold(n_splits=n_folds, shuffle=True, random_state=derive_seed(seed, STAGE_CV) % (2**32))
        folds = [sorted(int(i) for i in test) for _, test in splitter.split(np.zeros(len(records)))]
    logger.info("Planned %s %dx%d cross-validation over %d records", mode, n_folds, repeats, len(records))
    return CvPlan(mode, seed, folds, repeats)


def class_weights(labels: Sequence[Hashable]) -> Dict[Hashable, float]:
    """Balanced weights n_total / (n_classes * count(c)) for every class present"""
    if len(labels) == 0:
        raise DomainError("Class weights need at least one label")
    y = np.asarray(list(labels))
    weights = compute_class_weight("balanced", classes=np.unique(y), y=y)
    return {c: float(w) for c, w in zip(sorted(set(labels)), weights)}


def mcc(confusion: Union[Sequence[Sequence[float]], np.ndarray]) -> float:
    """
    Matthews correlation from a K x K confusion matrix (rows truth, columns prediction).

    K=2 uses the four-term formula, larger K the generalized form. A zero
    denominator gives 0.
    """
    matrix = np.asarray(confusion, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"Confusion matrix must be square, got shape {matrix.shape}")
    if matrix.shape[0] == 2:
        tn, fp, fn, tp = matrix[0, 0], matrix[0, 1], matrix[1, 0], matrix[1, 1]
        denominator = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
        if denominator == 0:
            return 0.0
        return float((tp * tn - fp * fn) / math.sqrt(denominator))
    return generalized_mcc(matrix)


def generalized_mcc(confusion: Union[Sequence[Sequence[float]], np.ndarray]) -> float:
    matrix = np.asarray(confusion, dtype=float)
    truth = matrix.sum(axis=1)
    predicted = matrix.sum(axis=0)
    total = matrix.sum()
    correct = np.trace(matrix)
    left = total * total - float(predicted @ predicted)
    right = total * total - float(truth @ truth)
    if left == 0 or right == 0:
        return 0.0
    return float((correct * total - float(truth @ predicted)) / (math.sqrt(left) * math.sqrt(right)))


def mcc_from_labels(y_true: Sequence[Hashable], y_pred: Sequence[Hashable], labels: Optional[Sequence[Hashable]] = None) -> float:
    classes = list(labels) if labels is not None else sorted(set(y_true) | set(y_pred))
    return mcc(confusion_matrix(y_true, y_pred, labels=classes))


def auc_roc(scores: Sequence[float], labels: Sequence[Hashable]) -> float:
    """
    Probability that a positive outscores a negative, ties counted half.

    The larger of the two label values is the positive class.

    Raises:
        DomainError: Labels do not contain exactly two classes
    """
    classes = sorted(set(labels))
    if len(classes) != 2:
        raise DomainError(f"AUC-ROC needs two classes, got {len(classes)}")
    if len(scores) != len(labels):
        raise ValueError("Scores and labels differ in length")
    y = np.array([1 if label == classes[1] else 0 for label in labels])
    return float(roc_auc_score(y, np.asarray(scores, dtype=float)))


def macro_auc_ovr(
    score_matrix: Union[Sequence[Sequence[float]], np.ndarray],
    labels: Sequence[Hashable],
    classes: Optional[Sequence[Hashable]] = None,
) -> float:
    """
    Macro one-vs-rest AUC over the columns of an (n, K) score matrix.

    Column k scores class classes[k] (default 0..K-1); classes without both
    positives and negatives are skipped.
    """
    scores = np.asarray(score_matrix, dtype=float)
    if scores.ndim != 2 or scores.shape[0] != len(labels):
        raise ValueError("Score matrix must have one row per label")
    classes = list(classes) if classes is not None else list(range(scores.shape[1]))
    values = []
    for k, cls in enumerate(classes):
        binary = [1 if label == cls else 0 for label in labels]
        if 0 < sum(binary) < len(binary):
            values.append(auc_roc(scores[:, k], binary))
    if not values:
        raise DomainError("No class has both positive and negative examples")
    return float(np.mean(values))


def significance_stars(p: float) -> str:
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


@dataclass
class PairwiseComparison:
    t: float
    dof: float
    p: float
    stars: str
    mean_diff: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {"t": self.t, "dof": self.dof, "p": self.p, "stars": self.stars, "mean_diff": self.mean_diff}


def student_t_two_tailed(t: float, dof: float) -> float:
    """Two-tailed p-value of a Student t statistic via the regularized incomplete beta"""
    return float(special.betainc(dof / 2.0, 0.5, dof / (dof + t * t)))


def welch_t(sample_a: Sequence[float], sample_b: Sequence[float]) -> PairwiseComparison:
    """
    Welch's unequal-variance t-test, two-tailed.

    Raises:
        DomainError: A sample has fewer than two values, or both variances are zero
    """
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise DomainError("Welch's t-test needs at least two values per sample")
    share_a = a.var(ddof=1) / len(a)
    share_b = b.var(ddof=1) / len(b)
    combined = share_a + share_b
    if combined == 0:
        raise DomainError("Welch's t-test is undefined for two constant samples")
    diff = float(a.mean() - b.mean())
    t = diff / math.sqrt(combined)
    dof = combined**2 / (share_a**2 / (len(a) - 1) + share_b**2 / (len(b) - 1))
    p = student_t_two_tailed(t, dof)
    return PairwiseComparison(float(t), float(dof), p, significance_stars(p), diff)


@dataclass
class MetricSummary:
    mean: float
    std: float
    se: float
    n: int

    def to_dict(self) -> Dict[str, float]:
        return {"mean": self.mean, "std": self.std, "se": self.se, "n": self.n}


def summarize(values: Sequence[float]) -> MetricSummary:
    """Mean, sample standard deviation and standard error; one value has std 0"""
    data = np.asarray(values, dtype=float)
    if data.size == 0:
        raise DomainError("Cannot summarize an empty sample")
    std = float(data.std(ddof=1)) if data.size > 1 else 0.0
    return MetricSummary(float(data.mean()), std, std / math.sqrt(data.size), int(data.size))


def _check_metric_frame(frame: pd.DataFrame) -> None:
    missing = [c for c in METRIC_COLUMNS if c not in frame.columns]
    if missing:
        raise DomainError(f"Metric table is missing columns: {', '.join(missing)}")
    if frame.empty:
        raise DomainError("Metric table has no rows")


def summarize_runs(frame: pd.DataFrame) -> pd.DataFrame:
    """MetricSummary per (run_id, metric) over all fold x repeat values"""
    _check_metric_frame(frame)
    rows = []
    for (run_id, metric), group in frame.groupby(["run_id", "metric"], sort=True):
        summary = summarize(group["value"].tolist())
        rows.append({"run_id": run_id, "metric": metric, **summary.to_dict()})
    return pd.DataFrame(rows, columns=["run_id", "metric", "mean", "std", "se", "n"])


def fold_means(frame: pd.DataFrame) -> pd.DataFrame:
    """Values averaged over repeats, one row per (run_id, metric, fold)"""
    _check_metric_frame(frame)
    return frame.groupby(["run_id", "metric", "fold"], sort=True)["value"].mean().reset_index()


def run_samples(frame: pd.DataFrame, metric: str) -> Dict[str, List[float]]:
    """Raw values of one metric per run_id, in run_id order"""
    _check_metric_frame(frame)
    chosen = frame[frame["metric"] == metric]
    if chosen.empty:
        raise DomainError(f"No values for metric {metric!r}")
    return {str(run_id): group["value"].tolist() for run_id, group in chosen.groupby("run_id", sort=True)}


def compare_pairs(samples: Mapping[str, Sequence[float]]) -> pd.DataFrame:
    """Welch comparison for every ordered pair of distinct runs"""
    rows = []
    for a, b in itertools.permutations(samples, 2):
        try:
            result = welch_t(samples[a], samples[b])
            rows.append({"a": a, "b": b, **result.to_dict()})
        except DomainError as exc:
            logger.debug("Skipping comparison %s vs %s: %s", a, b, exc)
            rows.append({"a": a, "b": b, "t": np.nan, "dof": np.nan, "p": np.nan, "stars": "", "mean_diff": np.nan})
    return pd.DataFrame(rows, columns=["a", "b", "t", "dof", "p", "stars", "mean_diff"])


def compare_matrix(samples: Mapping[str, Sequence[float]], digits: int = 4) -> pd.DataFrame:
    """
    Multiple-comparison matrix: cell (row, col) holds mean(row) - mean(col) with
    significance stars; the diagonal and undefined comparisons are empty.
    """
    names = list(samples)
    table = pd.DataFrame("", index=names, columns=names, dtype=object)
    for a, b in itertools.permutations(names, 2):
        try:
            result = welch_t(samples[a], samples[b])
        except DomainError:
            continue
        table.loc[a, b] = f"{result.mean_diff:+.{digits}f}{result.stars}"
    return table


def hyperparameter_grid() -> List[Dict[str, float]]:
    """The six learning-rate x batch-size combinations searched per fold"""
    return [{"learning_rate": lr, "batch_size": bs} for lr, bs in itertools.product(LEARNING_RATES, BATCH_SIZES)]


def grid_label(params: Mapping[str, float]) -> str:
    return f"lr={params['learning_rate']:g},bs={int(params['batch_size'])}"


def select_best(fold_scores: Mapping[Hashable, Sequence[float]]) -> Tuple[Hashable, float]:
    """
    Candidate with the highest mean score; earlier candidates win ties.

    Returns:
        (candidate, mean score)
    """
    best: Optional[Tuple[Hashable, float]] = None
    for candidate, scores in fold_scores.items():
        if len(scores) == 0:
            continue
        mean = float(np.mean(scores))
        if best is None or mean > best[1]:
            best = (candidate, mean)
    if best is None:
        raise DomainError("No candidate has any fold score")
    return best


@dataclass
class HarnessHeader:
    """Labels written alongside every metric report"""

    multiclass_auc: str = MULTICLASS_AUC
    multiclass_mcc: str = MULTICLASS_MCC
    grid: List[Dict[str, float]] = field(default_factory=hyperparameter_grid)

    def to_dict(self) -> Dict[str, Any]:
        return {"multiclass_auc": self.multiclass_auc, "multiclass_mcc": self.multiclass_mcc, "grid": self.grid}
