"""Linear classification and regression with person-aware evaluation.

The classifier is a linear SVM trained by a seeded stochastic subgradient
schedule on the L2-regularized hinge loss, so a fixed seed yields a
bit-identical model.  Features are z-scored with statistics fitted on the
training data only; multiclass problems train one-vs-rest with an argmax
decision.  Evaluation offers leave-one-person-out (person-independent) and
leave-one-repetition-out (person-dependent) splits, plus ordinary least
squares with the usual diagnostics (R^2, RMSE, F).  Significance testing is
out of scope; reports carry raw statistics only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
import numpy as np

from . import config
from ._fs import atomic_write_text
from .errors import (
    ConstantPredictor,
    DegenerateFold,
    DimensionMismatch,
    EmptyConfusion,
    SingleClass,
    SinglePerson,
    TooFewPoints,
    TooFewRepetitions,
)
from .signals import freeze

MODEL_FORMAT = "cogload-model"
MODEL_VERSION = 1


# --- datasets -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FeatureDataset:
    """Instances x attributes with per-instance label, person, condition, repetition."""

    X: np.ndarray
    y: tuple[str, ...]
    person_ids: tuple[str, ...]
    conditions: tuple[str, ...] = ()
    repetition_ids: tuple[int, ...] = ()

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2:
            raise ValueError(f"X must be 2-d, got shape {X.shape}")
        n = X.shape[0]
        y = tuple(str(v) for v in self.y)
        persons = tuple(str(p) for p in self.person_ids)
        conditions = tuple(str(c) for c in self.conditions) if self.conditions else ("",) * n
        reps = tuple(int(r) for r in self.repetition_ids) if self.repetition_ids else (0,) * n
        for name, seq in (("y", y), ("person_ids", persons), ("conditions", conditions), ("repetition_ids", reps)):
            if len(seq) != n:
                raise ValueError(f"{name} has {len(seq)} entries for {n} instances")
        object.__setattr__(self, "X", freeze(X))
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "person_ids", persons)
        object.__setattr__(self, "conditions", conditions)
        object.__setattr__(self, "repetition_ids", reps)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    @property
    def classes(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.y)))

    @property
    def persons(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.person_ids)))

    def subset(self, indices) -> "FeatureDataset":
        idx = np.asarray(indices, dtype=int)
        return FeatureDataset(
            self.X[idx],
            tuple(self.y[i] for i in idx),
            tuple(self.person_ids[i] for i in idx),
            tuple(self.conditions[i] for i in idx),
            tuple(self.repetition_ids[i] for i in idx),
        )

    def relabeled(self, labels) -> "FeatureDataset":
        return FeatureDataset(
            self.X, tuple(labels), self.person_ids, self.conditions, self.repetition_ids
        )

    @classmethod
    def from_instances(cls, instances) -> "FeatureDataset":
        """Stack pursuit instances (anything with .values/.label/...)."""
        instances = list(instances)
        if not instances:
            raise ValueError("no instances")
        return cls(
            np.stack([inst.values for inst in instances]),
            tuple(inst.label for inst in instances),
            tuple(inst.person_id for inst in instances),
            tuple(inst.condition for inst in instances),
            tuple(inst.repetition_id for inst in instances),
        )


# --- models ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LinearModel:
    """Linear decision model with its standardization and provenance.

    kind "svm": weights is classes-or-1 x dim, decision by sign (binary,
    positive means the second of the sorted classes) or argmax (one-vs-
    rest).  kind "regression": weights [[slope]], biases [intercept], with
    fit diagnostics attached.
    """

    kind: str
    classes: tuple[str, ...]
    weights: np.ndarray
    biases: np.ndarray
    feature_means: np.ndarray
    feature_scales: np.ndarray
    hyperparams: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "weights", freeze(np.atleast_2d(self.weights)))
        object.__setattr__(self, "biases", freeze(np.atleast_1d(self.biases)))
        object.__setattr__(self, "feature_means", freeze(np.atleast_1d(self.feature_means)))
        object.__setattr__(self, "feature_scales", freeze(np.atleast_1d(self.feature_scales)))
        object.__setattr__(self, "classes", tuple(self.classes))

    @property
    def dim(self) -> int:
        return self.weights.shape[1]


def model_to_dict(model: LinearModel) -> dict:
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "kind": model.kind,
        "classes": list(model.classes),
        "weights": [list(row) for row in model.weights],
        "biases": list(model.biases),
        "standardize": {
            "means": list(model.feature_means),
            "scales": list(model.feature_scales),
        },
        "hyperparams": model.hyperparams,
        "diagnostics": model.diagnostics,
    }


def model_from_dict(payload: dict) -> LinearModel:
    if payload.get("format") != MODEL_FORMAT:
        raise ValueError(f"not a {MODEL_FORMAT} payload")
    if payload.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model version {payload.get('version')}")
    return LinearModel(
        kind=payload["kind"],
        classes=tuple(payload["classes"]),
        weights=np.array(payload["weights"], dtype=float),
        biases=np.array(payload["biases"], dtype=float),
        feature_means=np.array(payload["standardize"]["means"], dtype=float),
        feature_scales=np.array(payload["standardize"]["scales"], dtype=float),
        hyperparams=dict(payload.get("hyperparams", {})),
        diagnostics=dict(payload.get("diagnostics", {})),
    )


def save_model(model: LinearModel, path) -> None:
    atomic_write_text(path, json.dumps(model_to_dict(model), indent=2) + "\n")


def load_model(path) -> LinearModel:
    with open(path) as fh:
        return model_from_dict(json.load(fh))


# --- SVM training ------------------------------------------------------------


def _pegasos(X: np.ndarray, y: np.ndarray, lam: float, epochs: int, rng) -> np.ndarray:
    """Stochastic subgradient descent on the L2-regularized hinge loss.

    Uses the scaled-accumulator form of the 1/(lam*t) step schedule: the
    iterate is acc / (lam * (t - 1)), and only margin violations touch the
    accumulator, so each step costs one dot product.
    """
    n, d = X.shape
    acc = np.zeros(d)
    t = 1
    for _ in range(epochs):
        for i in rng.permutation(n):
            if t == 1:
                margin = 0.0
            else:
                margin = y[i] * (acc @ X[i]) / (lam * (t - 1))
            if margin < 1.0:
                acc += y[i] * X[i]
            t += 1
    return acc / (lam * (t - 1))


def train_linear_svm(
    ds: FeatureDataset,
    C: float = config.DEFAULTS.svm_c,
    epochs: int = config.DEFAULTS.svm_epochs,
    seed: int = config.DEFAULTS.seed,
) -> LinearModel:
    """Train a linear SVM (one-vs-rest beyond two classes).

    Features are z-scored on the training data; the bias rides along as an
    augmented unit feature.  The stochastic schedule draws its shuffles
    from a per-class stream of the given seed, so training is deterministic
    and swapping the two labels of a binary problem exactly negates the
    decision function.
    """
    classes = ds.classes
    if len(classes) < 2:
        raise SingleClass(f"need at least two classes, got {classes}")
    if ds.n < 2:
        raise TooFewPoints(f"need at least two instances, got {ds.n}")
    X = np.asarray(ds.X, dtype=float)
    means = X.mean(axis=0)
    scales = X.std(axis=0)
    scales = np.where(scales == 0, 1.0, scales)
    Xs = np.column_stack([(X - means) / scales, np.ones(X.shape[0])])
    lam = 1.0 / (C * ds.n)
    labels = np.asarray(ds.y)
    rows = classes[1:] if len(classes) == 2 else classes
    weights = np.empty((len(rows), ds.dim))
    biases = np.empty(len(rows))
    for r, cls_label in enumerate(rows):
        y = np.where(labels == cls_label, 1.0, -1.0)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, r])))
        w_aug = _pegasos(Xs, y, lam, epochs, rng)
        weights[r] = w_aug[:-1]
        biases[r] = w_aug[-1]
    return LinearModel(
        kind="svm",
        classes=classes,
        weights=weights,
        biases=biases,
        feature_means=means,
        feature_scales=scales,
        hyperparams={"C": float(C), "epochs": int(epochs), "seed": int(seed)},
    )


def decision_function(model: LinearModel, X) -> np.ndarray:
    """Standardized linear scores: (n,) for binary, (n, classes) otherwise."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.dim:
        raise DimensionMismatch(f"model expects {model.dim} attributes, got {X.shape[1]}")
    Xs = (X - model.feature_means) / model.feature_scales
    scores = Xs @ model.weights.T + model.biases
    return scores[:, 0] if model.weights.shape[0] == 1 else scores


def predict(model: LinearModel, X):
    """Predicted label(s) for one vector or a matrix of rows.

    Binary ties on the decision boundary resolve to the positive class
    (the second of the sorted class pair).  Regression models return the
    fitted real value instead of a label.
    """
    single = np.asarray(X).ndim == 1
    if model.kind == "regression":
        vals = decision_function(model, X)
        return float(vals[0]) if single else vals
    scores = decision_function(model, X)
    if len(model.classes) == 2:
        idx = (scores >= 0).astype(int)
    else:
        idx = np.argmax(scores, axis=1)
    labels = np.array(model.classes, dtype=object)[idx]
    return labels[0] if single else labels


# --- metrics -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ClassMetrics:
    """Confusion-derived metrics; macro values average over classes."""

    accuracy: float
    precision: tuple[float, ...]
    recall: tuple[float, ...]
    f1: tuple[float, ...]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    absent_classes: tuple[int, ...]


def classification_metrics(confusion: np.ndarray) -> ClassMetrics:
    """Accuracy, per-class precision/recall/F1, and their macro averages.

    Rows are truth, columns are predictions.  A class with no predictions
    scores precision 0; a class absent from the truth scores recall 0 and
    is reported in absent_classes.
    """
    cm = np.asarray(confusion, dtype=float)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
        raise ValueError(f"confusion must be square, got {cm.shape}")
    total = cm.sum()
    if total == 0:
        raise EmptyConfusion("confusion matrix has no counts")
    diag = np.diag(cm)
    row_sums = cm.sum(axis=1)
    col_sums = cm.sum(axis=0)
    precision = np.where(col_sums > 0, diag / np.where(col_sums == 0, 1, col_sums), 0.0)
    recall = np.where(row_sums > 0, diag / np.where(row_sums == 0, 1, row_sums), 0.0)
    pr = precision + recall
    f1 = np.where(pr > 0, 2 * precision * recall / np.where(pr == 0, 1, pr), 0.0)
    absent = tuple(int(i) for i in np.flatnonzero(row_sums == 0))
    return ClassMetrics(
        accuracy=float(np.trace(cm) / total),
        precision=tuple(precision),
        recall=tuple(recall),
        f1=tuple(f1),
        macro_precision=float(precision.mean()),
        macro_recall=float(recall.mean()),
        macro_f1=float(f1.mean()),
        absent_classes=absent,
    )


# --- evaluation reports ----------------------------------------------------------


@dataclass(frozen=True)
class FoldResult:
    fold_id: str
    n_test: int
    accuracy: float | None = None
    rmse: float | None = None


@dataclass(frozen=True, eq=False)
class EvalReport:
    """Cross-validation outcome: pooled confusion plus per-fold breakdown.

    `accuracy` is the scheme's headline number (pooled over held-out
    predictions for person-independent splits; averaged per person and
    then across persons for repetition splits); the other aggregation is
    always present alongside.
    """

    scheme: str
    classes: tuple[str, ...]
    confusion: np.ndarray | None
    accuracy: float | None
    macro_precision: float | None = None
    macro_recall: float | None = None
    macro_f1: float | None = None
    pooled_accuracy: float | None = None
    fold_mean_accuracy: float | None = None
    folds: tuple[FoldResult, ...] = ()
    k: int | None = None
    rmse: float | None = None
    r2: float | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.confusion is not None:
            object.__setattr__(self, "confusion", freeze(self.confusion))

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "classes": list(self.classes),
            "confusion": None if self.confusion is None else [list(r) for r in self.confusion],
            "accuracy": self.accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "pooled_accuracy": self.pooled_accuracy,
            "fold_mean_accuracy": self.fold_mean_accuracy,
            "folds": [
                {"fold_id": f.fold_id, "n_test": f.n_test, "accuracy": f.accuracy, "rmse": f.rmse}
                for f in self.folds
            ],
            "k": self.k,
            "rmse": self.rmse,
            "r2": self.r2,
            "seed": self.seed,
        }


def _confusion_add(cm: np.ndarray, classes, truth, preds) -> None:
    index = {c: i for i, c in enumerate(classes)}
    for t, p in zip(truth, preds):
        cm[index[t], index[p]] += 1


def leave_one_person_out(
    ds: FeatureDataset,
    trainer=None,
    *,
    C: float = config.DEFAULTS.svm_c,
    epochs: int = config.DEFAULTS.svm_epochs,
    seed: int = config.DEFAULTS.seed,
) -> EvalReport:
    """Person-independent split: one fold per person, train on the rest.

    The held-out person's instances never reach the trainer.  Pooled
    metrics over all held-out predictions are the headline; per-fold
    accuracies ride along.
    """
    persons = ds.persons
    if len(persons) < 2:
        raise SinglePerson(f"need at least two persons, got {persons}")
    if trainer is None:
        trainer = lambda sub: train_linear_svm(sub, C=C, epochs=epochs, seed=seed)
    classes = ds.classes
    cm = np.zeros((len(classes), len(classes)))
    folds = []
    ids = np.asarray(ds.person_ids)
    for person in persons:
        test_idx = np.flatnonzero(ids == person)
        train_idx = np.flatnonzero(ids != person)
        train_ds = ds.subset(train_idx)
        if len(train_ds.classes) < 2:
            raise DegenerateFold(
                f"training fold without person {person!r} has classes {train_ds.classes}"
            )
        model = trainer(train_ds)
        preds = predict(model, ds.X[test_idx])
        truth = [ds.y[i] for i in test_idx]
        _confusion_add(cm, classes, truth, preds)
        correct = sum(t == p for t, p in zip(truth, preds))
        folds.append(FoldResult(person, len(test_idx), correct / len(test_idx)))
    metrics = classification_metrics(cm)
    return EvalReport(
        scheme="lopo",
        classes=classes,
        confusion=cm,
        accuracy=metrics.accuracy,
        macro_precision=metrics.macro_precision,
        macro_recall=metrics.macro_recall,
        macro_f1=metrics.macro_f1,
        pooled_accuracy=metrics.accuracy,
        fold_mean_accuracy=float(np.mean([f.accuracy for f in folds])),
        folds=tuple(folds),
        seed=seed,
    )


def repetition_fold_count(condition: str) -> int:
    """Fold count for a pursuit condition tag like 'circle-fast'."""
    shape, _, speed = condition.partition("-")
    key = (shape, speed)
    if key not in config.REPETITION_FOLDS:
        raise ValueError(f"no fold count on record for condition {condition!r}")
    return config.REPETITION_FOLDS[key]


def leave_one_repetition_out(
    ds: FeatureDataset,
    k: int | None = None,
    *,
    trainer=None,
    C: float = config.DEFAULTS.svm_c,
    epochs: int = config.DEFAULTS.svm_epochs,
    seed: int = config.DEFAULTS.seed,
) -> EvalReport:
    """Person-dependent split: rotate k repetition folds within each person.

    The dataset must hold a single condition; k defaults to the condition's
    entry in the fold table.  When a person has more repetitions than k,
    repetitions are partitioned into k groups by a seeded shuffle.  The
    headline accuracy averages within each person first, then across
    persons; pooled metrics are reported alongside.
    """
    conditions = sorted(set(ds.conditions))
    if len(conditions) != 1:
        raise ValueError(f"dataset mixes conditions {conditions}; split per condition first")
    if k is None:
        k = repetition_fold_count(conditions[0])
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if trainer is None:
        trainer = lambda sub: train_linear_svm(sub, C=C, epochs=epochs, seed=seed)
    classes = ds.classes
    cm = np.zeros((len(classes), len(classes)))
    folds = []
    person_accuracies = []
    ids = np.asarray(ds.person_ids)
    reps_arr = np.asarray(ds.repetition_ids)
    for p_index, person in enumerate(ds.persons):
        p_idx = np.flatnonzero(ids == person)
        reps = sorted(set(reps_arr[p_idx].tolist()))
        if len(reps) < k:
            raise TooFewRepetitions(
                f"person {person!r} has {len(reps)} repetitions, needs {k}"
            )
        if len(reps) == k:
            groups = [[r] for r in reps]
        else:
            rng = np.random.Generator(
                np.random.PCG64(np.random.SeedSequence([seed, 4, p_index]))
            )
            shuffled = list(rng.permutation(reps))
            groups = [list(g) for g in np.array_split(shuffled, k)]
        correct_p = 0
        for j, group in enumerate(groups):
            in_group = np.isin(reps_arr[p_idx], group)
            test_idx = p_idx[in_group]
            train_idx = p_idx[~in_group]
            train_ds = ds.subset(train_idx)
            if len(train_ds.classes) < 2:
                raise DegenerateFold(
                    f"person {person!r}, fold {j}: training classes {train_ds.classes}"
                )
            model = trainer(train_ds)
            preds = predict(model, ds.X[test_idx])
            truth = [ds.y[i] for i in test_idx]
            _confusion_add(cm, classes, truth, preds)
            correct = sum(t == p for t, p in zip(truth, preds))
            correct_p += correct
            folds.append(FoldResult(f"{person}/{j}", len(test_idx), correct / len(test_idx)))
        person_accuracies.append(correct_p / len(p_idx))
    metrics = classification_metrics(cm)
    return EvalReport(
        scheme="loro",
        classes=classes,
        confusion=cm,
        accuracy=float(np.mean(person_accuracies)),
        macro_precision=metrics.macro_precision,
        macro_recall=metrics.macro_recall,
        macro_f1=metrics.macro_f1,
        pooled_accuracy=metrics.accuracy,
        fold_mean_accuracy=float(np.mean([f.accuracy for f in folds])),
        folds=tuple(folds),
        k=int(k),
        seed=seed,
    )


def per_condition_reports(ds: FeatureDataset, scheme: str = "lopo", **kwargs) -> dict:
    """Run one evaluation per condition tag; returns {condition: EvalReport}."""
    reports = {}
    conds = np.asarray(ds.conditions)
    for condition in sorted(set(ds.conditions)):
        sub = ds.subset(np.flatnonzero(conds == condition))
        if scheme == "lopo":
            reports[condition] = leave_one_person_out(sub, **kwargs)
        elif scheme == "loro":
            reports[condition] = leave_one_repetition_out(sub, **kwargs)
        else:
            raise ValueError(f"unknown scheme {scheme!r}")
    return reports


def metrics_table(reports: dict) -> list[dict]:
    """Flatten per-condition reports into accuracy/precision/recall/F1 rows."""
    return [
        {
            "condition": condition,
            "accuracy": rep.accuracy,
            "macro_precision": rep.macro_precision,
            "macro_recall": rep.macro_recall,
            "macro_f1": rep.macro_f1,
        }
        for condition, rep in sorted(reports.items())
    ]


# --- regression ---------------------------------------------------------------


def fit_linear_regression(x, y) -> LinearModel:
    """Ordinary least squares y = slope * x + intercept with diagnostics.

    Diagnostics: r2 = 1 - SS_res / SS_tot, rmse = sqrt(SS_res / n),
    f_stat = SS_reg / (SS_res / (n - 2)), and r = sign(slope) * sqrt(r2).
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ValueError(f"x and y lengths differ: {x.shape} vs {y.shape}")
    n = x.size
    if n < 3:
        raise TooFewPoints(f"need at least 3 points, got {n}")
    x_mean = x.mean()
    y_mean = y.mean()
    sxx = float(np.sum((x - x_mean) ** 2))
    if sxx == 0:
        raise ConstantPredictor("predictor has zero variance")
    slope = float(np.sum((x - x_mean) * (y - y_mean)) / sxx)
    intercept = float(y_mean - slope * x_mean)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y_mean) ** 2))
    ss_reg = float(np.sum((fitted - y_mean) ** 2))
    if ss_tot == 0:
        r2 = 1.0 if ss_res == 0 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    rmse = float(np.sqrt(ss_res / n))
    f_stat = float(np.inf) if ss_res == 0 else float(ss_reg / (ss_res / (n - 2)))
    r = float(np.copysign(np.sqrt(max(r2, 0.0)), slope))
    return LinearModel(
        kind="regression",
        classes=(),
        weights=np.array([[slope]]),
        biases=np.array([intercept]),
        feature_means=np.zeros(1),
        feature_scales=np.ones(1),
        diagnostics={
            "slope": slope,
            "intercept": intercept,
            "r2": r2,
            "rmse": rmse,
            "f_stat": f_stat,
            "r": r,
            "n": int(n),
        },
    )


def lopo_regression(ds: FeatureDataset) -> EvalReport:
    """Leave-one-person-out regression on a single-attribute dataset.

    Each fold fits on every other person's points and predicts the held-out
    person's; RMSE and R^2 pool over all held-out predictions.
    """
    if ds.dim != 1:
        raise DimensionMismatch(f"regression dataset must have 1 attribute, got {ds.dim}")
    persons = ds.persons
    if len(persons) < 3:
        raise SinglePerson(f"need at least three persons, got {len(persons)}")
    ids = np.asarray(ds.person_ids)
    x = ds.X[:, 0]
    y = np.array([float(v) for v in ds.y])
    preds = np.empty_like(y)
    folds = []
    for person in persons:
        test_idx = np.flatnonzero(ids == person)
        train_idx = np.flatnonzero(ids != person)
        model = fit_linear_regression(x[train_idx], y[train_idx])
        fold_pred = predict(model, x[test_idx].reshape(-1, 1))
        preds[test_idx] = fold_pred
        fold_rmse = float(np.sqrt(np.mean((y[test_idx] - fold_pred) ** 2)))
        folds.append(FoldResult(person, len(test_idx), rmse=fold_rmse))
    ss_res = float(np.sum((y - preds) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return EvalReport(
        scheme="lopo-regression",
        classes=(),
        confusion=None,
        accuracy=None,
        rmse=float(np.sqrt(ss_res / y.size)),
        r2=1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0),
        folds=tuple(folds),
    )


def regression_table(fits: dict, lopo: dict | None = None) -> list[dict]:
    """Rows of (predictor, F, R, R^2, RMSE), optionally with pooled split metrics."""
    rows = []
    for name, model in sorted(fits.items()):
        d = model.diagnostics
        row = {
            "predictor": name,
            "f_stat": d["f_stat"],
            "r": d["r"],
            "r2": d["r2"],
            "rmse": d["rmse"],
        }
        if lopo and name in lopo:
            row["lopo_rmse"] = lopo[name].rmse
            row["lopo_r2"] = lopo[name].r2
        rows.append(row)
    return rows
