"""Downstream predictive evaluation: TSTR and augmentation protocols.

Learners are deliberately small (logistic regression, linear regression, a
light random forest, k-NN) and run on the one-hot + min-max feature encoding.
Classification metrics: balanced accuracy, macro precision/recall/F1, G-mean,
and AUC via the rank statistic. Regression metrics: MAE, MSE, R^2.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.linear_model import LinearRegression, LogisticRegression
from sklearn.ensemble import RandomForestClassifier, RandomForestRegressor
from sklearn.neighbors import KNeighborsClassifier, KNeighborsRegressor

from .exceptions import (
    EmptyTest,
    SchemaMismatch,
    SingleClassTrainingSet,
    TaskMismatch,
)
from .tabular import (
    CLASSIFICATION,
    REGRESSION,
    ColumnBlock,
    Table,
    build_layout,
)

CLASSIFICATION_LEARNERS = ("logistic_regression", "random_forest_lite", "knn")
REGRESSION_LEARNERS = ("linear_regression", "random_forest_lite", "knn")


@dataclass(frozen=True)
class Learner:
    kind: str

    def for_task(self, task: str) -> bool:
        if task == CLASSIFICATION:
            return self.kind in CLASSIFICATION_LEARNERS
        if task == REGRESSION:
            return self.kind in REGRESSION_LEARNERS
        return False


@dataclass
class EfficacyReport:
    protocol: str  # trtr | tstr | augmentation
    learner: str
    scores: dict[str, float]
    seed: int


def _feature_target_split(table: Table) -> tuple[np.ndarray, list]:
    """Encode non-target columns; return (features, raw target values)."""
    schema = table.schema
    if schema.target_index is None or schema.task not in (CLASSIFICATION,
                                                          REGRESSION):
        raise TaskMismatch("table has no prediction task")
    target = schema.target_index
    layout = build_layout(schema)
    width = sum(b.width for b in layout if b.column_index != target)
    x = np.zeros((len(table), width))
    offset = 0
    for block, spec in zip(layout, schema.columns):
        if block.column_index == target:
            continue
        if spec.is_categorical:
            index = {c: j for j, c in enumerate(spec.categories)}
            for r, row in enumerate(table.rows):
                x[r, offset + index[row[block.column_index]]] = 1.0
        elif not block.constant:
            span = spec.observed_max - spec.observed_min
            col = np.array([row[block.column_index] for row in table.rows])
            x[:, offset] = (col - spec.observed_min) / span
        offset += block.width
    y = [row[target] for row in table.rows]
    return x, y


def make_model(learner: Learner, task: str, seed: int):
    if not learner.for_task(task):
        raise TaskMismatch(f"{learner.kind} does not support task {task!r}")
    if task == CLASSIFICATION:
        if learner.kind == "logistic_regression":
            return LogisticRegression(max_iter=5000, tol=1e-6)
        if learner.kind == "random_forest_lite":
            return RandomForestClassifier(n_estimators=25, max_depth=6,
                                          max_features="sqrt",
                                          random_state=seed)
        return KNeighborsClassifier(n_neighbors=5)
    if learner.kind == "linear_regression":
        return LinearRegression()
    if learner.kind == "random_forest_lite":
        return RandomForestRegressor(n_estimators=25, max_depth=6,
                                     max_features="sqrt", random_state=seed)
    return KNeighborsRegressor(n_neighbors=5)


def train_learner(learner: Learner, train: Table, seed: int):
    if len(train) == 0:
        raise EmptyTest("empty training table")
    x, y = _feature_target_split(train)
    task = train.schema.task
    if task == CLASSIFICATION and len(set(y)) < 2:
        raise SingleClassTrainingSet("training set has a single class label")
    model = make_model(learner, task, seed)
    model.fit(x, np.array(y) if task == REGRESSION else y)
    return model


def _auc_binary(scores: np.ndarray, truth: np.ndarray) -> float:
    """Mann-Whitney rank AUC of scores for the positive class."""
    pos = scores[truth]
    neg = scores[~truth]
    if len(pos) == 0 or len(neg) == 0:
        return float("nan")
    order = np.argsort(np.concatenate([pos, neg]), kind="mergesort")
    ranks = np.empty(len(order))
    ranks[order] = np.arange(1, len(order) + 1)
    combined = np.concatenate([pos, neg])
    # midranks for ties
    sorted_vals = combined[order]
    i = 0
    while i < len(sorted_vals):
        j = i
        while j + 1 < len(sorted_vals) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        if j > i:
            tie_ids = order[i:j + 1]
            ranks[tie_ids] = (i + 1 + j + 1) / 2.0
        i = j + 1
    rank_sum = ranks[:len(pos)].sum()
    u = rank_sum - len(pos) * (len(pos) + 1) / 2.0
    return float(u / (len(pos) * len(neg)))


def evaluate_classification(model, test: Table) -> dict[str, float]:
    if len(test) == 0:
        raise EmptyTest("empty test table")
    x, y_true = _feature_target_split(test)
    y_pred = list(model.predict(x))
    classes = sorted(set(y_true))
    model_classes = list(model.classes_)
    missing = [c for c in model_classes if c not in classes]
    if missing:
        warnings.warn(f"classes {missing} absent from test set; "
                      "excluded from macro averages")

    recalls, precisions, f1s = [], [], []
    for c in classes:
        tp = sum(1 for t, p in zip(y_true, y_pred) if t == c and p == c)
        fn = sum(1 for t, p in zip(y_true, y_pred) if t == c and p != c)
        fp = sum(1 for t, p in zip(y_true, y_pred) if t != c and p == c)
        recall = tp / (tp + fn) if tp + fn else 0.0
        precision = tp / (tp + fp) if tp + fp else 0.0
        f1 = (2 * precision * recall / (precision + recall)
              if precision + recall else 0.0)
        recalls.append(recall)
        precisions.append(precision)
        f1s.append(f1)

    proba = model.predict_proba(x)
    if len(classes) == 2 and len(model_classes) == 2:
        positive = model_classes[1]
        truth = np.array([t == positive for t in y_true])
        auc = _auc_binary(proba[:, 1], truth)
    else:
        aucs = []
        for c in classes:
            if c not in model_classes:
                continue
            truth = np.array([t == c for t in y_true])
            if truth.all() or not truth.any():
                continue
            aucs.append(_auc_binary(proba[:, model_classes.index(c)], truth))
        auc = float(np.mean(aucs)) if aucs else float("nan")

    gmean = float(np.prod(recalls) ** (1.0 / len(recalls))) if recalls else 0.0
    if any(r == 0.0 for r in recalls):
        gmean = 0.0
    return {
        "balanced_accuracy": float(np.mean(recalls)),
        "precision": float(np.mean(precisions)),
        "recall": float(np.mean(recalls)),
        "f1": float(np.mean(f1s)),
        "g_mean": gmean,
        "auc": auc,
    }


def evaluate_regression(model, test: Table) -> dict[str, float]:
    if len(test) == 0:
        raise EmptyTest("empty test table")
    x, y_true = _feature_target_split(test)
    y_true = np.array(y_true, dtype=float)
    y_pred = np.asarray(model.predict(x), dtype=float)
    err = y_pred - y_true
    mae = float(np.mean(np.abs(err)))
    mse = float(np.mean(err ** 2))
    ss_tot = float(np.sum((y_true - y_true.mean()) ** 2))
    if ss_tot == 0:
        warnings.warn("constant test target; R^2 reported as 0")
        r2 = 0.0
    else:
        r2 = 1.0 - float(np.sum(err ** 2)) / ss_tot
    return {"mae": mae, "mse": mse, "r2": r2}


def _evaluate(model, test: Table) -> dict[str, float]:
    if test.schema.task == CLASSIFICATION:
        return evaluate_classification(model, test)
    return evaluate_regression(model, test)


def default_learners(task: str) -> list[Learner]:
    kinds = (CLASSIFICATION_LEARNERS if task == CLASSIFICATION
             else REGRESSION_LEARNERS)
    return [Learner(k) for k in kinds]


def run_tstr(real_train: Table, synth_train: Table, real_test: Table,
             learners: list[Learner], seed: int) -> list[EfficacyReport]:
    if synth_train.schema.names != real_train.schema.names:
        raise SchemaMismatch("synthetic schema differs from real schema")
    reports = []
    for learner in learners:
        model = train_learner(learner, real_train, seed)
        reports.append(EfficacyReport("trtr", learner.kind,
                                      _evaluate(model, real_test), seed))
        model = train_learner(learner, synth_train, seed)
        reports.append(EfficacyReport("tstr", learner.kind,
                                      _evaluate(model, real_test), seed))
    return reports


def run_augmentation(real_train: Table, synth: Table, real_test: Table,
                     learners: list[Learner], seed: int) -> list[EfficacyReport]:
    if synth.schema.names != real_train.schema.names:
        raise SchemaMismatch("synthetic schema differs from real schema")
    combined = real_train.concat(synth) if len(synth) else real_train
    reports = []
    for learner in learners:
        model = train_learner(learner, real_train, seed)
        reports.append(EfficacyReport("trtr", learner.kind,
                                      _evaluate(model, real_test), seed))
        model = train_learner(learner, combined, seed)
        reports.append(EfficacyReport("augmentation", learner.kind,
                                      _evaluate(model, real_test), seed))
    return reports
