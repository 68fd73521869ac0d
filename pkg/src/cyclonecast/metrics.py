"""Evaluation metrics: MAE, R^2, confusion matrices, and per-class /
macro / weighted precision-recall-F1 reports, plus the conversions from
scaled errors back to physical units (kt, mb, degrees, km).
"""

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .preprocess import KM_PER_UNIT


def mae(y_true, y_pred) -> float:
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.shape != y_pred.shape:
        raise ValueError(f"shape mismatch: {y_true.shape} vs {y_pred.shape}")
    if y_true.size == 0:
        raise ValueError("empty input")
    return float(np.mean(np.abs(y_true - y_pred)))


def r_squared(y_true, y_pred) -> float:
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.shape != y_pred.shape:
        raise ValueError(f"shape mismatch: {y_true.shape} vs {y_pred.shape}")
    ss_tot = float(np.sum((y_true - y_true.mean()) ** 2))
    if ss_tot == 0.0:
        raise ValueError("y_true is constant; R^2 undefined")
    ss_res = float(np.sum((y_true - y_pred) ** 2))
    return 1.0 - ss_res / ss_tot


@dataclass
class ConfusionMatrix:
    classes: list
    counts: np.ndarray  # counts[i][j] = true class i predicted as class j

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["true\\pred", *self.classes])
            for cls, row in zip(self.classes, self.counts):
                writer.writerow([cls, *row.tolist()])


@dataclass
class ClassificationReport:
    classes: list
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    accuracy: float
    undefined: list = field(default_factory=list)  # classes scored 0 by policy

    @property
    def macro_precision(self):
        return float(self.precision.mean())

    @property
    def macro_recall(self):
        return float(self.recall.mean())

    @property
    def macro_f1(self):
        return float(self.f1.mean())

    def _weighted(self, values):
        total = self.support.sum()
        return float((values * self.support).sum() / total)

    @property
    def weighted_precision(self):
        return self._weighted(self.precision)

    @property
    def weighted_recall(self):
        return self._weighted(self.recall)

    @property
    def weighted_f1(self):
        return self._weighted(self.f1)

    def to_dict(self) -> dict:
        per_class = {
            cls: {
                "precision": float(p),
                "recall": float(r),
                "f1": float(f),
                "support": int(s),
            }
            for cls, p, r, f, s in zip(
                self.classes, self.precision, self.recall, self.f1, self.support
            )
        }
        return {
            "accuracy": self.accuracy,
            "per_class": per_class,
            "macro": {
                "precision": self.macro_precision,
                "recall": self.macro_recall,
                "f1": self.macro_f1,
            },
            "weighted": {
                "precision": self.weighted_precision,
                "recall": self.weighted_recall,
                "f1": self.weighted_f1,
            },
            "undefined_classes": list(self.undefined),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        width = max(8, *(len(str(c)) for c in self.classes))
        lines = [
            f"{'':>{width}}  precision  recall      f1  support",
        ]
        for i, cls in enumerate(self.classes):
            flag = " *" if cls in self.undefined else ""
            lines.append(
                f"{cls:>{width}}  {self.precision[i]:9.3f}  {self.recall[i]:6.3f}"
                f"  {self.f1[i]:6.3f}  {int(self.support[i]):7d}{flag}"
            )
        lines.append("")
        lines.append(f"{'accuracy':>{width}}  {self.accuracy:9.3f}")
        lines.append(
            f"{'macro avg':>{width}}  {self.macro_precision:9.3f}"
            f"  {self.macro_recall:6.3f}  {self.macro_f1:6.3f}"
            f"  {int(self.support.sum()):7d}"
        )
        lines.append(
            f"{'weighted avg':>{width}}  {self.weighted_precision:9.3f}"
            f"  {self.weighted_recall:6.3f}  {self.weighted_f1:6.3f}"
            f"  {int(self.support.sum()):7d}"
        )
        if self.undefined:
            lines.append("* precision/recall reported as 0 for absent predictions")
        return "\n".join(lines)


def confusion_matrix(y_true, y_pred, classes) -> ConfusionMatrix:
    classes = list(classes)
    index = {c: i for i, c in enumerate(classes)}
    counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(y_true, y_pred, strict=True):
        if t not in index:
            raise ValueError(f"true label {t!r} not in the class list")
        if p not in index:
            raise ValueError(f"predicted label {p!r} not in the class list")
        counts[index[t], index[p]] += 1
    return ConfusionMatrix(classes=classes, counts=counts)


def classification_report(y_true, y_pred, classes):
    """Report + confusion matrix. Precision/recall with a zero denominator
    are reported as 0 and the class is listed in ``undefined``; macro
    averages include them as 0."""
    y_true = list(y_true)
    y_pred = list(y_pred)
    if not y_true:
        raise ValueError("empty input")
    cm = confusion_matrix(y_true, y_pred, classes)
    tp = np.diag(cm.counts).astype(float)
    support = cm.counts.sum(axis=1).astype(float)
    predicted = cm.counts.sum(axis=0).astype(float)
    undefined = [
        c for c, s, p in zip(cm.classes, support, predicted) if s == 0 or p == 0
    ]
    with np.errstate(invalid="ignore", divide="ignore"):
        precision = np.where(predicted > 0, tp / np.maximum(predicted, 1), 0.0)
        recall = np.where(support > 0, tp / np.maximum(support, 1), 0.0)
        denom = precision + recall
        f1 = np.where(denom > 0, 2 * precision * recall / np.maximum(denom, 1e-300), 0.0)
    accuracy = float(tp.sum() / cm.total)
    report = ClassificationReport(
        classes=cm.classes,
        precision=precision,
        recall=recall,
        f1=f1,
        support=support.astype(int),
        accuracy=accuracy,
        undefined=undefined,
    )
    return report, cm


def wind_error_to_knots(mae_scaled, scalers) -> float:
    return float(mae_scaled * scalers.wind.std_[0])


def pressure_error_to_mb(mae_scaled, scalers) -> float:
    return float(mae_scaled * scalers.pressure.std_[0])


def direction_error_to_degrees(mae_radians) -> float:
    return float(mae_radians * 180.0 / math.pi)


def length_error_to_km(mae_length) -> float:
    return float(mae_length * KM_PER_UNIT)


def regression_errors_physical(maes, scalers) -> dict:
    """Convert the 4-target scaled MAEs (wind, pressure, length, direction)
    into kt, mb, km, and degrees."""
    return {
        "wind_kt": wind_error_to_knots(maes[0], scalers),
        "pressure_mb": pressure_error_to_mb(maes[1], scalers),
        "length_km": length_error_to_km(maes[2]),
        "direction_deg": direction_error_to_degrees(maes[3]),
    }
