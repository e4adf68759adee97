"""
Forecast error metrics in price units: MAE, RMSE, MAPE (%) and adjusted R².

    R²_a = 1 - (1 - R²)(n - 1) / (n - p - 1)

Negative R²_a is reported as is.
"""

from dataclasses import dataclass, field

import numpy as np
from sklearn.metrics import mean_absolute_error, mean_absolute_percentage_error, mean_squared_error, r2_score

from core.errors import ValidationError


@dataclass(frozen=True)
class EvalReport:
    mae: float
    rmse: float
    mape: float
    r2: float
    r2_adjusted: float
    n: int
    p: int
    dataset_label: str = ""
    model_label: str = ""
    actual: np.ndarray = field(default=None, repr=False, compare=False)
    predicted: np.ndarray = field(default=None, repr=False, compare=False)

    def row(self, digits=6):
        return {
            "dataset": self.dataset_label,
            "model": self.model_label,
            "n": self.n,
            "p": self.p,
            "mae": round(self.mae, digits),
            "rmse": round(self.rmse, digits),
            "r2_adjusted": round(self.r2_adjusted, digits),
            "mape_percent": round(self.mape, digits),
        }


def adjusted_r2(r2, n, p):
    if n <= p + 1:
        raise ValidationError(f"adjusted R² undefined: n={n} must exceed p+1={p + 1}")
    return 1.0 - (1.0 - r2) * (n - 1) / (n - p - 1)


def compute_metrics(y_true, y_pred, p, dataset_label="", model_label=""):
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.ndim != 1 or y_true.shape != y_pred.shape:
        raise ValidationError(f"y_true {y_true.shape} and y_pred {y_pred.shape} must be equal-length 1-D series")
    n = y_true.size
    if n < 2:
        raise ValidationError(f"need at least 2 test samples, got {n}")
    if p < 0:
        raise ValidationError(f"p must be >= 0, got {p}")
    if np.any(y_true == 0):
        raise ValidationError("MAPE undefined: y_true contains zero")
    if n <= p + 1:
        raise ValidationError(f"adjusted R² undefined: n={n} must exceed p+1={p + 1}")

    r2 = float(r2_score(y_true, y_pred))
    return EvalReport(
        mae=float(mean_absolute_error(y_true, y_pred)),
        rmse=float(np.sqrt(mean_squared_error(y_true, y_pred))),
        mape=100.0 * float(mean_absolute_percentage_error(y_true, y_pred)),
        r2=r2,
        r2_adjusted=adjusted_r2(r2, n, p),
        n=int(n),
        p=int(p),
        dataset_label=dataset_label,
        model_label=model_label,
        actual=y_true,
        predicted=y_pred,
    )
