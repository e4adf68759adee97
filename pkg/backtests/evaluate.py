"""
Model evaluation and report output
----------------------------------
predict (scaled) -> inverse-scale to prices -> metrics; reports go to
report.json (rows rounded to 6 decimals) and report.csv.
"""

import logging

import pandas as pd

from backtests.metrics import compute_metrics
from core.errors import ValidationError
from core.io import write_csv_atomic, write_json_atomic
from core.log import RULE
from features.frame import inverse_scale
from models.network import predict

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ["dataset", "model", "n", "p", "mae", "rmse", "r2_adjusted", "mape_percent"]


def evaluate_model(spec, params, windows, scaler, p=None, dataset_label="", model_label=""):
    """Metrics of a trained model on test windows, in original price units.

    p defaults to the number of input features.
    """
    if tuple(windows.column_names) != tuple(scaler.column_names):
        raise ValidationError(
            f"scaler was fit on {len(scaler.column_names)} columns, windows carry {len(windows.column_names)}"
        )
    if len(windows) == 0:
        raise ValidationError("no test windows to evaluate")
    predicted = inverse_scale(predict(spec, params, windows.samples), scaler)
    actual = inverse_scale(windows.targets, scaler)
    p = len(windows.column_names) if p is None else p
    report = compute_metrics(actual, predicted, p, dataset_label, model_label)
    logger.info("%s / %s: MAE %.3f RMSE %.3f R2a %.3f MAPE %.3f%%",
                dataset_label, model_label, report.mae, report.rmse, report.r2_adjusted, report.mape)
    return report


def report_frame(reports):
    return pd.DataFrame([r.row() for r in reports], columns=REPORT_COLUMNS)


def write_report(reports, json_path, csv_path):
    write_json_atomic(json_path, [r.row() for r in reports])
    write_csv_atomic(csv_path, report_frame(reports), index=False)


def print_report_table(reports, title="RESULTS"):
    print("\n" + RULE)
    print(title)
    print(RULE)
    print(f"{'Dataset':<18}{'Model':<10}{'MAE':>11}{'RMSE':>11}{'R2_adj':>9}{'MAPE%':>9}")
    print("─" * 70)
    for r in reports:
        print(f"{r.dataset_label:<18}{r.model_label:<10}{r.mae:>11.3f}{r.rmse:>11.3f}"
              f"{r.r2_adjusted:>9.3f}{r.mape:>9.3f}")
    print(RULE)
