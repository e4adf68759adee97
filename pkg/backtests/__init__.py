from backtests.evaluate import evaluate_model, print_report_table, report_frame, write_report
from backtests.metrics import EvalReport, adjusted_r2, compute_metrics
