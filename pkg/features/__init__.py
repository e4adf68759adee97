from features.daily import (
    SENTIMENT_COLUMNS,
    DailySentiment,
    aggregate_daily,
    align_to_trading_days,
    equalize_coverage,
    impute_spline,
    natural_spline_fill,
)
from features.frame import (
    FeatureFrame,
    ScalerParams,
    WindowedSet,
    apply_scaler,
    assemble_feature_frame,
    chrono_split,
    feature_columns,
    fit_scaler,
    inverse_scale,
    make_windows,
    price_only_frame,
    read_feature_frame,
    split_windows,
    write_feature_frame,
)
from features.indicators import EWMA_SPANS, ewma
