from datetime import date, timedelta

import numpy as np
import pandas as pd
import pytest

from core.errors import FormatError, ValidationError
from features import daily, frame as ff
from features.indicators import ewma
from ingest.ohlcv import DailyBar
from ingest.posts import Platform, PostRecord, dedup_posts, parse_handle_list, parse_posts, partition_posts
from sentiment.lexicon import ScoredPost, ScoreSource, SentimentScore, load_lexicon, score_posts

D0 = date(2022, 1, 3)  # a Monday


def _scored(day, positive, negative=0.1, neutral=0.5):
    post = PostRecord(f"{day}-{positive}", day, "a", "x", Platform.TWITTER)
    return ScoredPost(post, SentimentScore(positive, negative, neutral, ScoreSource.LEXICON))


def _bars(n, start=D0):
    days = pd.bdate_range(start, periods=n)
    bars = []
    for i, day in enumerate(days):
        close = 100.0 + i
        bars.append(DailyBar(day.date(), close - 0.5, close + 1.0, close - 1.0, close, 1000 + i))
    return bars


def _observed(day, p=0.4, n=0.2, u=0.4):
    return daily.DailySentiment(day, p, n, u, True)


def _frame(matrix, target=None, names=None, start="2022-01-03"):
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim == 1:
        matrix = matrix[:, None]
    n = matrix.shape[0]
    names = names or tuple(f"c{i}" for i in range(matrix.shape[1]))
    target = np.arange(n, dtype=float) if target is None else np.asarray(target, dtype=float)
    return ff.FeatureFrame(pd.DatetimeIndex(pd.bdate_range(start, periods=n)), matrix, tuple(names), target)


def natural_spline_oracle(x, y, x_new):
    """Second-derivative form of the natural cubic spline, solved with the Thomas algorithm."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x) - 1
    h = np.diff(x)
    m = np.zeros(n + 1)
    if n > 1:
        a = h[:-1].copy()
        b = 2.0 * (h[:-1] + h[1:])
        c = h[1:].copy()
        d = 6.0 * ((y[2:] - y[1:-1]) / h[1:] - (y[1:-1] - y[:-2]) / h[:-1])
        for i in range(1, n - 1):
            w = a[i] / b[i - 1]
            b[i] -= w * c[i - 1]
            d[i] -= w * d[i - 1]
        inner = np.zeros(n - 1)
        inner[-1] = d[-1] / b[-1]
        for i in range(n - 3, -1, -1):
            inner[i] = (d[i] - c[i] * inner[i + 1]) / b[i]
        m[1:-1] = inner

    out = []
    for t in np.atleast_1d(x_new):
        i = min(max(int(np.searchsorted(x, t) - 1), 0), n - 1)
        hi, lo, up = h[i], x[i], x[i + 1]
        out.append(
            m[i] * (up - t) ** 3 / (6 * hi)
            + m[i + 1] * (t - lo) ** 3 / (6 * hi)
            + (y[i] / hi - m[i] * hi / 6) * (up - t)
            + (y[i + 1] / hi - m[i + 1] * hi / 6) * (t - lo)
        )
    return np.array(out)


def ewma_oracle(values, span):
    alpha = 2.0 / (span + 1.0)
    out = []
    for t in range(len(values)):
        weights = np.array([(1 - alpha) ** i for i in range(t + 1)])
        out.append(np.dot(weights, values[t::-1]) / weights.sum())
    return np.array(out)


# Daily aggregation

def test_same_day_scores_are_averaged():
    series = daily.aggregate_daily([_scored(D0, 0.2), _scored(D0, 0.4)])
    assert len(series) == 1
    assert series[0].positive == pytest.approx(0.3)
    assert series[0].observed


def test_single_post_passes_through():
    series = daily.aggregate_daily([_scored(D0, 0.7, 0.2, 0.1)])
    assert series[0].values() == pytest.approx((0.7, 0.2, 0.1))


def test_gap_day_is_unobserved():
    series = daily.aggregate_daily([_scored(D0, 0.2), _scored(D0 + timedelta(days=2), 0.4)])
    assert [s.observed for s in series] == [True, False, True]
    assert series[1].positive is None


def test_aggregate_empty_rejected():
    with pytest.raises(ValidationError):
        daily.aggregate_daily([])


# Alignment

def test_weekend_rows_dropped():
    sentiment = [_observed(D0 + timedelta(days=i)) for i in range(7)]
    aligned = daily.align_to_trading_days(sentiment, _bars(5))
    assert [s.date for s in aligned] == [b.date for b in _bars(5)]


def test_seven_day_bars_keep_weekend_sentiment():
    # currency markets trade every calendar day
    days = pd.date_range(D0, periods=7, freq="D")
    bars = [DailyBar(day.date(), 100.0, 101.0, 99.0, 100.5, 10) for day in days]
    sentiment = [_observed(D0 + timedelta(days=i)) for i in range(7)]
    aligned = daily.align_to_trading_days(sentiment, bars)
    assert len(aligned) == 7
    assert all(entry.observed for entry in aligned)


def test_leading_unobserved_days_dropped():
    bars = _bars(6)
    sentiment = [_observed(b.date) for b in bars[3:]]
    aligned = daily.align_to_trading_days(sentiment, bars)
    assert aligned[0].date == bars[3].date
    assert len(aligned) == 3


def test_trailing_gap_trimmed_only_on_request():
    bars = _bars(6)
    sentiment = [_observed(b.date) for b in bars[:4]]
    assert len(daily.align_to_trading_days(sentiment, bars)) == 6
    assert len(daily.align_to_trading_days(sentiment, bars, trim_end=True)) == 4


def test_no_overlap_rejected():
    bars = _bars(3)
    with pytest.raises(ValidationError):
        daily.align_to_trading_days([_observed(date(2010, 1, 4))], bars)


# Spline imputation

def test_spline_matches_tridiagonal_oracle():
    x = np.array([0.0, 1.0, 2.0, 4.0, 5.0])
    y = x ** 3
    got = daily.natural_spline_fill(x, y, [3.0])
    np.testing.assert_allclose(got, natural_spline_oracle(x, y, [3.0]), atol=1e-9)


def test_spline_matches_oracle_on_random_gap_patterns():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        n = int(rng.integers(3, 201))
        observed = rng.random(n) < rng.uniform(0.3, 0.9)
        observed[0] = observed[-1] = True
        known = np.flatnonzero(observed)
        gaps = np.flatnonzero(~observed)
        y = rng.random(known.size)
        got = daily.natural_spline_fill(known, y, gaps)
        np.testing.assert_allclose(got, natural_spline_oracle(known, y, gaps), atol=1e-9)
        assert np.max(np.abs(daily.natural_spline_fill(known, y, known) - y)) < 1e-12


def test_spline_passes_through_knots():
    x = np.array([0.0, 1.0, 3.0, 4.0])
    y = np.array([0.2, 0.5, 0.1, 0.3])
    np.testing.assert_allclose(daily.natural_spline_fill(x, y, x), y, atol=1e-12)


def test_two_knots_are_linear():
    days = [D0 + timedelta(days=i) for i in range(3)]
    series = [_observed(days[0], 0.2, 0.2, 0.6), daily.DailySentiment(days[1]), _observed(days[2], 0.6, 0.2, 0.2)]
    filled = daily.impute_spline(series)
    assert filled[1].observed
    assert filled[1].values() == pytest.approx((0.4, 0.2, 0.4))


def test_no_gaps_is_identity():
    series = [_observed(D0 + timedelta(days=i), 0.1 * i) for i in range(4)]
    assert daily.impute_spline(series) == series


def test_imputed_values_clamped():
    days = [D0 + timedelta(days=i) for i in range(6)]
    series = [_observed(days[0], 0.0), _observed(days[1], 1.0), daily.DailySentiment(days[2]),
              daily.DailySentiment(days[3]), _observed(days[4], 1.0), _observed(days[5], 0.0)]
    for entry in daily.impute_spline(series):
        assert all(0.0 <= v <= 1.0 for v in entry.values())


def test_unobserved_edge_rejected():
    series = [daily.DailySentiment(D0), _observed(D0 + timedelta(days=1)), _observed(D0 + timedelta(days=2))]
    with pytest.raises(ValidationError, match="outside the observed range"):
        daily.impute_spline(series)


# Equalization

def test_equalize_drops_days_without_executives():
    general = [_scored(D0, 0.2), _scored(D0 + timedelta(days=1), 0.3)]
    assert daily.equalize_coverage(general, {D0}) == general[:1]


def test_equalize_full_cover_and_empty():
    general = [_scored(D0, 0.2), _scored(D0 + timedelta(days=1), 0.3)]
    assert daily.equalize_coverage(general, {p.date for p in general}) == general
    assert daily.equalize_coverage(general, set()) == []


def test_equalize_is_idempotent():
    general = [_scored(D0 + timedelta(days=i), 0.1 * i) for i in range(5)]
    allowed = {D0, D0 + timedelta(days=3)}
    once = daily.equalize_coverage(general, allowed)
    assert daily.equalize_coverage(once, allowed) == once


def test_equalize_fixture_posts(fixture_path):
    posts = dedup_posts(parse_posts(fixture_path("mixed_posts.jsonl")))
    executive, general = partition_posts(posts, parse_handle_list(fixture_path("executives.txt")))
    lexicon = load_lexicon(fixture_path("lexicon.tsv"))
    exec_dates = {post.date for post in executive}
    kept = daily.equalize_coverage(score_posts(general, lexicon), exec_dates)
    assert kept
    assert {scored.date for scored in kept} <= exec_dates
    assert daily.equalize_coverage(kept, exec_dates) == kept


# EWMA

def test_ewma_two_point_example():
    np.testing.assert_allclose(ewma([1.0, 2.0], 3), [1.0, 2.5 / 1.5])


@pytest.mark.parametrize("span", [1, 3, 7, 14, 30])
def test_ewma_matches_weighted_sum(span):
    values = np.random.default_rng(span).normal(size=500)
    np.testing.assert_allclose(ewma(values, span), ewma_oracle(values, span), atol=1e-12)


def test_ewma_constant_and_identity():
    np.testing.assert_allclose(ewma(np.full(10, 4.2), 7), np.full(10, 4.2))
    values = np.arange(5.0)
    np.testing.assert_allclose(ewma(values, 1), values)


def test_ewma_span_zero_rejected():
    with pytest.raises(ValidationError):
        ewma([1.0, 2.0], 0)


def test_ewma_recursive_variant():
    np.testing.assert_allclose(ewma([1.0, 2.0], 3, adjust=False), [1.0, 1.5])


# Feature frame

def test_sentiment_frame_has_24_columns():
    bars = _bars(10)
    frame = ff.assemble_feature_frame(bars, [_observed(b.date, 0.1 + 0.01 * i) for i, b in enumerate(bars)])
    assert len(frame.column_names) == 24
    assert frame.column_names[:8] == ("open", "high", "low", "close", "volume", "positive", "negative", "neutral")
    assert len(frame) == 9


def test_target_is_next_close():
    bars = _bars(10)
    frame = ff.price_only_frame(bars)
    assert len(frame.column_names) == 9
    np.testing.assert_array_equal(frame.target, [b.close for b in bars[1:]])
    assert frame.dates[-1].date() == bars[-2].date


def test_frame_ewma_columns_follow_close():
    bars = _bars(12)
    frame = ff.price_only_frame(bars)
    j = frame.column_names.index("close_ewma_7")
    expected = ewma_oracle(np.array([b.close for b in bars]), 7)[:-1]
    np.testing.assert_allclose(frame.matrix[:, j], expected, atol=1e-12)


def test_frame_needs_two_days():
    with pytest.raises(ValidationError):
        ff.price_only_frame(_bars(1))


def test_frame_rejects_misaligned_sentiment():
    bars = _bars(4)
    with pytest.raises(ValidationError):
        ff.assemble_feature_frame(bars, [_observed(b.date) for b in bars[1:]])


def test_feature_frame_file_round_trip(tmp_path):
    frame = ff.price_only_frame(_bars(8))
    path = str(tmp_path / "features.csv")
    ff.write_feature_frame(frame, path)
    back = ff.read_feature_frame(path)
    assert back.column_names == frame.column_names
    np.testing.assert_array_equal(back.matrix, frame.matrix)
    np.testing.assert_array_equal(back.target, frame.target)


def test_feature_frame_file_keeps_every_bit(tmp_path):
    rng = np.random.default_rng(4)
    frame = _frame(rng.normal(size=(30, 4)) * 1e3 / 7, target=rng.normal(size=30) / 3)
    path = str(tmp_path / "features.csv")
    ff.write_feature_frame(frame, path)
    back = ff.read_feature_frame(path)
    np.testing.assert_array_equal(back.matrix, frame.matrix)
    np.testing.assert_array_equal(back.target, frame.target)


def test_feature_file_header_checked(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("day,a,b\n2022-01-03,1,2\n", encoding="utf-8")
    with pytest.raises(FormatError):
        ff.read_feature_frame(str(path))


# Scaling

def test_constant_column_scales_to_zero():
    frame = _frame(np.full(4, 3.0))
    params = ff.fit_scaler(frame, (frame.dates[0], frame.dates[-1]))
    assert params.std[0] == 1.0
    np.testing.assert_array_equal(ff.apply_scaler(frame, params).matrix[:, 0], 0.0)


def test_two_point_z_score():
    frame = _frame([0.0, 2.0])
    params = ff.fit_scaler(frame, (frame.dates[0], frame.dates[-1]))
    assert params.mean[0] == pytest.approx(1.0)
    assert params.std[0] == pytest.approx(1.0)
    np.testing.assert_allclose(ff.apply_scaler(frame, params).matrix[:, 0], [-1.0, 1.0])


def test_scale_and_inverse_by_hand():
    params = ff.ScalerParams(("c0",), np.array([10.0, 10.0]), np.array([2.0, 2.0]), (D0, D0))
    scaled = ff.apply_scaler(_frame([14.0], target=[14.0]), params)
    assert scaled.matrix[0, 0] == pytest.approx(2.0)
    assert ff.inverse_scale([2.0], params)[0] == pytest.approx(14.0)
    assert ff.inverse_scale([2.0], params, column="c0")[0] == pytest.approx(14.0)


def test_apply_then_inverse_recovers_values():
    rng = np.random.default_rng(3)
    frame = _frame(rng.normal(50, 10, size=(30, 4)), target=rng.normal(50, 10, size=30))
    params = ff.fit_scaler(frame, (frame.dates[0], frame.dates[19]))
    scaled = ff.apply_scaler(frame, params)
    for j, name in enumerate(frame.column_names):
        assert np.max(np.abs(ff.inverse_scale(scaled.matrix[:, j], params, name) - frame.matrix[:, j])) < 1e-12
    assert np.max(np.abs(ff.inverse_scale(scaled.target, params) - frame.target)) < 1e-12


def test_fit_range_limits_statistics():
    frame = _frame([0.0, 2.0, 100.0])
    params = ff.fit_scaler(frame, (frame.dates[0], frame.dates[1]))
    assert params.mean[0] == pytest.approx(1.0)


def test_target_can_reuse_close_statistics():
    frame = _frame(np.array([[1.0, 10.0], [3.0, 20.0]]), target=[50.0, 70.0], names=("open", "close"))
    params = ff.fit_scaler(frame, (frame.dates[0], frame.dates[-1]), target_scaling="close")
    assert params.mean[-1] == pytest.approx(15.0)
    assert params.std[-1] == pytest.approx(5.0)


def test_empty_fit_range_rejected():
    frame = _frame([1.0, 2.0])
    with pytest.raises(ValidationError):
        ff.fit_scaler(frame, (date(2000, 1, 1), date(2000, 2, 1)))


def test_scaler_column_mismatch_rejected():
    frame = _frame(np.ones((3, 2)))
    params = ff.fit_scaler(_frame(np.ones((3, 3))), (D0, D0 + timedelta(days=5)))
    with pytest.raises(ValidationError):
        ff.apply_scaler(frame, params)


# Split and windows

def test_chrono_split_eight_two():
    frame = _frame(np.arange(10.0))
    train, test = ff.chrono_split(frame, 0.8)
    assert len(train) == 8 and len(test) == 2
    np.testing.assert_array_equal(test.matrix[:, 0], [8.0, 9.0])


@pytest.mark.parametrize("ratio", [0.999, 0.05, 1.0, 0.0])
def test_chrono_split_degenerate(ratio):
    with pytest.raises(ValidationError):
        ff.chrono_split(_frame(np.arange(10.0)), ratio)


def test_window_of_one():
    frame = _frame(np.arange(6.0))
    windows = ff.make_windows(frame, 1)
    assert len(windows) == 6
    np.testing.assert_array_equal(windows.samples[:, 0, 0], frame.matrix[:, 0])


def test_window_count_and_content():
    frame = _frame(np.arange(10.0).reshape(5, 2))
    windows = ff.make_windows(frame, 3)
    assert windows.samples.shape == (3, 3, 2)
    np.testing.assert_array_equal(windows.samples[1], frame.matrix[1:4])
    np.testing.assert_array_equal(windows.targets, frame.target[2:])
    assert windows.end_dates[0] == frame.dates[2]


def test_window_longer_than_frame_rejected():
    with pytest.raises(ValidationError):
        ff.make_windows(_frame(np.arange(3.0)), 4)


def test_windows_do_not_alias_frame():
    frame = _frame(np.arange(5.0))
    windows = ff.make_windows(frame, 2)
    windows.samples[0, 0, 0] = 99.0
    assert frame.matrix[0, 0] == 0.0


def test_split_windows_by_end_date():
    frame = _frame(np.arange(10.0))
    windows = ff.make_windows(frame, 3)
    train, test = ff.split_windows(windows, frame.dates[7])
    assert len(train) == 6 and len(test) == 2
    assert test.end_dates[0] == frame.dates[8]
