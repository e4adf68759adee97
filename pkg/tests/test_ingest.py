import json
from datetime import date

import pytest

from core.errors import FormatError, ParseError, ValidationError
from ingest.ohlcv import DailyBar, parse_ohlcv, serialize_ohlcv, summarize_bars
from ingest.posts import (
    Category,
    HandleList,
    Platform,
    PostRecord,
    dedup_posts,
    parse_handle_list,
    parse_posts,
    partition_posts,
    partition_reddit_posts,
    write_posts,
)


def _post(pid, day, author="a", text="TSLA up", subreddit=None, platform=Platform.TWITTER):
    return PostRecord(pid, day, author, text, platform, subreddit=subreddit)


def _write_jsonl(tmp_path, rows, name="posts.jsonl"):
    path = tmp_path / name
    path.write_text("\n".join(json.dumps(r) if isinstance(r, dict) else r for r in rows) + "\n", encoding="utf-8")
    return str(path)


# OHLCV

def test_single_row_maps_fields(write_ohlcv):
    bars = parse_ohlcv(write_ohlcv([("2017-01-03", 10.0, 12.0, 9.0, 11.0, 500)]))
    assert bars == [DailyBar(date(2017, 1, 3), 10.0, 12.0, 9.0, 11.0, 500)]


def test_header_only_file_is_empty(write_ohlcv):
    assert parse_ohlcv(write_ohlcv([])) == []


def test_low_above_high_names_date(write_ohlcv):
    path = write_ohlcv([("2017-01-03", 10.0, 12.0, 13.0, 11.0, 500)])
    with pytest.raises(ValidationError, match="2017-01-03"):
        parse_ohlcv(path)


def test_bad_header_reports_line_one(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("Date,Open,Close\n2017-01-03,1,2\n", encoding="utf-8")
    with pytest.raises(FormatError) as exc:
        parse_ohlcv(str(path))
    assert exc.value.line == 1


def test_unparseable_number_names_line_and_field(write_ohlcv):
    path = write_ohlcv([("2017-01-03", 10.0, 12.0, 9.0, 11.0, 500), ("2017-01-04", "abc", 12.0, 9.0, 11.0, 500)])
    with pytest.raises(ParseError) as exc:
        parse_ohlcv(path)
    assert exc.value.line == 3
    assert exc.value.field == "Open"


def test_rows_sorted_and_duplicates_rejected(write_ohlcv):
    rows = [("2017-01-04", 10, 12, 9, 11, 1), ("2017-01-03", 10, 12, 9, 11, 2)]
    bars = parse_ohlcv(write_ohlcv(rows))
    assert [b.date for b in bars] == [date(2017, 1, 3), date(2017, 1, 4)]

    with pytest.raises(ValidationError, match="duplicate"):
        parse_ohlcv(write_ohlcv(rows + [("2017-01-04", 10, 12, 9, 11, 3)], name="dup.csv"))


def test_fractional_volume_rejected(write_ohlcv):
    with pytest.raises(ParseError, match="Volume"):
        parse_ohlcv(write_ohlcv([("2017-01-03", 10, 12, 9, 11, 1.5)]))


def test_extra_field_reports_line(tmp_path):
    path = tmp_path / "wide.csv"
    path.write_text(
        "Date,Open,High,Low,Close,Adj Close,Volume\n"
        "2017-01-03,10,12,9,11,11,500\n"
        "2017-01-04,10,12,9,11,11,500,7\n",
        encoding="utf-8",
    )
    with pytest.raises(FormatError, match="saw 8") as exc:
        parse_ohlcv(str(path))
    assert exc.value.line == 3


def test_undecodable_price_file_reports_line(tmp_path):
    path = tmp_path / "latin.csv"
    path.write_bytes(b"Date,Open,High,Low,Close,Adj Close,Volume\n2017-01-03,10,12,9,11,11,500\n2017-01-04\xff,10,12,9,11,11,500\n")
    with pytest.raises(FormatError) as exc:
        parse_ohlcv(str(path))
    assert exc.value.line == 3


def test_serialize_then_parse_gives_same_bars(tmp_path, write_ohlcv):
    bars = parse_ohlcv(write_ohlcv([("2017-01-03", 10.125, 12.5, 9.0, 11.0, 500), ("2017-01-04", 11.0, 11.5, 10.0, 10.25, 0)]))
    out = str(tmp_path / "out.csv")
    serialize_ohlcv(bars, out)
    assert parse_ohlcv(out) == bars


def test_summary_flags_zero_volume(write_ohlcv):
    bars = parse_ohlcv(write_ohlcv([("2017-01-03", 10, 12, 9, 11, 500), ("2017-01-04", 11, 12, 10, 10.5, 0)]))
    summary = summarize_bars(bars)
    assert summary["rows"] == 2
    assert summary["zero_volume_days"] == 1
    assert summary["latest_close"] == 10.5


# Posts

def test_parse_single_post(tmp_path):
    path = _write_jsonl(tmp_path, ['{"id":"1","date":"2021-04-15","user":"a","text":"TSLA up","platform":"twitter"}'])
    posts = parse_posts(path)
    assert len(posts) == 1
    assert posts[0].date == date(2021, 4, 15)
    assert posts[0].author == "a"
    assert posts[0].category is Category.UNASSIGNED


def test_timestamp_truncated_to_date(tmp_path):
    path = _write_jsonl(tmp_path, [{"id": "1", "date": "2021-04-15T09:30:00Z", "user": "a", "text": "x", "platform": "twitter"}])
    assert parse_posts(path)[0].date == date(2021, 4, 15)


def test_duplicate_id_rejected(tmp_path):
    row = {"id": "1", "date": "2021-04-15", "user": "a", "text": "x", "platform": "twitter"}
    with pytest.raises(ValidationError, match="duplicate"):
        parse_posts(_write_jsonl(tmp_path, [row, dict(row, text="y")]))


def test_missing_key_reports_line(tmp_path):
    rows = [{"id": "1", "date": "2021-04-15", "user": "a", "text": "x", "platform": "twitter"},
            {"id": "2", "date": "2021-04-15", "text": "x", "platform": "twitter"}]
    with pytest.raises(FormatError) as exc:
        parse_posts(_write_jsonl(tmp_path, rows))
    assert exc.value.line == 2
    assert "user" in str(exc.value)


def test_blank_text_rejected(tmp_path):
    with pytest.raises(ValidationError):
        parse_posts(_write_jsonl(tmp_path, [{"id": "1", "date": "2021-04-15", "user": "a", "text": "   ", "platform": "twitter"}]))


def test_undecodable_post_reports_line(tmp_path):
    path = tmp_path / "posts.jsonl"
    good = b'{"id": "1", "date": "2022-01-03", "user": "a", "text": "ok", "platform": "twitter"}\n'
    bad = b'{"id": "2", "date": "2022-01-03", "user": "a", "text": "ok \xff", "platform": "twitter"}\n'
    path.write_bytes(good + bad)
    with pytest.raises(FormatError) as exc:
        parse_posts(str(path))
    assert exc.value.line == 2


def test_undecodable_handle_list_reports_line(tmp_path):
    path = tmp_path / "handles.txt"
    path.write_bytes(b"good\nbad\xfe\n")
    with pytest.raises(FormatError) as exc:
        parse_handle_list(str(path))
    assert exc.value.line == 2


@pytest.mark.parametrize("key, value", [("text", {"a": 1}), ("text", 42), ("user", ["x"]), ("user", 7)])
def test_non_string_text_or_user_rejected(tmp_path, key, value):
    row = {"id": "1", "date": "2022-01-03", "user": "a", "text": "ok", "platform": "twitter"}
    row[key] = value
    with pytest.raises(ParseError) as exc:
        parse_posts(_write_jsonl(tmp_path, [row]))
    assert exc.value.field == key
    assert exc.value.line == 1


def test_write_posts_round_trip(tmp_path):
    posts = [_post("1", date(2021, 4, 15)), _post("2", date(2021, 4, 16), subreddit="investing", platform=Platform.REDDIT)]
    path = str(tmp_path / "out.jsonl")
    write_posts(posts, path)
    assert parse_posts(path) == posts


def test_fixture_file_loads(fixture_path):
    posts = parse_posts(fixture_path("mixed_posts.jsonl"))
    assert len(posts) == 14
    assert posts[4].date == date(2022, 1, 4)


# Dedup

def test_dedup_keeps_earliest():
    early = _post("1", date(2021, 1, 1), text="same")
    late = _post("2", date(2021, 1, 5), text="same ")
    assert dedup_posts([late, early]) == [early]


def test_dedup_is_per_author():
    a = _post("1", date(2021, 1, 1), author="a", text="same")
    b = _post("2", date(2021, 1, 1), author="b", text="same")
    assert dedup_posts([a, b]) == [a, b]


def test_dedup_empty():
    assert dedup_posts([]) == []


# Partition

def test_handle_list_parsing(fixture_path):
    handles = parse_handle_list(fixture_path("executives.txt"))
    assert len(handles) == 3
    assert "EXEC_ONE" in handles
    assert "trader_a" not in handles


def test_handle_list_rejects_whitespace(tmp_path):
    path = tmp_path / "h.txt"
    path.write_text("good\nbad handle\n", encoding="utf-8")
    with pytest.raises(FormatError):
        parse_handle_list(str(path))


def test_executive_match_is_case_insensitive():
    executive, general = partition_posts([_post("1", date(2021, 1, 1), author="ElonMusk")], HandleList(frozenset({"elonmusk"})))
    assert [p.category for p in executive] == [Category.EXECUTIVE]
    assert general == []


def test_sampling_is_seeded_and_sized():
    posts = [_post(str(i), date(2021, 1, i + 1), author=f"u{i}") for i in range(5)]
    handles = HandleList(frozenset({"ceo"}))
    _, first = partition_posts(posts, handles, sample_size=2, seed=11)
    _, second = partition_posts(posts, handles, sample_size=2, seed=11)
    assert len(first) == 2
    assert first == second
    assert all(p.category is Category.GENERAL for p in first)


def test_large_sample_keeps_everything():
    posts = [_post(str(i), date(2021, 1, 1), author=f"u{i}") for i in range(3)]
    _, general = partition_posts(posts, HandleList(frozenset({"ceo"})), sample_size=10)
    assert [p.id for p in general] == ["0", "1", "2"]


def test_zero_sample_size_rejected():
    with pytest.raises(ValidationError):
        partition_posts([_post("1", date(2021, 1, 1))], HandleList(frozenset({"ceo"})), sample_size=0)


def test_reddit_split_by_subreddit():
    posts = [
        _post("1", date(2021, 1, 1), subreddit="Investing", platform=Platform.REDDIT),
        _post("2", date(2021, 1, 1), subreddit="tslaq", platform=Platform.REDDIT),
    ]
    executive, general = partition_reddit_posts(posts, HandleList(frozenset({"investing"})))
    assert [p.id for p in executive] == ["1"]
    assert [p.id for p in general] == ["2"]
