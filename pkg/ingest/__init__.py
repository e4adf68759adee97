from ingest.ohlcv import DailyBar, bars_to_frame, parse_ohlcv, serialize_ohlcv, summarize_bars
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
