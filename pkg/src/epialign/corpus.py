"""Tweet corpus and case-series ingestion plus the removal-rule filter chain.

Filtering removes, in a fixed precedence order: tweets in the wrong language,
empty texts, retweets, tweets carrying hyperlinks, tweets mentioning other
countries, and exact duplicates of an earlier surviving tweet. Case counts
come in either a long CSV (date,country,total_cases) or the wide dashboard
CSV with one M/D/YY column per day.
"""
from __future__ import annotations

import csv
import json
import unicodedata
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from typing import Iterable, Iterator, TextIO

from .errors import FormatError, NotFoundError

REMOVAL_REASONS = (
    "wrong_language",
    "empty_text",
    "retweet",
    "hyperlink",
    "other_country",
    "duplicate",
)


@dataclass(frozen=True)
class Tweet:
    """One social-media post. Timestamp is always timezone-aware UTC."""

    id: str
    timestamp: datetime
    lang: str
    text: str
    is_retweet: bool | None = None

    def day(self, utc_offset_minutes: int = 0) -> date:
        """Calendar date of the tweet, after applying a fixed UTC offset."""
        return (self.timestamp + timedelta(minutes=utc_offset_minutes)).date()


@dataclass(frozen=True)
class FilterConfig:
    language: str
    country_lexicon: tuple[str, ...] = ()
    drop_retweets: bool = True
    drop_hyperlinks: bool = True
    drop_duplicates: bool = True

    def __post_init__(self) -> None:
        if not self.language:
            raise ValueError("language must be nonempty")
        for entry in self.country_lexicon:
            if not entry.strip():
                raise ValueError("country_lexicon entries must be nonempty after trimming")


@dataclass
class FilterStats:
    pre_count: int = 0
    post_count: int = 0
    removed_by_reason: dict[str, int] = field(
        default_factory=lambda: {reason: 0 for reason in REMOVAL_REASONS}
    )

    def check_conservation(self) -> None:
        removed = sum(self.removed_by_reason.values())
        if self.pre_count - self.post_count != removed:
            raise AssertionError(
                f"filter stats out of balance: pre={self.pre_count} "
                f"post={self.post_count} removed={removed}"
            )

    def to_dict(self) -> dict:
        return {
            "pre_count": self.pre_count,
            "post_count": self.post_count,
            "removed_by_reason": dict(self.removed_by_reason),
        }


@dataclass(frozen=True)
class CaseSeries:
    """Per-day reported case counts for one country, consecutive dates, no gaps.

    mode="total" holds counts as reported (official corrections may make them
    non-monotone); mode="new" holds first differences, which may be negative.
    """

    country: str
    start_date: date
    counts: tuple[int, ...]
    mode: str = "total"

    def __post_init__(self) -> None:
        if not self.counts:
            raise ValueError("counts must be nonempty")
        if self.mode not in ("total", "new"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "total" and any(c < 0 for c in self.counts):
            raise ValueError("total counts must be nonnegative")

    def dates(self) -> list[date]:
        return [self.start_date + timedelta(days=i) for i in range(len(self.counts))]

    def value_on(self, d: date) -> int | None:
        idx = (d - self.start_date).days
        if 0 <= idx < len(self.counts):
            return self.counts[idx]
        return None


def _parse_instant(raw: str) -> datetime:
    ts = datetime.fromisoformat(raw.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def parse_tweet_jsonl(stream: Iterable[str]) -> tuple[list[Tweet], int]:
    """Parse newline-delimited tweet JSON into Tweets, in input order.

    Lines that are not valid JSON or miss a required field (id, created_at,
    lang, text) are skipped and tallied; returns (tweets, parse_errors).
    """
    tweets: list[Tweet] = []
    errors = 0
    for line in stream:
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            tweet = Tweet(
                id=str(obj["id"]),
                timestamp=_parse_instant(obj["created_at"]),
                lang=obj["lang"],
                text=obj["text"],
                is_retweet=obj.get("is_retweet"),
            )
            if not tweet.id:
                raise ValueError("empty id")
        except (ValueError, KeyError, TypeError):
            errors += 1
            continue
        tweets.append(tweet)
    return tweets, errors


def tweet_to_json(tweet: Tweet) -> str:
    obj = {
        "id": tweet.id,
        "created_at": tweet.timestamp.strftime("%Y-%m-%dT%H:%M:%SZ"),
        "lang": tweet.lang,
        "text": tweet.text,
    }
    if tweet.is_retweet is not None:
        obj["is_retweet"] = tweet.is_retweet
    return json.dumps(obj, ensure_ascii=False)


def _primary_subtag(lang: str) -> str:
    return lang.split("-")[0].casefold()


def _dedup_key(text: str) -> str:
    return unicodedata.normalize("NFC", text).strip()


def filter_corpus(
    tweets: Iterable[Tweet], cfg: FilterConfig
) -> tuple[list[Tweet], FilterStats]:
    """Apply the removal-rule chain, preserving input order of survivors.

    A removed tweet is tallied under exactly one reason, the first matching
    rule in REMOVAL_REASONS order. Duplicate means exact match of the
    NFC-normalized, trimmed text against an earlier surviving tweet.
    """
    stats = FilterStats()
    survivors: list[Tweet] = []
    seen_texts: set[str] = set()
    want_lang = _primary_subtag(cfg.language)
    lexicon = [entry.casefold() for entry in cfg.country_lexicon]

    for tweet in tweets:
        stats.pre_count += 1
        reason = None
        folded = tweet.text.casefold()
        if _primary_subtag(tweet.lang) != want_lang:
            reason = "wrong_language"
        elif not tweet.text.strip():
            reason = "empty_text"
        elif cfg.drop_retweets and (
            tweet.is_retweet is True or tweet.text.lstrip().startswith("RT @")
        ):
            reason = "retweet"
        elif cfg.drop_hyperlinks and ("http://" in folded or "https://" in folded):
            reason = "hyperlink"
        elif any(entry in folded for entry in lexicon):
            reason = "other_country"
        elif cfg.drop_duplicates and _dedup_key(tweet.text) in seen_texts:
            reason = "duplicate"

        if reason is None:
            survivors.append(tweet)
            seen_texts.add(_dedup_key(tweet.text))
            stats.post_count += 1
        else:
            stats.removed_by_reason[reason] += 1

    stats.check_conservation()
    return survivors, stats


def load_country_lexicon(stream: Iterable[str]) -> tuple[str, ...]:
    """Read one lexicon entry per line; blank lines and # comments ignored."""
    entries = []
    for line in stream:
        line = line.strip()
        if line and not line.startswith("#"):
            entries.append(line)
    return tuple(entries)


def parse_case_csv_long(stream: TextIO) -> tuple[CaseSeries, list[str]]:
    """Parse a date,country,total_cases CSV into a gap-free total series.

    Rows may arrive unsorted. Missing interior dates are forward-filled with
    the previous total; each fill is reported in the returned warning list.
    """
    reader = csv.DictReader(stream)
    required = {"date", "country", "total_cases"}
    if reader.fieldnames is None or not required.issubset(reader.fieldnames):
        raise FormatError("expected header date,country,total_cases")

    rows: dict[date, int] = {}
    country = None
    for lineno, row in enumerate(reader, start=2):
        try:
            d = date.fromisoformat(row["date"])
            count = int(row["total_cases"])
        except (ValueError, TypeError) as exc:
            raise FormatError(f"line {lineno}: {exc}") from exc
        if count < 0:
            raise FormatError(f"line {lineno}: negative total_cases")
        if country is None:
            country = row["country"]
        elif row["country"] != country:
            raise FormatError(f"line {lineno}: multiple countries in one file")
        if d in rows and rows[d] != count:
            raise FormatError(f"duplicate date {d} with conflicting values")
        rows[d] = count

    if not rows:
        raise FormatError("no data rows")

    first, last = min(rows), max(rows)
    counts: list[int] = []
    warnings: list[str] = []
    previous = rows[first]
    d = first
    while d <= last:
        if d in rows:
            previous = rows[d]
        else:
            warnings.append(f"missing date {d}, forward-filled with {previous}")
        counts.append(previous)
        d += timedelta(days=1)

    assert country is not None
    return CaseSeries(country=country, start_date=first, counts=tuple(counts)), warnings


def parse_case_csv_jhu_wide(stream: TextIO, country: str) -> CaseSeries:
    """Parse the dashboard wide CSV, summing province rows for one country."""
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError("empty file") from None
    fixed = ["Province/State", "Country/Region", "Lat", "Long"]
    if header[: len(fixed)] != fixed:
        raise FormatError(f"expected leading columns {','.join(fixed)}")
    date_cols = header[len(fixed) :]
    if not date_cols:
        raise FormatError("no date columns")
    try:
        dates = [datetime.strptime(col, "%m/%d/%y").date() for col in date_cols]
    except ValueError as exc:
        raise FormatError(f"bad date column: {exc}") from exc
    for prev, cur in zip(dates, dates[1:]):
        if (cur - prev).days != 1:
            raise FormatError(f"date columns not consecutive at {cur}")

    totals = [0] * len(dates)
    matched = False
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if row[1] != country:
            continue
        matched = True
        cells = row[len(fixed) :]
        if len(cells) != len(dates):
            raise FormatError(f"line {lineno}: wrong number of cells")
        for i, cell in enumerate(cells):
            try:
                totals[i] += int(float(cell))
            except ValueError as exc:
                raise FormatError(f"line {lineno}: non-numeric cell {cell!r}") from exc

    if not matched:
        raise NotFoundError(f"country {country!r} not present")
    return CaseSeries(country=country, start_date=dates[0], counts=tuple(totals))


def derive_new_cases(series: CaseSeries) -> CaseSeries:
    """First differences of a total series; day 0 keeps its reported total.

    Negative differences from official corrections are preserved as-is.
    """
    if series.mode != "total":
        raise ValueError("derive_new_cases requires a mode=total series")
    diffs = [series.counts[0]]
    for prev, cur in zip(series.counts, series.counts[1:]):
        diffs.append(cur - prev)
    return CaseSeries(
        country=series.country,
        start_date=series.start_date,
        counts=tuple(diffs),
        mode="new",
    )


def iter_jsonl_file(path: str) -> Iterator[str]:
    with open(path, "r", encoding="utf-8") as fh:
        yield from fh


def read_tweets_file(path: str) -> tuple[list[Tweet], int]:
    return parse_tweet_jsonl(iter_jsonl_file(path))


def write_tweets_file(path: str, tweets: Iterable[Tweet]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for tweet in tweets:
            fh.write(tweet_to_json(tweet) + "\n")


def read_case_series(
    path: str, fmt: str = "long", country: str | None = None
) -> tuple[CaseSeries, list[str]]:
    """Load a total-case series from a long or JHU-wide CSV file."""
    with open(path, "r", encoding="utf-8-sig", newline="") as fh:
        if fmt == "long":
            return parse_case_csv_long(fh)
        if fmt == "jhu":
            if not country:
                raise ValueError("JHU wide format requires a country name")
            return parse_case_csv_jhu_wide(fh, country), []
    raise ValueError(f"unknown case CSV format {fmt!r}")
