"""Per-day feature vectors: macro counts concatenated with pooled embeddings.

The macro block holds the day's tweet count and, per keyword, the number of
tweets containing it (substring match on case-folded text, one hit per
tweet). The micro block is the day's tweet embeddings pooled component-wise
by mean or max. Feature order is fixed: frequency, keywords in spec order,
embedding components.
"""
from __future__ import annotations

import csv
import hashlib
import json
import unicodedata
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import IO, Iterable, Sequence

import numpy as np

from .corpus import Tweet
from .errors import FormatError
from .store import EmbeddingStore

POOLING_MODES = ("average", "max")


@dataclass(frozen=True)
class KeywordSpec:
    keywords: tuple[str, ...]
    match_mode: str = "substring_casefold"

    def __post_init__(self) -> None:
        if not self.keywords:
            raise ValueError("keyword list must be nonempty")
        if self.match_mode != "substring_casefold":
            raise ValueError(f"unknown match mode {self.match_mode!r}")
        folded = [k.casefold() for k in self.keywords]
        if len(set(folded)) != len(folded):
            raise ValueError("keywords must be unique after case-folding")


@dataclass(frozen=True)
class EmbeddingConfig:
    pooling: str
    dim: int | None = None  # expected store dimension, validated when known

    def __post_init__(self) -> None:
        if self.pooling not in POOLING_MODES:
            raise ValueError(f"pooling must be one of {POOLING_MODES}")
        if self.dim is not None and self.dim < 1:
            raise ValueError("dim must be positive")


@dataclass(frozen=True)
class FeatureConfig:
    use_tweet_frequency: bool = True
    keyword_spec: KeywordSpec | None = None
    embedding: EmbeddingConfig | None = None
    utc_offset_minutes: int = 0

    def __post_init__(self) -> None:
        if not self.use_tweet_frequency and self.keyword_spec is None and self.embedding is None:
            raise ValueError("at least one feature source must be enabled")

    def feature_names(self, embedding_dim: int | None = None) -> list[str]:
        names: list[str] = []
        if self.use_tweet_frequency:
            names.append("freq")
        if self.keyword_spec is not None:
            names.extend(f"kw:{k}" for k in self.keyword_spec.keywords)
        if self.embedding is not None:
            dim = self.embedding.dim if embedding_dim is None else embedding_dim
            if dim is None:
                raise ValueError("embedding dimension unknown")
            names.extend(f"emb:{i}" for i in range(dim))
        return names


@dataclass(frozen=True)
class DayFeatures:
    date: date
    x: np.ndarray
    tweet_count: int
    empty_day: bool = False


@dataclass
class FeatureBuildStats:
    missing_embeddings: int = 0
    empty_days: list[date] = field(default_factory=list)


def date_span(start: date, end: date) -> list[date]:
    if end < start:
        raise ValueError(f"empty date range {start}..{end}")
    return [start + timedelta(days=i) for i in range((end - start).days + 1)]


def group_by_day(tweets: Iterable[Tweet], utc_offset_minutes: int = 0) -> dict[date, list[Tweet]]:
    grouped: dict[date, list[Tweet]] = {}
    for tweet in tweets:
        grouped.setdefault(tweet.day(utc_offset_minutes), []).append(tweet)
    return grouped


def daily_tweet_frequency(
    tweets: Iterable[Tweet], start: date, end: date, utc_offset_minutes: int = 0
) -> dict[date, int]:
    """Tweets per calendar day, zero-filled over the whole range."""
    grouped = group_by_day(tweets, utc_offset_minutes)
    return {d: len(grouped.get(d, [])) for d in date_span(start, end)}


def daily_keyword_counts(
    tweets: Iterable[Tweet],
    spec: KeywordSpec,
    start: date,
    end: date,
    utc_offset_minutes: int = 0,
) -> dict[date, list[int]]:
    """Per day and keyword: how many tweets contain the keyword.

    Containment is case-folded substring; a tweet mentioning a keyword twice
    still counts once.
    """
    grouped = group_by_day(tweets, utc_offset_minutes)
    folded = [k.casefold() for k in spec.keywords]
    out: dict[date, list[int]] = {}
    for d in date_span(start, end):
        counts = [0] * len(folded)
        for tweet in grouped.get(d, []):
            text = tweet.text.casefold()
            for i, keyword in enumerate(folded):
                if keyword in text:
                    counts[i] += 1
        out[d] = counts
    return out


def pool_embeddings(vectors: Sequence[np.ndarray], mode: str) -> np.ndarray:
    """Component-wise mean or max over a nonempty set of same-length vectors."""
    if mode not in POOLING_MODES:
        raise ValueError(f"pooling must be one of {POOLING_MODES}")
    if len(vectors) == 0:
        raise ValueError("cannot pool an empty sequence")
    stacked = np.asarray(vectors, dtype=np.float64)
    if stacked.ndim != 2:
        raise ValueError("vectors must share one dimension")
    if mode == "average":
        return stacked.mean(axis=0)
    return stacked.max(axis=0)


def mock_embed(text: str, dim: int) -> np.ndarray:
    """Deterministic stand-in embedding: hashed character 3-grams, L2-normalized.

    Pure function of (text, dim); empty text maps to the zero vector, any
    other text to a unit vector. Text is NFC-normalized and padded with
    sentinel boundary characters so short texts still produce 3-grams.
    """
    if dim < 1:
        raise ValueError("dim must be positive")
    normalized = unicodedata.normalize("NFC", text)
    vec = np.zeros(dim, dtype=np.float64)
    if not normalized:
        return vec
    padded = "\x02" + normalized + "\x03"
    for i in range(len(padded) - 2):
        digest = hashlib.blake2b(padded[i : i + 3].encode("utf-8"), digest_size=8).digest()
        h = int.from_bytes(digest, "little")
        vec[(h >> 1) % dim] += 1.0 if h & 1 else -1.0
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        # full sign cancellation; fall back to one deterministic axis
        h = int.from_bytes(hashlib.blake2b(normalized.encode("utf-8"), digest_size=8).digest(), "little")
        vec[h % dim] = 1.0
        norm = 1.0
    return vec / norm


def mock_store(tweets: Iterable[Tweet], dim: int) -> EmbeddingStore:
    """Build an in-memory store with mock_embed vectors for every tweet."""
    store = EmbeddingStore(dim=dim)
    for tweet in tweets:
        store.add(tweet.id, mock_embed(tweet.text, dim).astype(np.float32))
    return store


def assemble_day_features(
    cfg: FeatureConfig,
    tweets_for_day: Sequence[Tweet],
    store: EmbeddingStore | None,
    day: date,
) -> tuple[DayFeatures, int]:
    """One day's feature vector; returns (features, missing-embedding count).

    Tweets absent from the store are skipped for pooling and tallied; a day
    with zero embeddable tweets gets a zero embedding block and the empty
    flag.
    """
    parts: list[np.ndarray] = []
    if cfg.use_tweet_frequency:
        parts.append(np.array([float(len(tweets_for_day))]))
    if cfg.keyword_spec is not None:
        folded = [k.casefold() for k in cfg.keyword_spec.keywords]
        counts = [0.0] * len(folded)
        for tweet in tweets_for_day:
            text = tweet.text.casefold()
            for i, keyword in enumerate(folded):
                if keyword in text:
                    counts[i] += 1.0
        parts.append(np.array(counts))

    missing = 0
    empty = len(tweets_for_day) == 0
    if cfg.embedding is not None:
        if store is None:
            raise ValueError("embedding features enabled but no store provided")
        vectors = []
        for tweet in tweets_for_day:
            vec = store.get(tweet.id)
            if vec is None:
                missing += 1
            else:
                vectors.append(np.asarray(vec, dtype=np.float64))
        if vectors:
            parts.append(pool_embeddings(vectors, cfg.embedding.pooling))
        else:
            empty = True
            parts.append(np.zeros(store.dim))

    x = np.concatenate(parts) if parts else np.zeros(0)
    return DayFeatures(date=day, x=x, tweet_count=len(tweets_for_day), empty_day=empty), missing


def build_daily_features(
    cfg: FeatureConfig,
    tweets: Iterable[Tweet],
    start: date,
    end: date,
    store: EmbeddingStore | None = None,
) -> tuple[list[DayFeatures], FeatureBuildStats]:
    """Assemble one DayFeatures per date in [start, end], zero-filled days included."""
    if cfg.embedding is not None:
        if store is None:
            raise ValueError("embedding features enabled but no store provided")
        if cfg.embedding.dim is not None and cfg.embedding.dim != store.dim:
            raise FormatError(
                f"embedding dim conflict: config wants {cfg.embedding.dim}, store has {store.dim}"
            )
    grouped = group_by_day(tweets, cfg.utc_offset_minutes)
    stats = FeatureBuildStats()
    days: list[DayFeatures] = []
    for d in date_span(start, end):
        feats, missing = assemble_day_features(cfg, grouped.get(d, []), store, d)
        stats.missing_embeddings += missing
        if feats.empty_day:
            stats.empty_days.append(d)
        days.append(feats)
    dims = {len(f.x) for f in days}
    assert len(dims) == 1, "feature dimension must be constant across days"
    return days, stats


def load_keyword_spec(data: dict) -> KeywordSpec:
    """Build a KeywordSpec from the JSON keyword config ({language, keywords})."""
    try:
        keywords = data["keywords"]
    except KeyError:
        raise FormatError("keyword config missing 'keywords'") from None
    if not isinstance(keywords, list) or not all(isinstance(k, str) for k in keywords):
        raise FormatError("'keywords' must be a list of strings")
    return KeywordSpec(keywords=tuple(keywords))


def load_feature_config(data: dict) -> FeatureConfig:
    """Build a FeatureConfig from its JSON document form."""
    spec = None
    if data.get("keyword_spec") is not None:
        spec = load_keyword_spec(data["keyword_spec"])
    embedding = None
    if data.get("embedding") is not None:
        emb = data["embedding"]
        try:
            embedding = EmbeddingConfig(pooling=emb["pooling"], dim=emb.get("dim"))
        except (KeyError, TypeError) as exc:
            raise FormatError(f"bad embedding config: {exc}") from exc
    try:
        return FeatureConfig(
            use_tweet_frequency=bool(data.get("use_tweet_frequency", True)),
            keyword_spec=spec,
            embedding=embedding,
            utc_offset_minutes=int(data.get("utc_offset_minutes", 0)),
        )
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def write_features_csv(fh: IO[str], days: Sequence[DayFeatures], feature_names: Sequence[str]) -> None:
    """One row per date: date, tweet_count, empty_day, then feature components.

    Floats are written with repr so values round-trip bit-exactly.
    """
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["date", "tweet_count", "empty_day", *feature_names])
    for day in days:
        if len(day.x) != len(feature_names):
            raise ValueError("feature vector length does not match header")
        writer.writerow(
            [day.date.isoformat(), day.tweet_count, int(day.empty_day)]
            + [repr(float(v)) for v in day.x]
        )


def read_features_csv(fh: IO[str]) -> tuple[list[DayFeatures], list[str]]:
    """Inverse of write_features_csv; returns (days, feature names)."""
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError("empty features CSV") from None
    if header[:3] != ["date", "tweet_count", "empty_day"]:
        raise FormatError("expected header date,tweet_count,empty_day,...")
    names = header[3:]
    days: list[DayFeatures] = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise FormatError(f"line {lineno}: wrong column count")
        try:
            days.append(
                DayFeatures(
                    date=date.fromisoformat(row[0]),
                    x=np.array([float(v) for v in row[3:]]),
                    tweet_count=int(row[1]),
                    empty_day=row[2] == "1",
                )
            )
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from exc
    return days, names


def load_json_file(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise FormatError(f"{path}: expected a JSON object")
    return data
