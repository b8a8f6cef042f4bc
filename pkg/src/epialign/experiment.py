"""Time-cut protocols and the domestic/cross-country evaluation runner.

Five named month-level splits over February-April 2020 are provided; V
trains and tests on the same three-month window and is reported as an
upper bound. The runner aligns per-day feature vectors with a case series,
fits the regressor on the source country's training window, predicts the
target country's test window, and scores rank correlation.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import IO, Sequence

import numpy as np

from .corpus import CaseSeries, derive_new_cases
from .errors import DegenerateDataError, FormatError
from .features import DayFeatures
from .ranking import rank_average, spearman  # noqa: F401  (re-exported: this is their public home)
from .svr import SvrParams, svr_fit, svr_predict

PRESET_NAMES = ("I", "II", "III", "IV", "V")
CASE_MODES = ("total", "new")


@dataclass(frozen=True)
class DateInterval:
    start: date
    end: date  # inclusive

    def __post_init__(self) -> None:
        if self.end < self.start:
            raise ValueError(f"empty interval {self.start}..{self.end}")

    def days(self) -> list[date]:
        return [self.start + timedelta(days=i) for i in range((self.end - self.start).days + 1)]

    def overlaps(self, other: "DateInterval") -> bool:
        return self.start <= other.end and other.start <= self.end


@dataclass(frozen=True)
class TimeSetting:
    name: str
    train: DateInterval
    test: DateInterval


_PRESETS = {
    "I": TimeSetting(
        "I",
        DateInterval(date(2020, 2, 1), date(2020, 3, 31)),
        DateInterval(date(2020, 4, 1), date(2020, 4, 30)),
    ),
    "II": TimeSetting(
        "II",
        DateInterval(date(2020, 2, 1), date(2020, 2, 29)),
        DateInterval(date(2020, 3, 1), date(2020, 4, 30)),
    ),
    "III": TimeSetting(
        "III",
        DateInterval(date(2020, 2, 1), date(2020, 2, 29)),
        DateInterval(date(2020, 3, 1), date(2020, 3, 31)),
    ),
    "IV": TimeSetting(
        "IV",
        DateInterval(date(2020, 3, 1), date(2020, 3, 31)),
        DateInterval(date(2020, 4, 1), date(2020, 4, 30)),
    ),
    "V": TimeSetting(
        "V",
        DateInterval(date(2020, 2, 1), date(2020, 4, 30)),
        DateInterval(date(2020, 2, 1), date(2020, 4, 30)),
    ),
}


def split_preset(name: str) -> TimeSetting:
    """Named train/test split; V overlaps by design (upper-bound protocol)."""
    try:
        return _PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown time setting {name!r}; valid settings: {', '.join(PRESET_NAMES)}") from None


@dataclass(frozen=True)
class ExperimentConfig:
    source_country: str
    target_country: str
    case_mode: str
    svr_params: SvrParams
    time_setting: TimeSetting
    variant: str = ""  # free-form label (e.g. embedding choice) used for report grouping

    def __post_init__(self) -> None:
        if self.case_mode not in CASE_MODES:
            raise ValueError(f"case_mode must be one of {CASE_MODES}")


@dataclass(frozen=True)
class PredictionRow:
    date: date
    y_hat: float
    y: float


@dataclass
class ExperimentResult:
    source_country: str
    target_country: str
    case_mode: str
    setting: str
    variant: str
    spearman: float | None
    n_train: int
    n_test: int
    predictions: list[PredictionRow]
    warnings: list[str] = field(default_factory=list)
    converged: bool = True

    def to_dict(self) -> dict:
        return {
            "source_country": self.source_country,
            "target_country": self.target_country,
            "case_mode": self.case_mode,
            "setting": self.setting,
            "variant": self.variant,
            "spearman": self.spearman,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "predictions": [
                {"date": row.date.isoformat(), "y_hat": row.y_hat, "y": row.y}
                for row in self.predictions
            ],
            "warnings": list(self.warnings),
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentResult":
        try:
            return cls(
                source_country=doc["source_country"],
                target_country=doc["target_country"],
                case_mode=doc["case_mode"],
                setting=doc["setting"],
                variant=doc.get("variant", ""),
                spearman=doc["spearman"],
                n_train=doc["n_train"],
                n_test=doc["n_test"],
                predictions=[
                    PredictionRow(date.fromisoformat(r["date"]), float(r["y_hat"]), float(r["y"]))
                    for r in doc["predictions"]
                ],
                warnings=list(doc.get("warnings", [])),
                converged=bool(doc.get("converged", True)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"bad experiment result document: {exc}") from exc


def write_result(result: ExperimentResult, fh: IO[str]) -> None:
    json.dump(result.to_dict(), fh, indent=2, sort_keys=True, ensure_ascii=False)
    fh.write("\n")


def read_result(fh: IO[str]) -> ExperimentResult:
    try:
        doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"result JSON unreadable: {exc}") from exc
    return ExperimentResult.from_dict(doc)


def _series_in_mode(series: CaseSeries, case_mode: str) -> CaseSeries:
    if series.mode != "total":
        raise ValueError("case series must arrive in mode=total")
    return derive_new_cases(series) if case_mode == "new" else series


def align_days(
    days: Sequence[DayFeatures],
    series: CaseSeries,
    interval: DateInterval,
    label: str,
    warnings: list[str],
) -> tuple[np.ndarray, np.ndarray, list[date]]:
    """Pair feature vectors with case counts over an interval.

    Days with no tweets or no case coverage are dropped from both sides;
    zero-imputing official counts would fabricate ground truth.
    """
    by_date = {d.date: d for d in days}
    xs, ys, dates = [], [], []
    dropped_no_tweets = 0
    dropped_no_cases = 0
    empty_embedding = 0
    for d in interval.days():
        feats = by_date.get(d)
        y = series.value_on(d)
        if feats is None or feats.tweet_count == 0:
            dropped_no_tweets += 1
            continue
        if y is None:
            dropped_no_cases += 1
            continue
        if feats.empty_day:
            empty_embedding += 1
        xs.append(feats.x)
        ys.append(float(y))
        dates.append(d)
    if dropped_no_tweets:
        warnings.append(f"{label}: dropped {dropped_no_tweets} day(s) with no tweets")
    if dropped_no_cases:
        warnings.append(f"{label}: dropped {dropped_no_cases} day(s) without case data")
    if empty_embedding:
        warnings.append(f"{label}: {empty_embedding} day(s) had no embeddable tweets")
    if not xs:
        raise DegenerateDataError(f"no usable {label} days after alignment")
    return np.asarray(xs), np.asarray(ys), dates


def run_experiment(
    cfg: ExperimentConfig,
    source_days: Sequence[DayFeatures],
    source_cases: CaseSeries,
    target_days: Sequence[DayFeatures],
    target_cases: CaseSeries,
) -> ExperimentResult:
    """Fit on the source country's train window, score the target's test window."""
    dims = {len(d.x) for d in source_days} | {len(d.x) for d in target_days}
    if len(dims) != 1:
        raise ValueError(f"feature dimensions differ between countries: {sorted(dims)}")

    warnings: list[str] = []
    setting = cfg.time_setting
    if setting.train.overlaps(setting.test):
        warnings.append("train/test windows overlap: upper-bound protocol")

    y_source = _series_in_mode(source_cases, cfg.case_mode)
    y_target = _series_in_mode(target_cases, cfg.case_mode)

    X_train, y_train, _ = align_days(source_days, y_source, setting.train, "train", warnings)
    if len(y_train) < 2 or np.unique(y_train).size < 2:
        raise DegenerateDataError("training targets are degenerate (fewer than 2 distinct values)")

    X_test, y_test, test_dates = align_days(target_days, y_target, setting.test, "test", warnings)
    if len(y_test) < 2:
        raise DegenerateDataError("fewer than 2 test days after alignment")

    model = svr_fit(X_train, y_train, cfg.svr_params)
    if not model.converged:
        warnings.append("solver hit the pair-update cap before reaching tolerance")
    y_hat = np.atleast_1d(svr_predict(model, X_test))

    rho = spearman(y_hat, y_test)
    if rho is None:
        warnings.append("rank correlation undefined: one side is fully tied")

    return ExperimentResult(
        source_country=cfg.source_country,
        target_country=cfg.target_country,
        case_mode=cfg.case_mode,
        setting=setting.name,
        variant=cfg.variant,
        spearman=rho,
        n_train=len(y_train),
        n_test=len(y_test),
        predictions=[
            PredictionRow(d, float(p), float(t)) for d, p, t in zip(test_dates, y_hat, y_test)
        ],
        warnings=warnings,
        converged=model.converged,
    )
