"""Synthetic corpora with a known monotone link to a case curve.

Daily chatter volumes follow a logistic outbreak curve: keyword-bearing and
background tweet counts both grow monotonically with the day's total case
count, so rank alignment between text features and cases is guaranteed by
construction (up to the configured noise). The generated corpus also carries
removable junk (retweets, links, duplicates, wrong language, other-country
mentions) so the filter stage has real work to do.
"""
from __future__ import annotations

from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone

import numpy as np

_FILLER = (
    "casa", "oggi", "sera", "strada", "piazza", "scuola", "lavoro", "notizie",
    "giornata", "famiglia", "amici", "salute", "ospedale", "medico", "regione",
    "citta", "paese", "gente", "tempo", "momento", "settimana", "mese", "vita",
    "speranza", "paura", "calma", "aiuto", "insieme", "domani", "mattina",
)


@dataclass
class SyntheticCountry:
    country: str
    lang: str
    tweets: list[dict]  # raw JSONL objects, junk included, pre-filter
    cases: list[tuple[date, int]]  # (day, total reported cases)

    def jsonl(self) -> str:
        import json

        return "".join(json.dumps(t, ensure_ascii=False) + "\n" for t in self.tweets)

    def cases_csv(self) -> str:
        lines = ["date,country,total_cases"]
        lines += [f"{d.isoformat()},{self.country},{c}" for d, c in self.cases]
        return "\n".join(lines) + "\n"


def logistic_totals(n_days: int, onset: float, peak_total: int, rate: float) -> np.ndarray:
    """Strictly increasing cumulative case curve (logistic, integer-rounded)."""
    t = np.arange(n_days, dtype=np.float64)
    raw = np.round(peak_total / (1.0 + np.exp(-rate * (t - onset)))).astype(np.int64)
    for i in range(1, n_days):
        if raw[i] <= raw[i - 1]:
            raw[i] = raw[i - 1] + 1
    return raw


def make_country(
    country: str,
    lang: str = "it",
    *,
    start: date = date(2020, 2, 1),
    n_days: int = 90,
    onset: float = 45.0,
    peak_total: int = 20000,
    rate: float = 0.15,
    noise: float = 0.0,
    junk_per_day: int = 0,
    keyword: str = "lockdown",
    other_country: str = "spagna",
    seed: int = 0,
) -> SyntheticCountry:
    """Generate one country's tweet corpus and case series.

    Clean tweet counts per day are monotone in that day's total cases, with
    optional multiplicative gaussian noise of the given relative magnitude.
    junk_per_day extra tweets per day cycle through every removal reason.
    """
    rng = np.random.default_rng(seed)
    totals = logistic_totals(n_days, onset, peak_total, rate)
    fractions = totals / float(peak_total)

    tweets: list[dict] = []
    cases: list[tuple[date, int]] = []
    serial = 0

    def new_id() -> str:
        nonlocal serial
        serial += 1
        return f"{country}-{serial:07d}"

    def stamp(day: date, k: int) -> str:
        moment = datetime(day.year, day.month, day.day, tzinfo=timezone.utc) + timedelta(
            seconds=(k * 9973) % 86400
        )
        return moment.strftime("%Y-%m-%dT%H:%M:%SZ")

    def words(k: int) -> str:
        return " ".join(rng.choice(_FILLER, size=k))

    for t in range(n_days):
        day = start + timedelta(days=t)
        cases.append((day, int(totals[t])))
        p = float(fractions[t])
        jitter = 1.0 + noise * float(rng.standard_normal()) if noise else 1.0
        jitter2 = 1.0 + noise * float(rng.standard_normal()) if noise else 1.0
        n_keyword = max(1, round((10.0 + 190.0 * p) * jitter))
        n_background = max(1, round((100.0 + 100.0 * p) * jitter2))

        day_tweets: list[dict] = []
        for k in range(n_keyword):
            text = f"{words(2)} {keyword} {words(2)} n{serial + 1}"
            day_tweets.append(
                {"id": new_id(), "created_at": stamp(day, k), "lang": lang, "text": text}
            )
        for k in range(n_background):
            text = f"{words(5)} n{serial + 1}"
            day_tweets.append(
                {"id": new_id(), "created_at": stamp(day, n_keyword + k), "lang": lang, "text": text}
            )
        for k in range(junk_per_day):
            kind = k % 6
            base = {"id": new_id(), "created_at": stamp(day, 500 + k), "lang": lang}
            if kind == 0:
                base["text"] = f"RT @qualcuno {words(3)}"
            elif kind == 1:
                base["text"] = f"{words(3)} https://t.co/x{serial}"
            elif kind == 2:
                base.update(lang="en", text=f"other language chatter {serial}")
            elif kind == 3:
                base["text"] = f"{words(2)} {other_country} {words(2)}"
            elif kind == 4:
                base["text"] = day_tweets[0]["text"] if day_tweets else f"{words(4)}"
            else:
                base["text"] = "   "
            day_tweets.append(base)
        order = rng.permutation(len(day_tweets))
        tweets.extend(day_tweets[i] for i in order)

    return SyntheticCountry(country=country, lang=lang, tweets=tweets, cases=cases)
