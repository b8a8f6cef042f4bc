import io
import sys
from datetime import date
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

from epialign.corpus import FilterConfig, filter_corpus, parse_case_csv_long, parse_tweet_jsonl
from epialign.features import FeatureConfig, KeywordSpec, build_daily_features
from epialign.synthetic import make_country

FEB1 = date(2020, 2, 1)
APR30 = date(2020, 4, 30)


@pytest.fixture(scope="session")
def synthetic_pair():
    """Two filtered synthetic countries sharing the generative link, shifted onset."""
    filter_cfg = FilterConfig(language="it", country_lexicon=("spagna",))
    out = {}
    for name, onset, seed in [("AA", 45.0, 3), ("BB", 62.0, 4)]:
        syn = make_country(name, "it", noise=0.0, junk_per_day=4, seed=seed)
        tweets, _ = parse_tweet_jsonl(io.StringIO(syn.jsonl()))
        kept, _ = filter_corpus(tweets, filter_cfg)
        series, _ = parse_case_csv_long(io.StringIO(syn.cases_csv()))
        out[name] = (syn, kept, series)
    return out


@pytest.fixture(scope="session")
def synthetic_days(synthetic_pair):
    """Per-day macro features (freq + one keyword) for both countries."""
    cfg = FeatureConfig(use_tweet_frequency=True, keyword_spec=KeywordSpec(("lockdown",)))
    out = {}
    for name, (_syn, kept, series) in synthetic_pair.items():
        days, _ = build_daily_features(cfg, kept, FEB1, APR30)
        out[name] = (days, series)
    return out


@pytest.fixture(scope="session")
def pipeline_ws(tmp_path_factory, synthetic_pair):
    """On-disk workspace: raw corpora, configs, and featurized CSVs for the CLI."""
    import json

    from epialign.cli import main

    ws = tmp_path_factory.mktemp("pipeline")
    (ws / "filter.json").write_text(
        json.dumps({"language": "it", "country_lexicon": ["spagna"]}), encoding="utf-8"
    )
    (ws / "features.json").write_text(
        json.dumps(
            {
                "use_tweet_frequency": True,
                "keyword_spec": {"language": "it", "keywords": ["lockdown"]},
            }
        ),
        encoding="utf-8",
    )
    (ws / "svr.json").write_text(
        json.dumps({"C": 10.0, "epsilon": 0.1, "kernel": {"kind": "linear"}}), encoding="utf-8"
    )
    for name, (syn, _kept, _series) in synthetic_pair.items():
        (ws / f"{name}.jsonl").write_text(syn.jsonl(), encoding="utf-8")
        (ws / f"{name}.cases.csv").write_text(syn.cases_csv(), encoding="utf-8")
        assert (
            main(
                [
                    "filter",
                    str(ws / f"{name}.jsonl"),
                    "--config",
                    str(ws / "filter.json"),
                    "--out",
                    str(ws / f"{name}.filtered.jsonl"),
                    "--stats",
                    str(ws / f"{name}.stats.json"),
                ]
            )
            == 0
        )
        assert (
            main(
                [
                    "featurize",
                    str(ws / f"{name}.filtered.jsonl"),
                    "--features",
                    str(ws / "features.json"),
                    "--range",
                    "2020-02-01:2020-04-30",
                    "--out",
                    str(ws / f"{name}.features.csv"),
                ]
            )
            == 0
        )
    return ws
