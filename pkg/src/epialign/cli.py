"""Command-line surface: filter -> featurize -> train/predict/eval/transfer -> report.

The pipeline is staged through files so expensive steps can be cached and
embedding stores swapped without recomputation. Every command writes a
manifest next to its primary output recording the resolved configuration
and SHA-256 digests of all inputs. Exit codes: 0 success, 2 usage or format
errors, 3 degenerate data.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from dataclasses import asdict
from datetime import date, datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .corpus import (
    FilterConfig,
    FilterStats,
    derive_new_cases,
    filter_corpus,
    load_country_lexicon,
    read_case_series,
    read_tweets_file,
    write_tweets_file,
)
from .errors import DegenerateDataError, FormatError, NotFoundError
from .experiment import (
    DateInterval,
    ExperimentConfig,
    ExperimentResult,
    PRESET_NAMES,
    align_days,
    read_result,
    run_experiment,
    split_preset,
    write_result,
)
from .features import (
    build_daily_features,
    load_feature_config,
    load_json_file,
    mock_store,
    read_features_csv,
    write_features_csv,
)
from .kernels import KernelParams
from .ranking import spearman
from .report import emit_report
from .store import read_store_file
from .svr import SvrParams, load_model, save_model, svr_fit, svr_predict


def _digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out_path: str, command: str, config: dict, inputs: list[str]) -> None:
    doc = {
        "command": command,
        "config": config,
        "inputs": {p: _digest(p) for p in sorted(set(inputs))},
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    with open(out_path + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _parse_range(text: str) -> tuple[date, date]:
    try:
        start_raw, end_raw = text.split(":")
        start, end = date.fromisoformat(start_raw), date.fromisoformat(end_raw)
    except ValueError:
        raise FormatError(f"bad date range {text!r}; expected YYYY-MM-DD:YYYY-MM-DD") from None
    if end < start:
        raise FormatError(f"empty date range {text!r}")
    return start, end


def _load_svr_params(path: str | None, seed: int) -> SvrParams:
    if path is None:
        return SvrParams(seed=seed)
    doc = load_json_file(path)
    kernel_doc = doc.get("kernel", {})
    try:
        kernel = KernelParams(
            kind=kernel_doc.get("kind", "rbf"),
            gamma=kernel_doc.get("gamma", "scale"),
            coef0=float(kernel_doc.get("coef0", 0.0)),
            degree=int(kernel_doc.get("degree", 3)),
        )
        return SvrParams(
            C=float(doc.get("C", 1.0)),
            epsilon=float(doc.get("epsilon", 0.1)),
            tol=float(doc.get("tol", 1e-3)),
            max_passes=doc.get("max_passes"),
            kernel=kernel,
            seed=int(doc.get("seed", seed)),
        )
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{path}: {exc}") from exc


def _load_filter_config(path: str) -> tuple[FilterConfig, list[str]]:
    doc = load_json_file(path)
    if "language" not in doc:
        raise FormatError(f"{path}: missing 'language'")
    lexicon = list(doc.get("country_lexicon", []))
    extra_inputs: list[str] = []
    if doc.get("country_lexicon_file"):
        lex_path = str(Path(path).parent / doc["country_lexicon_file"])
        extra_inputs.append(lex_path)
        with open(lex_path, "r", encoding="utf-8") as fh:
            lexicon.extend(load_country_lexicon(fh))
    try:
        cfg = FilterConfig(
            language=doc["language"],
            country_lexicon=tuple(lexicon),
            drop_retweets=bool(doc.get("drop_retweets", True)),
            drop_hyperlinks=bool(doc.get("drop_hyperlinks", True)),
            drop_duplicates=bool(doc.get("drop_duplicates", True)),
        )
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    return cfg, extra_inputs


def cmd_filter(args: argparse.Namespace) -> int:
    cfg, extra_inputs = _load_filter_config(args.config)
    tweets, parse_errors = read_tweets_file(args.input)
    kept, stats = filter_corpus(tweets, cfg)

    write_tweets_file(args.out, kept)
    stats_doc = {
        "label": Path(args.input).stem,
        "language": cfg.language,
        "parse_errors": parse_errors,
        **stats.to_dict(),
    }
    with open(args.stats, "w", encoding="utf-8") as fh:
        json.dump(stats_doc, fh, indent=2, sort_keys=True)
        fh.write("\n")

    _write_manifest(
        args.out,
        "filter",
        {"filter": asdict(cfg), "parse_errors": parse_errors, "seed": args.seed},
        [args.input, args.config, *extra_inputs],
    )
    print(f"kept {stats.post_count}/{stats.pre_count} tweets ({parse_errors} parse errors)", file=sys.stderr)
    return 0


def cmd_featurize(args: argparse.Namespace) -> int:
    cfg = load_feature_config(_resolve_feature_doc(args.features))
    start, end = _parse_range(args.range)
    tweets, parse_errors = read_tweets_file(args.input)

    store = None
    inputs = [args.input, args.features]
    if cfg.embedding is not None:
        if args.emb:
            store, warnings = read_store_file(args.emb)
            inputs.append(args.emb)
            for w in warnings:
                print(f"warning: {w}", file=sys.stderr)
        elif args.mock_dim:
            if cfg.embedding.dim is not None and cfg.embedding.dim != args.mock_dim:
                raise FormatError(
                    f"embedding dim conflict: config wants {cfg.embedding.dim}, --mock-dim is {args.mock_dim}"
                )
            store = mock_store(tweets, args.mock_dim)
        else:
            raise FormatError("feature config enables embeddings; pass --emb or --mock-dim")
    elif args.emb or args.mock_dim:
        raise FormatError("--emb/--mock-dim given but the feature config has no embedding section")

    days, build_stats = build_daily_features(cfg, tweets, start, end, store)
    names = cfg.feature_names(store.dim if store is not None else None)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        write_features_csv(fh, days, names)

    if build_stats.missing_embeddings:
        print(f"warning: {build_stats.missing_embeddings} tweet(s) missing from the embedding store", file=sys.stderr)
    if build_stats.empty_days:
        print(f"warning: {len(build_stats.empty_days)} empty day(s) in range", file=sys.stderr)
    _write_manifest(
        args.out,
        "featurize",
        {
            "range": args.range,
            "feature_names": names,
            "parse_errors": parse_errors,
            "missing_embeddings": build_stats.missing_embeddings,
            "empty_days": [d.isoformat() for d in build_stats.empty_days],
            "mock_dim": args.mock_dim,
            "seed": args.seed,
        },
        inputs,
    )
    return 0


def _resolve_feature_doc(path: str) -> dict:
    doc = load_json_file(path)
    if doc.get("keyword_file"):
        kw_path = str(Path(path).parent / doc["keyword_file"])
        doc = {**doc, "keyword_spec": load_json_file(kw_path)}
    return doc


def _load_cases(path: str, fmt: str, country: str | None):
    series, warnings = read_case_series(path, fmt=fmt, country=country)
    for w in warnings:
        print(f"warning: {path}: {w}", file=sys.stderr)
    return series


def _train_interval(args: argparse.Namespace) -> DateInterval:
    if args.setting:
        return split_preset(args.setting).train
    if args.train_range:
        start, end = _parse_range(args.train_range)
        return DateInterval(start, end)
    raise FormatError("pass either --setting or --train-range")


def cmd_train(args: argparse.Namespace) -> int:
    with open(args.features, "r", encoding="utf-8", newline="") as fh:
        days, _names = read_features_csv(fh)
    series = _load_cases(args.cases, args.cases_format, args.country)
    if args.case_mode == "new":
        series = derive_new_cases(series)
    interval = _train_interval(args)

    warnings: list[str] = []
    X, y, _dates = align_days(days, series, interval, "train", warnings)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    if len(y) < 2 or np.unique(y).size < 2:
        raise DegenerateDataError("training targets are degenerate (fewer than 2 distinct values)")

    params = _load_svr_params(args.svr, args.seed)
    model = svr_fit(X, y, params)
    if not model.converged:
        print("warning: solver hit the pair-update cap before reaching tolerance", file=sys.stderr)
    with open(args.out, "w", encoding="utf-8") as fh:
        save_model(model, fh)
    _write_manifest(
        args.out,
        "train",
        {"case_mode": args.case_mode, "setting": args.setting, "train_range": args.train_range,
         "n_train": int(len(y)), "converged": model.converged, "seed": args.seed},
        [args.features, args.cases] + ([args.svr] if args.svr else []),
    )
    print(f"trained on {len(y)} days", file=sys.stderr)
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    with open(args.model, "r", encoding="utf-8") as fh:
        model = load_model(fh)
    with open(args.features, "r", encoding="utf-8", newline="") as fh:
        days, _names = read_features_csv(fh)
    if args.range:
        start, end = _parse_range(args.range)
        days = [d for d in days if start <= d.date <= end]
    if not days:
        raise DegenerateDataError("no feature rows in the requested range")

    X = np.asarray([d.x for d in days])
    y_hat = np.atleast_1d(svr_predict(model, X))
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date", "y_hat"])
        for d, v in zip(days, y_hat):
            writer.writerow([d.date.isoformat(), repr(float(v))])
    _write_manifest(args.out, "predict", {"range": args.range, "seed": args.seed},
                    [args.model, args.features])
    return 0


def _read_value_csv(path: str) -> dict[date, float]:
    """date -> value; the date column must be named 'date', values come from the last column."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        try:
            date_col = header.index("date")
        except ValueError:
            raise FormatError(f"{path}: no 'date' column") from None
        out: dict[date, float] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                out[date.fromisoformat(row[date_col])] = float(row[-1])
            except ValueError as exc:
                raise FormatError(f"{path} line {lineno}: {exc}") from exc
    return out


def cmd_eval(args: argparse.Namespace) -> int:
    pred = _read_value_csv(args.pred)
    truth = _read_value_csv(args.truth)
    common = sorted(set(pred) & set(truth))
    if len(common) < 2:
        raise DegenerateDataError("fewer than 2 common dates between prediction and truth")
    rho = spearman([pred[d] for d in common], [truth[d] for d in common])
    print("undefined" if rho is None else f"{rho:.6f}")
    return 0


def cmd_transfer(args: argparse.Namespace) -> int:
    with open(args.source_features, "r", encoding="utf-8", newline="") as fh:
        source_days, source_names = read_features_csv(fh)
    with open(args.target_features, "r", encoding="utf-8", newline="") as fh:
        target_days, target_names = read_features_csv(fh)
    if source_names != target_names:
        raise FormatError(
            "source and target feature columns differ; both corpora must be featurized "
            "with the same feature config"
        )
    source_cases = _load_cases(args.source_cases, args.cases_format, args.source_country)
    target_cases = _load_cases(args.target_cases, args.cases_format, args.target_country)

    cfg = ExperimentConfig(
        source_country=args.source_country or source_cases.country,
        target_country=args.target_country or target_cases.country,
        case_mode=args.case_mode,
        svr_params=_load_svr_params(args.svr, args.seed),
        time_setting=split_preset(args.setting),
        variant=args.variant,
    )
    result = run_experiment(cfg, source_days, source_cases, target_days, target_cases)
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)
    with open(args.out, "w", encoding="utf-8") as fh:
        write_result(result, fh)
    _write_manifest(
        args.out,
        "transfer",
        {"setting": args.setting, "case_mode": args.case_mode, "variant": args.variant, "seed": args.seed},
        [args.source_features, args.source_cases, args.target_features, args.target_cases]
        + ([args.svr] if args.svr else []),
    )
    print("undefined" if result.spearman is None else f"{result.spearman:.6f}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    results_dir = Path(args.results_dir)
    if not results_dir.is_dir():
        raise FormatError(f"{results_dir} is not a directory")

    results: list[ExperimentResult] = []
    timeline: dict[tuple[str, date], int] = {}
    filter_stats: dict[str, FilterStats] = {}
    inputs: list[str] = []
    for path in sorted(results_dir.iterdir()):
        name = path.name
        if name.endswith(".result.json"):
            with open(path, "r", encoding="utf-8") as fh:
                results.append(read_result(fh))
        elif name.endswith(".stats.json"):
            doc = load_json_file(str(path))
            stats = FilterStats(
                pre_count=int(doc.get("pre_count", 0)),
                post_count=int(doc.get("post_count", 0)),
                removed_by_reason=dict(doc.get("removed_by_reason", {})),
            )
            filter_stats[str(doc.get("label", path.name.split(".")[0]))] = stats
        elif name.endswith(".features.csv"):
            country = name.split(".")[0]
            with open(path, "r", encoding="utf-8", newline="") as fh:
                days, _ = read_features_csv(fh)
            for d in days:
                timeline[(country, d.date)] = d.tweet_count
        else:
            continue
        inputs.append(str(path))

    if not inputs:
        raise DegenerateDataError(f"no *.result.json, *.stats.json or *.features.csv files in {results_dir}")

    docs = emit_report(results, timeline or None, filter_stats or None)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for filename, content in sorted(docs.items()):
        (out_dir / filename).write_text(content, encoding="utf-8", newline="")
    _write_manifest(str(out_dir / "report"), "report", {"tables": sorted(docs)}, inputs)
    print(f"wrote {len(docs)} table(s) to {out_dir}", file=sys.stderr)
    return 0


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epialign",
        description="Align social-media chatter with reported epidemic case counts.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--seed", type=int, default=0, help="seed recorded in configs (pipeline is deterministic)")
        p.add_argument("--threads", type=_positive_int, default=1, help="worker cap; outputs are identical at any value")

    p = sub.add_parser("filter", help="apply the removal-rule chain to a tweet JSONL corpus")
    p.add_argument("input", help="tweet JSONL file")
    p.add_argument("--config", required=True, help="filter config JSON")
    p.add_argument("--out", required=True, help="filtered JSONL output")
    p.add_argument("--stats", required=True, help="filter statistics JSON output")
    common(p)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("featurize", help="build per-day feature vectors from a filtered corpus")
    p.add_argument("input", help="filtered tweet JSONL file")
    p.add_argument("--features", required=True, help="feature config JSON")
    p.add_argument("--range", required=True, help="date range YYYY-MM-DD:YYYY-MM-DD (inclusive)")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--emb", help="EMB1 embedding store file")
    group.add_argument("--mock-dim", type=int, help="use the deterministic mock embedder at this dimension")
    p.add_argument("--out", required=True, help="features CSV output")
    common(p)
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("train", help="fit the regressor on one country's features and cases")
    p.add_argument("--features", required=True)
    p.add_argument("--cases", required=True)
    p.add_argument("--cases-format", choices=["long", "jhu"], default="long")
    p.add_argument("--country", help="country name (required for the JHU wide format)")
    p.add_argument("--case-mode", choices=["total", "new"], default="total")
    p.add_argument("--setting", choices=list(PRESET_NAMES), help="use this preset's training window")
    p.add_argument("--train-range", help="explicit training window YYYY-MM-DD:YYYY-MM-DD")
    p.add_argument("--svr", help="SVR parameter JSON (defaults used when omitted)")
    p.add_argument("--out", required=True, help="model JSON output")
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict case counts for feature rows")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--range", help="restrict to YYYY-MM-DD:YYYY-MM-DD")
    p.add_argument("--out", required=True, help="predictions CSV output (date,y_hat)")
    common(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="rank correlation between two date,value CSVs")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("transfer", help="train on one country, evaluate on another")
    p.add_argument("--source-features", required=True)
    p.add_argument("--source-cases", required=True)
    p.add_argument("--target-features", required=True)
    p.add_argument("--target-cases", required=True)
    p.add_argument("--cases-format", choices=["long", "jhu"], default="long")
    p.add_argument("--source-country", help="label/JHU row for the source country")
    p.add_argument("--target-country", help="label/JHU row for the target country")
    p.add_argument("--setting", required=True, choices=list(PRESET_NAMES))
    p.add_argument("--case-mode", choices=["total", "new"], default="total")
    p.add_argument("--svr", help="SVR parameter JSON")
    p.add_argument("--variant", default="", help="free-form label for report grouping")
    p.add_argument("--out", required=True, help="experiment result JSON output")
    common(p)
    p.set_defaults(func=cmd_transfer)

    p = sub.add_parser("report", help="emit report CSVs from a directory of results")
    p.add_argument("results_dir")
    p.add_argument("--out", required=True, help="report output directory")
    common(p)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FormatError, NotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc.strerror}: {exc.filename}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DegenerateDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
