"""Plot-ready CSV reports: correlation grids, frequency timeline, filter stats.

Output is deterministic: rows and columns are sorted, floats are fixed to
six decimals, undefined correlations print as "undefined", and reruns on
identical inputs are byte-identical.
"""
from __future__ import annotations

import io
import csv
from datetime import date
from typing import Mapping, Sequence

from .corpus import REMOVAL_REASONS, FilterStats
from .experiment import ExperimentResult, PRESET_NAMES


def _setting_order(name: str) -> tuple[int, str]:
    try:
        return (PRESET_NAMES.index(name), "")
    except ValueError:
        return (len(PRESET_NAMES), name)


def _cell(value: float | None) -> str:
    return "undefined" if value is None else f"{value:.6f}"


def _csv_doc(comment: str, rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    buf.write(f"# {comment}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def _sorted_results(results: Sequence[ExperimentResult]) -> list[ExperimentResult]:
    return sorted(
        results,
        key=lambda r: (r.case_mode, r.variant, _setting_order(r.setting), r.source_country, r.target_country),
    )


def domestic_table(results: Sequence[ExperimentResult]) -> str | None:
    """Case mode x variant rows against time-setting columns (source == target)."""
    domestic = [r for r in _sorted_results(results) if r.source_country == r.target_country]
    if not domestic:
        return None
    settings = sorted({r.setting for r in domestic}, key=_setting_order)
    cells: dict[tuple[str, str], dict[str, float | None]] = {}
    for r in domestic:
        cells.setdefault((r.case_mode, r.variant), {})[r.setting] = r.spearman
    rows: list[list[str]] = [["cases", "variant", *settings]]
    for (case_mode, variant), by_setting in sorted(cells.items()):
        rows.append(
            [case_mode, variant]
            + [(_cell(by_setting[s]) if s in by_setting else "") for s in settings]
        )
    comment = "domestic rank correlation per case mode, variant and time setting"
    if "V" in settings:
        comment += "; setting V trains and tests on the same window (upper bound)"
    return _csv_doc(comment, rows)


def transfer_tables(results: Sequence[ExperimentResult]) -> dict[str, str]:
    """One settings-by-countries grid per case mode (source != target)."""
    out: dict[str, str] = {}
    transfer = [r for r in _sorted_results(results) if r.source_country != r.target_country]
    for case_mode in sorted({r.case_mode for r in transfer}):
        subset = [r for r in transfer if r.case_mode == case_mode]
        countries = sorted({r.target_country for r in subset})
        settings = sorted({r.setting for r in subset}, key=_setting_order)
        cells: dict[tuple[str, str], float | None] = {}
        for r in subset:
            cells[(r.setting, r.target_country)] = r.spearman
        rows: list[list[str]] = [["setting", *countries]]
        for s in settings:
            rows.append([s] + [(_cell(cells[(s, c)]) if (s, c) in cells else "") for c in countries])
        sources = sorted({r.source_country for r in subset})
        comment = f"transfer rank correlation, {case_mode} cases, trained on {'/'.join(sources)}"
        if "V" in settings:
            comment += "; setting V trains and tests on the same window (upper bound)"
        out[f"transfer_{case_mode}.csv"] = _csv_doc(comment, rows)
    return out


def frequency_timeline(counts: Mapping[tuple[str, date], int]) -> str:
    """Per-day per-country tweet counts, sorted by country then date."""
    rows: list[list[str]] = [["date", "country", "count"]]
    for (country, day), count in sorted(counts.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        rows.append([day.isoformat(), country, str(count)])
    return _csv_doc("daily filtered tweet counts per country", rows)


def filter_stats_table(stats: Mapping[str, FilterStats]) -> str:
    rows: list[list[str]] = [["label", "pre_count", "post_count", *REMOVAL_REASONS]]
    for label, st in sorted(stats.items()):
        rows.append(
            [label, str(st.pre_count), str(st.post_count)]
            + [str(st.removed_by_reason.get(reason, 0)) for reason in REMOVAL_REASONS]
        )
    return _csv_doc("corpus sizes before and after filtering, with removal reasons", rows)


def emit_report(
    results: Sequence[ExperimentResult],
    timeline: Mapping[tuple[str, date], int] | None = None,
    filter_stats: Mapping[str, FilterStats] | None = None,
) -> dict[str, str]:
    """Assemble every table that has data; returns filename -> CSV text."""
    out: dict[str, str] = {}
    table = domestic_table(results)
    if table is not None:
        out["domestic.csv"] = table
    out.update(transfer_tables(results))
    if timeline:
        out["frequency_timeline.csv"] = frequency_timeline(timeline)
    if filter_stats:
        out["filter_stats.csv"] = filter_stats_table(filter_stats)
    return out
