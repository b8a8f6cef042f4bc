#!/usr/bin/env python3
"""Generate two synthetic demo countries (raw tweets + case CSVs) under demo/.

The corpora carry a built-in monotone link between chatter and case counts,
plus removable junk, so the full pipeline has realistic work to do.
"""
import argparse
from pathlib import Path

from epialign.synthetic import make_country


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo", help="output directory")
    parser.add_argument("--noise", type=float, default=0.05)
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, onset, seed in [("Aland", 45.0, 7), ("Borduria", 62.0, 11)]:
        syn = make_country(name, "it", noise=args.noise, junk_per_day=6, seed=seed)
        (out / f"{name}.jsonl").write_text(syn.jsonl(), encoding="utf-8")
        (out / f"{name}.cases.csv").write_text(syn.cases_csv(), encoding="utf-8")
        print(f"{name}: {len(syn.tweets)} tweets, {len(syn.cases)} case days")


if __name__ == "__main__":
    main()
