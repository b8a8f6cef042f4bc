"""tweet-embed: encode a filtered tweet corpus into an EMB1 store."""
from __future__ import annotations

import argparse
import json
import sys

from .emb1 import write_store
from .encoder import FAMILIES, POOLINGS, Encoder, EncoderChoice, ModelUnavailableError, read_filtered_jsonl


def extract(in_path: str, choice: EncoderChoice, out_path: str) -> dict:
    """Encode every tweet in the input (truncating long texts, never skipping).

    Returns a summary {count, dim, skipped}; skipped counts unparseable lines.
    """
    with open(in_path, "r", encoding="utf-8") as fh:
        pairs, skipped = read_filtered_jsonl(fh)
    encoder = Encoder(choice)
    texts = [text for _, text in pairs]
    vectors = encoder.encode_all(texts)
    with open(out_path, "wb") as out:
        count = write_store(out, encoder.dim, ((tid, vec) for (tid, _), vec in zip(pairs, vectors)))
    return {"count": count, "dim": encoder.dim, "skipped": skipped}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tweet-embed",
        description="Encode filtered tweets with a pretrained multilingual encoder into an EMB1 store.",
    )
    parser.add_argument("--in", dest="input", required=True, help="filtered tweet JSONL")
    parser.add_argument("--encoder", choices=sorted(FAMILIES), default="mbert_mean_pool")
    parser.add_argument("--out", required=True, help="EMB1 output path")
    parser.add_argument("--model-path", help="local model directory overriding the family default")
    parser.add_argument("--pooling", choices=list(POOLINGS), default="mean")
    parser.add_argument("--max-seq-len", type=int, default=128)
    parser.add_argument("--batch-size", type=int, default=32)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        choice = EncoderChoice(
            family=args.encoder,
            max_sequence_length=args.max_seq_len,
            batch_size=args.batch_size,
            pooling=args.pooling,
            model_path=args.model_path,
        )
        summary = extract(args.input, choice, args.out)
    except ModelUnavailableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc.strerror}: {exc.filename}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
