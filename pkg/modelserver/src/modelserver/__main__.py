"""CLI: serve a model (or stub) over the logits protocol.

    modelserver --model stub:uniform --port 8011
    modelserver --model stub:file=logits.json --port 8011
    modelserver --model <hub-id> --port 8011 --vocab manifest.json
"""

from __future__ import annotations

import argparse
import json
import sys

import uvicorn

from .app import create_app
from .models import load_model


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modelserver", description=__doc__)
    parser.add_argument("--model", required=True,
                        help="stub:uniform | stub:file=<logits.json> | hub id")
    parser.add_argument("--port", type=int, default=8011)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--vocab",
                        help="JSON file with the symbol list to serve")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    vocab = None
    if args.vocab:
        with open(args.vocab, "r", encoding="utf-8") as fh:
            vocab = json.load(fh)
    model = load_model(args.model, vocab=vocab)
    app = create_app(model)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    sys.exit(main())
