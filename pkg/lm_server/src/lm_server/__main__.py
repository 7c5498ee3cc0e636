"""Server runner: pick a backend, bind, serve."""

import argparse

import uvicorn

from .app import create_app


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(
        prog="lm-server",
        description="Masked-LM candidate server (POST /predict, GET /health).",
    )
    parser.add_argument("--backend", choices=["bigram", "hf"], default="bigram")
    parser.add_argument(
        "--train-text",
        help="bigram backend: training corpus, one sentence per line",
    )
    parser.add_argument(
        "--model", default="roberta-base", help="hf backend: model name or local path"
    )
    parser.add_argument(
        "--multi-piece",
        action="store_true",
        help="hf backend: greedily complete multi-piece words instead of filtering them",
    )
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8400)
    args = parser.parse_args(argv)

    if args.backend == "bigram":
        if not args.train_text:
            parser.error("--backend bigram requires --train-text")

        def loader():
            from .backends import BigramBackend

            return BigramBackend.train_from_text(args.train_text)

    else:
        def loader():
            from .backends import HFBackend

            return HFBackend(args.model, multi_piece=args.multi_piece)

    uvicorn.run(create_app(loader), host=args.host, port=args.port, log_level="info")


if __name__ == "__main__":
    main()
