"""Service entry point: halluc-bridge serve."""

import argparse
import sys

import uvicorn

from .app import create_app
from .backends import StubBackend, TransformersBackend


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="halluc-bridge",
        description="Serve mask infilling and hallucination prediction over HTTP.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    serve = sub.add_parser("serve", help="run the inference service")
    serve.add_argument(
        "--backend",
        choices=("stub", "transformers"),
        default="stub",
        help="stub needs no models; transformers loads finetuned checkpoints",
    )
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8400)
    serve.add_argument("--infill-model", help="seq2seq denoiser checkpoint path")
    serve.add_argument(
        "--predict-model", help="token-classifier checkpoint path"
    )
    serve.add_argument("--device", default="cpu")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.backend == "transformers":
        if not args.infill_model or not args.predict_model:
            print(
                "halluc-bridge: --backend transformers requires "
                "--infill-model and --predict-model",
                file=sys.stderr,
            )
            return 1
        backend = TransformersBackend(
            infill_model=args.infill_model,
            predict_model=args.predict_model,
            device=args.device,
        )
    else:
        backend = StubBackend()
    uvicorn.run(create_app(backend), host=args.host, port=args.port)
    return 0


def entry() -> None:
    sys.exit(main())
