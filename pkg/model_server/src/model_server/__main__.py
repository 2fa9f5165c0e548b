"""Run the model server: python -m model_server [--port 8777] [...]"""

import argparse

import uvicorn

from .app import create_app
from .backends import make_embed_backend, make_paraphrase_backend


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="model_server", description=__doc__)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8777)
    parser.add_argument(
        "--embed-backend", choices=["hash", "minilm"], default="hash",
        help="hash needs no model downloads; minilm loads sentence-transformers weights",
    )
    parser.add_argument("--embed-model", help="model name for the minilm backend")
    parser.add_argument(
        "--paraphrase-backend", choices=["rotation", "seq2seq"], default="rotation",
        help="rotation needs no model downloads; seq2seq loads transformers weights",
    )
    parser.add_argument("--paraphrase-model", help="model name for the seq2seq backend")
    parser.add_argument("--log-level", default="warning")
    args = parser.parse_args(argv)

    app = create_app(
        make_embed_backend(args.embed_backend, args.embed_model),
        make_paraphrase_backend(args.paraphrase_backend, args.paraphrase_model),
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level=args.log_level)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
