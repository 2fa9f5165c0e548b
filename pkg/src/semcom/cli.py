"""Command-line interface: lexicon queries, scoring, sessions, experiments.

JSON results go to stdout and human-readable logs to stderr, so output can
be piped. Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import os
import socket
import sys
from pathlib import Path

from .dou import MeaningSelection, match_vector, objective, sdou, wdou
from .lexicon import SynsetId, load_lexicon_dir
from .paraphrase import RemoteParaphraser, SynonymParaphraser
from .pipeline import extract_word_units
from .protocol import (
    PerfectReceiver,
    Providers,
    SenderPolicy,
    StreamChannel,
    receiver_run,
    sender_run,
)
from .similarity import MODEL_SERVER_ENV, default_embedder
from .simulator import (
    ImpairedReceiver,
    ImpairmentConfig,
    filter_by_length,
    load_corpus,
    load_experiment_config,
    render_chart,
    run_experiment_a,
    run_experiment_b,
    write_csv,
)

LEXICON_ENV = "SEMCOM_LEXICON_PATH"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _emit(payload: dict, stream=None) -> None:
    json.dump(payload, stream or sys.stdout, indent=2, sort_keys=True)
    print(file=stream or sys.stdout)


def _load_db(args):
    path = args.lexicon or os.environ.get(LEXICON_ENV)
    if not path:
        raise RuntimeError(
            f"no lexicon given: pass --lexicon or set {LEXICON_ENV} to a wndb directory"
        )
    return load_lexicon_dir(path)


def _providers(db, seed: int = 0) -> Providers:
    url = os.environ.get(MODEL_SERVER_ENV)
    paraphraser = RemoteParaphraser(url) if url else SynonymParaphraser(db, seed=seed)
    return Providers(embedder=default_embedder(db), paraphraser=paraphraser)


def _cmd_lexicon_inspect(args) -> int:
    db = _load_db(args)
    senses = db.senses(args.lemma, args.pos)
    payload = {
        "lemma": args.lemma.lower(),
        "sense_count": db.sense_count(args.lemma) if args.pos is None else len(senses),
        "senses": [
            {
                "id": str(sid),
                "pos": sid.pos,
                "offset": sid.offset,
                "lemmas": db.lemmas_of(sid),
                "gloss": db.synset(sid).gloss,
            }
            for sid in senses
        ],
    }
    _emit(payload)
    return 0


def _cmd_dou_score(args) -> int:
    db = _load_db(args)
    units = extract_word_units(db, args.sentence)
    with open(args.receiver_selection, encoding="utf-8") as fh:
        received = json.load(fh)
    raw = received.get("selection", [])
    if len(raw) != len(units):
        raise RuntimeError(
            f"receiver selection lists {len(raw)} entries, sentence has {len(units)} word units"
        )
    sel_r = MeaningSelection(tuple(None if e is None else SynsetId.parse(e) for e in raw))
    sel_s = MeaningSelection.first_sense(units)
    if units:
        from .dou import difficulty_vector

        v = match_vector(sel_s, sel_r)
        sim_w = wdou(v, [u.importance for u in units], difficulty_vector(units))
    else:
        sim_w = 1.0
    embedder = default_embedder(db)
    receiver_sentence = received.get("paraphrase", args.sentence)
    vec_s, vec_r = embedder.embed([args.sentence, receiver_sentence])
    sim_s = sdou(vec_s, vec_r)
    _emit(
        {
            "sim_w": sim_w,
            "sim_s": sim_s,
            "objective_f": objective(sim_w, sim_s),
            "units": [
                {"surface": u.surface, "lookup_lemma": u.lookup_lemma, "sense_count": u.sense_count}
                for u in units
            ],
        }
    )
    return 0


def _open_transport(args):
    """Returns (channel, cleanup, report_stream)."""
    if args.transport == "stdio":
        channel = StreamChannel(sys.stdin.buffer, sys.stdout.buffer)
        return channel, lambda: None, sys.stderr
    if args.transport.startswith("tcp:"):
        _, host, port = args.transport.split(":", 2)
        address = (host, int(port))
        if args.listen:
            server = socket.create_server(address)
            _log(f"listening on {host}:{port}")
            conn, peer = server.accept()
            _log(f"peer connected from {peer[0]}:{peer[1]}")
            server.close()
        else:
            conn = socket.create_connection(address)
        reader = conn.makefile("rb")
        writer = conn.makefile("wb")

        def cleanup():
            reader.close()
            writer.close()
            conn.close()

        return StreamChannel(reader, writer), cleanup, sys.stdout
    raise RuntimeError(f"unknown transport {args.transport!r} (use stdio or tcp:HOST:PORT)")


def _cmd_session_run(args) -> int:
    db = _load_db(args)
    providers = _providers(db, seed=args.seed)
    channel, cleanup, report_stream = _open_transport(args)
    try:
        if args.role == "sender":
            if not args.sentence:
                raise RuntimeError("sender role requires --sentence")
            policy = SenderPolicy(
                max_rounds=args.max_rounds,
                f_threshold=args.f_threshold,
                seed=args.seed,
                reference_mode=args.reference,
            )
            report = sender_run(db, args.sentence, None, providers, policy, channel)
        else:
            if args.mask_all or args.mask_count or args.wdou is not None:
                cfg = ImpairmentConfig(
                    wdou_level=args.wdou if args.wdou is not None else 1.0,
                    mask_count=args.mask_count,
                    mask_all=args.mask_all,
                    seed=args.seed,
                    smoothing=args.smoothing,
                )
                behavior = ImpairedReceiver(cfg, providers.paraphraser if args.smoothing else None)
            else:
                behavior = PerfectReceiver()
            report = receiver_run(db, behavior, providers, channel)
    finally:
        cleanup()
    _emit(report.as_dict(), report_stream)
    return 0


def _cmd_experiment(args) -> int:
    kind, cfg = load_experiment_config(args.config)
    if kind != args.kind:
        raise RuntimeError(f"config {args.config} declares experiment {kind!r}, not {args.kind!r}")
    runner = run_experiment_a if kind == "a" else run_experiment_b
    result = runner(cfg)
    write_csv(result, args.csv)
    _log(f"wrote {args.csv}")
    if args.svg:
        render_chart(result, args.svg)
        _log(f"wrote {args.svg}")
    return 0


def _cmd_corpus_filter(args) -> int:
    for sentence in filter_by_length(load_corpus(args.corpus), args.length):
        print(sentence)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="semcom", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    lexicon = sub.add_parser("lexicon", help="lexical database queries")
    lexicon_sub = lexicon.add_subparsers(dest="subcommand", required=True)
    inspect = lexicon_sub.add_parser("inspect", help="senses, counts, and synonyms of a lemma")
    inspect.add_argument("lemma")
    inspect.add_argument("--pos", choices=["n", "v", "a", "r", "s"])
    inspect.add_argument("--lexicon", help=f"wndb directory (default ${LEXICON_ENV})")
    inspect.set_defaults(func=_cmd_lexicon_inspect)

    dou = sub.add_parser("dou", help="degree-of-understanding scoring")
    dou_sub = dou.add_subparsers(dest="subcommand", required=True)
    score = dou_sub.add_parser("score", help="score a receiver selection file against a sentence")
    score.add_argument("--sentence", required=True)
    score.add_argument("--receiver-selection", required=True, metavar="FILE")
    score.add_argument("--lexicon")
    score.set_defaults(func=_cmd_dou_score)

    session = sub.add_parser("session", help="run one protocol session endpoint")
    session_sub = session.add_subparsers(dest="subcommand", required=True)
    run = session_sub.add_parser("run", help="run as sender or receiver over stdio or tcp")
    run.add_argument("--role", choices=["sender", "receiver"], required=True)
    run.add_argument("--transport", default="stdio", help="stdio or tcp:HOST:PORT")
    run.add_argument("--listen", action="store_true", help="accept the tcp connection")
    run.add_argument("--sentence")
    run.add_argument("--lexicon")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--max-rounds", type=int, default=3)
    run.add_argument("--f-threshold", type=float, default=0.1)
    run.add_argument("--reference", choices=["paraphrase", "original"], default="paraphrase")
    run.add_argument("--wdou", type=float, default=None, help="impaired receiver understanding level")
    run.add_argument("--mask-count", type=int, default=0)
    run.add_argument("--mask-all", action="store_true")
    run.add_argument("--smoothing", action="store_true")
    run.set_defaults(func=_cmd_session_run)

    experiment = sub.add_parser("experiment", help="seeded sweeps with CSV/SVG reports")
    experiment.add_argument("kind", choices=["a", "b"])
    experiment.add_argument("--config", required=True)
    experiment.add_argument("--csv", required=True)
    experiment.add_argument("--svg")
    experiment.set_defaults(func=_cmd_experiment)

    corpus = sub.add_parser("corpus", help="corpus utilities")
    corpus_sub = corpus.add_subparsers(dest="subcommand", required=True)
    filt = corpus_sub.add_parser("filter", help="print sentences with an exact token count")
    filt.add_argument("--length", type=int, required=True)
    filt.add_argument("--corpus", required=True)
    filt.set_defaults(func=_cmd_corpus_filter)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except BrokenPipeError:
        return 2
    except Exception as exc:
        print(f"semcom: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
