"""Command-line entry point.

Exit status: 0 on success, 1 on usage errors, 2 on runtime failures.
"""
from __future__ import annotations

import argparse
import itertools
import json
import logging
import os
import socket
import sys
from dataclasses import asdict

from . import __version__
from .corpus import DEFAULT_RATIO, DEFAULT_SEED, load_csv, split
from .errors import SentimonError
from .evaluation import FORMATS, evaluate, render_report
from .features import COUNT, DEFAULT_MAX_FEATURES, TFIDF
from .models import KINDS, LOGISTIC, SVM, TrainConfig, grid_search, load_model, save_model, train_bundle
from .models.selection import DEFAULT_FOLDS, DEFAULT_GRID
from .preprocess import PreprocessConfig

log = logging.getLogger("sentimon")

EXIT_USAGE = 1
EXIT_RUNTIME = 2
PREDICT_CHUNK = 512


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _grid(value: str) -> list[float]:
    try:
        grid = [float(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {value!r}") from None
    if not grid or any(c <= 0 for c in grid):
        raise argparse.ArgumentTypeError("grid values must be positive")
    return grid


def _address(value: str) -> tuple[str, int]:
    host, sep, port = value.rpartition(":")
    if not sep or not port.isdigit():
        raise argparse.ArgumentTypeError(f"expected HOST:PORT, got {value!r}")
    return host or "127.0.0.1", int(port)


def _add_preprocess_flags(p):
    p.add_argument("--no-stopwords", action="store_true", help="keep stopwords")
    p.add_argument("--no-lowercase", action="store_true", help="keep original case")
    p.add_argument("--max-features", type=int, default=DEFAULT_MAX_FEATURES)


def _add_split_flags(p):
    p.add_argument("--ratio", type=float, default=DEFAULT_RATIO, help="train fraction (default 0.8)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)


def _add_train_flags(p):
    p.add_argument("--c", dest="c_value", type=float, default=1.0, help="inverse regularization strength")
    p.add_argument("--alpha", type=float, default=1.0, help="naive Bayes smoothing")
    p.add_argument("--max-epochs", type=int, default=None)
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.add_argument("--nb-weighting", choices=(TFIDF, COUNT), default=TFIDF)


def _add_window_flags(p):
    p.add_argument("--bucket-seconds", type=int, default=60)
    p.add_argument("--retained-buckets", type=int, default=1440)
    p.add_argument("--no-anonymize", action="store_true",
                   help="keep raw ids and mentions (anonymization is on by default)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sentimon", description="Classical sentiment classification and trend service.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("train", help="train a model and write an artifact")
    p.add_argument("--dataset", required=True)
    p.add_argument("--model", required=True, help="artifact path to write")
    p.add_argument("--kind", choices=KINDS, default=LOGISTIC)
    p.add_argument("--split", choices=("train", "all"), default="train",
                   help="train on the train part of the split, or on every row")
    _add_split_flags(p)
    _add_train_flags(p)
    _add_preprocess_flags(p)

    p = sub.add_parser("grid-search", help="cross-validate C over a grid")
    p.add_argument("--dataset", required=True)
    p.add_argument("--kind", choices=(LOGISTIC, SVM), default=LOGISTIC)
    p.add_argument("--grid", type=_grid, default=list(DEFAULT_GRID))
    p.add_argument("--folds", type=int, default=DEFAULT_FOLDS)
    p.add_argument("--model", help="also train on the full train part with the best C and save here")
    p.add_argument("--format", choices=("plain-table", "csv", "json-lines"), default="plain-table")
    _add_split_flags(p)
    _add_train_flags(p)
    _add_preprocess_flags(p)

    p = sub.add_parser("evaluate", help="score a model on a labeled CSV")
    p.add_argument("--dataset", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--format", choices=FORMATS, default="plain-table")
    p.add_argument("--split", choices=("all", "test", "train"), default="all",
                   help="which part of the seeded split to score (default: every row)")
    p.add_argument("--output", help="write the report here instead of stdout")
    _add_split_flags(p)

    p = sub.add_parser("predict", help="label text lines")
    p.add_argument("--model", help="artifact to load (local mode)")
    p.add_argument("--url", help="base URL of a running service (client mode)")
    p.add_argument("--text", help="classify this text instead of reading lines")
    p.add_argument("--input", help="file of lines (default: stdin)")
    p.add_argument("--scores", action="store_true", help="append per-class scores")

    p = sub.add_parser("stream", help="classify NDJSON records and aggregate trends")
    p.add_argument("--model", required=True)
    p.add_argument("--input", help="NDJSON file (default: stdin)")
    p.add_argument("--output", help="classified NDJSON (default: stdout)")
    p.add_argument("--dead-letter", help="dead-letter NDJSON (default: stderr)")
    p.add_argument("--trend", help="write the final trend series as JSON here")
    _add_window_flags(p)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--model", required=True)
    p.add_argument("--bind", type=_address, default=("127.0.0.1", 8000), help="HOST:PORT for HTTP")
    p.add_argument("--ingest-bind", type=_address, help="HOST:PORT for an NDJSON TCP listener")
    _add_window_flags(p)

    p = sub.add_parser("reproduce", help="train and score every classical model on one split")
    p.add_argument("--dataset", required=True)
    p.add_argument("--format", choices=FORMATS, default="plain-table")
    _add_split_flags(p)
    _add_preprocess_flags(p)
    return parser


def _preprocess_config(args) -> PreprocessConfig:
    return PreprocessConfig(lowercase=not args.no_lowercase, strip_stopwords=not args.no_stopwords)


def _train_config(args) -> TrainConfig:
    return TrainConfig(c_value=args.c_value, alpha=args.alpha, max_epochs=args.max_epochs,
                       tolerance=args.tolerance, seed=args.seed)


def _validate(args) -> None:
    if hasattr(args, "ratio") and not 0.0 < args.ratio < 1.0:
        raise UsageError("--ratio must be strictly between 0 and 1")
    if getattr(args, "seed", 0) < 0:
        raise UsageError("--seed must be non-negative")
    if getattr(args, "max_features", 1) < 1:
        raise UsageError("--max-features must be >= 1")
    if getattr(args, "c_value", 1.0) <= 0 or getattr(args, "alpha", 1.0) <= 0:
        raise UsageError("--c and --alpha must be positive")
    if getattr(args, "max_epochs", None) is not None and args.max_epochs < 1:
        raise UsageError("--max-epochs must be >= 1")
    if getattr(args, "tolerance", 1.0) <= 0:
        raise UsageError("--tolerance must be positive")
    if getattr(args, "folds", 2) < 2:
        raise UsageError("--folds must be >= 2")
    if getattr(args, "bucket_seconds", 1) < 1 or getattr(args, "retained_buckets", 1) < 1:
        raise UsageError("--bucket-seconds and --retained-buckets must be >= 1")
    if args.command == "predict":
        if bool(args.model) == bool(args.url):
            raise UsageError("predict needs exactly one of --model or --url")
        if args.text is not None and args.input:
            raise UsageError("--text and --input are mutually exclusive")
    for name in ("dataset", "model", "input"):
        path = getattr(args, name, None)
        must_exist = name != "model" or args.command not in ("train", "grid-search")
        if path and must_exist and path != "-" and not os.path.isfile(path):
            raise UsageError(f"--{name} {path!r} does not exist")


def _resolved(args) -> str:
    shown = {k: v for k, v in vars(args).items() if k != "verbose"}
    return json.dumps(shown, default=str, sort_keys=True)


def _created_stamp(dataset: str) -> int:
    if "SOURCE_DATE_EPOCH" in os.environ:
        return int(os.environ["SOURCE_DATE_EPOCH"])
    return int(os.stat(dataset).st_mtime)


def _out(path):
    return open(path, "wb") if path and path != "-" else sys.stdout.buffer


# -- subcommands -----------------------------------------------------------

def cmd_train(args) -> int:
    docs = load_csv(args.dataset)
    if args.split == "train":
        docs = split(docs, args.ratio, args.seed).train
    bundle, summary = train_bundle(docs, args.kind, _train_config(args), _preprocess_config(args),
                                   args.max_features, args.nb_weighting)
    version = save_model(bundle, args.model, created=_created_stamp(args.dataset))
    out = asdict(summary)
    out["model_version"] = version
    out["artifact"] = args.model
    print(json.dumps(out, sort_keys=True))
    return 0


def cmd_grid_search(args) -> int:
    from .features import fit_tfidf, to_csr, transform_corpus
    from .preprocess import preprocess_text

    docs = split(load_csv(args.dataset), args.ratio, args.seed).train
    pre = _preprocess_config(args)
    tokens = [preprocess_text(d.text, pre) for d in docs]
    tfidf = fit_tfidf(tokens, args.max_features)
    X = to_csr(transform_corpus(tokens, tfidf), tfidf.dim)
    config = _train_config(args)
    result = grid_search(args.kind, X, [d.label for d in docs], args.grid, args.folds, args.seed, config)
    rows = [{"c": r.c_value, "mean_f1_weighted": r.mean, "std_f1_weighted": r.std,
             "best": r.c_value == result.best_c} for r in result.cv_table]
    sink = sys.stdout
    if args.format == "json-lines":
        for row in rows:
            sink.write(json.dumps(row, sort_keys=True) + "\n")
    elif args.format == "csv":
        sink.write("c,mean_f1_weighted,std_f1_weighted,best\n")
        for row in rows:
            sink.write(f"{row['c']!r},{row['mean_f1_weighted']!r},{row['std_f1_weighted']!r},{int(row['best'])}\n")
    else:
        sink.write(f"{args.kind}: {args.folds}-fold stratified CV, weighted F1\n")
        sink.write(f"{'C':>10}{'mean':>10}{'std':>10}\n")
        for row in rows:
            mark = "  *" if row["best"] else ""
            sink.write(f"{row['c']:>10g}{row['mean_f1_weighted']:>10.4f}{row['std_f1_weighted']:>10.4f}{mark}\n")
    if args.model:
        from dataclasses import replace

        bundle, _ = train_bundle(docs, args.kind, replace(config, c_value=result.best_c), pre,
                                 args.max_features)
        save_model(bundle, args.model, created=_created_stamp(args.dataset))
    return 0


def cmd_evaluate(args) -> int:
    bundle = load_model(args.model)
    docs = load_csv(args.dataset)
    if args.split != "all":
        parts = split(docs, args.ratio, args.seed)
        docs = parts.test if args.split == "test" else parts.train
    result = evaluate(bundle, docs, model=bundle.kind)
    sink = _out(args.output)
    sink.write(render_report(result, args.format))
    sink.flush()
    return 0


def _input_lines(args):
    if args.text is not None:
        return iter([args.text])
    if args.input and args.input != "-":
        fh = open(args.input, encoding="utf-8", errors="replace", newline="")
    else:
        fh = sys.stdin
    return (line.rstrip("\r\n") for line in fh)


def _format_prediction(label: str, scores, with_scores: bool) -> str:
    if not with_scores:
        return label
    return label + "\t" + "\t".join("nan" if s is None else repr(s) for s in scores)


def cmd_predict(args) -> int:
    lines = _input_lines(args)
    out = sys.stdout
    if args.url:
        import httpx

        with httpx.Client(base_url=args.url, timeout=30.0) as client:
            for n, text in enumerate(lines):
                resp = client.post("/classify", json={"id": f"line-{n + 1}", "text": text})
                if resp.status_code != 200:
                    raise SentimonError(f"service answered {resp.status_code}: {resp.text}")
                body = resp.json()
                out.write(_format_prediction(body["label"], body["scores"], args.scores) + "\n")
        return 0
    bundle = load_model(args.model)
    while True:
        chunk = list(itertools.islice(lines, PREDICT_CHUNK))
        if not chunk:
            break
        for p in bundle.predict_texts(chunk):
            out.write(_format_prediction(p.label.name_lower, p.scores, args.scores) + "\n")
        out.flush()
    return 0


def _service(args, **kwargs):
    from .service import StreamService

    bundle = load_model(args.model)
    return StreamService(bundle, anonymize=not args.no_anonymize, bucket_seconds=args.bucket_seconds,
                         retained_buckets=args.retained_buckets, **kwargs)


def cmd_stream(args) -> int:
    from .service import DeadLetter

    dead_sink = open(args.dead_letter, "w", encoding="utf-8") if args.dead_letter else sys.stderr
    out = open(args.output, "w", encoding="utf-8") if args.output and args.output != "-" else sys.stdout
    service = _service(args)
    src = (open(args.input, encoding="utf-8", errors="replace")
           if args.input and args.input != "-" else sys.stdin)
    for result in service.ingest_lines(src):
        target = dead_sink if isinstance(result, DeadLetter) else out
        target.write(json.dumps(result.to_json()) + "\n")
    out.flush()
    dead_sink.flush()
    if args.trend:
        # start at the oldest populated bucket rather than the edge of retention
        first = min(service.window.counts, default=None)
        series = [{"bucket_start": b, "negative": n, "neutral": u, "positive": p}
                  for b, n, u, p in (service.trend(from_ts=first) if first is not None else [])]
        with open(args.trend, "w", encoding="utf-8") as fh:
            json.dump({"bucket_seconds": args.bucket_seconds, "series": series}, fh)
    log.info("counters: %s", json.dumps(service.health(), sort_keys=True))
    return 0


def _check_bindable(address) -> None:
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as s:
        s.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            s.bind(address)
        except OSError as exc:
            raise SentimonError(f"cannot bind {address[0]}:{address[1]}: {exc}") from exc


def cmd_serve(args) -> int:
    import uvicorn

    from .service.api import create_app
    from .service.tcp import NdjsonTcpServer

    _check_bindable(args.bind)
    service = _service(args)
    tcp = None
    if args.ingest_bind:
        try:
            tcp = NdjsonTcpServer(args.ingest_bind, service)
        except OSError as exc:
            raise SentimonError(f"cannot bind ingest listener {args.ingest_bind}: {exc}") from exc
        tcp.start_background()
        log.info("NDJSON listener on %s:%d", *tcp.server_address[:2])
    host, port = args.bind
    log.info("serving model %s on http://%s:%d", service.model_version, host, port)
    try:
        uvicorn.run(create_app(service), host=host, port=port, log_level="info")
    finally:
        if tcp is not None:
            tcp.shutdown()
            tcp.server_close()
        log.info("final counters: %s", json.dumps(service.health(), sort_keys=True))
    return 0


def cmd_reproduce(args) -> int:
    from .experiment import run_benchmark

    docs = load_csv(args.dataset)
    bench = run_benchmark(docs, args.ratio, args.seed, preprocess=_preprocess_config(args),
                          max_features=args.max_features)
    log.info("train=%d test=%d total %.1fs", bench.n_train, bench.n_test, bench.seconds)
    sys.stdout.buffer.write(render_report([(r.confusion, r.report) for r in bench.runs], args.format))
    return 0


COMMANDS = {
    "train": cmd_train,
    "grid-search": cmd_grid_search,
    "evaluate": cmd_evaluate,
    "predict": cmd_predict,
    "stream": cmd_stream,
    "serve": cmd_serve,
    "reproduce": cmd_reproduce,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        _validate(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"sentimon: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    log.info("config: %s", _resolved(args))
    try:
        return COMMANDS[args.command](args)
    except (SentimonError, OSError) as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_RUNTIME
    except KeyboardInterrupt:
        return 0


if __name__ == "__main__":
    sys.exit(main())
