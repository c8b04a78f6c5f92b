"""Command-line pipeline: ingest, corpus, train, query, stats, tsne.

Every subcommand that writes an artifact also writes a JSON manifest
beside it (input/output checksums, resolved flags, the exact argv), and
`chessvec rerun <manifest>` replays that invocation.  Exit codes:
0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from multiprocessing import Pool

from . import __version__
from .corpus import RECIPES, build_corpus
from .core import GameRecord, game_to_store_line, parse_pgn
from .embedder import Hyperparams, load_model, save_model, train
from .errors import ChessvecError
from .projector import INITS, TsneConfig, render, tsne
from .queries import (analogy, cosine, destination_stats, extreme_pairs,
                      most_similar, odd_one_out)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(anchor, subcommand, args, inputs, outputs, argv, extra=None):
    manifest = {
        "tool": "chessvec",
        "version": __version__,
        "subcommand": subcommand,
        "argv": list(argv),
        "args": {k: v for k, v in sorted(vars(args).items()) if k != "func"},
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": {str(p): _sha256(p) for p in outputs},
    }
    if extra:
        manifest.update(extra)
    path = f"{anchor}.manifest.json"
    with open(path, "w", encoding="utf-8", newline="\n") as out:
        json.dump(manifest, out, indent=2, sort_keys=True)
        out.write("\n")
    return path


def _ingest_file(path):
    lines, errors, skipped = [], [], 0
    with open(path, "rb") as handle:
        reader = parse_pgn(handle)
        for item in reader:
            if isinstance(item, GameRecord):
                lines.append(game_to_store_line(item))
            else:
                errors.append(f"{path}: game {item.game_index} at byte {item.offset}: {item}")
        skipped = reader.empty_skipped
    return lines, errors, skipped


def _cmd_ingest(args, argv):
    all_lines = []
    all_errors = []
    skipped = 0
    if args.jobs > 1 and len(args.pgn) > 1:
        with Pool(min(args.jobs, len(args.pgn))) as pool:
            results = pool.map(_ingest_file, args.pgn)
    else:
        results = [_ingest_file(p) for p in args.pgn]
    for lines, errors, empty in results:
        all_lines.extend(lines)
        all_errors.extend(errors)
        skipped += empty
    for line in all_errors:
        print(f"chessvec: skipped {line}", file=sys.stderr)
    with open(args.out, "w", encoding="utf-8", newline="\n") as out:
        for line in all_lines:
            out.write(line + "\n")
    print(f"ingested {len(all_lines)} games "
          f"({skipped} empty skipped, {len(all_errors)} invalid skipped) -> {args.out}")
    _write_manifest(args.out, "ingest", args, args.pgn, [args.out], argv)
    return 0


def _cmd_corpus(args, argv):
    recipe = RECIPES[args.recipe]
    stats = build_corpus(args.store, recipe, args.out, jobs=args.jobs)
    print(f"{args.recipe}: {stats.games_used}/{stats.games_in} games "
          f"({stats.games_skipped} skipped), {stats.sentences} sentences, "
          f"{stats.tokens} tokens, {stats.distinct_tokens} distinct -> {args.out}")
    _write_manifest(args.out, "corpus", args, [args.store], [args.out], argv)
    return 0


def _cmd_train(args, argv):
    hp = Hyperparams(
        dim=args.dim, window=args.window, negatives=args.negatives,
        epochs=args.epochs, initial_lr=args.lr, min_count=args.min_count,
        subsample_t=args.subsample, seed=args.seed,
        mode="parallel" if args.parallel else "deterministic",
        dynamic_window=not args.fixed_window,
    )
    def progress(epoch, loss):
        print(f"epoch {epoch}/{hp.epochs}: mean loss {loss:.6f}", file=sys.stderr)
    model = train(args.corpus, hp, jobs=args.jobs, progress=progress)
    save_model(model, args.out)
    print(f"trained {len(model.vocab)} tokens x dim {hp.dim} -> {args.out}")
    _write_manifest(args.out, "train", args, [args.corpus], [args.out], argv)
    return 0


def _print_neighbors(rows, csv: bool):
    if csv:
        print("token,similarity")
        for row in rows:
            print(f"{row.token},{row.similarity:.6f}")
    else:
        width = max((len(r.token) for r in rows), default=0)
        for row in rows:
            print(f"{row.token:<{width}}  {row.similarity:.6f}")


def _cmd_query(args, argv):
    model = load_model(args.model)
    if args.query == "similar":
        _print_neighbors(most_similar(model, args.token, args.k), args.csv)
    elif args.query == "distance":
        print(f"{cosine(model, args.a, args.b):.6f}")
    elif args.query == "analogy":
        rows = analogy(model, args.positive, args.negative or [], args.k)
        _print_neighbors(rows, args.csv)
    else:
        print(odd_one_out(model, args.tokens))
    return 0


def _cmd_stats(args, argv):
    model = load_model(args.model)
    if args.stat == "dest":
        rows = destination_stats(model, thresholds=args.thresholds, k=args.k)
        if args.csv:
            print("n,count,percent")
            for row in rows:
                print(f"{row.n},{row.count},{row.percent:.2f}")
        else:
            for row in rows:
                print(f">= {row.n:>2} qualifying: {row.count:>8}  ({row.percent:.2f}%)")
    else:
        top, bottom = extreme_pairs(model, k=args.k, min_count=args.min_count)
        if args.csv:
            print("kind,a,b,similarity")
            for kind, rows in (("top", top), ("bottom", bottom)):
                for pair in rows:
                    print(f"{kind},{pair.a},{pair.b},{pair.similarity:.6f}")
        else:
            print("most similar:")
            for pair in top:
                print(f"  {pair.a} {pair.b}  {pair.similarity:.6f}")
            print("least similar:")
            for pair in bottom:
                print(f"  {pair.a} {pair.b}  {pair.similarity:.6f}")
    return 0


def _cmd_tsne(args, argv):
    model = load_model(args.model)
    config = TsneConfig(
        perplexity=args.perplexity, iterations=args.iters, seed=args.seed,
        init=args.init, learning_rate=args.learning_rate,
        early_exaggeration_factor=args.exaggeration,
        early_exaggeration_duration=args.exaggeration_iters,
    )
    projection = tsne(model, config)
    svg, csv_text = render(projection, label_every=args.label_every,
                           point_size=args.point_size)
    outputs = []
    if args.out_svg:
        with open(args.out_svg, "w", encoding="utf-8", newline="\n") as out:
            out.write(svg)
        outputs.append(args.out_svg)
    if args.out_csv:
        with open(args.out_csv, "w", encoding="utf-8", newline="\n") as out:
            out.write(csv_text)
        outputs.append(args.out_csv)
    print(f"tsne: {len(projection.tokens)} points, "
          f"final KL {projection.kl_trace[-1]:.6f}"
          + (f" -> {', '.join(outputs)}" if outputs else ""))
    if outputs:
        _write_manifest(outputs[0], "tsne", args, [args.model], outputs, argv)
    return 0


def _cmd_rerun(args, argv):
    with open(args.manifest, "r", encoding="utf-8") as handle:
        manifest = json.load(handle)
    saved = manifest.get("argv")
    if not saved:
        raise ChessvecError(f"manifest {args.manifest!r} has no argv to rerun")
    print(f"rerun: chessvec {' '.join(saved)}", file=sys.stderr)
    return main(saved)


def _build_parser() -> _Parser:
    parser = _Parser(prog="chessvec",
                     description="Chess games as text: stores, corpora, "
                                 "embeddings, queries, projections.")
    parser.add_argument("--version", action="version", version=f"chessvec {__version__}")
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = subs.add_parser("ingest", help="parse and replay-validate PGN into a game store")
    p.add_argument("pgn", nargs="+", help="PGN files (SAN or long-algebraic movetext)")
    p.add_argument("--out", required=True, help="output store path")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers, one per input file")
    p.set_defaults(func=_cmd_ingest)

    p = subs.add_parser("corpus", help="build a training corpus from a game store")
    p.add_argument("--store", required=True)
    p.add_argument("--recipe", required=True, choices=sorted(RECIPES),
                   metavar="RECIPE", help="one of: " + ", ".join(sorted(RECIPES)))
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_corpus)

    p = subs.add_parser("train", help="train skip-gram embeddings on a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="model file path")
    p.add_argument("--dim", type=int, default=300)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--negatives", type=int, default=5)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--lr", type=float, default=0.025, help="initial learning rate")
    p.add_argument("--min-count", type=int, default=5)
    p.add_argument("--subsample", type=float, default=1e-4,
                   help="frequency subsampling threshold, 0 disables")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--fixed-window", action="store_true",
                   help="use the full window span instead of a sampled radius")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--deterministic", action="store_true", default=True,
                      help="single-worker reproducible training (default)")
    mode.add_argument("--parallel", action="store_true",
                      help="lock-free multi-worker training, not reproducible")
    p.add_argument("--jobs", type=int, default=None, help="workers for --parallel")
    p.set_defaults(func=_cmd_train)

    p = subs.add_parser("query", help="similarity queries against a model")
    qsubs = p.add_subparsers(dest="query", required=True, parser_class=_Parser)
    q = qsubs.add_parser("similar", help="nearest tokens by cosine")
    q.add_argument("token")
    q.add_argument("--model", required=True)
    q.add_argument("-k", type=int, default=10)
    q.add_argument("--csv", action="store_true")
    q.set_defaults(func=_cmd_query)
    q = qsubs.add_parser("distance", help="cosine similarity of two tokens")
    q.add_argument("a")
    q.add_argument("b")
    q.add_argument("--model", required=True)
    q.set_defaults(func=_cmd_query)
    q = qsubs.add_parser("analogy", help="a - b + c vector arithmetic")
    q.add_argument("--model", required=True)
    q.add_argument("--positive", nargs="+", required=True)
    q.add_argument("--negative", nargs="*", default=[])
    q.add_argument("-k", type=int, default=10)
    q.add_argument("--csv", action="store_true")
    q.set_defaults(func=_cmd_query)
    q = qsubs.add_parser("odd", help="odd one out of a token group")
    q.add_argument("tokens", nargs="+")
    q.add_argument("--model", required=True)
    q.set_defaults(func=_cmd_query)

    p = subs.add_parser("stats", help="model-wide statistics")
    ssubs = p.add_subparsers(dest="stat", required=True, parser_class=_Parser)
    s = ssubs.add_parser("dest", help="same-destination quasi-synonym counts")
    s.add_argument("--model", required=True)
    s.add_argument("--thresholds", type=int, nargs="+", default=[3, 4, 5, 6, 7])
    s.add_argument("-k", type=int, default=10, help="neighborhood size")
    s.add_argument("--csv", action="store_true")
    s.set_defaults(func=_cmd_stats)
    s = ssubs.add_parser("pairs", help="most and least similar token pairs")
    s.add_argument("--model", required=True)
    s.add_argument("-k", type=int, default=10)
    s.add_argument("--min-count", type=int, default=5)
    s.add_argument("--csv", action="store_true")
    s.set_defaults(func=_cmd_stats)

    p = subs.add_parser("tsne", help="project a model to 2D and render SVG/CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--perplexity", type=float, default=30.0)
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--init", choices=INITS, default="random_gaussian")
    p.add_argument("--learning-rate", type=float, default=None)
    p.add_argument("--exaggeration", type=float, default=12.0)
    p.add_argument("--exaggeration-iters", type=int, default=250)
    p.add_argument("--label-every", type=int, default=3)
    p.add_argument("--point-size", type=float, default=4.0)
    p.add_argument("--out-svg")
    p.add_argument("--out-csv")
    p.set_defaults(func=_cmd_tsne)

    p = subs.add_parser("rerun", help="replay a manifest's invocation")
    p.add_argument("manifest")
    p.set_defaults(func=_cmd_rerun)
    return parser


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, argv)
    except ChessvecError as exc:
        print(f"chessvec: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"chessvec: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"chessvec: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
