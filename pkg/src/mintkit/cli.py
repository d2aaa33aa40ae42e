"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import logging
import statistics
import sys
from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path

from . import __version__
from .corpus import (MEAN_ID, SCORE_HEADER, TRADEOFF_HEADER, CorpusRecord, DataError,
                     read_csv, read_records, write_csv, write_jsonl)
from .lm import NgramModel, synthetic_corpus, train
from .mint import MintReport, mean_report, mint_score
from .nac import DecodeError, Mode, NacConfig, beam_decode
from .text import TokenizerConfig, tokenize
from .tradeoff import (DEFAULT_PHI, DegenerateSeriesError, TradeoffPoint, f_at, fit_trend,
                       mu_score)

log = logging.getLogger("mintkit")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

SCORE_COLUMNS = ["id"] + MintReport.field_names() + ["factuality", "error"]
TRADEOFF_COLUMNS = ["kind", "series", "label", "abstractiveness", "factuality", "mu",
                    "slope", "intercept", "r_squared", "n_points", "at", "f_at", "error"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _map(fn, items, workers: int, initializer=None, initargs=()):
    """Order-preserving map, in-process for a single worker."""
    if workers <= 1:
        if initializer:
            initializer(*initargs)
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers, initializer=initializer, initargs=initargs) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def _source_seq(rec: CorpusRecord, tok_cfg: TokenizerConfig, max_words: int | None):
    x = tokenize(list(rec.source), tok_cfg)
    if max_words is not None:
        x = x.truncate(max_words)
    return x


# score

def _score_one(rec: CorpusRecord, tok_cfg: TokenizerConfig, max_words: int | None) -> dict:
    row = {"id": rec.id, "factuality": rec.factuality}
    if rec.summary is None:
        row["error"] = "missing summary"
        return row
    y = tokenize(rec.summary, tok_cfg)
    if len(y) == 0:
        row["error"] = "empty summary"
        return row
    row.update(mint_score(_source_seq(rec, tok_cfg, max_words), y).as_dict())
    return row


def cmd_score(args) -> int:
    records = read_records(args.input)
    tok_cfg = _tok_config(args)
    rows = _map(partial(_score_one, tok_cfg=tok_cfg, max_words=args.max_input_words),
                records, args.workers)
    good = [r for r in rows if not r.get("error")]
    if good:
        mean = mean_report([MintReport(*(r[k] for k in MintReport.field_names())) for r in good])
        facts = [r["factuality"] for r in good if r["factuality"] is not None]
        agg = {"id": MEAN_ID, **mean.as_dict(),
               "factuality": statistics.fmean(facts) if facts else None}
    else:
        agg = {"id": MEAN_ID, "error": "no scorable records"}
    write_csv(args.output, SCORE_HEADER, SCORE_COLUMNS, rows + [agg])
    n_err = len(rows) - len(good)
    if n_err:
        log.error("%d of %d records could not be scored", n_err, len(rows))
        return EXIT_DATA
    return EXIT_OK


# decode

_WORKER_MODEL: NgramModel | None = None


def _init_decoder(model_path: str, copy_alpha: float | None):
    global _WORKER_MODEL
    model = NgramModel.load(model_path)
    if copy_alpha is not None:
        model = model.with_copy_alpha(copy_alpha)
    _WORKER_MODEL = model


def _decode_one(job, tok_cfg, max_words) -> dict:
    rec, config = job
    row = {"id": rec.id, "mode": config.mode.value,
           "h": None if config.mode is Mode.OFF else config.h}
    x = _source_seq(rec, tok_cfg, max_words)
    try:
        res = beam_decode(_WORKER_MODEL, x, config)
    except DecodeError as e:
        row["error"] = str(e)
        return row
    row.update(summary=" ".join(res.tokens), model_logprob=res.model_logprob,
               nac_logdiscount=res.nac_logdiscount,
               mint=mint_score(x, res.tokens).mint if len(res.tokens) else None)
    return row


def nac_configs(args) -> list[NacConfig]:
    mode = Mode(args.mode)
    hs = [None] if mode is Mode.OFF else (args.h or [2.0])
    return [
        NacConfig(mode=mode, h=h or 1.0, exponent=args.exponent, beam_size=args.beam_size,
                  min_len=args.min_len, max_len=args.max_len, length_norm=args.length_norm)
        for h in hs
    ]


def cmd_decode(args) -> int:
    records = read_records(args.input)
    try:
        configs = nac_configs(args)
    except ValueError as e:
        raise UsageError(str(e)) from None
    try:
        _init_decoder(args.model, args.copy_alpha)
    except (OSError, ValueError, KeyError) as e:
        raise DataError(f"cannot load model {args.model}: {e}") from None
    jobs = [(rec, cfg) for rec in records for cfg in configs]
    rows = _map(partial(_decode_one, tok_cfg=_tok_config(args), max_words=args.max_input_words),
                jobs, args.workers, initializer=_init_decoder, initargs=(args.model, args.copy_alpha))
    write_jsonl(args.output, rows)
    return EXIT_DATA if any(r.get("error") for r in rows) else EXIT_OK


# tradeoff

def _points_from_csv(path) -> "OrderedDict[str, list[TradeoffPoint]]":
    _, rows = read_csv(path)
    series: OrderedDict[str, list[TradeoffPoint]] = OrderedDict()
    for i, row in enumerate(rows, 1):
        try:
            pt = TradeoffPoint(row.get("label") or str(i), float(row["abstractiveness"]),
                               float(row["factuality"]))
        except (KeyError, TypeError, ValueError) as e:
            raise DataError(f"{path}: row {i}: {e}") from None
        series.setdefault(row.get("series") or "default", []).append(pt)
    return series


def _points_from_scores(paths, series_name: str, per_record: bool):
    pts = []
    for path in paths:
        tag, rows = read_csv(path)
        if tag != SCORE_HEADER:
            raise DataError(f"{path}: not a mintkit score file")
        for row in rows:
            if row["error"] or (row["id"] == MEAN_ID) == per_record:
                continue
            if not row["factuality"]:
                raise DataError(f"{path}: record {row['id']} has no factuality value")
            label = row["id"] if per_record else Path(path).stem
            pts.append(TradeoffPoint(label, 100.0 * float(row["mint"]), float(row["factuality"])))
    return OrderedDict([(series_name, pts)])


def tradeoff_rows(series, phi: float = DEFAULT_PHI, at: float = 50.0):
    """Report rows: one per point with its mu-score, then one trend row per series."""
    rows = []
    fits = {}
    for name, pts in series.items():
        for p in pts:
            rows.append({"kind": "point", "series": name, "label": p.label,
                         "abstractiveness": p.abstractiveness, "factuality": p.factuality,
                         "mu": mu_score(p.factuality, p.abstractiveness, phi)})
    for name, pts in series.items():
        row = {"kind": "trend", "series": name, "n_points": len(pts), "at": at}
        try:
            fit = fit_trend(pts)
        except DegenerateSeriesError as e:
            row["error"] = str(e)
        else:
            fits[name] = fit
            row.update(slope=fit.slope, intercept=fit.intercept, r_squared=fit.r_squared,
                       f_at=f_at(fit, at))
        rows.append(row)
    return rows, fits


def write_svg(path, series, fits) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "mintkit"
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for i, (name, pts) in enumerate(series.items()):
        color = f"C{i % 10}"
        ax.scatter([p.abstractiveness for p in pts], [p.factuality for p in pts],
                   color=color, label=name)
        if name in fits:
            fit = fits[name]
            ax.plot([0, 100], [f_at(fit, 0), f_at(fit, 100)], color=color, linestyle="--", linewidth=1)
    ax.set_xlim(0, 100)
    ax.set_ylim(0, 100)
    ax.set_xlabel("abstractiveness (MINT)")
    ax.set_ylabel("factuality")
    ax.legend(loc="lower left")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def cmd_tradeoff(args) -> int:
    if bool(args.points) == bool(args.scores):
        raise UsageError("give exactly one of --points or --scores")
    if not args.phi > 0:
        raise UsageError("--phi must be positive")
    if args.points:
        series = _points_from_csv(args.points)
    else:
        series = _points_from_scores(args.scores, args.series, args.per_record)
    rows, fits = tradeoff_rows(series, args.phi, args.at)
    write_csv(args.output, TRADEOFF_HEADER, TRADEOFF_COLUMNS, rows)
    if args.svg:
        write_svg(args.svg, series, fits)
    return EXIT_DATA if any(r.get("error") for r in rows) else EXIT_OK


# train / toy-corpus

def cmd_train(args) -> int:
    records = read_records(args.input)
    tok_cfg = _tok_config(args)
    corpus = []
    for rec in records:
        corpus.extend(tokenize(list(rec.source), tok_cfg).documents())
        if args.include_summaries and rec.summary:
            corpus.append(tokenize(rec.summary, tok_cfg).tokens)
    try:
        model = train(corpus, order=args.order, delta=args.delta, copy_alpha=args.copy_alpha or 0.0)
    except ValueError as e:
        raise DataError(str(e)) from None
    model.save(args.output)
    return EXIT_OK


def cmd_toy_corpus(args) -> int:
    docs = synthetic_corpus(args.n_docs, seed=args.seed)
    write_jsonl(args.output, ({"id": f"toy-{i:03d}", "source": " ".join(d)} for i, d in enumerate(docs)))
    return EXIT_OK


def _tok_config(args) -> TokenizerConfig:
    return TokenizerConfig(lowercase=not args.keep_case, keep_punct=not args.drop_punct)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mintkit", description="Abstractiveness scoring, constrained decoding and tradeoff reports.")
    p.add_argument("--version", action="version", version=f"mintkit {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def tok_opts(sp):
        sp.add_argument("--keep-case", action="store_true", help="do not lowercase tokens")
        sp.add_argument("--drop-punct", action="store_true", help="discard punctuation tokens")
        sp.add_argument("--max-input-words", type=int, default=None,
                        help="truncate each (multi-document) source to N words")
        sp.add_argument("--workers", type=int, default=1)

    sp = sub.add_parser("score", help="MINT report for every (source, summary) record")
    sp.add_argument("input", help="JSON-lines corpus")
    sp.add_argument("-o", "--output", required=True, help="CSV report")
    tok_opts(sp)
    sp.set_defaults(func=cmd_score)

    sp = sub.add_parser("decode", help="beam decoding with abstractiveness constraints")
    sp.add_argument("input")
    sp.add_argument("--model", required=True, help="model file written by 'mintkit train'")
    sp.add_argument("-o", "--output", required=True, help="JSON-lines output")
    sp.add_argument("--mode", choices=[m.value for m in Mode], default="penalty")
    sp.add_argument("--h", type=float, action="append", help="half-life; repeat for several decodes")
    sp.add_argument("--exponent", type=float, default=2.0)
    sp.add_argument("--beam-size", type=int, default=4)
    sp.add_argument("--min-len", type=int, default=10)
    sp.add_argument("--max-len", type=int, default=60)
    sp.add_argument("--length-norm", type=float, default=None)
    sp.add_argument("--copy-alpha", type=float, default=None, help="override the model's copy weight")
    tok_opts(sp)
    sp.set_defaults(func=cmd_decode)

    sp = sub.add_parser("tradeoff", help="trend lines, F@50 and mu-scores")
    sp.add_argument("--points", help="CSV with series,label,abstractiveness,factuality")
    sp.add_argument("--scores", nargs="+", help="score CSVs; each contributes its mean row")
    sp.add_argument("--series", default="scores", help="series name for --scores input")
    sp.add_argument("--per-record", action="store_true", help="use record rows instead of mean rows")
    sp.add_argument("--phi", type=float, default=DEFAULT_PHI)
    sp.add_argument("--at", type=float, default=50.0, help="abstractiveness for the F@ estimate")
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--svg", help="also write a scatter plot with trend lines")
    sp.set_defaults(func=cmd_tradeoff)

    sp = sub.add_parser("train", help="train the n-gram scoring model on corpus sources")
    sp.add_argument("input")
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--order", type=int, default=2)
    sp.add_argument("--delta", type=float, default=0.1)
    sp.add_argument("--copy-alpha", type=float, default=0.2)
    sp.add_argument("--include-summaries", action="store_true")
    sp.add_argument("--keep-case", action="store_true")
    sp.add_argument("--drop-punct", action="store_true")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("toy-corpus", help="write a synthetic corpus for desk-scale experiments")
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--n-docs", type=int, default=60)
    sp.add_argument("--seed", type=int, default=13)
    sp.set_defaults(func=cmd_toy_corpus)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if getattr(args, "workers", 1) < 1:
        log.error("--workers must be >= 1")
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as e:
        log.error("%s", e)
        return EXIT_USAGE
    except DataError as e:
        log.error("%s", e)
        return EXIT_DATA
    except OSError as e:
        log.error("%s", e)
        return EXIT_DATA
    except Exception:
        log.exception("internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
