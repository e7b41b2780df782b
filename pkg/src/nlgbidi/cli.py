"""Command-line entry point: ``nlgbidi <subcommand> ...``.

Exit codes: 0 success, 1 record-level failures present, 2 usage error,
3 I/O or schema error.  Every run prints a one-line JSON summary on stderr.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Sequence

from . import stats as st
from .compress import CompressedDoc, compress, decompress, savings_report
from .config import load_config
from .diagnostics import classify_mismatches, detect_repetition
from .errors import IoFailure, MalformedTriple, NlgBidiError, SchemaViolation, SplitCountMismatch
from .metrics import align_and_edit, bleu4, rouge_l, set_f1
from .model import TripleSet
from .pipeline import (
    ingest_synthetic,
    inject_synthetic,
    interleave,
    load_corpus,
    read_jsonl,
    record_from_json,
)
from .serde import TaskExample, TaskTag, parse_triples, serialize_triples, task_examples

EXIT_OK, EXIT_FAILURES, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

SCORE_COLUMNS = ["record_id", "task", "f1", "tp", "fp", "fn", "edit_total", "bleu4", "rouge_l"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


@contextlib.contextmanager
def _output(path: str | None):
    if not path or path == "-":
        yield sys.stdout
        return
    try:
        handle = open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    with handle:
        yield handle


def _summary(command: str, **fields) -> None:
    print(json.dumps({"command": command, **fields}, sort_keys=False), file=sys.stderr)


def _dump(handle, obj: dict) -> None:
    handle.write(json.dumps(obj, ensure_ascii=False) + "\n")


# -- subcommands ----------------------------------------------------------------


def cmd_stats(args) -> int:
    corpus = load_corpus(args.corpus, tuple(args.expect) if args.expect else None)
    if args.split:
        corpus = corpus.split(args.split)
    columns = {
        "sentence": st.length_stats(corpus, "reference_text", args.unit, args.sample_std),
        "rdf": st.length_stats(corpus, "serialized_rdf", "record", args.sample_std),
    }
    shape = st.record_shape_stats(corpus, args.sample_std)
    rows = st.stats_table(columns)
    with _output(args.out) as out:
        if args.format == "json":
            _dump(out, {
                "lengths": {k: v.__dict__ for k, v in columns.items()},
                "shape": shape.__dict__,
                "split_counts": corpus.split_counts(),
            })
        elif args.format == "csv":
            out.write(st.render_csv(rows))
        else:
            out.write(st.render_text(rows))
    if args.relations:
        with _output(args.relations) as out:
            out.write(st.render_csv(st.relation_rows(st.relation_frequency(corpus))))
    _summary("stats", records=len(corpus), **corpus.split_counts(), **shape.__dict__)
    return EXIT_OK


def _lint_record(number: int, obj) -> tuple[list[dict], dict | None]:
    """Findings for one corpus line and, when fixable, its cleaned JSON."""
    findings = []
    try:
        record = record_from_json(obj, number)
    except MalformedTriple as exc:
        return [{"line": number, "kind": "malformed_triple", "message": str(exc)}], None
    except SchemaViolation as exc:
        return [{"line": number, "kind": "schema", "field": exc.field, "message": str(exc)}], None
    raw_text = json.dumps(obj.get("triples"), ensure_ascii=False) + json.dumps(obj.get("references"), ensure_ascii=False)
    if not raw_text.isascii():
        findings.append({"line": number, "kind": "non_ascii", "fixable": True,
                         "message": "non-ASCII characters before folding"})
    return findings, record.to_json(canonical=True)


def cmd_lint(args) -> int:
    findings = []
    cleaned = []
    for number, obj in read_jsonl(args.corpus):
        found, fixed = _lint_record(number, obj)
        findings.extend(found)
        if fixed is not None:
            cleaned.append(fixed)
    unfixable = [f for f in findings if not f.get("fixable")]
    with _output(args.out) as out:
        for f in findings:
            _dump(out, f)
    if args.fix:
        with _output(args.fix) as out:
            for obj in cleaned:
                _dump(out, obj)
    _summary("lint", findings=len(findings), unfixable=len(unfixable), fixed=bool(args.fix))
    failing = unfixable if args.fix else findings
    return EXIT_FAILURES if failing and not args.lenient else EXIT_OK


def cmd_serialize(args) -> int:
    corpus = load_corpus(args.corpus)
    if args.split:
        corpus = corpus.split(args.split)
    examples = task_examples(corpus, args.task, not args.no_prefix)
    with _output(args.out) as out:
        for ex in examples:
            _dump(out, ex.to_json())
    _summary("serialize", records=len(corpus), examples=len(examples))
    return EXIT_OK


def cmd_parse(args) -> int:
    failures = 0
    lines = 0
    with _open_text(args.input) as src, _output(args.out) as out:
        for number, line in enumerate(src, 1):
            if not line.strip():
                continue
            lines += 1
            try:
                ts = parse_triples(line)
                _dump(out, {"line": number, "triples": [[t.canonical for t in tr.terms] for tr in ts]})
            except NlgBidiError as exc:
                failures += 1
                _dump(out, {"line": number, "error": type(exc).__name__, "message": str(exc)})
    _summary("parse", lines=lines, failures=failures)
    return EXIT_FAILURES if failures and not args.lenient else EXIT_OK


def cmd_compress(args) -> int:
    corpus = load_corpus(args.input)
    chars_before = chars_after = 0
    with _output(args.out) as out:
        for record in corpus:
            doc = compress(record.triples, args.min_occurrences)
            report = savings_report(record.triples)
            chars_before += report.serialized_chars
            chars_after += len(doc.render())
            _dump(out, {"record_id": record.id, "doc": doc.render(),
                        "serialized_chars": report.serialized_chars, "compressed_chars": len(doc.render())})
    _summary("compress", records=len(corpus), serialized_chars=chars_before, compressed_chars=chars_after)
    return EXIT_OK


def cmd_decompress(args) -> int:
    failures = 0
    count = 0
    with _output(args.out) as out:
        for number, obj in read_jsonl(args.input):
            count += 1
            if not isinstance(obj, dict) or "doc" not in obj:
                raise SchemaViolation(number, "doc", "is missing")
            try:
                ts = decompress(CompressedDoc.parse(obj["doc"]))
                _dump(out, {"record_id": obj.get("record_id"), "serialized": serialize_triples(ts)})
            except NlgBidiError as exc:
                failures += 1
                _dump(out, {"record_id": obj.get("record_id"), "error": type(exc).__name__, "message": str(exc)})
    _summary("decompress", docs=count, failures=failures)
    return EXIT_FAILURES if failures and not args.lenient else EXIT_OK


def _read_examples(path) -> list[TaskExample]:
    out = []
    for number, obj in read_jsonl(path):
        try:
            out.append(TaskExample.from_json(obj))
        except (KeyError, ValueError, TypeError) as exc:
            raise SchemaViolation(number, "task example", str(exc)) from None
    return out


def _multitask(records, with_prefix: bool) -> list[TaskExample]:
    return interleave(task_examples(records, TaskTag.D2S, with_prefix),
                      task_examples(records, TaskTag.S2D, with_prefix))


def cmd_interleave(args) -> int:
    if args.synthetic and args.seed is None:
        raise UsageError("--synthetic requires an explicit --seed")
    with_prefix = not args.no_prefix
    if args.corpus:
        corpus = load_corpus(args.corpus)
        if args.split:
            corpus = corpus.split(args.split)
        stream = _multitask(corpus, with_prefix)
    elif args.d2s and args.s2d:
        stream = interleave(_read_examples(args.d2s), _read_examples(args.s2d))
    else:
        raise UsageError("give either --corpus or both --d2s and --s2d")
    synthetic = 0
    if args.synthetic:
        extra = _multitask(load_corpus(args.synthetic), with_prefix)
        synthetic = len(extra)
        stream = inject_synthetic(stream, extra, args.seed)
    with _output(args.out) as out:
        for ex in stream:
            _dump(out, ex.to_json())
    _summary("interleave", examples=len(stream), synthetic=synthetic, seed=args.seed)
    return EXIT_OK


def cmd_ingest(args) -> int:
    envelopes = [obj if isinstance(obj, dict) else {} for _, obj in read_jsonl(args.input)]
    accepted, rejected, report = ingest_synthetic(envelopes, args.first_id)
    with _output(args.out) as out:
        for record in accepted:
            _dump(out, record.to_json(canonical=True))
    if args.rejections:
        with _output(args.rejections) as out:
            for position, reason in rejected:
                _dump(out, {"position": position, "reason": reason.value})
    _summary("ingest-synthetic", **report.to_json())
    return EXIT_FAILURES if rejected and not args.lenient else EXIT_OK


def _load_predictions(path) -> list[tuple[int, str]]:
    preds = []
    for number, obj in read_jsonl(path):
        if not isinstance(obj, dict) or "record_id" not in obj or "prediction" not in obj:
            raise SchemaViolation(number, "record_id/prediction", "is missing")
        if not isinstance(obj["prediction"], str):
            raise SchemaViolation(number, "prediction", "must be text")
        preds.append((int(obj["record_id"]), obj["prediction"]))
    return preds


def _score_one(job) -> dict:
    task, record_id, prediction, gold, references, ascii_fold = job
    row = dict.fromkeys(SCORE_COLUMNS, "")
    row.update(record_id=record_id, task=task)
    if task == "s2d":
        malformed = False
        try:
            pred = parse_triples(prediction)
        except NlgBidiError:
            pred, malformed = TripleSet(), True
        f1 = set_f1(pred, gold)
        edit = align_and_edit(pred, gold)
        row.update(f1=float(f1.f1), tp=f1.tp, fp=f1.fp, fn=f1.fn, edit_total=edit.total)
        row["_malformed"] = malformed
        row["_edit_mean"] = edit.mean_per_record
        row["_f1_exact"] = (f1.f1.numerator, f1.f1.denominator)
    else:
        row.update(bleu4=bleu4(prediction, references, ascii_fold), rouge_l=rouge_l(prediction, references, ascii_fold))
    return row


def _score_jobs(args, corpus, preds):
    for record_id, prediction in preds:
        record = corpus.by_id.get(record_id)
        if record is None:
            raise SchemaViolation(0, "record_id", f"{record_id} not found in gold corpus")
        yield (args.task, record_id, prediction, record.triples,
               tuple(record.references), not args.no_ascii_fold)


def cmd_score(args) -> int:
    corpus = load_corpus(args.gold)
    preds = _load_predictions(args.pred)
    jobs = list(_score_jobs(args, corpus, preds))
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_score_one, jobs, chunksize=64))
    else:
        rows = [_score_one(j) for j in jobs]
    rows.sort(key=lambda r: r["record_id"])

    with _output(args.out) as out:
        writer = csv.DictWriter(out, SCORE_COLUMNS, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)

    n = len(rows)
    summary: dict = {"task": args.task, "records": n}
    failures = 0
    if n and args.task == "s2d":
        f1s = [Fraction(*r["_f1_exact"]) for r in rows]
        failures = sum(r["_malformed"] for r in rows)
        summary.update(
            mean_f1=float(sum(f1s, Fraction(0)) / n),
            zero_f1=sum(1 for f in f1s if f == 0),
            mean_edit_total=sum(r["edit_total"] for r in rows) / n,
            mean_edit_per_triple=sum(r["_edit_mean"] for r in rows) / n,
            malformed=failures,
        )
    elif n:
        summary.update(
            mean_bleu4=sum(r["bleu4"] for r in rows) / n,
            mean_rouge_l=sum(r["rouge_l"] for r in rows) / n,
        )
    if args.summary:
        with _output(args.summary) as out:
            json.dump(summary, out, indent=2)
            out.write("\n")
    _summary("score", **summary)
    return EXIT_FAILURES if failures and not args.lenient else EXIT_OK


def cmd_diagnose(args) -> int:
    config = load_config()
    corpus = load_corpus(args.gold)
    preds = _load_predictions(args.pred)
    counts: dict[str, int] = {}
    with _output(args.out) as out:
        for record_id, prediction in sorted(preds, key=lambda p: p[0]):
            record = corpus.by_id.get(record_id)
            if record is None:
                raise SchemaViolation(0, "record_id", f"{record_id} not found in gold corpus")
            tokens = prediction.split()
            if tokens:
                capped = args.max_length is not None and len(tokens) >= args.max_length
                flag = detect_repetition(tokens, max_period=config.max_period,
                                         min_repeats=config.min_repeats, hit_length_cap=capped)
                if flag.flagged:
                    counts["repetition_loop"] = counts.get("repetition_loop", 0) + 1
                    _dump(out, {"record_id": record_id, "kind": "repetition_loop", "period": flag.period,
                                "repeats": flag.repeats, "start_index": flag.start_index,
                                "hit_length_cap": flag.hit_length_cap})
            if args.task != "s2d":
                continue
            try:
                pred = parse_triples(prediction)
            except NlgBidiError:
                counts["unparseable"] = counts.get("unparseable", 0) + 1
                continue
            for label in classify_mismatches(pred, record.triples, config):
                counts[label.kind] = counts.get(label.kind, 0) + 1
                _dump(out, {"record_id": record_id, **label.to_json()})
    _summary("diagnose", predictions=len(preds), **counts)
    return EXIT_OK


@contextlib.contextmanager
def _open_text(path: str | None):
    if not path or path == "-":
        yield sys.stdin
        return
    try:
        handle = open(path, encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot open {path}: {exc}") from exc
    with handle:
        yield handle


# -- argument parsing -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nlgbidi", description="Bidirectional data-to-text corpus toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help):
        p = sub.add_parser(name, help=help)
        p.set_defaults(func=func)
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--jobs", type=int, default=1, help="worker processes")
        p.add_argument("--lenient", action="store_true", help="exit 0 despite record-level failures")
        return p

    p = add("stats", cmd_stats, "corpus length and shape statistics")
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", choices=["train", "validation", "test"])
    p.add_argument("--format", choices=["text", "csv", "json"], default="text")
    p.add_argument("--unit", choices=["record", "reference"], default="record")
    p.add_argument("--sample-std", action="store_true")
    p.add_argument("--relations", help="write relation frequencies CSV here")
    p.add_argument("--expect", type=int, nargs=3, metavar=("TRAIN", "VALIDATION", "TEST"))

    p = add("lint", cmd_lint, "report records violating the data model")
    p.add_argument("--corpus", required=True)
    p.add_argument("--fix", metavar="PATH", help="write a cleaned copy to PATH")

    p = add("serialize", cmd_serialize, "emit task examples for one task")
    p.add_argument("--corpus", required=True)
    p.add_argument("--task", choices=["d2s", "s2d"], required=True)
    p.add_argument("--split", choices=["train", "validation", "test"])
    p.add_argument("--no-prefix", action="store_true")

    p = add("parse", cmd_parse, "parse flat triple text, one set per line")
    p.add_argument("--in", dest="input", default="-")

    p = add("compress", cmd_compress, "bind repeated terms to variables")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--min-occurrences", type=int, default=2)

    p = add("decompress", cmd_decompress, "restore compressed documents")
    p.add_argument("--in", dest="input", required=True)

    p = add("interleave", cmd_interleave, "build an ABAB multi-task stream")
    p.add_argument("--corpus")
    p.add_argument("--split", choices=["train", "validation", "test"])
    p.add_argument("--d2s")
    p.add_argument("--s2d")
    p.add_argument("--synthetic", help="accepted synthetic records to inject")
    p.add_argument("--seed", type=int)
    p.add_argument("--no-prefix", action="store_true")

    p = add("ingest-synthetic", cmd_ingest, "validate LLM annotation envelopes")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--first-id", type=int, default=0)
    p.add_argument("--rejections", help="write rejection reasons here")

    p = add("score", cmd_score, "score predictions against a gold corpus")
    p.add_argument("--task", choices=["d2s", "s2d"], required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--summary", help="write the corpus summary JSON here")
    p.add_argument("--no-ascii-fold", action="store_true")

    p = add("diagnose", cmd_diagnose, "classify errors and flag repetition loops")
    p.add_argument("--task", choices=["d2s", "s2d"], default="s2d")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--max-length", type=int, help="generation cap in tokens")
    return parser


def dispatch(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    command = "?"
    try:
        args = parser.parse_args(argv)
        command = args.command
        seed = getattr(args, "seed", None)
        if seed is not None and not 0 <= seed < 2 ** 64:
            raise UsageError("--seed must be an unsigned 64-bit integer")
        return args.func(args)
    except UsageError as exc:
        print(str(exc).rstrip(), file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (IoFailure, SchemaViolation, MalformedTriple, SplitCountMismatch) as exc:
        _summary(command, error=type(exc).__name__, message=str(exc))
        return EXIT_IO
    except NlgBidiError as exc:
        print(f"nlgbidi: {exc}", file=sys.stderr)
        return EXIT_FAILURES


def main() -> None:
    sys.exit(dispatch())
