"""Command-line corpus pipelines: validate, merge, score, stats, export, import.

Corpora are JSONL files with one record per image::

    {"image_id": "...", "captions": [...], "amrs": ["(s / stand-01 ...)", ...]}

Exit codes: 0 success, 1 data or validation error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from itertools import islice
from pathlib import Path
from statistics import fmean
from typing import Callable, Iterable, Iterator

from .graph import AmrGraph
from .lexicon import Lexicon, LexiconError, load_lexicon
from .linearize import LinearizationError, delinearize, from_line, linearize, to_line
from .merge import CaptionAmrSet, MergeError, RelationWhitelist, build_meta_amr, load_whitelist
from .metrics import score_against_references
from .penman import PenmanError, iter_penman_blocks, parse_penman, serialize_penman, split_comments
from .stats import categorize_corpus, categorize_scene_graphs, complexity_stats, histogram_csv, relation_histogram

log = logging.getLogger("amrforge")

METRICS = ("smatch", "sembleu1", "sembleu2")
BATCH = 256


class CorpusError(Exception):
    pass


def read_jsonl(path: str) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: malformed JSON: {exc}") from exc
            if not isinstance(record, dict) or "image_id" not in record:
                raise CorpusError(f"{path}:{lineno}: record has no image_id")
            yield lineno, record


def read_split(path: str | None) -> set[str] | None:
    if path is None:
        return None
    with open(path, encoding="utf-8") as fh:
        return {line.strip() for line in fh if line.strip()}


def iter_records(path: str, split: set[str] | None = None) -> Iterator[dict]:
    seen: set[str] = set()
    for lineno, record in read_jsonl(path):
        image_id = str(record["image_id"])
        if image_id in seen:
            raise CorpusError(f"{path}:{lineno}: duplicate image_id {image_id!r}")
        seen.add(image_id)
        if split is None or image_id in split:
            yield record


def record_graph_texts(record: dict) -> list[str]:
    if record.get("amrs"):
        return list(record["amrs"])
    if record.get("meta_amr"):
        return [record["meta_amr"]]
    return []


def parallel_map(fn: Callable, items: Iterable, jobs: int) -> Iterator:
    """Order-preserving map; with ``jobs > 1`` batches go to a process pool."""
    if jobs <= 1:
        yield from map(fn, items)
        return
    it = iter(items)
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        while batch := list(islice(it, BATCH * jobs)):
            yield from pool.map(fn, batch, chunksize=max(1, len(batch) // (jobs * 4)))


def _dump(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True)


def _resolve_lexicon(value: str | None) -> Lexicon:
    if value is not None and value.lower() == "none":
        return Lexicon()
    return load_lexicon(value)


# -- validate -------------------------------------------------------------


def cmd_validate(args) -> int:
    n_graphs = n_records = 0
    errors = []
    for record in iter_records(args.input, read_split(args.split)):
        n_records += 1
        texts = record_graph_texts(record)
        if not texts:
            errors.append(f"record {record['image_id']}: no AMRs")
        for i, text in enumerate(texts):
            n_graphs += 1
            try:
                parse_penman(text)
            except (PenmanError, ValueError) as exc:
                errors.append(f"record {record['image_id']}: amr {i}: {exc}")
    if n_records == 0:
        print("empty corpus", file=sys.stderr)
        return 1
    for e in errors:
        print(e, file=sys.stderr)
    if errors:
        print(f"{len(errors)} error(s) in {n_graphs} graphs")
        return 1
    print(f"{n_graphs} graphs OK")
    return 0


# -- merge ----------------------------------------------------------------


def _merge_record(record: dict, whitelist: RelationWhitelist, lexicon: Lexicon) -> tuple[dict | None, str | None]:
    image_id = str(record["image_id"])
    try:
        graphs = tuple(parse_penman(t) for t in record.get("amrs", []))
        meta = build_meta_amr(CaptionAmrSet(image_id, graphs), whitelist, lexicon)
    except (PenmanError, MergeError, ValueError) as exc:
        return None, f"record {image_id}: {exc}"
    return {
        "image_id": image_id,
        "meta_amr": serialize_penman(meta.graph, indent=None),
        "refinement_log": [list(x) for x in meta.refinement_log],
        "notes": meta.notes,
    }, None


def cmd_merge(args) -> int:
    whitelist = load_whitelist(args.whitelist)
    lexicon = _resolve_lexicon(args.lexicon)
    worker = partial(_merge_record, whitelist=whitelist, lexicon=lexicon)
    failures = written = 0
    with open(args.output, "w", encoding="utf-8") as out:
        for result, error in parallel_map(worker, iter_records(args.input, read_split(args.split)), args.jobs):
            if error:
                failures += 1
                print(error, file=sys.stderr)
                if args.strict:
                    return 1
                continue
            out.write(_dump(result) + "\n")
            written += 1
    print(f"merged {written} images" + (f", {failures} failed" if failures else ""))
    return 1 if failures else 0


# -- score ----------------------------------------------------------------


def _prediction_text(record: dict) -> str | None:
    for key in ("predicted_amr", "meta_amr"):
        if record.get(key):
            return record[key]
    amrs = record.get("amrs") or []
    return amrs[0] if amrs else None


def _score_record(item, metrics, seed, restarts) -> dict:
    image_id, pred_text, ref_texts = item
    pred = parse_penman(pred_text)
    refs = [parse_penman(t) for t in ref_texts]
    row: dict = {"image_id": image_id}
    argmax = {}
    for m in metrics:
        best = score_against_references(pred, refs, m, **({"seed": seed, "restarts": restarts} if m == "smatch" else {}))
        row[m] = best.score
        argmax[m] = best.index
    row["argmax_ref"] = argmax[metrics[0]]
    row["argmax_by_metric"] = argmax
    return row


def cmd_score(args) -> int:
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    bad = [m for m in metrics if m not in METRICS]
    if bad or not metrics:
        print(f"unknown metric(s): {', '.join(bad) or '(none)'}; choose from {', '.join(METRICS)}", file=sys.stderr)
        return 2
    split = read_split(args.split)
    refs = {str(r["image_id"]): record_graph_texts(r) for r in iter_records(args.refs, split)}
    unmatched, items = [], []
    for record in iter_records(args.predictions, split):
        image_id = str(record["image_id"])
        pred = _prediction_text(record)
        if image_id not in refs or not refs[image_id] or pred is None:
            unmatched.append(image_id)
            continue
        items.append((image_id, pred, refs[image_id]))
    for image_id in unmatched:
        print(f"unmatched image_id {image_id}", file=sys.stderr)
    if unmatched and args.strict:
        return 1

    worker = partial(_score_record, metrics=metrics, seed=args.seed, restarts=args.restarts)
    totals: dict[str, list[float]] = {m: [] for m in metrics}
    out = open(args.output, "w", encoding="utf-8") if args.output else sys.stdout
    try:
        for row in parallel_map(worker, items, args.jobs):
            for m in metrics:
                totals[m].append(row[m])
            out.write(_dump(row) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    summary = {"images": len(items), "unmatched": len(unmatched)}
    summary.update({f"mean_{m}": (fmean(v) if v else 0.0) for m, v in totals.items()})
    text = _dump(summary)
    if args.summary:
        Path(args.summary).write_text(text + "\n", encoding="utf-8")
    print(text, file=sys.stderr if out is sys.stdout else sys.stdout)
    return 0


# -- stats ----------------------------------------------------------------


def cmd_stats(args) -> int:
    lexicon = _resolve_lexicon(args.lexicon)
    whitelist = load_whitelist(args.whitelist)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    graphs: list[AmrGraph] = []
    before, after = [], []
    for record in iter_records(args.input, read_split(args.split)):
        parsed = [parse_penman(t) for t in record_graph_texts(record)]
        graphs.extend(parsed)
        if record.get("amrs") and not args.no_complexity:
            meta = build_meta_amr(CaptionAmrSet(str(record["image_id"]), parsed), whitelist, lexicon)
            before.append(meta.component)
            after.append(meta)
    if not graphs:
        print("empty corpus", file=sys.stderr)
        return 1

    stats = categorize_corpus(graphs, lexicon)
    (out_dir / "categories.csv").write_text(stats.to_csv(), encoding="utf-8")
    table = relation_histogram(graphs, top_n=args.top_n)
    (out_dir / "relations.csv").write_text(histogram_csv(table), encoding="utf-8")
    (out_dir / "whitelist.txt").write_text("".join(f"{r}\n" for r, _ in table), encoding="utf-8")
    (out_dir / "summary.json").write_text(json.dumps(stats.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    if before:
        (out_dir / "complexity.json").write_text(complexity_stats(before, after).to_json() + "\n", encoding="utf-8")
    if args.scene_graphs:
        sgs = [rec for _, rec in read_jsonl(args.scene_graphs)]
        (out_dir / "sg_categories.csv").write_text(categorize_scene_graphs(sgs, lexicon).to_csv(), encoding="utf-8")
    print(f"{len(graphs)} graphs, {len(table)} relation types -> {out_dir}")
    return 0


# -- export / import ------------------------------------------------------


def cmd_export(args) -> int:
    errors = 0
    count = 0
    ids_path = args.ids or f"{args.output}.ids"
    with open(args.output, "w", encoding="utf-8") as out:
        ids = open(ids_path, "w", encoding="utf-8") if args.format == "linearized" else None
        try:
            for record in iter_records(args.input, read_split(args.split)):
                image_id = str(record["image_id"])
                for i, text in enumerate(record_graph_texts(record)):
                    try:
                        g = parse_penman(text)
                    except PenmanError as exc:
                        errors += 1
                        print(f"record {image_id}: amr {i}: {exc}", file=sys.stderr)
                        continue
                    if args.format == "penman":
                        out.write(f"# ::id {image_id}.{i}\n# ::image {image_id}\n")
                        out.write(serialize_penman(g, metadata=False) + "\n\n")
                    else:
                        out.write(to_line(linearize(g)) + "\n")
                        ids.write(image_id + "\n")
                    count += 1
        finally:
            if ids:
                ids.close()
    print(f"exported {count} graphs")
    return 1 if errors else 0


def _image_of(comments: list[str]) -> str | None:
    for c in comments:
        parts = c.lstrip("#").split()
        if len(parts) >= 2 and parts[0] == "::image":
            return parts[1]
    return None


def cmd_import(args) -> int:
    grouped: dict[str, list[str]] = {}
    repairs: dict[str, list[str]] = {}
    failures = 0
    if args.format == "penman":
        text = Path(args.input).read_text(encoding="utf-8")
        for n, block in enumerate(iter_penman_blocks(text)):
            comments, body = split_comments(block)
            if not body.strip():
                continue
            image_id = _image_of(comments) or str(n)
            try:
                g = parse_penman(body)
            except PenmanError as exc:
                failures += 1
                print(f"block {n} ({image_id}): {exc}", file=sys.stderr)
                continue
            grouped.setdefault(image_id, []).append(serialize_penman(g, indent=None, metadata=False))
    else:
        ids_path = args.ids or f"{args.input}.ids"
        lines = Path(args.input).read_text(encoding="utf-8").splitlines()
        ids = Path(ids_path).read_text(encoding="utf-8").splitlines() if Path(ids_path).exists() else [str(i) for i in range(len(lines))]
        if len(ids) != len(lines):
            print(f"{ids_path} has {len(ids)} ids for {len(lines)} lines", file=sys.stderr)
            return 1
        for n, (image_id, line) in enumerate(zip(ids, lines)):
            try:
                result = delinearize(from_line(line))
            except LinearizationError as exc:
                failures += 1
                print(f"line {n + 1} ({image_id}): {exc}" + (f" [repairs: {'; '.join(exc.repairs)}]" if exc.repairs else ""), file=sys.stderr)
                continue
            if result.repairs:
                repairs.setdefault(image_id, []).extend(f"line {n + 1}: {r}" for r in result.repairs)
            grouped.setdefault(image_id, []).append(serialize_penman(result.graph, indent=None))
    if failures and args.strict:
        return 1
    with open(args.output, "w", encoding="utf-8") as out:
        for image_id, amrs in grouped.items():
            rec = {"image_id": image_id, "amrs": amrs}
            if image_id in repairs:
                rec["repairs"] = repairs[image_id]
            out.write(_dump(rec) + "\n")
    print(f"imported {sum(len(v) for v in grouped.values())} graphs" + (f", {failures} rejected" if failures else ""))
    return 1 if failures else 0


# -- entry point ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="amrforge", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, jobs=False):
        p.add_argument("--split", help="file of image ids to keep, one per line")
        if jobs:
            p.add_argument("--jobs", type=int, default=1, help="worker processes")
        return p

    p = common(sub.add_parser("validate", help="parse every AMR in a corpus"))
    p.add_argument("input")
    p.set_defaults(func=cmd_validate)

    p = common(sub.add_parser("merge", help="build one meta-AMR per image"), jobs=True)
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--whitelist", help="relation whitelist file (default: shipped list)")
    p.add_argument("--lexicon", help="lexicon TSV, or 'none' (default: $AMRFORGE_LEXICON or shipped sample)")
    p.add_argument("--strict", action="store_true", help="abort on the first failing record")
    p.set_defaults(func=cmd_merge)

    p = common(sub.add_parser("score", help="score predictions against reference AMRs"), jobs=True)
    p.add_argument("predictions")
    p.add_argument("refs")
    p.add_argument("-o", "--output", help="per-image JSONL (default: stdout)")
    p.add_argument("--summary", help="write corpus means as JSON here")
    p.add_argument("--metrics", default=",".join(METRICS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--strict", action="store_true", help="fail on unmatched image ids")
    p.set_defaults(func=cmd_score)

    p = common(sub.add_parser("stats", help="category, relation and complexity statistics"))
    p.add_argument("input")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--lexicon")
    p.add_argument("--whitelist")
    p.add_argument("--top-n", type=int, default=None)
    p.add_argument("--scene-graphs", help="JSONL of scene graphs to categorize alongside")
    p.add_argument("--no-complexity", action="store_true", help="skip the merge-based complexity summary")
    p.set_defaults(func=cmd_stats)

    p = common(sub.add_parser("export", help="write a corpus as PENMAN blocks or token lines"))
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--format", choices=("penman", "linearized"), default="penman")
    p.add_argument("--ids", help="id sidecar for linearized output (default: OUTPUT.ids)")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("import", help="read an export back into a JSONL corpus")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--format", choices=("penman", "linearized"), default="penman")
    p.add_argument("--ids", help="id sidecar for linearized input (default: INPUT.ids)")
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_import)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "jobs", 1) < 1 or getattr(args, "restarts", 1) < 1:
        parser.error("--jobs and --restarts must be >= 1")
    try:
        return args.func(args)
    except (CorpusError, LexiconError, MergeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
