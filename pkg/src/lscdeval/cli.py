"""Command line for the benchmark: run, fixture, report, validate, oracle.

Exit codes: 0 success, 2 config error, 3 data-format error, 4 undefined
metric.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench, ingest
from .clustering import BRUTE_FORCE_MAX_NODES, brute_force_cluster
from .errors import ConfigError, DataFormatError, DegenerateInputError, UndefinedMetricError
from .fixture import FixtureSpec, make_fixture
from .measures import jsd_distance, sense_distribution
from .wug import build_graph

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_METRIC = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lscd-bench",
        description="Evaluate word-in-context, sense-induction and semantic-change pipelines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute one configured evaluation run")
    run_p.add_argument("--config", help="JSON config file; flags override its values")
    run_p.add_argument("--dataset", help="dataset manifest path")
    run_p.add_argument("--task", help="one of " + ", ".join(bench.TASKS))
    run_p.add_argument("--split", help="train, dev, test or all")
    run_p.add_argument("--seed", type=int, help="master seed")
    run_p.add_argument("--out", help="output directory for the report")
    run_p.add_argument("--scores", help="external WiC scores TSV")
    run_p.add_argument("--scores-are-distances", action="store_true", default=None,
                       help="external scores are distances; negate on load")
    run_p.add_argument("--embeddings", help="embedding store path")
    run_p.add_argument(
        "--format", choices=("tsv", "json", "plot"), action="append",
        help="report formats to write (repeatable; default tsv+json)",
    )

    fix_p = sub.add_parser("fixture", help="generate a synthetic planted-change dataset")
    fix_p.add_argument("--out", required=True)
    fix_p.add_argument("--seed", type=int, default=0)
    fix_p.add_argument("--noise", type=float, default=0.0)
    fix_p.add_argument("--stable", type=int, default=5, help="lemmas with unchanged senses")
    fix_p.add_argument("--gain", type=int, default=4, help="lemmas gaining a sense")
    fix_p.add_argument("--loss", type=int, default=1, help="lemmas losing a sense")
    fix_p.add_argument("--annotators", type=int, default=3)
    fix_p.add_argument("--with-store", action="store_true", help="also write a synthetic embedding store")

    rep_p = sub.add_parser("report", help="re-render stored report.json files")
    rep_p.add_argument("reports", nargs="+", help="report.json paths")
    rep_p.add_argument("--format", choices=("tsv", "json", "plot"), default="tsv")
    rep_p.add_argument("--out", required=True, help="output directory")

    val_p = sub.add_parser("validate", help="check a dataset manifest and its files")
    val_p.add_argument("--dataset", required=True, help="dataset manifest path")

    ora_p = sub.add_parser("oracle", help="exact brute-force clustering of one lemma's graph")
    ora_p.add_argument("--dataset", required=True)
    ora_p.add_argument("--lemma", required=True)
    ora_p.add_argument("--tau", type=float, default=2.5, help="attraction threshold")
    ora_p.add_argument("--out", help="write the clustering as a clusters TSV")
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    doc = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                doc = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {args.config}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: invalid JSON: {exc}")
    overrides = {
        "dataset": args.dataset,
        "task": args.task,
        "split": args.split,
        "seed": args.seed,
        "out": args.out,
        "scores_path": args.scores,
        "scores_are_distances": args.scores_are_distances,
        "embeddings_path": args.embeddings,
    }
    for key, value in overrides.items():
        if value is not None:
            doc[key] = value
    if doc.get("scores_path") and not doc.get("scorer"):
        doc["scorer"] = "external-file"
    if "dataset" not in doc or "task" not in doc:
        raise ConfigError("a run needs at least --dataset and --task (or a config file)")
    config = bench.config_from_dict(doc)
    if not config.out:
        raise ConfigError("a run needs --out (report directory)")
    formats = tuple(args.format) if args.format else ("json", "tsv")
    report = bench.run(config, formats=formats)
    for name in sorted(report.metrics):
        entry = report.metrics[name]
        value = entry.get("value")
        shown = "n/a" if value is None else f"{value:.6g}"
        print(f"{name}\t{shown}\tcoverage={entry.get('coverage', 1.0):.3g}")
    for note in report.notes:
        print(f"note: {note}", file=sys.stderr)
    print(f"report written to {Path(config.out)} in {report.timing_seconds:.2f}s",
          file=sys.stderr)
    return EXIT_OK


def _cmd_fixture(args: argparse.Namespace) -> int:
    spec = FixtureSpec(
        n_stable=args.stable,
        n_gain=args.gain,
        n_loss=args.loss,
        annotators=args.annotators,
        noise=args.noise,
    )
    manifest_path = make_fixture(spec, seed=args.seed, out_dir=args.out, with_store=args.with_store)
    print(f"fixture written: {manifest_path}")
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    docs = []
    for path in args.reports:
        try:
            with open(path, encoding="utf-8") as fh:
                docs.append(json.load(fh))
        except FileNotFoundError:
            raise ConfigError(f"report not found: {path}")
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}: invalid JSON: {exc}")
    out_dir = Path(args.out)
    if args.format == "plot":
        path = bench.render_plot(docs, out_dir / "results.png")
        print(f"plot written: {path}")
    elif args.format == "tsv":
        if len(docs) > 1:
            for i, doc in enumerate(docs):
                bench.render_tsv(doc, out_dir / f"report{i:02d}")
        else:
            bench.render_tsv(docs[0], out_dir)
        print(f"tsv written under {out_dir}")
    else:
        out_dir.mkdir(parents=True, exist_ok=True)
        for i, doc in enumerate(docs):
            path = out_dir / (f"report{i:02d}.json" if len(docs) > 1 else "report.json")
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(doc, fh, indent=2, sort_keys=True)
                fh.write("\n")
        print(f"json written under {out_dir}")
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    manifest = ingest.load_manifest(args.dataset)
    problems = ingest.validate_manifest(manifest)
    print(f"dataset {manifest.name} v{manifest.version} [{manifest.language}]: "
          f"{len(manifest.lemmas)} lemmas, tasks: {', '.join(manifest.tasks)}")
    for problem in problems:
        print(f"problem: {problem}")
    if problems:
        raise DataFormatError(f"{len(problems)} problem(s) found")

    # consistency audit (reported, never asserted): gold clusters vs graded gold
    gold_file = manifest.gold_file()
    if "wsi" in manifest.tasks and gold_file and gold_file.exists():
        gold = ingest.parse_gold_lscd(gold_file)
        worst = 0.0
        audited = 0
        for lemma in manifest.lemmas:
            labels = gold.get(lemma)
            if labels is None or labels.change_graded is None:
                continue
            data = ingest.load_lemma(manifest, lemma, with_clusters=True)
            earlier = [u.id for u in data.usages if u.grouping == 1]
            later = [u.id for u in data.usages if u.grouping == 2]
            try:
                value = jsd_distance(
                    sense_distribution(data.gold_clusters, earlier),
                    sense_distribution(data.gold_clusters, later),
                )
            except Exception:
                continue
            audited += 1
            worst = max(worst, abs(value - labels.change_graded))
        if audited:
            print(f"audit: gold clusters reproduce change_graded within {worst:.3g} "
                  f"over {audited} lemma(s)")
    print("ok")
    return EXIT_OK


def _cmd_oracle(args: argparse.Namespace) -> int:
    manifest = ingest.load_manifest(args.dataset)
    if args.lemma not in manifest.lemmas:
        raise ConfigError(f"lemma {args.lemma!r} not in dataset {manifest.name!r}")
    data = ingest.load_lemma(manifest, args.lemma)
    graph = build_graph(list(data.usages), list(data.judgments), manifest.aggregation)
    if graph.n_nodes > BRUTE_FORCE_MAX_NODES:
        raise ConfigError(
            f"{args.lemma}: {graph.n_nodes} nodes exceed the brute-force bound "
            f"of {BRUTE_FORCE_MAX_NODES}"
        )
    clustering, loss = brute_force_cluster(graph, args.tau)
    print(f"{args.lemma}: optimal loss {loss:.12g} with "
          f"{len(clustering.clusters())} cluster(s) over {graph.n_nodes} node(s)")
    if args.out:
        ingest.write_clusters(clustering, args.out)
        print(f"clusters written: {args.out}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "fixture": _cmd_fixture,
        "report": _cmd_report,
        "validate": _cmd_validate,
        "oracle": _cmd_oracle,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataFormatError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (UndefinedMetricError, DegenerateInputError) as exc:
        print(f"metric undefined: {exc}", file=sys.stderr)
        return EXIT_METRIC


if __name__ == "__main__":
    sys.exit(main())
