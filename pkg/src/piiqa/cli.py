"""Operator CLI tying the pipeline together.

Subcommands: gen, ingest, export, agree, route, metrics, rca,
distributions, simulate, serve. Exit codes: 0 success, 1 validation
failure, 2 I/O failure; diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

from .agreement import InsufficientSubmissions, annotator_matrix, task_agreement
from .config import ConfigError, PipelineConfig
from .metrics import metrics_report
from .model import PiiModelError
from .rca import UnknownAxis, distributions, rca_report
from .simulate import simulate
from .store import (
    Store,
    StoreError,
    UnreadableFile,
    UnwritableFile,
    export_corpus,
    from_corpus,
    import_corpus,
)
from .synth import CorpusSpec, LocalePlan, SpecInvalid, gen_corpus

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_VALIDATION) -> None:
        super().__init__(message)
        self.code = code


def _parse_tasks(raw: str) -> dict[str, int]:
    counts = {}
    for part in raw.split(","):
        phase, _, count = part.partition("=")
        if not count:
            raise CliError(f"bad --tasks entry {part!r}, expected phase=count")
        counts[phase.strip()] = int(count)
    return counts


def _load_config(args) -> PipelineConfig:
    if getattr(args, "config", None):
        return PipelineConfig.from_file(args.config)
    return PipelineConfig()


def _open_store(args) -> Store:
    if not getattr(args, "store", None):
        raise CliError("--store is required for this command")
    return Store(args.store)


def _build_spec(args) -> CorpusSpec:
    locales = [code.strip() for code in args.locales.split(",")]
    counts = _parse_tasks(args.tasks)
    return CorpusSpec(
        seed=args.seed,
        locales={code: LocalePlan(counts=dict(counts),
                                  negative_fraction=args.negative_fraction)
                 for code in locales},
    )


def cmd_gen(args) -> int:
    corpus = gen_corpus(_build_spec(args))
    store = from_corpus(corpus)
    count = export_corpus(store, args.out)
    print(f"wrote {count} records for {len(corpus.tasks)} tasks to {args.out}")
    return EXIT_OK


def cmd_ingest(args) -> int:
    store = _open_store(args)
    report = import_corpus(store, args.file)
    print(f"loaded {report.loaded_total} records "
          f"({dict(report.loaded)}), rejected {len(report.rejected)}")
    for rejected in report.rejected:
        print(f"  line {rejected.line}: {rejected.reason}", file=sys.stderr)
    return EXIT_OK if not report.rejected else EXIT_VALIDATION


def cmd_export(args) -> int:
    store = _open_store(args)
    count = export_corpus(store, args.out, locale=args.locale, phase=args.phase)
    print(f"wrote {count} records to {args.out}")
    return EXIT_OK


def cmd_agree(args) -> int:
    store = _open_store(args)
    config = _load_config(args)
    corpus = store.corpus
    task_ids = [args.task] if args.task else sorted(corpus.tasks)
    for task_id in task_ids:
        if task_id not in corpus.tasks:
            raise CliError(f"unknown task {task_id}")
        subs = corpus.submissions.get(task_id, [])
        try:
            ira = task_agreement(subs, config.tau)
        except InsufficientSubmissions as exc:
            raise CliError(f"{task_id}: {exc}") from exc
        print(f"{task_id}\t{ira:.6f}")
    matrix = annotator_matrix(corpus, config.tau)
    for row in matrix.to_rows():
        print(f"# matrix\t{row['annotator_a']}\t{row['annotator_b']}"
              f"\t{row['agreement']:.6f}\t{row['support']}")
    return EXIT_OK


def cmd_route(args) -> int:
    store = _open_store(args)
    config = _load_config(args)
    phases = config.phases()
    sampler = random.Random(f"{args.seed}:route")
    routed = {"accepted": 0, "arbitration": 0}
    for task_id in sorted(store.corpus.tasks):
        if store.states[task_id].status != "dual_annotated":
            continue
        task = store.corpus.tasks[task_id]
        subs = store.corpus.submissions[task_id]
        if len(subs) < 2:
            continue
        ira = task_agreement(subs, config.tau)
        decision = store.route_task(task_id, ira, phases[task.phase], sampler)
        routed[decision.status] += 1
    print(f"routed: {routed['accepted']} accepted, "
          f"{routed['arbitration']} to arbitration")
    return EXIT_OK


def cmd_metrics(args) -> int:
    store = _open_store(args)
    config = _load_config(args)
    grains = [args.grain] if args.grain else ["fine", "coarse"]
    print("locale\tphase\tgrain\trecall\tfpr\trows\tna_rows")
    for report in metrics_report(store.corpus, negatives=config.fpr_negatives):
        if args.locale and report.locale != args.locale:
            continue
        if args.phase and report.phase != args.phase:
            continue
        for grain in grains:
            recall = getattr(report, f"recall_{grain}")
            rate = getattr(report, f"fpr_{grain}")
            print(f"{report.locale}\t{report.phase}\t{grain}"
                  f"\t{'' if recall is None else f'{recall:.6f}'}"
                  f"\t{'' if rate is None else f'{rate:.6f}'}"
                  f"\t{report.rows}\t{report.na_rows}")
    return EXIT_OK


def cmd_rca(args) -> int:
    store = _open_store(args)
    config = _load_config(args)
    phase = args.phase or "production"
    report = rca_report(store.corpus, phase, tau=config.tau)
    print(f"window: {phase} ({report.reviewed_tasks} reviewed tasks)")
    for category, count in report.category_counts.items():
        locales = ",".join(report.affected_locales.get(category, []))
        print(f"{category}\t{count}\t{locales}")
    for pair in report.confusion[:10]:
        print(f"# confusion\t{pair.type_a}\t{pair.type_b}\t{pair.count}")
    return EXIT_OK


def cmd_distributions(args) -> int:
    store = _open_store(args)
    config = _load_config(args)
    reports = distributions(store.corpus, args.axis, config.bins,
                            groups=config.locale_groups)
    print("axis\tgroup\tbucket\tcount\tproportion")
    for report in reports:
        for bucket, proportion in report.proportions.items():
            print(f"{report.axis}\t{report.group}\t{bucket}"
                  f"\t{report.counts[bucket]}\t{proportion:.6f}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    result = simulate(_build_spec(args), _load_config(args), out_dir=args.out)
    reviewed = sum(1 for s in result.store.states.values()
                   if s.status == "reviewed")
    print(f"simulated {len(result.store.corpus.tasks)} tasks, "
          f"{reviewed} reviewed, reports in {args.out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    store = _open_store(args)
    app = create_app(store, _load_config(args))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="piiqa",
                                     description="PII annotation quality pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--config", help="YAML pipeline config")
    common.add_argument("--locale", help="filter: locale code")
    common.add_argument("--phase", help="filter: phase name")

    gen = sub.add_parser("gen", parents=[common], help="generate a synthetic corpus")
    gen.add_argument("--out", required=True, help="exchange file to write")
    gen.add_argument("--locales", default="pl-PL")
    gen.add_argument("--tasks", default="pilot=20,training=20,production=20")
    gen.add_argument("--negative-fraction", type=float, default=0.2)
    gen.set_defaults(func=cmd_gen)

    ingest = sub.add_parser("ingest", parents=[common], help="import an exchange file")
    ingest.add_argument("file")
    ingest.add_argument("--store", required=True)
    ingest.set_defaults(func=cmd_ingest)

    export = sub.add_parser("export", parents=[common], help="export the store")
    export.add_argument("--store", required=True)
    export.add_argument("--out", required=True)
    export.set_defaults(func=cmd_export)

    agree = sub.add_parser("agree", parents=[common],
                           help="per-task IRA and annotator matrix")
    agree.add_argument("--store", required=True)
    agree.add_argument("--task")
    agree.set_defaults(func=cmd_agree)

    route_cmd = sub.add_parser("route", parents=[common],
                               help="route dual-annotated tasks")
    route_cmd.add_argument("--store", required=True)
    route_cmd.set_defaults(func=cmd_route)

    metrics_cmd = sub.add_parser("metrics", parents=[common],
                                 help="recall/FPR reports")
    metrics_cmd.add_argument("--store", required=True)
    metrics_cmd.add_argument("--grain", choices=["fine", "coarse"])
    metrics_cmd.set_defaults(func=cmd_metrics)

    rca_cmd = sub.add_parser("rca", parents=[common], help="root-cause report")
    rca_cmd.add_argument("--store", required=True)
    rca_cmd.set_defaults(func=cmd_rca)

    dist = sub.add_parser("distributions", parents=[common],
                          help="dataset distribution report")
    dist.add_argument("--store", required=True)
    dist.add_argument("--axis", default="domain",
                      choices=["domain", "length_bin", "pii_category"])
    dist.set_defaults(func=cmd_distributions)

    sim = sub.add_parser("simulate", parents=[common],
                         help="end-to-end three-phase simulation")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--locales", default="pl-PL,zh-CN,hi-IN")
    sim.add_argument("--tasks", default="pilot=50,training=50,production=50")
    sim.add_argument("--negative-fraction", type=float, default=0.2)
    sim.set_defaults(func=cmd_simulate)

    serve = sub.add_parser("serve", parents=[common], help="run the HTTP API")
    serve.add_argument("--store", required=True)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8400)
    serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (UnreadableFile, UnwritableFile, OSError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (PiiModelError, SpecInvalid, ConfigError, StoreError, UnknownAxis,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
