"""Command-line entry point: one subcommand per experiment.

Every run writes a run.json into its output directory echoing the fully
resolved configuration, so any result can be regenerated from its folder
alone. All randomness flows from explicit --seed flags. Exit codes: 0 on
success, 1 on validation failure, 2 on I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import clustering, evaluation, gbdt, robustness, synthgen
from .detector import (
    DetectorConfig,
    SimilarityModel,
    alarms_from_trace,
    read_alarm_csv,
    replay_trace,
    write_alarm_csv,
)
from .features import WindowConfig
from .gbdt import TrainConfig
from .lessons import LessonDatabase, build_pair_dataset, load_manifest
from .synthgen import AccidentType, OperationType
from .telemetry import parse_csv


def _write_run_json(out_dir: Path, args: argparse.Namespace) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    resolved = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    with (out_dir / "run.json").open("w") as fh:
        json.dump(resolved, fh, indent=2, default=str)


def _window_config(args: argparse.Namespace) -> WindowConfig:
    if getattr(args, "windows", None):
        ticks = tuple(int(w) for w in args.windows.split(","))
        return WindowConfig(window_ticks=ticks)
    return WindowConfig()


def _train_config(args: argparse.Namespace) -> TrainConfig:
    return TrainConfig(
        n_trees=args.trees,
        max_depth=args.depth,
        learning_rate=args.learning_rate,
        min_samples_leaf=args.min_samples_leaf,
        row_subsample=args.row_subsample,
        feature_subsample=args.feature_subsample,
        seed=args.seed,
    )


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--trees", type=int, default=200)
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--min-samples-leaf", type=int, default=5)
    p.add_argument("--row-subsample", type=float, default=0.8)
    p.add_argument("--feature-subsample", type=float, default=0.8)
    p.add_argument("--windows", help="comma-separated window sizes in ticks, e.g. 720,360,180,60")


def _load_composition(path: str) -> dict:
    with open(path) as fh:
        raw = json.load(fh)
    comp = {}
    for key, count in raw.items():
        acc_name, op_name = (s.strip() for s in key.split(","))
        comp[(AccidentType(acc_name), OperationType(op_name))] = int(count)
    return comp


def cmd_gen(args: argparse.Namespace) -> int:
    if args.composition:
        composition = _load_composition(args.composition)
    else:
        composition = None  # table default
    corpus = synthgen.generate_corpus(
        seed=args.seed,
        composition=composition,
        normal_wells=args.normal_wells,
        snr=args.snr,
        duration_ticks=args.duration,
    )
    out = Path(args.out)
    _write_run_json(out, args)
    synthgen.save_corpus(corpus, out)
    counts: dict[tuple[str, str], int] = {}
    for rec in corpus.lessons:
        key = (rec.accident_type.value, rec.operation.value)
        counts[key] = counts.get(key, 0) + 1
    print(f"wrote {len(corpus.wells)} wells, {len(corpus.lessons)} lessons -> {out}")
    for (acc, op), c in sorted(counts.items()):
        print(f"  {acc:18s} {op:14s} {c}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    window_config = _window_config(args)
    db = load_manifest(args.manifest, window_config)
    X, y, _ = build_pair_dataset(db)
    model = gbdt.fit(X, y, _train_config(args), layout_hash=window_config.pair_layout_hash())
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    gbdt.save(model, out)
    window_config.save_layout(out.with_suffix(".layout.json"))
    _write_run_json(out.parent, args)
    print(f"trained on {len(y)} pairs ({int(y.sum())} positive); model -> {out}")
    return 0


def cmd_eval_cv(args: argparse.Namespace) -> int:
    window_config = _window_config(args)
    db = load_manifest(args.manifest, window_config)
    cv = evaluation.CvConfig(
        iterations=args.iterations,
        test_fraction=args.test_fraction,
        seed=args.seed,
        loo_by_well=args.loo,
    )
    result = evaluation.cross_validate(db, _train_config(args), cv)
    out = Path(args.out)
    _write_run_json(out, args)
    roc = result.roc_auc()
    pr = result.pr_auc()
    confusion = evaluation.confusion_at(result.labels, result.scores, args.threshold)
    evaluation.write_roc_csv(result.labels, result.scores, out / "roc_curve.csv")
    evaluation.write_pr_csv(result.labels, result.scores, out / "pr_curve.csv")
    evaluation.write_summary_json(
        out / "metrics.json", roc, pr, confusion,
        extra={
            "prevalence": result.prevalence,
            "pooled_pairs": int(len(result.labels)),
            "iterations": result.iterations,
            "threshold": args.threshold,
        },
    )
    print(f"ROC AUC {roc:.4f}  PR AUC {pr:.4f}  prevalence {result.prevalence:.4f}")
    print(f"confusion at {args.threshold}: {confusion.as_dict()}")
    return 0


def _load_model_and_db(args: argparse.Namespace) -> tuple[SimilarityModel, LessonDatabase]:
    window_config = _window_config(args)
    db = load_manifest(args.manifest, window_config)
    model = SimilarityModel(gbdt.load(args.model), window_config)
    return model, db


def cmd_replay(args: argparse.Namespace) -> int:
    model, db = _load_model_and_db(args)
    series = parse_csv(args.well)
    config = DetectorConfig(threshold=args.threshold, step_ticks=args.step)
    trace = replay_trace(series, model, db, config)
    alarms = alarms_from_trace(trace, series.well_id, config.threshold)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_alarm_csv(alarms, series, out)
    _write_run_json(out.parent, args)
    print(f"{len(alarms)} alarms above {config.threshold} -> {out}")
    return 0


def cmd_score_alarms(args: argparse.Namespace) -> int:
    events = synthgen.load_events(args.events)
    alarms = read_alarm_csv(args.alarms)
    by_well: dict[str, list] = {}
    for alarm in alarms:
        by_well.setdefault(alarm.well_id, []).append(alarm)
    wells = []
    for well_id, info in events.items():
        wells.append(evaluation.score_alarms(
            by_well.get(well_id, []), info["events"], info["duration_ticks"], well_id
        ))
    report = evaluation.AlarmScoreReport(wells)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    report.to_csv(out)
    _write_run_json(out.parent, args)
    rate = evaluation.false_alarms_per_day(report)
    print(f"TP {report.total_tp}  FP {report.total_fp}  "
          f"({rate:.3f} false alarms/day over {report.total_days:.1f} days) -> {out}")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    model, db = _load_model_and_db(args)
    events = synthgen.load_events(args.events)
    corpus_dir = Path(args.events).parent
    thresholds = [float(t) for t in args.thresholds.split(",")]
    config = DetectorConfig(threshold=0.5, step_ticks=args.step)
    traces = {}
    durations = {}
    events_map = {}
    for well_id, info in events.items():
        series = parse_csv(corpus_dir / info["telemetry_file"], well_id=well_id)
        traces[well_id] = replay_trace(series, model, db, config)
        durations[well_id] = info["duration_ticks"]
        events_map[well_id] = info["events"]
    points = evaluation.threshold_sweep(traces, events_map, durations, thresholds)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    evaluation.write_sweep_csv(points, out)
    _write_run_json(out.parent, args)
    for p in points:
        print(f"  threshold {p.threshold:.2f}: TP {p.total_tp}  FP {p.total_fp}  "
              f"mean FP/well {p.mean_fp_per_well:.2f}")
    return 0


def cmd_cluster(args: argparse.Namespace) -> int:
    window_config = _window_config(args)
    db = load_manifest(args.manifest, window_config)
    if args.mode == "ground_truth":
        matrix = clustering.ground_truth_matrix(db)
    elif args.mode == "l1":
        matrix = clustering.unsupervised_l1_matrix(db)
    elif args.mode == "model-train":
        if not args.model:
            raise ValueError("--model is required for model-train mode")
        matrix = clustering.model_matrix(db, model=gbdt.load(args.model), mode="train")
    elif args.mode == "model-cv":
        matrix = clustering.model_matrix(
            db, mode="cv", train_config=_train_config(args), seed=args.seed
        )
    else:
        raise ValueError(f"unknown mode {args.mode!r}")
    dendrogram = clustering.agglomerate(matrix)
    k = args.k if args.k else len(db.by_group)
    labels = clustering.cut(dendrogram, k)
    out = Path(args.out)
    _write_run_json(out, args)
    clustering.write_linkage_csv(dendrogram, out / f"linkage_{args.mode}.csv")
    clustering.write_assignments_csv(
        matrix.lesson_ids, labels, out / f"clusters_{args.mode}.csv"
    )
    groups = [(l.accident_type.value, l.operation.value) for l in db.lessons]
    print(f"mode {args.mode}: purity at k={k}: {clustering.purity(labels, groups):.4f}")
    return 0


def cmd_robust(args: argparse.Namespace) -> int:
    model, db = _load_model_and_db(args)
    events = synthgen.load_events(args.events)
    corpus_dir = Path(args.events).parent
    wells = [
        parse_csv(corpus_dir / info["telemetry_file"], well_id=well_id)
        for well_id, info in events.items()
    ]
    events_map = {w: info["events"] for w, info in events.items()}
    shifts = [int(s) for s in args.shifts.split(",")] if args.shifts else []
    noises = [float(s) for s in args.noises.split(",")] if args.noises else []
    dists = robustness.similarity_distributions(
        model, db, wells, events_map,
        shift_ticks=shifts, noise_stds=noises,
        n_random=args.n_random, seed=args.seed,
    )
    out = Path(args.out)
    _write_run_json(out, args)
    robustness.write_boxplot_csv(dists, out / "boxplot.csv")
    random_samples = dists[0].samples
    rows = []
    for dist in dists[1:]:
        r = robustness.r_metric(dist.samples, random_samples)
        std = robustness.bootstrap_std(dist.samples, random_samples, seed=args.seed)
        rows.append((dist.label, r, std))
        print(f"  {dist.label:16s} R = {r:+.4f} +- {std:.4f}")
    robustness.write_r_table_csv(rows, out / "r_table.csv")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mwdmatch",
        description="Analogues-search anomaly detection for drilling telemetry",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic corpus")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", required=True)
    p.add_argument("--table1-default", action="store_true",
                   help="use the default 94-lesson composition (implied unless --composition)")
    p.add_argument("--composition", help='JSON file {"stuck,tripping_in": 18, ...}')
    p.add_argument("--normal-wells", type=int, default=0)
    p.add_argument("--snr", type=float, default=synthgen.DEFAULT_SNR)
    p.add_argument("--duration", type=int, default=synthgen.DEFAULT_DURATION)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="train the pair-similarity model")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    _add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval-cv", help="well-disjoint cross-validation metrics")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iterations", type=int, default=20)
    p.add_argument("--test-fraction", type=float, default=0.25)
    p.add_argument("--threshold", type=float, default=0.7)
    p.add_argument("--loo", action="store_true", help="leave-one-well-out instead of random splits")
    _add_train_flags(p)
    p.set_defaults(func=cmd_eval_cv)

    p = sub.add_parser("replay", help="stream one well through the detector")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--well", required=True, help="telemetry CSV to replay")
    p.add_argument("--threshold", type=float, default=0.7)
    p.add_argument("--step", type=int, default=60)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    _add_train_flags(p)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("score-alarms", help="score an alarm log against true events")
    p.add_argument("--alarms", required=True)
    p.add_argument("--events", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_score_alarms)

    p = sub.add_parser("sweep", help="TP/FP totals across alarm thresholds")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--events", required=True)
    p.add_argument("--thresholds", default="0.3,0.4,0.5,0.6,0.7,0.8,0.9,0.95")
    p.add_argument("--step", type=int, default=60)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    _add_train_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("cluster", help="dendrogram for one similarity mode")
    p.add_argument("--manifest", required=True)
    p.add_argument("--mode", choices=("ground_truth", "l1", "model-train", "model-cv"),
                   required=True)
    p.add_argument("--model")
    p.add_argument("--k", type=int, default=0, help="clusters at the cut (default: #groups)")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    _add_train_flags(p)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("robust", help="distortion robustness distributions and R table")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--events", required=True)
    p.add_argument("--shifts", default="20,40")
    p.add_argument("--noises", default="0.01,0.03,0.1")
    p.add_argument("--n-random", type=int, default=100)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    _add_train_flags(p)
    p.set_defaults(func=cmd_robust)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
