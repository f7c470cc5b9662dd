"""Batch experiment runner: run / compare / stats subcommands."""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .data import MultiLabelDataset, compute_stats, generate_synthetic, parse_arff, parse_label_xml
from .errors import (
    ArgumentError,
    DomainValueError,
    InsufficientDataError,
    PairlabelError,
    ParseError,
    SchemaError,
    StatsError,
    UndefinedMetricError,
)
from .experiment import (
    DEFAULT_BETAS,
    DEFAULT_FOLDS,
    DEFAULT_GAMMAS,
    DEFAULT_SPLIT,
    run_experiment_detailed,
)
from .learners import LearnerSpec
from .metrics import METRIC_NAMES
from .stattests import (
    ResultTable,
    average_ranks,
    friedman_test,
    holm_adjust,
    nemenyi_cd,
    wilcoxon_signed_rank,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

_DATA_ERRORS = (ParseError, SchemaError, DomainValueError, StatsError)


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _load_dataset(config: dict) -> MultiLabelDataset:
    if config.get("synthetic"):
        s = config["synthetic"]
        return generate_synthetic(
            n=int(s["n"]),
            n_labels=int(s["L"]),
            n_features=int(s["d"]),
            noise=float(s["noise"]),
            seed=int(config["seed"]),
        )
    data_path = config.get("data")
    xml_path = config.get("labels_xml")
    if not data_path:
        raise ArgumentError("config needs either a synthetic spec or a --data path")
    if not xml_path:
        raise SchemaError(f"no label manifest (--labels-xml) given for '{data_path}'")
    label_names = parse_label_xml(Path(xml_path).read_text())
    return parse_arff(Path(data_path).read_text(), label_names)


def _build_config(args) -> dict:
    config = {
        "algorithms": [1, 2, 3],
        "learner": "decision_stump",
        "folds": DEFAULT_FOLDS,
        "t": DEFAULT_SPLIT,
        "betas": list(DEFAULT_BETAS),
        "gammas": list(DEFAULT_GAMMAS),
        "seed": 0,
        "rrc": "soft",
        "out": "results",
        "data": None,
        "labels_xml": None,
        "synthetic": None,
    }
    if args.config:
        config.update(json.loads(Path(args.config).read_text()))
    if args.data:
        config["data"] = args.data
    if args.labels_xml:
        config["labels_xml"] = args.labels_xml
    if args.synthetic:
        parts = args.synthetic.split(",")
        if len(parts) != 4:
            raise ArgumentError("--synthetic expects n,L,d,noise")
        config["synthetic"] = {
            "n": int(parts[0]), "L": int(parts[1]), "d": int(parts[2]), "noise": float(parts[3]),
        }
    if args.alg:
        config["algorithms"] = [int(a) for a in args.alg.split(",")]
    if args.learner:
        config["learner"] = args.learner
    if args.folds is not None:
        config["folds"] = args.folds
    if args.t is not None:
        config["t"] = args.t
    if args.seed is not None:
        config["seed"] = args.seed
    if args.rrc:
        config["rrc"] = args.rrc
    if args.out:
        config["out"] = args.out
    if any(a not in (1, 2, 3) for a in config["algorithms"]):
        raise ArgumentError("algorithms must be a subset of {1,2,3}")
    return config


def cmd_run(args) -> int:
    config = _build_config(args)
    ds = _load_dataset(config)
    learner = LearnerSpec(kind=config["learner"])
    out_dir = Path(config["out"])
    out_dir.mkdir(parents=True, exist_ok=True)

    metric_rows = []
    tuning = []
    for algorithm in config["algorithms"]:
        outcomes = run_experiment_detailed(
            ds,
            algorithm,
            learner,
            folds=int(config["folds"]),
            t=float(config["t"]),
            seed=int(config["seed"]),
            betas=tuple(float(b) for b in config["betas"]),
            gammas=tuple(float(g) for g in config["gammas"]),
            rrc_mode=config["rrc"],
        )
        for outcome in outcomes:
            report = outcome.report.as_dict()
            for metric in METRIC_NAMES:
                metric_rows.append((algorithm, outcome.fold, metric, report[metric]))
            if outcome.tune is not None:
                tuning.append(
                    {
                        "algorithm": algorithm,
                        "fold": outcome.fold,
                        "beta": outcome.tune.beta,
                        "gamma": outcome.tune.gamma,
                        "objective": outcome.tune.objective,
                    }
                )

    lines = ["algorithm,fold,metric,value"]
    lines += [f"{a},{f},{m},{_fmt(v)}" for a, f, m, v in metric_rows]
    (out_dir / "metrics.csv").write_text("\n".join(lines) + "\n")
    (out_dir / "tuning.json").write_text(json.dumps(tuning, indent=2) + "\n")
    manifest = {"version": __version__, "config": config}
    (out_dir / "run-manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {out_dir / 'metrics.csv'}")
    return EXIT_OK


def _read_metrics_csv(path: Path) -> dict:
    """Mean value over folds per (algorithm, metric) from a cmd_run CSV."""
    lines = path.read_text().strip().splitlines()
    if not lines or lines[0] != "algorithm,fold,metric,value":
        raise SchemaError(f"{path}: not a metrics.csv produced by 'run'")
    acc: dict[tuple[int, str], list[float]] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 4:
            raise ParseError(f"{path}: malformed row", line=lineno)
        alg, _fold, metric, value = parts
        acc.setdefault((int(alg), metric), []).append(float(value))
    return {key: float(np.mean(vals)) for key, vals in acc.items()}


def cmd_compare(args) -> int:
    paths = [Path(p) for p in args.tables]
    if len(paths) < 2:
        raise ArgumentError("compare needs at least 2 metrics.csv files")
    per_dataset = [_read_metrics_csv(p) for p in paths]
    names = [p.parent.name or p.stem for p in paths]
    algorithms = sorted({a for table in per_dataset for a, _ in table})
    if len(algorithms) < 2:
        raise SchemaError("compare needs at least 2 algorithms")
    for table, path in zip(per_dataset, paths):
        have = {a for a, _ in table}
        if have != set(algorithms):
            raise SchemaError(f"{path}: algorithm set {sorted(have)} inconsistent")

    alpha = args.alpha
    report = {"alpha": alpha, "datasets": names, "algorithms": algorithms, "metrics": {}}
    rank_rows = ["metric," + ",".join(f"rank_alg{a}" for a in algorithms) + ",friedman_p,nemenyi_cd"]
    for metric in METRIC_NAMES:
        values = np.array(
            [[table[(a, metric)] for a in algorithms] for table in per_dataset]
        )
        table = ResultTable(values, tuple(names), tuple(str(a) for a in algorithms))
        ranks = average_ranks(table)
        chi2, friedman_p = friedman_test(table)
        cd = nemenyi_cd(len(algorithms), len(names), alpha=alpha)
        pairwise = []
        raw_ps = []
        for i, j in itertools.combinations(range(len(algorithms)), 2):
            entry = {"pair": [algorithms[i], algorithms[j]]}
            try:
                w, p = wilcoxon_signed_rank(values[:, i], values[:, j])
                entry.update({"statistic": w, "p": p})
                raw_ps.append(p)
            except InsufficientDataError as exc:
                entry.update({"statistic": None, "p": None, "error": str(exc)})
            pairwise.append(entry)
        adjusted = holm_adjust(raw_ps) if raw_ps else []
        it = iter(adjusted)
        for entry in pairwise:
            entry["p_holm"] = next(it) if entry["p"] is not None else None
        report["metrics"][metric] = {
            "average_ranks": ranks.tolist(),
            "friedman_chi2": chi2,
            "friedman_p": friedman_p,
            "nemenyi_cd": cd,
            "wilcoxon": pairwise,
        }
        rank_rows.append(
            metric + "," + ",".join(_fmt(r) for r in ranks)
            + f",{_fmt(friedman_p)},{_fmt(cd)}"
        )

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "comparison.json").write_text(json.dumps(report, indent=2) + "\n")
    (out_dir / "comparison.csv").write_text("\n".join(rank_rows) + "\n")
    print(f"wrote {out_dir / 'comparison.json'}")
    return EXIT_OK


def cmd_stats(args) -> int:
    data_paths = args.data or []
    xml_paths = args.labels_xml or []
    if len(data_paths) != len(xml_paths) or not data_paths:
        raise ArgumentError("stats needs matching --data/--labels-xml pairs")
    rows = ["name,N,d,L,LC,LD,avIR"]
    failures = 0
    for data_path, xml_path in zip(data_paths, xml_paths):
        name = Path(data_path).stem
        try:
            labels = parse_label_xml(Path(xml_path).read_text())
            ds = parse_arff(Path(data_path).read_text(), labels)
            st = compute_stats(ds)
            rows.append(
                f"{name},{ds.n_instances},{ds.n_features},{ds.n_labels},"
                f"{_fmt(st.label_cardinality)},{_fmt(st.label_density)},"
                f"{_fmt(st.avg_imbalance_ratio)}"
            )
        except PairlabelError as exc:
            failures += 1
            print(f"{name}: {exc}", file=sys.stderr)
    output = "\n".join(rows) + "\n"
    if args.out:
        Path(args.out).write_text(output)
    else:
        sys.stdout.write(output)
    return EXIT_DATA if failures else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pairlabel")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the three-algorithm comparison on one dataset")
    run.add_argument("--config", help="JSON config file; flags override its entries")
    run.add_argument("--data", help="ARFF dataset path")
    run.add_argument("--labels-xml", help="label manifest XML path")
    run.add_argument("--synthetic", help="synthetic spec n,L,d,noise")
    run.add_argument("--alg", help="comma-separated algorithm ids from {1,2,3}")
    run.add_argument("--learner", choices=["nb", "vp", "stump"], help="base learner")
    run.add_argument("--folds", type=int)
    run.add_argument("--t", type=float)
    run.add_argument("--seed", type=int)
    run.add_argument("--rrc", choices=["beta_mc", "soft"])
    run.add_argument("--out", help="output directory")
    run.set_defaults(func=cmd_run)

    compare = sub.add_parser("compare", help="statistical comparison of run outputs")
    compare.add_argument("tables", nargs="+", help="metrics.csv files, one per dataset")
    compare.add_argument("--alpha", type=float, default=0.05)
    compare.add_argument("--out", default="comparison", help="output directory")
    compare.set_defaults(func=cmd_compare)

    stats = sub.add_parser("stats", help="dataset characteristics report")
    stats.add_argument("--data", action="append", help="ARFF path (repeatable)")
    stats.add_argument("--labels-xml", action="append", help="matching XML path")
    stats.add_argument("--out", help="output CSV path (default stdout)")
    stats.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (PairlabelError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
