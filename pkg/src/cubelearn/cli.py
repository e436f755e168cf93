"""Command line front end: filter / learn / sandwich / sandwich-degree / experiment."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .concepts import named_circuit
from .contamination import LabeledSample
from .filtering import FilterParams, annotate_provenance, filter_outliers
from .harness import ExperimentConfig, run_pipeline
from .regression import learn_ptf
from .sandwiching import best_sandwich, sandwich_degree


def _load_sample(path: str) -> LabeledSample:
    return LabeledSample.from_csv(Path(path).read_text())


def _load_table(args) -> np.ndarray:
    if args.truth_table:
        return np.asarray(json.loads(Path(args.truth_table).read_text()), dtype=np.float64)
    if not args.function or args.d is None:
        raise SystemExit("need --function with --d, or --truth-table")
    return named_circuit(args.function, args.d).truth_table().astype(np.float64)


def _cmd_filter(args) -> int:
    sample = _load_sample(args.input)
    params = FilterParams(eps=args.eps, degree=args.k, coef_bound=args.coef_bound,
                          tail_margin=args.tail_margin, ref_size=args.ref_size,
                          max_iters=args.max_iters)
    report = filter_outliers(sample.learner_view(), params, args.seed)
    if sample.adversarial_count() > 0:
        annotate_provenance(report, sample.tags)
    Path(args.report).write_text(report.to_json())
    if args.output:
        kept = LabeledSample(report.filtered_points, report.filtered_labels,
                             sample.tags[report.surviving_indices])
        Path(args.output).write_text(kept.to_csv(include_tags=sample.adversarial_count() > 0))
    last = report.iterations[-1]
    print(f"kept {report.surviving_indices.size} of {len(sample)} points "
          f"in {len(report.iterations)} rounds; final normalized LP value "
          f"{last.objective_mean:.6f} (eps={args.eps})")
    return 0 if report.terminated else 1


def _cmd_learn(args) -> int:
    sample = _load_sample(args.input)
    hypothesis = learn_ptf(sample.points, sample.labels, args.k)
    Path(args.out_hypothesis).write_text(hypothesis.to_json())
    mistakes = int((hypothesis.predict(sample.points) != sample.labels).sum())
    print(f"degree-{args.k} PTF with theta={hypothesis.theta:.6f}; "
          f"{mistakes}/{len(sample)} training mistakes")
    return 0


def _cmd_sandwich(args) -> int:
    table = _load_table(args)
    pair = best_sandwich(table, args.k)
    out = json.dumps(pair.to_json_obj(), indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(out)
    else:
        print(out)
    print(f"degree-{args.k} sandwich gap: {pair.gap:.9f}", file=sys.stderr)
    return 0


def _cmd_sandwich_degree(args) -> int:
    table = _load_table(args)
    degree = sandwich_degree(table, args.eps)
    print(degree)
    return 0


def _cmd_experiment(args) -> int:
    cfg = ExperimentConfig.from_json(Path(args.config).read_text())
    outcome = run_pipeline(cfg)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = [record.row() for record in outcome.records]
    with open(out_dir / "runs.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)

    failures = outcome.failed_assertions()
    summary = {
        "config": cfg.to_json_obj(),
        "summary": outcome.summary,
        "failed_assertions": failures,
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))

    if args.traces:
        trace_dir = out_dir / "traces"
        trace_dir.mkdir(exist_ok=True)
        for seed, report in zip(cfg.seeds, outcome.filter_reports):
            if report is not None:
                (trace_dir / f"filter_{seed}.json").write_text(report.to_json())

    print(json.dumps(outcome.summary, indent=2, sort_keys=True))
    if failures:
        print("FAILED ASSERTIONS:", "; ".join(failures), file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cubelearn",
                                     description="Robust hypercube concept learning toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("filter", help="run LP outlier removal on a labeled CSV sample")
    p.add_argument("--input", required=True, help="CSV with columns x_1..x_d,label[,tag]")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--coef-bound", dest="coef_bound", type=float, default=None, help="B override")
    p.add_argument("--tail-margin", dest="tail_margin", type=float, default=None, help="Delta override")
    p.add_argument("--ref-size", dest="ref_size", type=int, default=None)
    p.add_argument("--max-iters", dest="max_iters", type=int, default=None)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--report", required=True, help="where to write the JSON trace")
    p.add_argument("--output", default=None, help="optional CSV of surviving examples")
    p.set_defaults(fn=_cmd_filter)

    p = sub.add_parser("learn", help="L1 polynomial regression + threshold on a labeled CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out-hypothesis", dest="out_hypothesis", required=True)
    p.set_defaults(fn=_cmd_learn)

    for name, fn in (("sandwich", _cmd_sandwich), ("sandwich-degree", _cmd_sandwich_degree)):
        p = sub.add_parser(name, help=f"{name} of an explicit function")
        p.add_argument("--function", default=None, help="family spec, e.g. tribes:w=2,m=3")
        p.add_argument("--d", type=int, default=None)
        p.add_argument("--truth-table", dest="truth_table", default=None,
                       help="JSON file with a +-1 table in canonical point order")
        if name == "sandwich":
            p.add_argument("--k", type=int, required=True)
            p.add_argument("--out", default=None)
        else:
            p.add_argument("--eps", type=float, required=True)
        p.set_defaults(fn=fn)

    p = sub.add_parser("experiment", help="run a seeded experiment from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory (runs.csv, summary.json)")
    p.add_argument("--traces", action="store_true", help="also dump per-seed filter traces")
    p.set_defaults(fn=_cmd_experiment)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
