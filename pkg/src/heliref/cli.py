"""
Command-line entry point.

Subcommands:
    run      one simulation, writes the time-series CSV and verdict JSON
    batch    paired-seed Monte Carlo experiment, writes per-run files and
             a summary JSON, prints the docking statistics table
    analyze  recomputes bound compliance from a records directory and
             emits the report JSON plus the plot-ready ||e(t)|| CSV

Exit codes: 0 success, 1 configuration error, 2 simulation abort,
3 analysis error.
"""

import argparse
import csv
import glob
import json
import os
import sys
from dataclasses import replace

import numpy as np

from . import analysis, harness
from .config import ConfigError, apply_overrides, build_run_config, load_config_file
from .drogue import UncertaintyBounds

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_ABORT = 2
EXIT_ANALYSIS = 3

OUT_ROOT_ENV = "HELIREF_OUT_ROOT"


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heliref",
        description="Helicopter aerial refueling docking simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="YAML configuration file")
        p.add_argument("--out-dir", help="output directory "
                       f"(default under ${OUT_ROOT_ENV} or ./out)")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override a dotted config key")

    p_run = sub.add_parser("run", help="simulate a single run")
    common(p_run)
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--controller", choices=harness.CONTROLLERS)

    p_batch = sub.add_parser("batch", help="paired-seed Monte Carlo batch")
    common(p_batch)
    p_batch.add_argument("--seed", type=int, help="first seed (default from config)")
    p_batch.add_argument("--n-runs", type=int, default=50)
    p_batch.add_argument("--workers", type=int, default=1)
    p_batch.add_argument("--controller", choices=harness.CONTROLLERS,
                         help="restrict the batch to one controller")

    p_an = sub.add_parser("analyze", help="bound-compliance report for a batch")
    p_an.add_argument("records_dir", help="directory produced by `heliref batch`")
    p_an.add_argument("--out-dir", help="report directory (default: records dir)")
    return parser


def _load(args) -> harness.RunConfig:
    cfg = load_config_file(args.config) if args.config else {}
    if not args.config:
        # Without a file the paper-default gains apply.
        cfg.setdefault("gains", {"Kp": [0.41, 0.37, 35.0], "Kd": [0.75, 0.75, 8.8]})
    apply_overrides(cfg, args.overrides)
    config = build_run_config(cfg)
    if getattr(args, "seed", None) is not None:
        config = replace(config, seed=args.seed)
    if getattr(args, "controller", None) is not None:
        config = replace(config, controller=args.controller)
    return config


def _out_root() -> str:
    return os.environ.get(OUT_ROOT_ENV, "out")


def cmd_run(args) -> int:
    config = _load(args)
    record = harness.run_once(config)
    out_dir = args.out_dir or os.path.join(
        _out_root(), f"run_{harness.config_digest(config)}_{record.run_id()}")
    os.makedirs(out_dir, exist_ok=True)
    harness.write_run_csv(os.path.join(out_dir, f"run_{record.run_id()}.csv"), record)
    harness.write_run_verdict(os.path.join(out_dir, f"run_{record.run_id()}.json"),
                              record)
    with open(os.path.join(out_dir, "config.json"), "w") as fh:
        json.dump(harness.config_to_dict(config), fh, indent=2, sort_keys=True)
        fh.write("\n")
    if record.aborted:
        print(f"run {record.run_id()} aborted: {record.abort_reason}",
              file=sys.stderr)
        return EXIT_ABORT
    print(f"run {record.run_id()}: docking error "
          f"{record.docking_error:.4f} m, success={record.success}, "
          f"outputs in {out_dir}")
    return EXIT_OK


def cmd_batch(args) -> int:
    config = _load(args)
    summary, records = harness.run_batch(
        config, n_runs=args.n_runs,
        seed0=args.seed if args.seed is not None else config.seed,
        workers=args.workers,
    )
    if args.controller:
        records = [r for r in records if r.controller == args.controller]
    out_dir = args.out_dir or harness.batch_output_dir(_out_root(), config,
                                                       summary.seeds)
    harness.write_batch_outputs(out_dir, summary, records)
    with open(os.path.join(out_dir, "config.json"), "w") as fh:
        json.dump(harness.config_to_dict(config), fh, indent=2, sort_keys=True)
        fh.write("\n")

    print(f"{args.n_runs} docking maneuvers per controller "
          f"(epsilon_0 = {config.docking_tolerance} m)")
    print(f"{'criterion':<28}{'standard':>12}{'proposed':>12}")
    rows = [
        ("mean docking error (m)", "mean_docking_error_m", "{:.3f}"),
        ("docking error st. dev (m)", "std_docking_error_m", "{:.3f}"),
        ("docking success rate", "success_rate", "{:.0%}"),
    ]
    for label, key, fmt in rows:
        cells = []
        for name in harness.CONTROLLERS:
            value = summary.per_controller[name][key]
            cells.append("n/a" if value is None else fmt.format(value))
        print(f"{label:<28}{cells[0]:>12}{cells[1]:>12}")
    print(f"bound-compliant runs: {summary.bound_compliant_runs}"
          f"/{len(summary.per_run)}")
    print(f"outputs in {out_dir}")
    return EXIT_OK


def _read_run_csv(path: str):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [row for row in reader]
    if header != harness.CSV_HEADER:
        raise ValueError(f"{path}: unexpected header")
    data = np.array(rows, dtype=float)
    cols = {name: data[:, i] for i, name in enumerate(header)}
    return cols


def cmd_analyze(args) -> int:
    records_dir = args.records_dir
    out_dir = args.out_dir or records_dir
    config_path = os.path.join(records_dir, "config.json")
    if not os.path.isfile(config_path):
        print(f"analyze: missing {config_path}", file=sys.stderr)
        return EXIT_ANALYSIS
    with open(config_path) as fh:
        cfg = json.load(fh)

    csv_paths = sorted(glob.glob(os.path.join(records_dir, "run_*.csv")))
    if not csv_paths:
        print(f"analyze: no run CSVs in {records_dir}", file=sys.stderr)
        return EXIT_ANALYSIS

    from .controllers import ControllerGains

    gains = ControllerGains(kp=np.array(cfg["gains"]["Kp"]),
                            kd=np.array(cfg["gains"]["Kd"]))
    configured = UncertaintyBounds(delta_d=cfg["bounds"]["delta_D"],
                                   delta_r=cfg["bounds"]["delta_R"])
    theory = analysis.invariant_set_level(gains, configured)
    lyap = analysis.LyapunovParams.from_gains(gains)

    per_run = []
    curves = {}
    time_axis = None
    for path in csv_paths:
        run_id = os.path.basename(path)[len("run_"):-len(".csv")]
        try:
            cols = _read_run_csv(path)
        except (ValueError, OSError) as exc:
            print(f"analyze: corrupt record {path}: {exc}", file=sys.stderr)
            return EXIT_ANALYSIS
        e = np.column_stack([cols["e_x"], cols["e_y"], cols["e_z"]])
        edot = np.column_stack([cols["edot_x"], cols["edot_y"], cols["edot_z"]])
        times = cols["t"]

        meta_path = path[:-len(".csv")] + ".json"
        delta_r = None
        if os.path.isfile(meta_path):
            with open(meta_path) as fh:
                delta_r = json.load(fh).get("measured_delta_r")
        if delta_r is None:
            delta_r = configured.delta_r
        measured = UncertaintyBounds(delta_d=configured.delta_d, delta_r=delta_r)
        bound = analysis.invariant_set_level(gains, measured)
        verdict = analysis.boundedness_verdict(times, e, edot, bound, lyap)
        compliant = (verdict.entered and not verdict.exited_after_entry
                     and verdict.max_e_norm_after_entry is not None
                     and verdict.max_e_norm_after_entry <= bound.e_norm_ceiling)
        per_run.append({
            "run": run_id,
            "measured_delta_r": delta_r,
            "e_norm_ceiling_measured": bound.e_norm_ceiling,
            "entry_time": verdict.entry_time,
            "exited_after_entry": verdict.exited_after_entry,
            "max_e_norm_after_entry": verdict.max_e_norm_after_entry,
            "bound_compliant": bool(compliant),
        })
        curves[run_id] = np.linalg.norm(e, axis=1)
        if time_axis is None or len(times) > len(time_axis):
            time_axis = times

    n_compliant = sum(r["bound_compliant"] for r in per_run)
    report = {
        "records_dir": os.path.abspath(records_dir),
        "n_runs": len(per_run),
        "delta_d_configured": configured.delta_d,
        "delta_r_configured": configured.delta_r,
        "e_norm_ceiling_configured": theory.e_norm_ceiling,
        "e_dot_norm_ceiling_configured": theory.e_dot_norm_ceiling,
        "invariant_set_level_configured": theory.level,
        "delta_r_measured_max": max(r["measured_delta_r"] for r in per_run),
        "bound_compliant_runs": n_compliant,
        "compliance_rate": n_compliant / len(per_run),
        "per_run": per_run,
    }
    os.makedirs(out_dir, exist_ok=True)
    report_path = os.path.join(out_dir, "bound_report.json")
    with open(report_path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")

    curves_path = os.path.join(out_dir, "enorm_curves.csv")
    run_ids = sorted(curves)
    with open(curves_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"e_norm_{rid}" for rid in run_ids] + ["ceiling"])
        for i, t in enumerate(time_axis):
            row = [repr(float(t))]
            for rid in run_ids:
                series = curves[rid]
                row.append(repr(float(series[i])) if i < len(series) else "")
            row.append(repr(float(theory.e_norm_ceiling)))
            writer.writerow(row)

    print(f"analyze: {n_compliant}/{len(per_run)} runs bound-compliant; "
          f"report {report_path}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "batch":
            return cmd_batch(args)
        return cmd_analyze(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
