"""Command line entry point: ``crawlsieve analyze | synth | render``."""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

import numpy as np

from . import blocklist, synthgen, visualize, workload
from .config import ConfigError, RunConfig
from .hierarchy import run_hierarchy
from .ingest import FormatError, compile_format, parse_files
from .timeline import Level

log = logging.getLogger("crawlsieve")

ARTIFACTS = (
    "blocklist.txt", "subnets_b.csv", "subnets_c.csv",
    "blocked.png", "filtered.png", "loading.png", "workload.csv",
)
POINTS_FILE = "points.csv"


def _load_config(args, require_format=True) -> RunConfig:
    if args.config:
        cfg = RunConfig.load(args.config, require_format)
    elif require_format:
        raise ConfigError("missing required key 'log_format' (no --config given)")
    else:
        cfg = RunConfig.from_mapping({}, require_format=False)
    if getattr(args, "ds", None) is not None:
        if args.ds <= 0:
            raise ConfigError("--ds must be positive")
        cfg.ds = args.ds
    if getattr(args, "out", None):
        cfg.out_dir = args.out
    if getattr(args, "inputs", None):
        cfg.inputs = list(args.inputs)
    return cfg


def _plot_spec(cfg: RunConfig) -> visualize.PlotSpec:
    return visualize.PlotSpec(width=cfg.plot_width, height=cfg.plot_height, y_axis=cfg.plot_y_axis)


def points_csv(records, classes) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["timestamp", "ip", "class"])
    for r, c in zip(records, classes):
        writer.writerow([r.timestamp, r.ip_text, c])
    return buf.getvalue()


def render_all(out: Path, timestamps, ips, classes, start_minute, layers, spec) -> None:
    visualize.render_scatter(
        timestamps, ips, classes, out / "blocked.png",
        which=(visualize.BLOCKED_IP, visualize.BLOCKED_C, visualize.BLOCKED_B),
        spec=spec, title="blocked requests",
    )
    visualize.render_scatter(
        timestamps, ips, classes, out / "filtered.png",
        which=(workload.ALLOWED,), spec=spec, title="allowed requests",
    )
    visualize.render_load(start_minute, layers, out / "loading.png", spec)


def cmd_analyze(args) -> int:
    cfg = _load_config(args)
    spec = compile_format(cfg.log_format)
    if not spec.has_timestamp:
        raise ConfigError("log_format needs a date slot and a {HH:MM:SS} slot")
    if not cfg.inputs:
        raise ConfigError("no input log files (pass paths or set 'inputs')")
    if not cfg.out_dir:
        raise ConfigError("no output directory (pass --out or set 'out_dir')")
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    report = parse_files(spec, cfg.inputs)
    records = report.records
    results = run_hierarchy(records, cfg.params)
    entries = blocklist.finalize(results)
    blocklist.write_outputs(entries, results, out)

    wcfg = workload.WorkloadConfig(cfg.ds)
    analysis = workload.stage_table(records, results, wcfg)
    (out / "workload.csv").write_text(workload.workload_csv(analysis), encoding="utf-8", newline="")
    classes = visualize.classify(analysis.assignment)
    (out / POINTS_FILE).write_text(points_csv(records, classes), encoding="utf-8", newline="")

    layers = [(label, s.values) for label, s in visualize.load_layers(analysis.series)]
    start = analysis.series["None"].start
    render_all(out, [r.timestamp for r in records], [r.ip for r in records], classes, start, layers,
               _plot_spec(cfg))

    counts = {level: len(results[level].blocked()) for level in (Level.IP, Level.C, Level.B)}
    print(f"lines: {report.total_lines}  parsed: {len(records)}  skipped: {report.skipped}")
    if report.skipped_lines:
        print(f"first skipped lines: {', '.join(map(str, report.skipped_lines[:10]))}")
    print(f"entities: {len(results[Level.IP].timelines)} IPs, {len(results[Level.C].timelines)} /24, "
          f"{len(results[Level.B].timelines)} /16")
    print(f"blocked: {counts[Level.IP]} IPs, {counts[Level.C]} /24, {counts[Level.B]} /16; "
          f"blocklist entries: {len(entries)}")
    print()
    print(workload.format_table(analysis.rows))
    return 0


def cmd_synth(args) -> int:
    cfg = _load_config(args, require_format=False)
    out = Path(args.out or cfg.out_dir or ".")
    regions = synthgen.parse_regions(args.regions)
    corpus = synthgen.generate(regions, args.humans, args.seed, args.days, cfg.log_format
                               if args.config else synthgen.GENERATOR_FORMAT)
    log_path, labels_path = corpus.write(out)
    print(f"wrote {len(corpus.lines)} lines to {log_path} and labels to {labels_path}")
    return 0


def _read_points(path: Path):
    from .ingest import ip_to_int

    timestamps, ips, classes = [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        for ts, ip, cls in reader:
            timestamps.append(int(ts))
            ips.append(ip_to_int(ip))
            classes.append(cls)
    return timestamps, ips, classes


def cmd_render(args) -> int:
    cfg = _load_config(args, require_format=False)
    out = Path(args.out or cfg.out_dir or ".")
    for name in (POINTS_FILE, "workload.csv"):
        if not (out / name).exists():
            raise FileNotFoundError(f"{out / name} not found; run 'analyze' first")
    timestamps, ips, classes = _read_points(out / POINTS_FILE)
    start, columns = workload.read_workload_csv((out / "workload.csv").read_text(encoding="utf-8"))
    series = {"None": workload.LoadSeries(start, columns["baseline"])}
    for stage in workload.STAGES:
        name = "after_" + stage.name.lower().replace(" ", "_")
        if name in columns:
            series[stage.name] = workload.LoadSeries(start, columns[name])
    layers = [(label, np.asarray(s.values)) for label, s in visualize.load_layers(series)]
    render_all(out, timestamps, ips, classes, start, layers, _plot_spec(cfg))
    print(f"re-rendered plots in {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crawlsieve", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="parse logs, score entities, write blocklist and reports")
    p.add_argument("--config", required=True, help="key = value config file")
    p.add_argument("--out", help="output directory (overrides out_dir)")
    p.add_argument("--ds", type=float, help="fixed request duration in seconds for workload estimates")
    p.add_argument("inputs", nargs="*", help="access log files (override 'inputs')")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synth", help="write a labeled synthetic corpus")
    p.add_argument("--config", help="config file; its log_format is used for rendering")
    p.add_argument("--out", help="output directory")
    p.add_argument("--regions", default="", help="comma separated region ids A-J, or ALL")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--humans", type=int, default=50, help="number of human visitors")
    p.add_argument("--days", type=int, default=synthgen.DAYS)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("render", help="re-plot from points.csv and workload.csv")
    p.add_argument("--config", help="config file for plot options")
    p.add_argument("--out", help="directory holding a previous analyze run")
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, FormatError) as exc:
        print(f"crawlsieve: config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"crawlsieve: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
