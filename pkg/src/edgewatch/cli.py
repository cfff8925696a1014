"""
Command-line interface for the tracking and anomaly pipeline.
Provides 'run', 'eval', 'sweep', 'bench' and 'generate' commands.
"""

import argparse
import itertools
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from edgewatch.alerting.sinks import SINK_NAMES, build_sinks
from edgewatch.appearance.encoders import load_encoder_plugins
from edgewatch.config import PipelineConfig
from edgewatch.evaluation.bench import bench, prediction_lines
from edgewatch.evaluation.suite import evaluate_config, evaluate_suite
from edgewatch.evaluation.sweep import SweepConfig, format_table, run_sweep, write_sweep_table
from edgewatch.evaluation.timing import TimingModel
from edgewatch.ingestion.builtin import SUITE_NAME
from edgewatch.ingestion.descriptors import serialize_descriptors
from edgewatch.ingestion.detections import serialize_detections
from edgewatch.ingestion.labels import write_labels
from edgewatch.pipeline import Pipeline, RunLogWriter, load_scenario, open_frames


logger = logging.getLogger(__name__)

COMMANDS = ["run", "eval", "sweep", "bench", "generate"]
BENCH_SCENARIO = "bench"
DEFAULT_DK = [0, 1, 2, 5, 8]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Track people in detection streams and flag trajectory anomalies"
    )
    parser.add_argument("command", choices=COMMANDS, help="Command to execute")
    parser.add_argument("--config", help="Path to pipeline config YAML file")
    parser.add_argument(
        "--detections",
        help="Detection file (frame,id,x,y,w,h,confidence CSV or Parquet); '-' reads stdin",
    )
    parser.add_argument("--descriptors", help="Descriptor sidecar CSV for --detections")
    parser.add_argument(
        "--scenario",
        help=f"Scenario YAML file or built-in scenario name ('{SUITE_NAME}' for the whole pack)",
    )
    parser.add_argument("--labels", help="Frame label CSV (frame,label) for eval")
    parser.add_argument("--grid", help="Sweep grid YAML file")
    parser.add_argument("--templates", help="Extra anomaly templates YAML file")
    parser.add_argument(
        "--use-templates",
        action="store_true",
        default=None,
        help="Enable the template matching path",
    )
    parser.add_argument("--seed", type=int, help="Seed for synthetic scenarios")
    parser.add_argument("--output-dir", help="Directory for logs and reports")
    parser.add_argument(
        "--alert-sink",
        action="append",
        choices=SINK_NAMES,
        help="Alert sink (repeatable, default: file)",
    )
    parser.add_argument("--alert-file", help="Alert file path (hex frames, one per line)")
    parser.add_argument("--datagram-host", help="Datagram sink host")
    parser.add_argument("--datagram-port", type=int, help="Datagram sink port")
    parser.add_argument("--node-id", type=int, help="Node id stamped on alerts")
    parser.add_argument(
        "--max-cos-distance", type=float, help="Appearance gate (default: 0.9)"
    )
    parser.add_argument(
        "--nms-overlap", type=float, help="NMS IoU threshold (default: 0.3)"
    )
    parser.add_argument(
        "--encoder-size", help="Encoder input size HxW (default: 64x32)"
    )
    parser.add_argument(
        "--lambda",
        dest="lambda_weight",
        type=float,
        help="Motion weight in the association cost (default: 0.0)",
    )
    parser.add_argument("--i-max", type=int, help="Frames a track may go unmatched")
    parser.add_argument("--n-init", type=int, help="Hits needed to confirm a track")
    parser.add_argument(
        "--mahalanobis-gate", type=float, help="Squared Mahalanobis gate (default: 9.4877)"
    )
    parser.add_argument(
        "--predict",
        action="store_true",
        help="bench: print the timing model prediction instead of measuring",
    )
    parser.add_argument(
        "--dk",
        type=int,
        nargs="+",
        help="bench: detection counts to predict for",
    )
    parser.add_argument("--workers", type=int, help="Parallel sweep workers")
    parser.add_argument("--frames", type=int, help="bench: process at most this many frames")
    parser.add_argument(
        "--plugin",
        action="append",
        default=[],
        help="Module exporting an ENCODERS dict (repeatable)",
    )
    parser.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        default="WARNING",
        help="Logging level (default: WARNING)",
    )
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Main CLI entry point. Parses arguments and dispatches to the appropriate command.
    Returns exit code (0 for success, 1 for failure).
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    if args.command == "run":
        return run_command(args)
    elif args.command == "eval":
        return eval_command(args)
    elif args.command == "sweep":
        return sweep_command(args)
    elif args.command == "bench":
        return bench_command(args)
    elif args.command == "generate":
        return generate_command(args)

    return 0


def load_config(args) -> PipelineConfig:
    """
    Config file and environment first, then explicit flags on top. Plugins
    are imported before validation so plugin encoders can be named.
    """
    config = PipelineConfig.load(args.config)
    config = config.override(
        "input",
        detections=args.detections,
        descriptors=args.descriptors,
        scenario=args.scenario,
        labels=args.labels,
        templates=args.templates,
        nms_overlap=args.nms_overlap,
    )
    if args.detections and not args.scenario:
        config = replace(config, input=replace(config.input, scenario=None))
    if args.scenario and not args.detections:
        config = replace(config, input=replace(config.input, detections=None, descriptors=None))
    config = config.override("output", output_dir=args.output_dir)
    config = config.override(
        "association",
        max_cos_distance=args.max_cos_distance,
        lambda_weight=args.lambda_weight,
        i_max=args.i_max,
        n_init=args.n_init,
        mahalanobis_gate=args.mahalanobis_gate,
    )
    config = config.override("encoder", input_size=args.encoder_size)
    config = config.override("anomaly", templates_enabled=args.use_templates)
    config = config.override(
        "alerting",
        sinks=args.alert_sink,
        alert_file=args.alert_file,
        datagram_host=args.datagram_host,
        datagram_port=args.datagram_port,
        node_id=args.node_id,
    )
    config = config.override(None, seed=args.seed, workers=args.workers)
    if args.plugin:
        config = config.override(None, plugins=tuple(config.plugins) + tuple(args.plugin))
    if config.plugins:
        load_encoder_plugins(config.plugins)
    return config


def run_command(args) -> int:
    """
    Execute the 'run' command: track, detect anomalies, write logs, alert.
    """
    try:
        config = load_config(args).check()
        if config.input.scenario == SUITE_NAME:
            print(f"ERROR: '{SUITE_NAME}' can only be evaluated; run a single scenario")
            return 1
        frames, _ = open_frames(config)
        track_path = config.output.path("track_log")
        event_path = config.output.path("event_log")
        writer = RunLogWriter(track_path, event_path, config.output.flush_frames)
        pipeline = Pipeline(
            config, build_sinks(config.alerting, config.output.output_dir), writer=writer
        )
        try:
            summary = pipeline.run(frames)
        finally:
            pipeline.close()

        print(f"Frames processed: {summary.frames}")
        print(f"Anomaly events: {summary.event_count}")
        print(f"Alerts dispatched: {summary.alerts}")
        if summary.failed_deliveries:
            print(f"WARN: {summary.failed_deliveries} alert(s) failed on at least one sink")
        print(f"Track log saved to: {track_path}")
        print(f"Event log saved to: {event_path}")
        return 0
    except Exception as e:
        print(f"ERROR: {e}")
        return 1


def eval_command(args) -> int:
    """
    Execute the 'eval' command: frame-level AUC against ground truth.
    """
    try:
        config = load_config(args).check()
        if config.input.scenario == SUITE_NAME:
            report = evaluate_suite(config)
            for row in report.rows()[:-1]:
                print(f"  {row['class']:<10} {row['auc']:.4f}")
            auc = report.pooled
        else:
            auc = evaluate_config(config)
        print(f"AUC: {auc:.4f}")
        return 0
    except Exception as e:
        print(f"ERROR: {e}")
        return 1


def sweep_command(args) -> int:
    """
    Execute the 'sweep' command: AUC for every point of a parameter grid.
    """
    if not args.grid:
        print("ERROR: --grid is required for sweep command")
        return 1
    try:
        sweep = SweepConfig.from_yaml(args.grid)
        config = load_config(args).check()
        table = run_sweep(config, sweep, workers=config.workers)
        path = config.output.path("sweep_table")
        write_sweep_table(table, path)
        print(format_table(table))
        failed = int((table["error"] != "").sum())
        if failed:
            print(f"WARN: {failed} grid point(s) failed; see the error column")
        print(f"Sweep table saved to: {path}")
        return 0
    except Exception as e:
        print(f"ERROR: {e}")
        return 1


def bench_command(args) -> int:
    """
    Execute the 'bench' command: predict or measure per-frame latency.
    """
    try:
        config = load_config(args)
        if args.predict:
            config.check(require_input=False)
            for line in prediction_lines(config.timing, args.dk or DEFAULT_DK):
                print(line)
            return 0

        if not config.input.detections and not config.input.scenario:
            config = config.override("input", scenario=BENCH_SCENARIO)
        config.check()
        if config.input.scenario == SUITE_NAME:
            print(f"ERROR: bench needs a single workload, not '{SUITE_NAME}'")
            return 1
        frames, _ = open_frames(config)
        if args.frames is not None:
            frames = itertools.islice(frames, args.frames)
        sinks = build_sinks(config.alerting, config.output.output_dir)
        report = bench(config, frames, sinks)
        path = config.output.path("bench_report")
        report.write_yaml(path)

        for line in report.summary_lines():
            print(line)
        if report.frames:
            local = TimingModel.from_bench(report, od_ms=config.timing.od_ms)
            print(
                f"Local model: od {local.od_ms:.1f} ms, ta {local.ta_ms:.3f} ms, "
                f"fe {local.fe_ms:.3f} ms per detection"
            )
        print(f"Bench report saved to: {path}")
        return 0
    except Exception as e:
        print(f"ERROR: {e}")
        return 1


def generate_command(args) -> int:
    """
    Execute the 'generate' command: write a scenario's detection file,
    descriptor sidecar and frame labels.
    """
    try:
        config = load_config(args)
        if not config.input.scenario or config.input.scenario == SUITE_NAME:
            print("ERROR: --scenario naming a single scenario is required for generate")
            return 1
        config.check()
        scenario = load_scenario(config)
        output_dir = Path(config.output.output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        name = scenario.spec.name
        paths = {
            "Detections": output_dir / f"{name}_detections.csv",
            "Descriptors": output_dir / f"{name}_descriptors.csv",
            "Labels": output_dir / f"{name}_labels.csv",
        }
        serialize_detections(scenario.frames, paths["Detections"])
        serialize_descriptors(scenario.frames, paths["Descriptors"])
        write_labels(scenario, paths["Labels"])
        for label, path in paths.items():
            print(f"{label} saved to: {path}")
        return 0
    except Exception as e:
        print(f"ERROR: {e}")
        return 1


# Entry point for CLI usage
if __name__ == "__main__":
    sys.exit(main())
