import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from config import Config, RunConfig
from errors import FileFormatError, OdometryError, UsageError
from estimators import EstimatorMode
from evaluation import (
    Trajectory,
    consistency_report,
    format_report,
    format_table,
    read_speed_csv,
    read_trajectory,
    speed_csv,
    write_states,
    write_trajectory,
)
from orchestrator import OdometryPipeline, RunResult, read_dataset, write_dataset
from simulator import RunSimulator, default_world

logger = logging.getLogger(__name__)

TRAJECTORY_FILE = "trajectory.txt"
FULL_TRAJECTORY_FILE = "trajectory_full.txt"
DIAGNOSTICS_FILE = "diagnostics.jsonl"
SPEED_FILE = "speed.csv"
MAP_FILE = "map.txt"


class ArgumentParser(argparse.ArgumentParser):
    """argparse that reports usage problems as UsageError instead of exiting"""

    def error(self, message):
        raise UsageError(message)


def load_config(args: argparse.Namespace) -> RunConfig:
    """Config file, then --set pairs, then the dedicated flags"""
    config = RunConfig.from_file(args.config) if getattr(args, "config", None) else RunConfig()
    overrides: Dict[str, str] = {}
    for pair in getattr(args, "set", None) or []:
        if "=" not in pair:
            raise UsageError(f"--set expects key=value, got '{pair}'")
        key, value = pair.split("=", 1)
        overrides[key.strip()] = value.strip()
    for flag in ("mode", "undistort", "seed"):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[flag] = str(value)
    return config.with_overrides(overrides)


def cmd_simulate(config: RunConfig, output) -> Path:
    """Generate a dataset directory for the configured trajectory"""
    simulator = RunSimulator(
        world=default_world(config.gravity_norm),
        sweep_rate=config.sweep_rate,
        imu_rate=config.imu_rate,
        noise=config.noise_model() if config.imu_noise else None,
        bias=config.bias_spec(),
        pattern=config.scan_pattern(),
        range_noise=config.range_noise,
        extrinsic=config.extrinsic(),
        show_progress=config.show_progress,
    )
    run = simulator.simulate(config.trajectory_spec())
    return write_dataset(output, run.imu, run.sweeps, run.ground_truth, config.dump())


def write_run_outputs(result: RunResult, output, config: RunConfig) -> Path:
    output = Path(output)
    try:
        output.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise FileFormatError(f"Cannot create output directory {output}: {e}")
    write_trajectory(output / TRAJECTORY_FILE, result.trajectory())
    write_states(output / FULL_TRAJECTORY_FILE, result.full_states())
    result.log.write_jsonl(output / DIAGNOSTICS_FILE)
    speed_csv(result.end_states, output / SPEED_FILE)
    if config.write_map:
        result.voxel_map.dump(output / MAP_FILE)
    return output


def cmd_run(config: RunConfig, dataset_dir, output) -> RunResult:
    """Run odometry on a dataset directory and write its outputs"""
    dataset = read_dataset(dataset_dir)
    result = OdometryPipeline(config).run(dataset)
    write_run_outputs(result, output, config)
    logger.info(f"Run outputs written to {output}")
    return result


def cmd_evaluate(est_path, gt_path, align: bool = True, speed_path=None) -> Dict[str, object]:
    """Metrics of an estimated trajectory against ground truth"""
    est = read_trajectory(est_path)
    gt = read_trajectory(gt_path)
    speeds = read_speed_csv(speed_path)[:, 1] if speed_path else None
    return consistency_report(est, gt, align=align, speeds=speeds)


def cmd_ablate(config: RunConfig, dataset_dir, output, align: bool = True) -> List[Dict[str, object]]:
    """Run all three modes on one dataset, one metrics row per mode"""
    dataset = read_dataset(dataset_dir)
    if dataset.ground_truth is None:
        raise FileFormatError(f"Dataset {dataset_dir} has no ground truth to evaluate against")
    rows = []
    for mode in EstimatorMode:
        mode_config = config.with_overrides({"mode": mode.value})
        result = OdometryPipeline(mode_config).run(dataset)
        write_run_outputs(result, Path(output) / mode.value, mode_config)
        trajectory: Trajectory = result.trajectory()
        metrics = consistency_report(trajectory, dataset.ground_truth, align=align)
        rows.append({"mode": mode.value, **metrics})
    return rows


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="lio", description="Semi-elastic LiDAR-inertial odometry toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_flags(p):
        p.add_argument("--config", help="key = value run configuration file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key")
        p.add_argument("--mode", choices=[m.value for m in EstimatorMode])
        p.add_argument("--undistort", choices=["uniform", "imu"])
        p.add_argument("--seed", type=int)

    p = sub.add_parser("simulate", help="generate a synthetic dataset")
    add_config_flags(p)
    p.add_argument("--output", default=Config.DATA_DIR)

    p = sub.add_parser("run", help="run odometry on a dataset")
    add_config_flags(p)
    p.add_argument("dataset")
    p.add_argument("--output", default=Config.OUTPUT_DIR)

    p = sub.add_parser("evaluate", help="compare a trajectory with ground truth")
    p.add_argument("estimate")
    p.add_argument("ground_truth")
    p.add_argument("--no-align", action="store_true", help="skip rigid alignment")
    p.add_argument("--speed", help="per-sweep speed CSV (t,speed) for the smoothness metric")

    p = sub.add_parser("ablate", help="run all three modes and tabulate metrics")
    add_config_flags(p)
    p.add_argument("dataset")
    p.add_argument("--output", default=Config.OUTPUT_DIR)
    p.add_argument("--no-align", action="store_true")

    p = sub.add_parser("print-config", help="print the effective configuration")
    add_config_flags(p)
    return parser


def dispatch(args: argparse.Namespace) -> int:
    if args.command == "evaluate":
        report = cmd_evaluate(args.estimate, args.ground_truth, align=not args.no_align, speed_path=args.speed)
        print(format_report(report))
        return 0

    config = load_config(args)
    if args.command == "print-config":
        print(config.dump(), end="")
    elif args.command == "simulate":
        path = cmd_simulate(config, args.output)
        print(f"dataset={path}")
    elif args.command == "run":
        result = cmd_run(config, args.dataset, args.output)
        counts = result.log.counts()
        print(f"mode={result.mode.value} sweeps={len(result.end_states)} "
              f"fallback={counts['fallback']} output={args.output}")
    elif args.command == "ablate":
        print(format_table(cmd_ablate(config, args.dataset, args.output, align=not args.no_align)))
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run one subcommand, map failures to exit codes"""
    try:
        args = build_parser().parse_args(argv)
        return dispatch(args)
    except OdometryError as e:
        logger.debug(f"Command failed: {e!r}")
        print(e.one_line(), file=sys.stderr)
        return e.exit_code
    except KeyboardInterrupt:
        logger.info("Stopped by user")
        return 1
    except Exception as e:
        logger.exception(f"Unexpected failure: {e}")
        print(f"error: internal: {' '.join(str(e).split())}", file=sys.stderr)
        return 3
