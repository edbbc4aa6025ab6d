"""
Main entry point for honeyguard
"""

import argparse
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml
from rich.console import Console
from rich.table import Table

from honeyguard.adapt.channel import make_channel
from honeyguard.adapt.policy import UpdatePolicy, parse_seconds
from honeyguard.bench.replay import EvaluationReport, default_origin, replay
from honeyguard.bench.report import emit_report, load_report, save_report
from honeyguard.bench.scenario import (ScenarioConfig, generate_synthetic, separable_scenario,
                                       shift_scenario)
from honeyguard.bench.sweep import duration_sweep, write_sweep
from honeyguard.core.config import config
from honeyguard.core.errors import ConfigError, EmptyWindow, InputError
from honeyguard.core.logger import logger
from honeyguard.core.types import IngestStats, NetConfig, TimeWindow
from honeyguard.features.dataset import balance_dataset, build_dataset
from honeyguard.gateway.detector import HandlingPolicy
from honeyguard.ingest.labeling import load_roles, write_roles
from honeyguard.ingest.ndjson import read_packets, write_ndjson
from honeyguard.ingest.pcap import write_pcap
from honeyguard.ingest.store import TrafficStore
from honeyguard.ml.algorithms import AlgorithmKind, AlgorithmSpec
from honeyguard.ml.model import train
from honeyguard.ml.serialization import save_model
from honeyguard.utils.performance import PerformanceMonitor

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INPUT = 2

console = Console()


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='key=value (or YAML) file; overrides flags')
    common.add_argument('--local-net', help='local CIDR(s), comma separated')
    common.add_argument('--honeypot', help='honeypot address(es), comma separated')
    common.add_argument('--devices', help='device address(es), comma separated')
    common.add_argument('--seed', type=int, help='model / scenario seed (u64)')
    common.add_argument('--log-level', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])
    common.add_argument('--db', help='record runs in this SQLite run registry')
    return common


def _model_options() -> argparse.ArgumentParser:
    options = argparse.ArgumentParser(add_help=False)
    options.add_argument('--algo', choices=list(a.value for a in AlgorithmKind))
    options.add_argument('--eval-window', type=float, help='seconds')
    options.add_argument('--roles', help='ground-truth CSV (addr,label) from `gen`')
    return options


def create_arg_parser() -> argparse.ArgumentParser:
    """Create command line argument parser"""
    parser = argparse.ArgumentParser(
        prog='honeyguard',
        description="honeyguard - self-adaptive IoT traffic anomaly detection replay",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s gen --scenario shift --format pcap --out data/shift
  %(prog)s replay data/shift/traffic.pcap --roles data/shift/roles.csv --policy dum --out out/dum
  %(prog)s sweep data/sep/traffic.ndjson --durations 3600,7200,inf --out out/sweep
  %(prog)s report out/dum/report.json --out out/dum-again
        """
    )
    common = _common_options()
    model = _model_options()
    subparsers = parser.add_subparsers(dest='command', help='Available commands')

    ingest = subparsers.add_parser('ingest', parents=[common], help='pcap/NDJSON -> NDJSON')
    ingest.add_argument('input')
    ingest.add_argument('--out', required=True, help='NDJSON output file')

    gen = subparsers.add_parser('gen', parents=[common], help='Generate a synthetic scenario')
    gen.add_argument('--scenario', choices=['separable', 'shift'], default='shift')
    gen.add_argument('--scenario-file', help='YAML ScenarioConfig (overrides --scenario)')
    gen.add_argument('--duration', type=float, help='seconds')
    gen.add_argument('--format', choices=['ndjson', 'pcap'], default='ndjson')
    gen.add_argument('--out', required=True, help='output directory')

    train_cmd = subparsers.add_parser('train', parents=[common, model],
                                      help='Train one model on a capture window')
    train_cmd.add_argument('input')
    train_cmd.add_argument('--start', type=float, default=0.0, help='window start (relative s)')
    train_cmd.add_argument('--end', type=float, help='window end (relative s)')
    train_cmd.add_argument('--out', required=True, help='model file')

    replay_cmd = subparsers.add_parser('replay', parents=[common, model],
                                       help='Replay a capture with SCM/DUM updates')
    replay_cmd.add_argument('input')
    replay_cmd.add_argument('--policy', choices=['scm', 'dum'])
    replay_cmd.add_argument('--t-duration', help='seconds or inf')
    replay_cmd.add_argument('--t-update', type=float, help='seconds')
    replay_cmd.add_argument('--handling', choices=['record_and_pass', 'filter_drop'])
    replay_cmd.add_argument('--no-timings', action='store_true',
                            help='leave wall-clock training seconds out of the outputs')
    replay_cmd.add_argument('--out', required=True, help='report directory')

    report_cmd = subparsers.add_parser('report', parents=[common],
                                       help='Re-emit report files from report.json')
    report_cmd.add_argument('report')
    report_cmd.add_argument('--no-timings', action='store_true')
    report_cmd.add_argument('--out', required=True, help='report directory')

    sweep = subparsers.add_parser('sweep', parents=[common, model],
                                  help='T_duration sweep (DUM) over algorithms')
    sweep.add_argument('input')
    sweep.add_argument('--algos', default='dt,rf', help='comma separated algorithms')
    sweep.add_argument('--durations', default='3600,7200,14400',
                       help='comma separated T_duration values (seconds or inf)')
    sweep.add_argument('--t-update', type=float, help='seconds')
    sweep.add_argument('--no-timings', action='store_true')
    sweep.add_argument('--out', required=True, help='output directory')

    return parser


def apply_settings(args) -> None:
    """Flags first, then the --config file on top of them"""
    flags = {
        'network.local_nets': getattr(args, 'local_net', None),
        'network.honeypots': getattr(args, 'honeypot', None),
        'network.devices': getattr(args, 'devices', None),
        'learning.seed': getattr(args, 'seed', None),
        'learning.algorithm': getattr(args, 'algo', None),
        'gateway.eval_window': getattr(args, 'eval_window', None),
        'gateway.handling': getattr(args, 'handling', None),
        'adapt.policy': getattr(args, 'policy', None),
        'adapt.t_duration': getattr(args, 't_duration', None),
        'adapt.t_update': getattr(args, 't_update', None),
        'logging.level': getattr(args, 'log_level', None),
        'database.path': getattr(args, 'db', None),
    }
    config.apply_overrides({k: v for k, v in flags.items() if v is not None})
    if getattr(args, 'db', None):
        config.set('database.enabled', True)
    if getattr(args, 'no_timings', False):
        config.set('report.include_timings', False)
    if getattr(args, 'config', None):
        config.load_file(args.config)
    if not config.validate():
        raise ConfigError("configuration failed validation")
    logger.set_level(str(config.get('logging.level', 'INFO')))


def _registry():
    if not config.get('database.enabled', False):
        return None
    from honeyguard.database.manager import RunRegistry
    return RunRegistry(config.get('database.path'))


def _truth(args):
    return load_roles(args.roles) if getattr(args, 'roles', None) else None


def _origin() -> Optional[float]:
    origin = config.get('replay.origin')
    return None if origin is None else float(origin)


def _stats_table(stats: IngestStats) -> Table:
    table = Table(title="Ingest")
    table.add_column("counter")
    table.add_column("value", justify="right")
    for name, value in stats.as_dict().items():
        table.add_row(name, str(value))
    return table


def _report_table(report: EvaluationReport) -> Table:
    table = Table(title=f"{report.params.get('policy', '?')} / {report.params.get('algorithm', '?')}")
    for column in ("window", "hosts", "tp", "fp", "fn", "tn", "f1", "model"):
        table.add_column(column, justify="right")
    for w in report.windows:
        m = w.metrics
        if m is None:
            table.add_row(f"{w.window.start:g}-{w.window.end:g}", str(w.active_hosts),
                          "", "", "", "", "deferred", "")
            continue
        table.add_row(f"{w.window.start:g}-{w.window.end:g}", str(w.active_hosts),
                      str(m.tp), str(m.fp), str(m.fn), str(m.tn), f"{m.f1:.4f}",
                      f"{w.model_trained_at:g}")
    return table


def run_ingest_command(args) -> int:
    stats = IngestStats()
    count = write_ndjson(args.out, read_packets(args.input, stats))
    logger.info("Capture converted", input=args.input, output=args.out, records=count)
    console.print(_stats_table(stats))
    return EXIT_OK


def _scenario_from_args(args) -> ScenarioConfig:
    seed = int(config.get('learning.seed', 0))
    if args.scenario_file:
        try:
            with open(args.scenario_file, 'r', encoding='utf-8') as fh:
                data = yaml.safe_load(fh) or {}
        except (OSError, yaml.YAMLError) as e:
            raise InputError(f"cannot read scenario file: {e}") from e
        return ScenarioConfig.from_dict(data)
    overrides: Dict[str, Any] = {}
    if args.duration:
        overrides['duration'] = args.duration
    if args.scenario == 'separable':
        return separable_scenario(seed, **overrides)
    return shift_scenario(seed, **overrides)


def run_gen_command(args) -> int:
    scenario = _scenario_from_args(args)
    traffic = generate_synthetic(scenario)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.format == 'pcap':
        capture = out / 'traffic.pcap'
        write_pcap(capture, traffic.records)
    else:
        capture = out / 'traffic.ndjson'
        write_ndjson(capture, traffic.records)
    write_roles(out / 'roles.csv', traffic.roles)
    with open(out / 'scenario.yaml', 'w', encoding='utf-8') as fh:
        yaml.safe_dump(_plain(scenario.to_dict()), fh, sort_keys=False)
    logger.info("Scenario written", capture=str(capture), packets=len(traffic.records),
                hosts=len(traffic.roles))
    return EXIT_OK


def _plain(value):
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def run_train_command(args) -> int:
    net = NetConfig.from_config(config)
    spec = AlgorithmSpec.from_config(config)
    eval_window = float(config.get('gateway.eval_window', 3600))
    stats = IngestStats()
    store = TrafficStore(stats)
    first_ts = last_ts = None
    for packet in read_packets(args.input, stats):
        if first_ts is None:
            first_ts = packet.ts
        last_ts = packet.ts
        store.ingest(packet, net)
    if first_ts is None:
        raise InputError(f"{args.input} holds no packets")

    origin = _origin()
    origin = default_origin(first_ts, eval_window) if origin is None else origin
    end = args.end
    if end is None:
        end = (math.floor((last_ts - origin) / eval_window) + 1) * eval_window
    window = TimeWindow(origin + args.start, origin + end)

    try:
        dataset = build_dataset(store, window, net)
        dataset = balance_dataset(dataset, config.get('learning.balance_ratio'), spec.seed)
        model = train(spec, dataset)
    except EmptyWindow as e:
        raise InputError(f"nothing to train on in {args.input}: {e}") from e
    size = save_model(args.out, model)
    benign, malicious = model.class_counts
    logger.info("Model saved", path=args.out, bytes=size, algorithm=spec.kind.value,
                benign=benign, malicious=malicious, seconds=round(model.train_seconds, 4))
    console.print(f"trained {spec.kind.value} on {len(dataset)} hosts "
                  f"({benign} benign / {malicious} malicious) -> {args.out}")
    return EXIT_OK


def run_replay_command(args) -> int:
    net = NetConfig.from_config(config)
    spec = AlgorithmSpec.from_config(config)
    policy = UpdatePolicy.from_config(config)
    eval_window = float(config.get('gateway.eval_window', 3600))
    include_timings = bool(config.get('report.include_timings', True))
    top_ports = config.get('report.top_ports', 10)
    channel = make_channel(config.get('adapt.channel', 'memory'), config.get('adapt.channel_path'))

    registry = _registry()
    run = None
    if registry is not None:
        run = registry.create_run(args.input, {
            'policy': policy.kind.value,
            't_duration': 'inf' if policy.is_infinite else policy.t_duration,
            't_update': policy.t_update, 'algorithm': spec.kind.value,
            'seed': spec.seed, 'eval_window': eval_window,
        }, config.to_dict())

    try:
        stats = IngestStats()
        report = replay(
            read_packets(args.input, stats), policy, spec, net, eval_window,
            truth=_truth(args),
            origin=_origin(),
            handling=HandlingPolicy.parse(config.get('gateway.handling', 'record_and_pass')),
            channel=channel,
            retain_on_single_class=bool(config.get('adapt.retain_on_single_class', True)),
            balance_ratio=config.get('learning.balance_ratio'),
            top_ports=None if top_ports is None else int(top_ports),
            stats=stats,
            monitor=PerformanceMonitor(),
        )
        emit_report(report, args.out, include_timings)
        save_report(report, Path(args.out) / 'report.json', include_timings)
        config.save(str(Path(args.out) / 'config.yaml'))
    except Exception as e:
        if registry is not None:
            registry.fail_run(run.id, str(e))
        raise

    if registry is not None:
        registry.complete_run(run.id, report, str(args.out))
    console.print(_report_table(report))
    mean = report.mean_f1()
    console.print(f"mean F1: {'n/a' if mean is None else f'{mean:.4f}'}  "
                  f"deferred windows: {report.deferred_windows}  "
                  f"flagged hosts: {len(report.malicious_list)}")
    return EXIT_OK


def run_report_command(args) -> int:
    report = load_report(args.report)
    emit_report(report, args.out, bool(config.get('report.include_timings', True)))
    console.print(_report_table(report))
    return EXIT_OK


def _parse_list(text: str) -> List[str]:
    return [part.strip() for part in text.split(',') if part.strip()]


def run_sweep_command(args) -> int:
    net = NetConfig.from_config(config)
    spec = AlgorithmSpec.from_config(config)
    eval_window = float(config.get('gateway.eval_window', 3600))
    t_update = float(config.get('adapt.t_update', 3600))
    algorithms = [AlgorithmKind.parse(a) for a in _parse_list(args.algos)]
    durations = [parse_seconds(d) for d in _parse_list(args.durations)]

    records = list(read_packets(args.input))
    rows = duration_sweep(records, net, algorithms, durations, spec, t_update, eval_window,
                          truth=_truth(args), origin=_origin())
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_sweep(out / 'duration_sweep.csv', rows,
                bool(config.get('report.include_timings', True)))

    table = Table(title="T_duration sweep")
    for column in ("algorithm", "t_duration", "last F1", "rows", "mean s", "var s"):
        table.add_column(column, justify="right")
    for row in rows:
        table.add_row(row.algorithm, 'inf' if math.isinf(row.t_duration) else f"{row.t_duration:g}",
                      'n/a' if row.last_f1 is None else f"{row.last_f1:.4f}",
                      str(row.train_rows), f"{row.train_seconds_mean:.4f}",
                      f"{row.train_seconds_variance:.6f}")
    console.print(table)
    return EXIT_OK


COMMANDS = {
    'ingest': run_ingest_command,
    'gen': run_gen_command,
    'train': run_train_command,
    'replay': run_replay_command,
    'report': run_report_command,
    'sweep': run_sweep_command,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    parser = create_arg_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        return EXIT_INPUT

    try:
        apply_settings(args)
        logger.info("honeyguard starting", version=config.get('app.version', '1.0.0'),
                    command=args.command)
        return COMMANDS[args.command](args)
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        return EXIT_FAILURE
    except (InputError, FileNotFoundError, IsADirectoryError) as e:
        logger.log_error(e, args.command)
        return EXIT_INPUT
    except Exception as e:
        logger.log_error(e, args.command)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
