"""
Report files: F1 transitions, port distribution, training times, update log
"""

import json
from pathlib import Path
from typing import Dict, Union

import pandas as pd

from ..core.errors import InputError
from ..core.logger import logger
from .ports import write_port_distribution
from .replay import EvaluationReport

F1_COLUMNS = ['window_start', 'window_end', 'tp', 'fp', 'fn', 'tn', 'f1', 'active_hosts',
              'labeled_hosts', 'model_trained_at', 'deferred']
TRAINING_COLUMNS = ['t', 'rows', 'seconds']
_COUNT_COLUMNS = ['tp', 'fp', 'fn', 'tn']

REPORT_FILES = ('f1_transitions.csv', 'port_distribution.csv', 'training_times.csv',
                'updates.ndjson', 'malicious_list.csv')


def _write_csv(frame: pd.DataFrame, path: Path) -> None:
    frame.to_csv(path, index=False, lineterminator='\n', na_rep='')


def f1_frame(report: EvaluationReport) -> pd.DataFrame:
    rows = []
    for w in report.windows:
        m = w.metrics
        rows.append({
            'window_start': w.window.start,
            'window_end': w.window.end,
            'tp': None if m is None else m.tp,
            'fp': None if m is None else m.fp,
            'fn': None if m is None else m.fn,
            'tn': None if m is None else m.tn,
            'f1': None if m is None else m.f1,
            'active_hosts': w.active_hosts,
            'labeled_hosts': w.labeled_hosts,
            'model_trained_at': w.model_trained_at,
            'deferred': w.deferred,
        })
    frame = pd.DataFrame(rows, columns=F1_COLUMNS)
    return frame.astype({c: 'Int64' for c in _COUNT_COLUMNS})


def training_frame(report: EvaluationReport, include_timings: bool = True) -> pd.DataFrame:
    rows = [{'t': tt.t, 'rows': tt.rows, 'seconds': tt.seconds if include_timings else None}
            for tt in report.training_times]
    frame = pd.DataFrame(rows, columns=TRAINING_COLUMNS)
    return frame.astype({'rows': 'Int64', 'seconds': 'float64'})


def emit_report(report: EvaluationReport, out_dir: Union[str, Path],
                include_timings: bool = True) -> Dict[str, Path]:
    """Write every report file into out_dir; identical reports give identical bytes

    Wall-clock training seconds are the only run-dependent values; leave them
    out with include_timings=False to compare runs byte for byte.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = {name: out / name for name in REPORT_FILES}

        _write_csv(f1_frame(report), paths['f1_transitions.csv'])
        write_port_distribution(paths['port_distribution.csv'], report.port_distribution)
        _write_csv(training_frame(report, include_timings), paths['training_times.csv'])
        with open(paths['updates.ndjson'], 'w', encoding='utf-8', newline='\n') as fh:
            for event in report.updates:
                fh.write(json.dumps(event.to_dict(include_timings), separators=(',', ':')))
                fh.write('\n')
        report.malicious_list.to_csv(paths['malicious_list.csv'])
    except OSError as e:
        logger.log_error(e, "emit_report", out_dir=str(out))
        raise

    logger.info("Report written", out_dir=str(out), windows=len(report.windows),
                updates=len(report.updates))
    return paths


def save_report(report: EvaluationReport, path: Union[str, Path],
                include_timings: bool = True) -> None:
    """Full report as JSON, reloadable with load_report"""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as fh:
        json.dump(report.to_dict(include_timings), fh, indent=2)
        fh.write('\n')


def load_report(path: Union[str, Path]) -> EvaluationReport:
    try:
        with open(path, encoding='utf-8') as fh:
            data = json.load(fh)
        return EvaluationReport.from_dict(data)
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise InputError(f"cannot load report {path}: {e}") from e
