"""
Monte Carlo harness: simulate -> estimate -> detect -> score over a parameter grid

Work is split into path cells (n, lambda, mu_J) x replication. One path is
simulated per unit and classified for every alpha of the grid, so alpha
comparisons are paired on the same draws. Rows are returned sorted by grid
point then replication, whatever the number of workers.
"""
import itertools
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from config import __version__
from apps.diffusion.exceptions import JumpSiftError, ParameterError
from apps.diffusion.services.mdpde import MdpdeConfig, mdpde_estimate
from apps.diffusion.services.params import JumpParams
from apps.diffusion.services.regression import EstimateTheta, build_design, ols_estimate
from apps.diffusion.services.simulation import SamplePath, SimConfig, jump_index_set, simulate
from apps.detection.services.detection import (
    ThresholdSpec, detection_threshold, parse_threshold, run_detection,
)
from apps.detection.services.metrics import (
    classification_counts, d_metric, estimated_jump_stats, f1_score, realized_jump_stats,
)
from apps.experiments.monitoring import get_monitor, log_event, monitor_stage
from apps.experiments.schemas import ExperimentConfig
from apps.experiments.services.csv_io import frame_to_csv, write_json, write_text

logger = logging.getLogger(__name__)

STATUS_OK = 'ok'
STATUS_NOT_CONVERGED = 'not_converged'
STATUS_FAILED = 'failed'

ROW_COLUMNS = [
    'n', 'delta_n', 'lambda', 'mu_J', 'sigma_J', 'alpha', 'seed', 'rep_index',
    'tp', 'fp', 'fn', 'precision', 'recall', 'f1',
    'mu_real', 'lam_real', 'mu_hat', 'lam_hat', 'd_M', 'd_M_defined',
    'beta1_hat', 'beta2_hat', 'sigma_hat', 'converged', 'status',
]
GROUP_COLUMNS = ['n', 'delta_n', 'lambda', 'mu_J', 'alpha']


@dataclass(frozen=True)
class GridPoint:
    n: int
    lam: float
    mu_j: float
    alpha: float


@dataclass(frozen=True)
class PathCell:
    """A (n, lambda, mu_J) combination and its position in the grid"""
    key: Tuple[int, int, int]
    n: int
    lam: float
    mu_j: float


@dataclass
class GridResultRow:
    n: int
    delta_n: float
    lam: float
    mu_j: float
    sigma_j: float
    alpha: float
    seed: int
    rep_index: int
    tp: int = 0
    fp: int = 0
    fn: int = 0
    precision: float = math.nan
    recall: float = math.nan
    f1: float = math.nan
    mu_real: float = math.nan
    lam_real: float = math.nan
    mu_hat: float = math.nan
    lam_hat: float = math.nan
    d_m: float = math.nan
    d_m_defined: bool = False
    beta1_hat: float = math.nan
    beta2_hat: float = math.nan
    sigma_hat: float = math.nan
    converged: bool = False
    status: str = STATUS_OK
    elapsed_seconds: float = 0.0

    def to_record(self, with_timing: bool = False) -> Dict[str, object]:
        record = asdict(self)
        record['lambda'] = record.pop('lam')
        record['mu_J'] = record.pop('mu_j')
        record['sigma_J'] = record.pop('sigma_j')
        record['d_M'] = record.pop('d_m')
        record['d_M_defined'] = record.pop('d_m_defined')
        elapsed = record.pop('elapsed_seconds')
        ordered = {column: record[column] for column in ROW_COLUMNS}
        if with_timing:
            ordered['elapsed_seconds'] = elapsed
        return ordered


@dataclass
class GridResult:
    rows: pd.DataFrame
    summary: pd.DataFrame
    manifest: Dict[str, object]


def stream_seed(master_seed: int, cell_key: Sequence[int], rep_index: int) -> int:
    """
    64-bit simulation seed of one (path cell, replication) stream

    alpha is not part of the key: every alpha of a cell classifies the same
    simulated path, so alpha comparisons run on common random numbers.
    """
    sequence = np.random.SeedSequence(entropy=master_seed, spawn_key=(*cell_key, rep_index))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def path_cells(config: ExperimentConfig) -> List[PathCell]:
    cells = []
    for (i, n), (j, lam), (k, mu_j) in itertools.product(
        enumerate(config.grid_n), enumerate(config.grid_lambda), enumerate(config.grid_mu_j)
    ):
        cells.append(PathCell(key=(i, j, k), n=n, lam=lam, mu_j=mu_j))
    return cells


def cell_for_point(point: GridPoint, config: ExperimentConfig) -> PathCell:
    try:
        key = (config.grid_n.index(point.n), config.grid_lambda.index(point.lam),
               config.grid_mu_j.index(point.mu_j))
    except ValueError:
        raise ParameterError(f'{point} is not on the configured grid')
    if point.alpha not in config.grid_alpha:
        raise ParameterError(f'alpha={point.alpha} is not on the configured grid')
    return PathCell(key=key, n=point.n, lam=point.lam, mu_j=point.mu_j)


@monitor_stage('simulate')
def simulate_cell(cell: PathCell, config: ExperimentConfig, seed: int) -> SamplePath:
    return simulate(SimConfig(
        params=config.params,
        jumps=JumpParams(lam=cell.lam, mu_j=cell.mu_j, sigma_j=config.sigma_j),
        scheme=config.scheme(cell.n),
        seed=seed,
    ))


@monitor_stage('estimate')
def estimate_alpha(design, ols: EstimateTheta, alpha: float, config: ExperimentConfig) -> EstimateTheta:
    if alpha == 0:
        return ols
    return mdpde_estimate(design, MdpdeConfig(
        alpha=alpha, init=ols, tol=config.mdpde_tol, max_iters=config.mdpde_max_iters,
    ))


@monitor_stage('detect')
def score_estimate(path: SamplePath, theta: EstimateTheta, gamma: float,
                   threshold: ThresholdSpec, row: GridResultRow) -> None:
    report = run_detection(path, theta, gamma, threshold)
    counts = classification_counts(jump_index_set(path), report.detected_set, path.n)
    realized = realized_jump_stats(path)
    estimated = estimated_jump_stats(report, path.n)
    distance = d_metric(realized, estimated)

    row.tp, row.fp, row.fn = counts.tp, counts.fp, counts.fn
    row.precision = counts.precision
    row.recall = counts.recall
    row.f1 = f1_score(counts)
    row.mu_real = realized.mean if realized.mean is not None else math.nan
    row.lam_real = realized.intensity
    row.mu_hat = estimated.mean if estimated.mean is not None else math.nan
    row.lam_hat = estimated.intensity
    row.d_m = distance if distance is not None else math.nan
    row.d_m_defined = distance is not None


def run_path_cell(cell: PathCell, config: ExperimentConfig, rep_index: int,
                  alphas: Optional[Iterable[float]] = None) -> List[GridResultRow]:
    """Simulate one path and score it for each alpha; failures become status values"""
    alphas = list(config.grid_alpha if alphas is None else alphas)
    seed = stream_seed(config.master_seed, cell.key, rep_index)
    scheme = config.scheme(cell.n)
    mode, parameter = parse_threshold(config.threshold_mode)
    threshold = detection_threshold(cell.n, mode, parameter)
    gamma = config.params.gamma

    rows = [
        GridResultRow(n=cell.n, delta_n=scheme.delta_n, lam=cell.lam, mu_j=cell.mu_j,
                      sigma_j=config.sigma_j, alpha=alpha, seed=seed, rep_index=rep_index)
        for alpha in alphas
    ]

    started = time.perf_counter()
    try:
        path = simulate_cell(cell, config, seed)
        design = build_design(path, gamma)
        ols = ols_estimate(design)
    except (JumpSiftError, ArithmeticError) as e:
        logger.warning(f'Replication {rep_index} of {cell} failed before estimation: {e}')
        for row in rows:
            row.status = STATUS_FAILED
        return rows
    shared_seconds = time.perf_counter() - started

    for row in rows:
        row_started = time.perf_counter()
        try:
            theta = estimate_alpha(design, ols, row.alpha, config)
            row.beta1_hat, row.beta2_hat, row.sigma_hat = theta.beta1_hat, theta.beta2_hat, theta.sigma_hat
            row.converged = theta.converged
            row.status = STATUS_OK if theta.converged else STATUS_NOT_CONVERGED
            score_estimate(path, theta, gamma, threshold, row)
        except (JumpSiftError, ArithmeticError) as e:
            logger.warning(f'Replication {rep_index} of {cell} alpha={row.alpha} failed: {e}')
            row.status = STATUS_FAILED
        row.elapsed_seconds = shared_seconds + time.perf_counter() - row_started
    return rows


def run_single(point: GridPoint, config: ExperimentConfig, rep_index: int) -> GridResultRow:
    """One grid point and replication; identical to the matching run_grid row"""
    cell = cell_for_point(point, config)
    return run_path_cell(cell, config, rep_index, alphas=[point.alpha])[0]


def _run_unit(task: Tuple[PathCell, ExperimentConfig, int]) -> List[GridResultRow]:
    cell, config, rep_index = task
    return run_path_cell(cell, config, rep_index)


def resolve_workers(requested: Optional[int]) -> int:
    """0 or None means one worker per CPU"""
    if requested is None or requested <= 0:
        return os.cpu_count() or 1
    return requested


def rows_frame(rows: List[GridResultRow], config: ExperimentConfig, with_timing: bool = False) -> pd.DataFrame:
    alpha_order = {alpha: i for i, alpha in enumerate(config.grid_alpha)}
    cell_order = {(c.n, c.lam, c.mu_j): i for i, c in enumerate(path_cells(config))}
    ordered = sorted(rows, key=lambda r: (cell_order[(r.n, r.lam, r.mu_j)], alpha_order[r.alpha], r.rep_index))
    return pd.DataFrame([row.to_record(with_timing) for row in ordered])


def summarize(rows: pd.DataFrame) -> pd.DataFrame:
    """Per grid point aggregates; d_M is averaged over defined cases only"""
    grouped = rows.groupby(GROUP_COLUMNS, sort=False)
    summary = grouped.agg(
        replications=('rep_index', 'size'),
        failed=('status', lambda s: int((s == STATUS_FAILED).sum())),
        not_converged=('status', lambda s: int((s == STATUS_NOT_CONVERGED).sum())),
        f1_mean=('f1', 'mean'),
        f1_median=('f1', 'median'),
        precision_mean=('precision', 'mean'),
        recall_mean=('recall', 'mean'),
        d_M_mean=('d_M', 'mean'),
        d_M_defined=('d_M_defined', 'sum'),
        beta1_hat_mean=('beta1_hat', 'mean'),
        beta2_hat_mean=('beta2_hat', 'mean'),
        sigma_hat_mean=('sigma_hat', 'mean'),
    ).reset_index()
    summary['d_M_defined'] = summary['d_M_defined'].astype(int)
    summary['d_M_undefined'] = summary['replications'] - summary['d_M_defined']
    return summary


def execute_grid(config: ExperimentConfig, workers: Optional[int] = None,
                 progress: bool = False, with_timing: bool = False) -> GridResult:
    """Compute every row and the summary; nothing is written"""
    workers = resolve_workers(workers)
    tasks = [(cell, config, rep) for cell in path_cells(config) for rep in range(config.replications)]
    get_monitor().reset()
    started_at = datetime.now(timezone.utc)
    clock = time.perf_counter()
    log_event('grid_started', units=len(tasks), rows=config.grid_size, workers=workers)

    rows: List[GridResultRow] = []
    with tqdm(total=len(tasks), disable=not progress, desc='grid', unit='path') as bar:
        if workers == 1:
            results = map(_run_unit, tasks)
            for unit_rows in results:
                rows.extend(unit_rows)
                bar.update(1)
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for unit_rows in pool.map(_run_unit, tasks, chunksize=max(1, len(tasks) // (8 * workers))):
                    rows.extend(unit_rows)
                    bar.update(1)

    frame = rows_frame(rows, config, with_timing)
    summary = summarize(frame)
    wall_time = time.perf_counter() - clock
    manifest = {
        'version': __version__,
        'config': config.echo(),
        'rows': len(frame),
        'summary_rows': len(summary),
        'workers': workers,
        'started_at': started_at.isoformat(),
        'wall_time_seconds': round(wall_time, 3),
        'status_counts': {k: int(v) for k, v in frame['status'].value_counts().sort_index().items()},
        # worker processes keep their own counters
        'stage_stats': get_monitor().get_stats() if workers == 1 else {},
    }
    log_event('grid_completed', rows=len(frame), wall_time_seconds=round(wall_time, 3))
    return GridResult(rows=frame, summary=summary, manifest=manifest)


def write_grid_outputs(result: GridResult, output_dir: Path) -> Dict[str, Path]:
    output_dir = Path(output_dir)
    outputs = {
        'rows': output_dir / 'rows.csv',
        'summary': output_dir / 'summary.csv',
        'manifest': output_dir / 'manifest.json',
    }
    write_text(frame_to_csv(result.rows), outputs['rows'])
    write_text(frame_to_csv(result.summary), outputs['summary'])
    manifest = dict(result.manifest, outputs={k: str(v) for k, v in outputs.items()})
    write_json(manifest, outputs['manifest'])
    return outputs


def run_grid(config: ExperimentConfig, output_dir: Optional[Path] = None, workers: Optional[int] = None,
             progress: bool = False, with_timing: bool = False) -> GridResult:
    """Run the whole grid and write rows.csv, summary.csv and manifest.json"""
    result = execute_grid(config, workers=workers, progress=progress, with_timing=with_timing)
    write_grid_outputs(result, Path(output_dir or config.output_dir))
    return result


def alpha_sweep(path: SamplePath, gamma: float, alphas: Sequence[float], threshold: ThresholdSpec,
                tol: float = 1e-10, max_iters: int = 2000) -> pd.DataFrame:
    """
    Classify one fixed path for several alpha values

    Rows: alpha,index,time,increment,true_jump,detected,z
    """
    design = build_design(path, gamma)
    ols = ols_estimate(design)
    truth = path.true_jump_increments != 0 if path.has_ground_truth else np.zeros(path.n, dtype=bool)
    frames = []
    for alpha in alphas:
        theta = ols if alpha == 0 else mdpde_estimate(
            design, MdpdeConfig(alpha=alpha, init=ols, tol=tol, max_iters=max_iters)
        )
        report = run_detection(path, theta, gamma, threshold)
        detected = np.zeros(path.n, dtype=bool)
        detected[np.array(sorted(report.detected_set), dtype=int) - 1] = True
        frames.append(pd.DataFrame({
            'alpha': np.full(path.n, float(alpha)),
            'index': np.arange(1, path.n + 1),
            'time': path.times[1:],
            'increment': path.increments,
            'true_jump': truth,
            'detected': detected,
            'z': report.z_stats.z,
        }))
    return pd.concat(frames, ignore_index=True)
