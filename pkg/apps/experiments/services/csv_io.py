"""
CSV / JSON artifacts: paths, designs, detection reports, influence profiles
"""
import io
import json
import logging
from pathlib import Path
from typing import Dict, Mapping, Optional, TextIO, Union

import numpy as np
import pandas as pd

from apps.diffusion.exceptions import OutputError, PathFormatError
from apps.diffusion.services.mdpde import InfluenceProfile
from apps.diffusion.services.params import SamplingScheme
from apps.diffusion.services.regression import RegressionDesign
from apps.diffusion.services.simulation import SamplePath
from apps.detection.services.detection import DetectionReport

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'
PATH_COLUMNS = ['index', 'time', 'value', 'true_jump_increment']
REPORT_COLUMNS = ['index', 'time', 'z', 'abs_z', 'detected', 'jump_size_estimate']
# relative tolerance on the grid spacing of ingested paths
GRID_RTOL = 1e-9

Target = Union[str, Path, TextIO]


def frame_to_csv(frame: pd.DataFrame, header_line: Optional[str] = None) -> str:
    """Render a frame with full double precision and LF line endings"""
    body = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator='\n', na_rep='')
    return f'{header_line}\n{body}' if header_line is not None else body


def write_text(text: str, target: Target) -> None:
    if hasattr(target, 'write'):
        target.write(text)
        return
    path = Path(target)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='') as handle:
            handle.write(text)
    except OSError as e:
        raise OutputError(f'cannot write {path}: {e}') from e


def path_frame(path: SamplePath) -> pd.DataFrame:
    jumps = np.zeros(path.n + 1)
    if path.has_ground_truth:
        jumps[1:] = path.true_jump_increments
    frame = pd.DataFrame({
        'index': np.arange(path.n + 1),
        'time': path.times,
        'value': path.values,
    })
    if path.has_ground_truth:
        frame['true_jump_increment'] = jumps
    return frame


def write_path_csv(path: SamplePath, target: Target) -> None:
    write_text(frame_to_csv(path_frame(path)), target)


def read_path_csv(source: Union[str, Path, TextIO]) -> SamplePath:
    """
    Load `index,time,value[,true_jump_increment]` rows into a SamplePath

    The grid must be equidistant and start at time 0; row 0 of the jump
    column is ignored.
    """
    try:
        frame = pd.read_csv(source, comment='#')
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise PathFormatError(f'cannot read path CSV {source}: {e}') from e

    missing = [c for c in PATH_COLUMNS[:3] if c not in frame.columns]
    if missing:
        raise PathFormatError(f'path CSV is missing columns: {", ".join(missing)}')
    if len(frame) < 3:
        raise PathFormatError('path CSV needs at least 3 observations')
    if not np.array_equal(frame['index'].to_numpy(), np.arange(len(frame))):
        raise PathFormatError('index column must run 0, 1, ..., n')

    times = frame['time'].to_numpy(dtype=float)
    values = frame['value'].to_numpy(dtype=float)
    steps = np.diff(times)
    delta_n = float(steps.mean())
    if not np.allclose(steps, delta_n, rtol=GRID_RTOL, atol=0.0):
        raise PathFormatError('time column is not an equidistant grid')
    if abs(times[0]) > GRID_RTOL * delta_n:
        raise PathFormatError(f'time column must start at 0, got {times[0]}')

    truth = None
    if 'true_jump_increment' in frame.columns:
        truth = frame['true_jump_increment'].to_numpy(dtype=float)[1:]
        if np.any(np.isnan(truth)):
            raise PathFormatError('true_jump_increment has missing values')

    try:
        scheme = SamplingScheme(n=len(frame) - 1, delta_n=delta_n, x0=float(values[0]))
        return SamplePath(times=times, values=values, scheme=scheme, true_jump_increments=truth)
    except ValueError as e:
        raise PathFormatError(str(e)) from e


def design_frame(design: RegressionDesign) -> pd.DataFrame:
    return pd.DataFrame({
        'y': design.y,
        'z1': design.z1,
        'z2': design.z2,
        'x_prev': design.x_prev,
    })


def write_design_csv(design: RegressionDesign, target: Target) -> None:
    write_text(frame_to_csv(design_frame(design)), target)


def report_frame(report: DetectionReport, path: SamplePath) -> pd.DataFrame:
    z = report.z_stats.z
    detected = np.zeros(path.n, dtype=bool)
    sizes = np.full(path.n, np.nan)
    for index in report.detected_set:
        detected[index - 1] = True
    for index, size in (report.jump_size_estimates or {}).items():
        sizes[index - 1] = size
    frame = pd.DataFrame({
        'index': np.arange(1, path.n + 1),
        'time': path.times[1:],
        'z': z,
        'abs_z': np.abs(z),
        'detected': detected,
        'jump_size_estimate': sizes,
    })
    if path.has_ground_truth:
        frame['true_jump'] = path.true_jump_increments != 0
    return frame


def write_report_csv(report: DetectionReport, path: SamplePath, target: Target) -> None:
    """Report rows preceded by a `# {threshold json}` metadata line"""
    header = '# ' + json.dumps(report.threshold.to_dict(), sort_keys=True)
    write_text(frame_to_csv(report_frame(report, path), header_line=header), target)


def read_report_header(source: Union[str, Path]) -> Dict[str, object]:
    with open(source, encoding='utf-8') as handle:
        first = handle.readline()
    if not first.startswith('# '):
        raise PathFormatError('report CSV has no threshold metadata line')
    return json.loads(first[2:])


def influence_frame(profiles: Mapping[float, InfluenceProfile], path: Optional[SamplePath] = None) -> pd.DataFrame:
    """Stacked per-alpha rows: alpha,index,residual,contribution,likelihood[,true_jump]"""
    frames = []
    for alpha, profile in profiles.items():
        n = len(profile.residuals)
        frame = pd.DataFrame({
            'alpha': np.full(n, float(alpha)),
            'index': np.arange(1, n + 1),
            'residual': profile.residuals,
            'contribution': profile.contributions,
            'likelihood': profile.likelihoods,
        })
        if path is not None and path.has_ground_truth:
            frame['true_jump'] = path.true_jump_increments != 0
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)


def write_influence_csv(profiles: Mapping[float, InfluenceProfile], target: Target,
                        path: Optional[SamplePath] = None) -> None:
    write_text(frame_to_csv(influence_frame(profiles, path)), target)


def write_json(payload: Mapping[str, object], target: Target) -> None:
    write_text(json.dumps(payload, indent=2, sort_keys=True) + '\n', target)


def read_csv_text(text: str) -> pd.DataFrame:
    return pd.read_csv(io.StringIO(text), comment='#')
