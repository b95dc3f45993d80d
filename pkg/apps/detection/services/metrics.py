"""
Classification and jump-parameter accuracy metrics against ground truth
"""
import math
from dataclasses import dataclass
from typing import AbstractSet, Optional

import numpy as np

from apps.diffusion.exceptions import ParameterError
from apps.diffusion.services.simulation import SamplePath, jump_index_set
from apps.detection.services.detection import DetectionReport


@dataclass(frozen=True)
class ClassificationCounts:
    tp: int
    fp: int
    fn: int

    @property
    def precision(self) -> float:
        """tp / (tp + fp); 1 when nothing was detected and nothing was missed"""
        if self.tp + self.fp == 0:
            return 1.0 if self.fn == 0 else 0.0
        return self.tp / (self.tp + self.fp)

    @property
    def recall(self) -> float:
        if self.tp + self.fn == 0:
            return 1.0 if self.fp == 0 else 0.0
        return self.tp / (self.tp + self.fn)


@dataclass(frozen=True)
class JumpStats:
    """
    Jump mean and intensity (jumps per increment)

    mean is None when there are no jumps to average over.
    """
    mean: Optional[float]
    intensity: float
    count: int
    n: int

    def intensity_per_unit_time(self, delta_n: float) -> float:
        return self.intensity / delta_n


def classification_counts(true_set: AbstractSet[int], detected_set: AbstractSet[int],
                          n: int) -> ClassificationCounts:
    for label, indices in (('true', true_set), ('detected', detected_set)):
        if any(not 1 <= i <= n for i in indices):
            raise ParameterError(f'{label} jump indices must lie in 1..{n}')
    return ClassificationCounts(
        tp=len(true_set & detected_set),
        fp=len(detected_set - true_set),
        fn=len(true_set - detected_set),
    )


def f1_score(counts: ClassificationCounts) -> float:
    """
    Harmonic mean of precision and recall

    Both sets empty gives 1; exactly one empty, or no true positives, gives 0.
    """
    truth = counts.tp + counts.fn
    detected = counts.tp + counts.fp
    if truth == 0 and detected == 0:
        return 1.0
    if counts.tp == 0:
        return 0.0
    precision, recall = counts.precision, counts.recall
    return 2.0 * precision * recall / (precision + recall)


def _jump_stats(sizes: np.ndarray, n: int) -> JumpStats:
    count = len(sizes)
    return JumpStats(
        mean=float(np.mean(sizes)) if count else None,
        intensity=count / n,
        count=count,
        n=n,
    )


def realized_jump_stats(path: SamplePath) -> JumpStats:
    indices = sorted(jump_index_set(path))
    sizes = np.array([path.true_jump_increments[i - 1] for i in indices], dtype=float)
    return _jump_stats(sizes, path.n)


def estimated_jump_stats(report: DetectionReport, n: int) -> JumpStats:
    if report.jump_size_estimates is None:
        raise ParameterError('report has no jump size estimates')
    sizes = np.array([report.jump_size_estimates[i] for i in sorted(report.detected_set)], dtype=float)
    return _jump_stats(sizes, n)


def d_metric(realized: JumpStats, estimated: JumpStats) -> Optional[float]:
    """
    sqrt((mu_real / mu_hat - 1)^2 + (lam_real / lam_hat - 1)^2)

    None when a ratio is undefined (no detections, no true jumps, or a zero
    estimated mean).
    """
    if realized.mean is None or estimated.mean is None:
        return None
    if estimated.mean == 0 or estimated.intensity == 0:
        return None
    return math.hypot(realized.mean / estimated.mean - 1.0,
                      realized.intensity / estimated.intensity - 1.0)
