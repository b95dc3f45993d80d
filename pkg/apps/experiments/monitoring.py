"""
Structured logging and timing for pipeline stages
"""
import functools
import logging
import time
from typing import Any, Callable, Dict, Optional

logger = logging.getLogger(__name__)


class StageMonitor:
    """Per-process counters for simulate / estimate / detect stages"""

    def __init__(self):
        self.calls: Dict[str, int] = {}
        self.failures: Dict[str, int] = {}
        self.seconds: Dict[str, float] = {}

    def log_stage(
        self,
        stage: str,
        duration_ms: float,
        success: bool,
        error: Optional[str] = None,
        **extra_fields
    ):
        """
        Log one stage execution with structured data

        Args:
            stage: Stage name (e.g. 'simulate', 'estimate', 'detect')
            duration_ms: Wall time in milliseconds
            success: Whether the stage returned normally
            error: Error message if it raised
            **extra_fields: Additional fields to log
        """
        self.calls[stage] = self.calls.get(stage, 0) + 1
        self.seconds[stage] = self.seconds.get(stage, 0.0) + duration_ms / 1000.0
        if not success:
            self.failures[stage] = self.failures.get(stage, 0) + 1

        log_data = {
            'event_type': 'pipeline_stage',
            'stage': stage,
            'duration_ms': round(duration_ms, 3),
            'success': success,
            'stage_calls': self.calls[stage],
            'stage_failures': self.failures.get(stage, 0),
        }
        if error:
            log_data['error'] = error
        log_data.update(extra_fields)

        if success:
            logger.debug(f'Stage {stage} completed in {duration_ms:.2f}ms', extra=log_data)
        else:
            logger.warning(f'Stage {stage} failed after {duration_ms:.2f}ms: {error}', extra=log_data)

    def get_stats(self) -> Dict[str, Dict[str, float]]:
        return {
            stage: {
                'calls': calls,
                'failures': self.failures.get(stage, 0),
                'seconds': round(self.seconds.get(stage, 0.0), 6),
            }
            for stage, calls in self.calls.items()
        }

    def reset(self):
        self.calls.clear()
        self.failures.clear()
        self.seconds.clear()


_monitor = StageMonitor()


def get_monitor() -> StageMonitor:
    return _monitor


def monitor_stage(stage: str):
    """
    Decorator timing a pipeline stage; exceptions are logged and re-raised

    Usage:
        @monitor_stage('simulate')
        def simulate_cell(...):
            ...
    """
    def decorator(func: Callable) -> Callable:
        @functools.wraps(func)
        def wrapper(*args, **kwargs) -> Any:
            start_time = time.perf_counter()
            error = None
            try:
                return func(*args, **kwargs)
            except Exception as e:
                error = str(e)
                raise
            finally:
                _monitor.log_stage(
                    stage=stage,
                    duration_ms=(time.perf_counter() - start_time) * 1000,
                    success=error is None,
                    error=error,
                )
        return wrapper
    return decorator


def log_event(event_type: str, **fields):
    """
    Log a custom event with structured data

    Args:
        event_type: Type of event (e.g. 'grid_started', 'grid_completed')
        **fields: Additional fields to log
    """
    log_data = {
        'event_type': event_type,
        **fields
    }

    logger.info(f'Event: {event_type}', extra=log_data)
