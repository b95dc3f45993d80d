"""
Shared plumbing for the jumpsift management commands
"""
import argparse
import json
import logging
from typing import List

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from apps.diffusion.exceptions import JumpSiftError
from apps.diffusion.services.simulation import SamplePath
from apps.experiments.services.csv_io import read_path_csv, write_text

logger = logging.getLogger(__name__)


def float_list(text: str) -> List[float]:
    """argparse type for comma separated numbers, e.g. '0,0.1,0.25'"""
    try:
        values = [float(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one number")
    return values


class JumpSiftCommand(BaseCommand):
    """
    BaseCommand that turns service errors into CommandError

    Subclasses implement run(**options) instead of handle().
    """

    def handle(self, *args, **options):
        try:
            return self.run(**options)
        except JumpSiftError as e:
            logger.debug(f'{type(e).__name__}: {e}')
            raise CommandError(str(e)) from e

    def run(self, **options):
        raise NotImplementedError

    def add_path_argument(self, parser):
        parser.add_argument('--in', dest='source', required=True,
                            help='Path CSV: index,time,value[,true_jump_increment]')
        parser.add_argument('--gamma', type=float, required=True,
                            help='Known elasticity gamma in [0.5, 1]')

    def add_output_argument(self, parser):
        parser.add_argument('--out', default=None,
                            help='Output file (default: standard output)')

    def add_optimizer_arguments(self, parser):
        parser.add_argument('--tol', type=float, default=settings.JUMPSIFT_MDPDE_TOL,
                            help='Nelder-Mead objective tolerance')
        parser.add_argument('--max-iters', type=int, default=settings.JUMPSIFT_MDPDE_MAX_ITERS,
                            help='Nelder-Mead iteration cap per start')

    def load_path(self, source: str) -> SamplePath:
        return read_path_csv(source)

    def emit(self, text: str, out=None):
        """Write a finished artifact to --out or stdout"""
        if out:
            write_text(text, out)
            self.stderr.write(f'✅ Wrote {out}', style_func=self.style.SUCCESS)
        else:
            write_text(text, self.stdout)

    def emit_json(self, payload, out=None):
        self.emit(json.dumps(payload, indent=2, sort_keys=True) + '\n', out)
