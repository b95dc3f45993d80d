"""
Management command running the Monte Carlo replication grid
"""
import json
import logging
from pathlib import Path

from django.conf import settings
from django.core.management.base import CommandError
from django.utils import timezone
from pydantic import ValidationError

from config import __version__
from apps.experiments.management.base import JumpSiftCommand, float_list
from apps.experiments.models import ExperimentRun
from apps.experiments.schemas import ExperimentConfig
from apps.experiments.services.runner import STATUS_FAILED, execute_grid, resolve_workers, write_grid_outputs

logger = logging.getLogger(__name__)

# command-line flag -> config key; flags win over the config file
OVERRIDES = {
    'output_dir': 'output_dir',
    'replications': 'replications',
    'master_seed': 'master_seed',
    'threshold': 'threshold_mode',
    'grid_n': 'grid_n',
    'grid_lambda': 'grid_lambda',
    'grid_mu_j': 'grid_mu_J',
    'grid_alpha': 'grid_alpha',
}


def int_list(text: str):
    return [int(v) for v in float_list(text)]


class Command(JumpSiftCommand):
    help = 'Run simulate -> estimate -> detect -> score over an (n, lambda, mu_J, alpha) grid'

    def add_arguments(self, parser):
        parser.add_argument('--config', default=None, help='JSON experiment configuration')
        parser.add_argument('--output-dir', default=None)
        parser.add_argument('--replications', type=int, default=None)
        parser.add_argument('--master-seed', type=int, default=None)
        parser.add_argument('--threshold', default=None, help="gumbel:<q>, additive:<c> or fixed:<value>")
        parser.add_argument('--grid-n', type=int_list, default=None)
        parser.add_argument('--grid-lambda', type=float_list, default=None)
        parser.add_argument('--grid-mu-j', type=float_list, default=None)
        parser.add_argument('--grid-alpha', type=float_list, default=None)
        parser.add_argument('--workers', type=int, default=None,
                            help='Worker processes (default: JUMPSIFT_THREADS, 0 = one per CPU)')
        parser.add_argument('--timing', action='store_true',
                            help='Add elapsed_seconds to rows.csv (output is then not reproducible)')
        parser.add_argument('--progress', action='store_true', help='Show a progress bar')
        parser.add_argument('--name', default='', help='Label for the run registry')
        parser.add_argument('--no-record', action='store_true',
                            help='Do not create an ExperimentRun registry entry')

    def load_config(self, options) -> ExperimentConfig:
        data = {}
        if options['config']:
            try:
                with open(options['config'], encoding='utf-8') as handle:
                    data = json.load(handle)
            except (OSError, json.JSONDecodeError) as e:
                raise CommandError(f'Cannot read config {options["config"]}: {e}')
            if not isinstance(data, dict):
                raise CommandError(f'Config {options["config"]} must hold a JSON object')

        for option, key in OVERRIDES.items():
            if options.get(option) is not None:
                data[key] = options[option]
        data.setdefault('output_dir', settings.JUMPSIFT_OUTPUT_DIR)
        data.setdefault('threshold_mode', settings.JUMPSIFT_DEFAULT_THRESHOLD)
        data.setdefault('mdpde_tol', settings.JUMPSIFT_MDPDE_TOL)
        data.setdefault('mdpde_max_iters', settings.JUMPSIFT_MDPDE_MAX_ITERS)

        try:
            return ExperimentConfig.model_validate(data)
        except ValidationError as e:
            details = '; '.join(
                f"{'.'.join(str(part) for part in err['loc']) or 'config'}: {err['msg']}"
                for err in e.errors()
            )
            raise CommandError(f'Invalid experiment configuration: {details}')

    def run(self, **options):
        config = self.load_config(options)
        requested = options['workers'] if options['workers'] is not None else settings.JUMPSIFT_THREADS
        workers = resolve_workers(requested)
        output_dir = Path(config.output_dir)

        self.stderr.write(
            f'🚀 {config.grid_size} rows ({config.path_cell_count} path cells x '
            f'{config.replications} replications x {len(config.grid_alpha)} alphas) on {workers} worker(s)',
            style_func=self.style.NOTICE,
        )

        run = None
        if not options['no_record']:
            run = ExperimentRun.objects.create(
                name=options['name'],
                config=config.echo(),
                output_dir=str(output_dir),
                workers=workers,
                version=__version__,
            )

        try:
            result = execute_grid(config, workers=workers, progress=options['progress'],
                                  with_timing=options['timing'])
            write_grid_outputs(result, output_dir)
        except Exception as e:
            if run is not None:
                run.status = 'failed'
                run.error = str(e)
                run.completed_at = timezone.now()
                run.save(update_fields=['status', 'error', 'completed_at'])
            raise

        failed = int((result.rows['status'] == STATUS_FAILED).sum())
        if run is not None:
            run.status = 'completed'
            run.row_count = len(result.rows)
            run.failed_rows = failed
            run.wall_time_seconds = result.manifest['wall_time_seconds']
            run.completed_at = timezone.now()
            run.save()

        self.stderr.write(
            f'✅ {len(result.rows)} rows ({failed} failed) written to {output_dir} '
            f'in {result.manifest["wall_time_seconds"]:.1f}s',
            style_func=self.style.SUCCESS,
        )
