from django.core.management.base import CommandError

from apps.diffusion.services.mdpde import MdpdeConfig, mdpde_estimate, robust_discrepancy
from apps.diffusion.services.regression import build_design, cir_confidence_intervals, ols_estimate
from apps.experiments.management.base import JumpSiftCommand
from apps.experiments.services.csv_io import write_design_csv


class Command(JumpSiftCommand):
    help = 'Fit OLS (alpha=0) or MDPDE (alpha>0) to a path CSV and print the estimate as JSON'

    def add_arguments(self, parser):
        self.add_path_argument(parser)
        parser.add_argument('--alpha', type=float, default=0.0,
                            help='Density power divergence tuning parameter')
        parser.add_argument('--compare', action='store_true',
                            help='Also report the OLS fit and the relative robust-vs-classical gaps')
        parser.add_argument('--ci', type=float, default=None, metavar='LEVEL',
                            help='Add plug-in CIR confidence intervals for the OLS fit at this level (gamma must be 0.5)')
        parser.add_argument('--design-out', default=None,
                            help='Also write the regression design as y,z1,z2,x_prev CSV')
        self.add_optimizer_arguments(parser)
        self.add_output_argument(parser)

    def run(self, **options):
        if options['ci'] is not None and options['gamma'] != 0.5:
            raise CommandError('--ci needs the CIR case, --gamma 0.5')
        path = self.load_path(options['source'])
        design = build_design(path, options['gamma'])
        ols = ols_estimate(design)
        estimate = mdpde_estimate(design, MdpdeConfig(
            alpha=options['alpha'], init=ols, tol=options['tol'], max_iters=options['max_iters'],
        ))
        if not estimate.converged:
            self.stderr.write(f'⚠️  MDPDE alpha={options["alpha"]} did not converge',
                              style_func=self.style.WARNING)

        payload = {'n': path.n, 'delta_n': path.scheme.delta_n, 'gamma': options['gamma'],
                   'estimate': estimate.to_dict()}
        if options['compare']:
            payload['ols'] = ols.to_dict()
            payload['relative_gap'] = robust_discrepancy(ols, estimate)
        if options['ci'] is not None:
            # the asymptotic covariance is that of the OLS estimator
            intervals = cir_confidence_intervals(ols, path.scheme, level=options['ci'])
            payload['confidence_intervals'] = {
                'level': options['ci'],
                'estimator': 'ols',
                **{name: list(bounds) for name, bounds in intervals.items()},
            }
        if options['design_out']:
            write_design_csv(design, options['design_out'])
            self.stderr.write(f'✅ Wrote {options["design_out"]}', style_func=self.style.SUCCESS)
        self.emit_json(payload, options['out'])
