from apps.diffusion.services.params import DEFAULT_DESIGN_EXPONENT, DiffusionParams, JumpParams, SamplingScheme
from apps.diffusion.services.simulation import SimConfig, simulate
from apps.experiments.management.base import JumpSiftCommand
from apps.experiments.services.csv_io import write_path_csv


class Command(JumpSiftCommand):
    help = 'Simulate one CKLS jump-diffusion path and write it as CSV'

    def add_arguments(self, parser):
        parser.add_argument('--n', type=int, required=True, help='Number of increments')
        parser.add_argument('--beta1', type=float, default=1.0)
        parser.add_argument('--beta2', type=float, default=0.8)
        parser.add_argument('--sigma', type=float, default=0.3)
        parser.add_argument('--gamma', type=float, default=0.7)
        parser.add_argument('--lambda', dest='lam', type=float, default=0.0,
                            help='Jump intensity per unit time')
        parser.add_argument('--mu-j', type=float, default=0.0, help='Mean jump size')
        parser.add_argument('--sigma-j', type=float, default=0.1, help='Jump size standard deviation')
        parser.add_argument('--x0', type=float, default=None,
                            help='Initial state (default: beta1 / beta2)')
        parser.add_argument('--delta-exponent', type=float, default=DEFAULT_DESIGN_EXPONENT,
                            help='Mesh delta_n = n^(-exponent)')
        parser.add_argument('--delta-n', type=float, default=None,
                            help='Explicit mesh; overrides --delta-exponent')
        parser.add_argument('--seed', type=int, required=True, help='Unsigned 64-bit seed')
        self.add_output_argument(parser)

    def run(self, **options):
        params = DiffusionParams(
            beta1=options['beta1'], beta2=options['beta2'],
            sigma=options['sigma'], gamma=options['gamma'],
        )
        jumps = JumpParams(lam=options['lam'], mu_j=options['mu_j'], sigma_j=options['sigma_j'])
        x0 = options['x0'] if options['x0'] is not None else params.mean_level
        if options['delta_n'] is not None:
            scheme = SamplingScheme(n=options['n'], delta_n=options['delta_n'], x0=x0)
        else:
            scheme = SamplingScheme.high_frequency(options['n'], x0=x0, exponent=options['delta_exponent'])

        path = simulate(SimConfig(params=params, jumps=jumps, scheme=scheme, seed=options['seed']))
        write_path_csv(path, options['out'] or self.stdout)
