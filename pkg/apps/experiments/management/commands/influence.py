from apps.diffusion.services.mdpde import fit_alphas, influence_profile
from apps.diffusion.services.regression import build_design
from apps.experiments.management.base import JumpSiftCommand, float_list
from apps.experiments.schemas import DEFAULT_ALPHA_GRID
from apps.experiments.services.csv_io import write_influence_csv


class Command(JumpSiftCommand):
    help = 'Per-observation objective contributions of a path for several alpha values'

    def add_arguments(self, parser):
        self.add_path_argument(parser)
        parser.add_argument('--alphas', type=float_list, default=list(DEFAULT_ALPHA_GRID),
                            help='Comma separated alpha values')
        self.add_optimizer_arguments(parser)
        self.add_output_argument(parser)

    def run(self, **options):
        path = self.load_path(options['source'])
        design = build_design(path, options['gamma'])
        fits = fit_alphas(design, options['alphas'], tol=options['tol'], max_iters=options['max_iters'])
        profiles = {alpha: influence_profile(theta, design, alpha) for alpha, theta in fits.items()}
        write_influence_csv(profiles, options['out'] or self.stdout, path=path)
