from django.conf import settings

from apps.detection.services.detection import detection_threshold, parse_threshold, run_detection
from apps.diffusion.services.mdpde import MdpdeConfig, mdpde_estimate
from apps.diffusion.services.regression import build_design
from apps.experiments.management.base import JumpSiftCommand
from apps.experiments.services.csv_io import write_report_csv


class Command(JumpSiftCommand):
    help = 'Estimate, standardize increments and classify jumps on a path CSV'

    def add_arguments(self, parser):
        self.add_path_argument(parser)
        parser.add_argument('--alpha', type=float, default=0.0)
        parser.add_argument('--threshold', default=settings.JUMPSIFT_DEFAULT_THRESHOLD,
                            help="gumbel:<q>, additive:<c> or fixed:<value>")
        self.add_optimizer_arguments(parser)
        self.add_output_argument(parser)

    def run(self, **options):
        path = self.load_path(options['source'])
        design = build_design(path, options['gamma'])
        theta = mdpde_estimate(design, MdpdeConfig(
            alpha=options['alpha'], tol=options['tol'], max_iters=options['max_iters'],
        ))
        mode, parameter = parse_threshold(options['threshold'])
        threshold = detection_threshold(path.n, mode, parameter)
        report = run_detection(path, theta, options['gamma'], threshold)

        target = options['out'] or self.stdout
        write_report_csv(report, path, target)
        self.stderr.write(
            f'{len(report.detected_set)} of {path.n} increments above xi={threshold.resolved_xi:.6g}',
            style_func=self.style.SUCCESS,
        )
