from django.conf import settings

from apps.detection.services.detection import detection_threshold, parse_threshold
from apps.experiments.management.base import JumpSiftCommand, float_list
from apps.experiments.schemas import DEFAULT_ALPHA_GRID
from apps.experiments.services.csv_io import frame_to_csv
from apps.experiments.services.runner import alpha_sweep


class Command(JumpSiftCommand):
    help = 'Classify the increments of one path for each alpha (true vs detected jumps)'

    def add_arguments(self, parser):
        self.add_path_argument(parser)
        parser.add_argument('--alphas', type=float_list, default=list(DEFAULT_ALPHA_GRID))
        parser.add_argument('--threshold', default=settings.JUMPSIFT_DEFAULT_THRESHOLD)
        self.add_optimizer_arguments(parser)
        self.add_output_argument(parser)

    def run(self, **options):
        path = self.load_path(options['source'])
        mode, parameter = parse_threshold(options['threshold'])
        threshold = detection_threshold(path.n, mode, parameter)
        frame = alpha_sweep(path, options['gamma'], options['alphas'], threshold,
                            tol=options['tol'], max_iters=options['max_iters'])
        self.emit(frame_to_csv(frame), options['out'])
