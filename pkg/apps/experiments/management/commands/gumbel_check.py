import pandas as pd

from apps.detection.services.detection import gumbel_max_check
from apps.experiments.management.base import JumpSiftCommand
from apps.experiments.services.csv_io import frame_to_csv, write_text


class Command(JumpSiftCommand):
    help = 'Compare normalized maxima of |N(0,1)| samples with the standard Gumbel law'

    def add_arguments(self, parser):
        parser.add_argument('--n', type=int, default=1000)
        parser.add_argument('--replications', type=int, default=2000)
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--maxima-out', default=None,
                            help='Also write the normalized maxima as CSV')
        self.add_output_argument(parser)

    def run(self, **options):
        summary = gumbel_max_check(options['n'], options['replications'], options['seed'])
        if options['maxima_out']:
            frame = pd.DataFrame({'normalized_max': summary.normalized_maxima})
            write_text(frame_to_csv(frame), options['maxima_out'])
        self.emit_json(summary.to_dict(), options['out'])
