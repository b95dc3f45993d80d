"""
Tests for the management commands
"""
import io
import json
import os
import tempfile

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase

from apps.experiments.models import ExperimentRun
from apps.experiments.services.csv_io import read_csv_text, read_report_header


def run(*args):
    out, err = io.StringIO(), io.StringIO()
    call_command(*args, stdout=out, stderr=err)
    return out.getvalue()


class CommandTestMixin:

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.path_csv = os.path.join(self.tmp.name, 'path.csv')
        run('simulate', '--n', '400', '--lambda', '5', '--mu-j', '3', '--seed', '123', '--out', self.path_csv)


class SimulateCommandTestCase(CommandTestMixin, SimpleTestCase):

    def test_same_seed_byte_identical(self):
        first = run('simulate', '--n', '1000', '--lambda', '0', '--seed', '9')
        second = run('simulate', '--n', '1000', '--lambda', '0', '--seed', '9')
        self.assertEqual(first, second)
        self.assertTrue(first.startswith('index,time,value,true_jump_increment\n'))
        self.assertEqual(len(first.splitlines()), 1002)

    def test_file_output(self):
        with open(self.path_csv, encoding='utf-8') as handle:
            frame = read_csv_text(handle.read())
        self.assertEqual(len(frame), 401)

    def test_invalid_parameter(self):
        with self.assertRaisesMessage(CommandError, 'beta1 must be positive'):
            run('simulate', '--n', '100', '--seed', '1', '--beta1', '-1')

    def test_unknown_flag(self):
        with self.assertRaises(CommandError):
            run('simulate', '--n', '100', '--seed', '1', '--colour', 'red')


class EstimateCommandTestCase(CommandTestMixin, SimpleTestCase):

    def test_ols(self):
        payload = json.loads(run('estimate', '--in', self.path_csv, '--gamma', '0.7'))
        self.assertEqual(payload['n'], 400)
        self.assertEqual(payload['estimate']['alpha'], 0.0)
        self.assertTrue(payload['estimate']['converged'])

    def test_compare(self):
        payload = json.loads(run('estimate', '--in', self.path_csv, '--gamma', '0.7',
                                 '--alpha', '0.25', '--compare'))
        self.assertEqual(set(payload['relative_gap']), {'beta1_hat', 'beta2_hat', 'sigma_hat'})
        self.assertLess(payload['estimate']['sigma_hat'], payload['ols']['sigma_hat'])

    def test_confidence_intervals(self):
        cir_csv = os.path.join(self.tmp.name, 'cir.csv')
        run('simulate', '--n', '2000', '--gamma', '0.5', '--seed', '5', '--out', cir_csv)
        payload = json.loads(run('estimate', '--in', cir_csv, '--gamma', '0.5', '--ci', '0.95'))
        low, high = payload['confidence_intervals']['beta2']
        self.assertLess(low, payload['estimate']['beta2_hat'])
        self.assertGreater(high, payload['estimate']['beta2_hat'])

    def test_confidence_intervals_use_ols_fit(self):
        cir_csv = os.path.join(self.tmp.name, 'cir.csv')
        run('simulate', '--n', '2000', '--gamma', '0.5', '--seed', '6', '--out', cir_csv)
        payload = json.loads(run('estimate', '--in', cir_csv, '--gamma', '0.5', '--alpha', '0.25',
                                 '--compare', '--ci', '0.95'))
        intervals = payload['confidence_intervals']
        self.assertEqual(intervals['estimator'], 'ols')
        low, high = intervals['beta1']
        self.assertAlmostEqual((low + high) / 2.0, payload['ols']['beta1_hat'], places=9)

    def test_design_export(self):
        design_csv = os.path.join(self.tmp.name, 'design.csv')
        run('estimate', '--in', self.path_csv, '--gamma', '0.7', '--design-out', design_csv)
        with open(design_csv, encoding='utf-8') as handle:
            frame = read_csv_text(handle.read())
        self.assertEqual(list(frame.columns), ['y', 'z1', 'z2', 'x_prev'])
        self.assertEqual(len(frame), 400)

    def test_confidence_intervals_need_cir(self):
        with self.assertRaisesMessage(CommandError, '--gamma 0.5'):
            run('estimate', '--in', self.path_csv, '--gamma', '0.7', '--ci', '0.95')

    def test_missing_file(self):
        with self.assertRaises(CommandError):
            run('estimate', '--in', os.path.join(self.tmp.name, 'missing.csv'), '--gamma', '0.7')


class DetectCommandTestCase(CommandTestMixin, SimpleTestCase):

    def test_report(self):
        report_csv = os.path.join(self.tmp.name, 'report.csv')
        run('detect', '--gamma', '0.7', '--alpha', '0.15', '--threshold', 'fixed:3.512',
            '--in', self.path_csv, '--out', report_csv)
        header = read_report_header(report_csv)
        self.assertEqual(header['xi'], 3.512)
        with open(report_csv, encoding='utf-8') as handle:
            frame = read_csv_text(handle.read())
        self.assertEqual(len(frame), 400)
        self.assertGreater(frame['detected'].sum(), 0)

    def test_bad_threshold(self):
        with self.assertRaises(CommandError):
            run('detect', '--gamma', '0.7', '--threshold', 'median:1', '--in', self.path_csv)


class DiagnosticCommandTestCase(CommandTestMixin, SimpleTestCase):

    def test_gumbel_check(self):
        payload = json.loads(run('gumbel_check', '--n', '200', '--replications', '500', '--seed', '1'))
        self.assertEqual(payload['replications'], 500)
        self.assertIn('ks_distance', payload)

    def test_gumbel_check_minimums(self):
        with self.assertRaises(CommandError):
            run('gumbel_check', '--n', '10')

    def test_influence(self):
        frame = read_csv_text(run('influence', '--in', self.path_csv, '--gamma', '0.7', '--alphas', '0,0.3'))
        self.assertEqual(sorted(frame['alpha'].unique()), [0.0, 0.3])
        self.assertEqual(len(frame), 800)

    def test_alpha_sweep(self):
        frame = read_csv_text(run('alpha_sweep', '--in', self.path_csv, '--gamma', '0.7',
                                  '--alphas', '0,0.15', '--threshold', 'fixed:3.512'))
        self.assertEqual(len(frame), 800)
        self.assertIn('detected', frame.columns)

    def test_bad_alpha_list(self):
        with self.assertRaises(CommandError):
            run('influence', '--in', self.path_csv, '--gamma', '0.7', '--alphas', 'a,b')


class GridCommandTestCase(TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.config_path = os.path.join(self.tmp.name, 'experiment.json')
        with open(self.config_path, 'w', encoding='utf-8') as handle:
            json.dump({
                'grid_n': [200], 'grid_lambda': [2], 'grid_mu_J': [3, 4],
                'grid_alpha': [0, 0.2], 'replications': 2, 'master_seed': 5,
            }, handle)

    def read(self, directory, name):
        with open(os.path.join(directory, name), 'rb') as handle:
            return handle.read()

    def test_grid_records_run(self):
        output_dir = os.path.join(self.tmp.name, 'out')
        run('grid', '--config', self.config_path, '--output-dir', output_dir, '--workers', '1', '--name', 'smoke')
        run_record = ExperimentRun.objects.get()
        self.assertEqual(run_record.status, 'completed')
        self.assertEqual(run_record.row_count, 8)
        self.assertEqual(run_record.name, 'smoke')
        self.assertEqual(run_record.replications, 2)
        self.assertIsNotNone(run_record.completed_at)
        for name in ('rows.csv', 'summary.csv', 'manifest.json'):
            self.assertTrue(os.path.exists(os.path.join(output_dir, name)))

    def test_flags_override_config(self):
        output_dir = os.path.join(self.tmp.name, 'override')
        run('grid', '--config', self.config_path, '--output-dir', output_dir, '--workers', '1',
            '--replications', '1', '--grid-alpha', '0.2', '--no-record')
        rows = read_csv_text(self.read(output_dir, 'rows.csv').decode('utf-8'))
        self.assertEqual(len(rows), 2)
        self.assertEqual(set(rows['alpha']), {0.2})
        self.assertEqual(ExperimentRun.objects.count(), 0)

    def test_byte_identical_across_workers(self):
        serial = os.path.join(self.tmp.name, 'serial')
        parallel = os.path.join(self.tmp.name, 'parallel')
        run('grid', '--config', self.config_path, '--output-dir', serial, '--workers', '1', '--no-record')
        run('grid', '--config', self.config_path, '--output-dir', parallel, '--workers', '2', '--no-record')
        self.assertEqual(self.read(serial, 'rows.csv'), self.read(parallel, 'rows.csv'))
        self.assertEqual(self.read(serial, 'summary.csv'), self.read(parallel, 'summary.csv'))

    def test_invalid_config(self):
        with open(self.config_path, 'w', encoding='utf-8') as handle:
            json.dump({'replications': 0}, handle)
        with self.assertRaisesMessage(CommandError, 'replications'):
            run('grid', '--config', self.config_path, '--no-record')

    def test_unreadable_config(self):
        with self.assertRaises(CommandError):
            run('grid', '--config', os.path.join(self.tmp.name, 'missing.json'), '--no-record')
