"""
Tests for experiment configuration parsing and the JSON-field validator
"""
from django.core.exceptions import ValidationError as DjangoValidationError
from django.test import SimpleTestCase
from pydantic import ValidationError

from apps.experiments.schemas import DEFAULT_ALPHA_GRID, ExperimentConfig
from apps.experiments.validators import validate_experiment_config


class ExperimentConfigTestCase(SimpleTestCase):

    def test_defaults_cover_study_grid(self):
        config = ExperimentConfig()
        self.assertEqual(config.grid_alpha, DEFAULT_ALPHA_GRID)
        self.assertEqual(config.path_cell_count, 100)
        self.assertEqual(config.grid_size, 1100 * config.replications)
        self.assertEqual(config.replications, 100)
        self.assertEqual(config.threshold_mode, 'gumbel:0.05')

    def test_aliases(self):
        config = ExperimentConfig.model_validate({'sigma_J': 0.2, 'grid_mu_J': [2.0]})
        self.assertEqual(config.sigma_j, 0.2)
        self.assertEqual(config.grid_mu_j, [2.0])
        echo = config.echo()
        self.assertIn('sigma_J', echo)
        self.assertIn('grid_mu_J', echo)

    def test_default_start_and_mesh(self):
        config = ExperimentConfig()
        self.assertEqual(config.initial_state, 1.25)
        self.assertAlmostEqual(config.scheme(1000).delta_n, 1000 ** -0.55)

    def test_rejects_invalid_values(self):
        bad_inputs = [
            {'replications': 0},
            {'grid_n': []},
            {'grid_n': [2]},
            {'grid_lambda': [-1.0]},
            {'grid_alpha': [0.1, 0.1]},
            {'threshold_mode': 'gumbel:2'},
            {'diffusion': {'beta1': -1.0}},
            {'diffusion': {'gamma': 0.3}},
            {'unknown_key': 1},
        ]
        for data in bad_inputs:
            with self.subTest(data=data):
                with self.assertRaises(ValidationError):
                    ExperimentConfig.model_validate(data)


class ConfigValidatorTestCase(SimpleTestCase):

    def test_accepts_echo(self):
        validate_experiment_config(ExperimentConfig(replications=3).echo())

    def test_rejects_non_dict(self):
        with self.assertRaises(DjangoValidationError):
            validate_experiment_config(['grid_n'])

    def test_reports_field(self):
        with self.assertRaises(DjangoValidationError) as ctx:
            validate_experiment_config({'replications': 0})
        self.assertIn('replications', ctx.exception.messages[0])
