"""
Custom validators for JSON fields
"""
from django.core.exceptions import ValidationError
from pydantic import ValidationError as SchemaError

from apps.experiments.schemas import ExperimentConfig


def validate_experiment_config(value):
    """
    Validate a stored experiment configuration against ExperimentConfig
    Keys use their file spelling (sigma_J, grid_mu_J)
    """
    if not isinstance(value, dict):
        raise ValidationError("Must be a dictionary")

    try:
        ExperimentConfig.model_validate(value)
    except SchemaError as e:
        messages = [
            f"{'.'.join(str(part) for part in err['loc']) or 'config'}: {err['msg']}"
            for err in e.errors()
        ]
        raise ValidationError(messages)
