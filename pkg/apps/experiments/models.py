from django.db import models

from .validators import validate_experiment_config


class ExperimentRun(models.Model):
    """Registry entry for one `manage.py grid` invocation"""

    STATUS_CHOICES = [
        ('running', 'Running'),
        ('completed', 'Completed'),
        ('failed', 'Failed'),
    ]

    name = models.CharField(max_length=255, blank=True)
    config = models.JSONField(
        validators=[validate_experiment_config],
        help_text="Validated experiment configuration echo"
    )
    output_dir = models.CharField(max_length=1024)
    status = models.CharField(max_length=20, choices=STATUS_CHOICES, default='running')
    workers = models.PositiveIntegerField(default=1)
    row_count = models.PositiveIntegerField(default=0)
    failed_rows = models.PositiveIntegerField(default=0)
    wall_time_seconds = models.FloatField(null=True, blank=True)
    version = models.CharField(max_length=32)
    error = models.TextField(blank=True)
    created_at = models.DateTimeField(auto_now_add=True)
    completed_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        ordering = ['-created_at']

    def __str__(self):
        label = self.name or f'run {self.pk}'
        return f"{label} ({self.status})"

    @property
    def replications(self) -> int:
        return int(self.config.get('replications', 0))
