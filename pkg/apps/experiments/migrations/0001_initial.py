# Generated by Django 6.0.1 on 2026-10-18 10:12

import apps.experiments.validators
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('name', models.CharField(blank=True, max_length=255)),
                ('config', models.JSONField(help_text='Validated experiment configuration echo', validators=[apps.experiments.validators.validate_experiment_config])),
                ('output_dir', models.CharField(max_length=1024)),
                ('status', models.CharField(choices=[('running', 'Running'), ('completed', 'Completed'), ('failed', 'Failed')], default='running', max_length=20)),
                ('workers', models.PositiveIntegerField(default=1)),
                ('row_count', models.PositiveIntegerField(default=0)),
                ('failed_rows', models.PositiveIntegerField(default=0)),
                ('wall_time_seconds', models.FloatField(blank=True, null=True)),
                ('version', models.CharField(max_length=32)),
                ('error', models.TextField(blank=True)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('completed_at', models.DateTimeField(blank=True, null=True)),
            ],
            options={
                'ordering': ['-created_at'],
            },
        ),
    ]
