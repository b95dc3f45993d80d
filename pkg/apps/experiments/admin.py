from django.contrib import admin

from .models import ExperimentRun


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    list_display = [
        'id', 'name', 'status', 'row_count', 'failed_rows',
        'workers', 'wall_time_seconds', 'created_at'
    ]
    list_filter = ['status', 'version']
    search_fields = ['name', 'output_dir']
    readonly_fields = ['created_at', 'completed_at', 'version']
    ordering = ['-created_at']

    fieldsets = (
        ('Run', {
            'fields': ('name', 'status', 'output_dir', 'version', 'error')
        }),
        ('Configuration', {
            'fields': ('config',)
        }),
        ('Results', {
            'fields': ('workers', 'row_count', 'failed_rows', 'wall_time_seconds', 'created_at', 'completed_at')
        }),
    )
