from django.contrib import admin
from .models import ExperimentRun, ReportSnapshot

@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    list_display = ("name", "method", "backend", "triples", "completed", "abstained", "failed", "finished_at")
    list_filter = ("method", "backend")
    search_fields = ("name", "backend")

@admin.register(ReportSnapshot)
class ReportSnapshotAdmin(admin.ModelAdmin):
    list_display = ("run_name", "policy", "created_at")
    list_filter = ("policy",)
    search_fields = ("run_name",)
