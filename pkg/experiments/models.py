from django.db import models


class ExperimentRun(models.Model):
    """Una celda método × backend de un experimento; se actualiza en cada `run`."""

    name = models.CharField(max_length=100)
    method = models.CharField(max_length=10)
    backend = models.CharField(max_length=100)
    config_digest = models.CharField(max_length=32)
    started_at = models.DateTimeField()
    finished_at = models.DateTimeField(null=True, blank=True)

    triples = models.IntegerField(default=0)
    completed = models.IntegerField(default=0)
    abstained = models.IntegerField(default=0)
    failed = models.IntegerField(default=0)
    transcript_path = models.CharField(max_length=500)

    class Meta:
        unique_together = ("name", "method", "backend")
        ordering = ("name", "backend", "method")

    def __str__(self):
        return f"{self.name}: {self.method} / {self.backend}"


class ReportSnapshot(models.Model):
    run_name = models.CharField(max_length=100)
    policy = models.CharField(max_length=10)
    created_at = models.DateTimeField(auto_now_add=True)
    cells = models.JSONField(default=list)

    def __str__(self):
        return f"{self.run_name} ({self.policy}) - {self.created_at:%d/%m/%Y %H:%M}"
