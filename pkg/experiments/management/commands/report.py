from reports.aggregation import AggregationPolicy

from ..base import ExperimentCommand
from ...services import cmd_report


class Command(ExperimentCommand):
    help = "Agrega las evaluaciones y escribe las tablas de métricas (CSV y texto)."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--policy", choices=[p.value for p in AggregationPolicy], default=AggregationPolicy.POOLED.value)
        parser.add_argument("--pdf", action="store_true", help="Genera además reports/summary.pdf")

    def execute_step(self, config, options):
        result = cmd_report(config, policy=options["policy"], pdf=options["pdf"])
        for path in result.files:
            self.stdout.write(path)
        self.stdout.write(self.style.SUCCESS(f"{len(result.cells)} celdas"))
        return result

    def failure_message(self, result):
        return f"tablas escritas, pero {result.evaluation_failed} registros con la extracción fallida (EvaluationFailed)"
