from ..base import ExperimentCommand
from ...services import cmd_run


class Command(ExperimentCommand):
    help = "Ejecuta la matriz método × backend sobre los datasets (reanudable)."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--overwrite", action="store_true", help="Descarta los transcripts existentes")

    def execute_step(self, config, options):
        result = cmd_run(config, overwrite=options["overwrite"])
        for s in result.summaries:
            line = (
                f"{s.method.value}/{s.backend}: {s.total} tripletas, {s.completed} completadas, "
                f"{s.abstained} abstenciones, {s.failed} fallidas ({s.skipped} ya registradas)"
            )
            self.stdout.write(self.style.WARNING(line) if s.has_failures else self.style.SUCCESS(line))
        return result

    def failure_message(self, result):
        return f"{result.failed} ejecuciones fallidas (ver transcripts)"
