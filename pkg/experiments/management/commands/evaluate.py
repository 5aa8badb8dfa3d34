from ..base import ExperimentCommand
from ...services import cmd_evaluate


class Command(ExperimentCommand):
    help = "Extrae factores de los transcripts y escribe los archivos de evaluación."

    def execute_step(self, config, options):
        result = cmd_evaluate(config)
        for path, count in result.files.items():
            self.stdout.write(f"{path}: {count} registros")
        return result

    def failure_message(self, result):
        return f"{result.evaluation_failed} registros con la extracción fallida (EvaluationFailed)"
