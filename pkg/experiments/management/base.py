from django.core.management.base import BaseCommand, CommandError

from ai_agent.exceptions import AgentError
from factors.exceptions import FactorError
from pipelines.exceptions import PipelineError
from reports.exceptions import EvaluationError
from scenarios.exceptions import ScenarioError

from ..config import load_config, with_overrides
from ..exceptions import ConfigError, ExperimentError
from ..services import EXIT_CONFIG, EXIT_OK

# Errores de entrada (config, datasets, transcripts mal formados) salen con código 2
INPUT_ERRORS = (ConfigError, ExperimentError, ScenarioError, FactorError, PipelineError, EvaluationError, AgentError)


class ExperimentCommand(BaseCommand):
    """Flags comunes de los subcomandos y traducción de errores a códigos de salida."""

    def add_arguments(self, parser):
        parser.add_argument("--config", required=True, help="Archivo YAML del experimento")
        parser.add_argument("--mode", action="append", help="Arguable | Mismatched | NonArguable (repetible o separado por comas)")
        parser.add_argument("--methods", help="Lista separada por comas: SA,SA_EP,MA,RMA")
        parser.add_argument("--seed", type=int, help="Sobrescribe dataset.master_seed")
        parser.add_argument("--workers", type=int, help="Hilos de ejecución")
        parser.add_argument("--fixture-dir", help="Captura/replay de respuestas de los backends")

    def load(self, options):
        config = load_config(options["config"])
        return with_overrides(
            config,
            modes=options.get("mode"),
            methods=options.get("methods"),
            seed=options.get("seed"),
            workers=options.get("workers"),
            fixture_dir=options.get("fixture_dir"),
        )

    def handle(self, *args, **options):
        try:
            config = self.load(options)
            result = self.execute_step(config, options)
        except INPUT_ERRORS as exc:
            raise CommandError(str(exc), returncode=EXIT_CONFIG) from exc
        except OSError as exc:
            raise CommandError(f"error de archivos: {exc}", returncode=EXIT_CONFIG) from exc
        if result.exit_code != EXIT_OK:
            raise CommandError(self.failure_message(result), returncode=result.exit_code)

    def execute_step(self, config, options):
        raise NotImplementedError

    def failure_message(self, result) -> str:
        return "el paso terminó con errores"
