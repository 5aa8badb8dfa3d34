from ..base import ExperimentCommand
from ...services import cmd_gen_cases


class Command(ExperimentCommand):
    help = "Genera un dataset de tripletas por modo (gen-cases)."

    def execute_step(self, config, options):
        result = cmd_gen_cases(config)
        for summary in result.modes:
            status = self.style.SUCCESS("ok") if summary.ok else self.style.ERROR("FALLA")
            self.stdout.write(
                f"{summary.mode.value}: {summary.count} tripletas → {summary.path} "
                f"[contrato: {summary.contract_violations} fallos, tamaño: {summary.factor_count_violations} fallos] {status}"
            )
        return result
