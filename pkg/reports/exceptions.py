class EvaluationError(Exception):
    """Error base de la evaluación (extracción, métricas, reportes)."""


class DegenerateInputError(EvaluationError, ValueError):
    """N_gt = 0: las métricas no están definidas."""

    def __init__(self, triple_id: str = ""):
        super().__init__(f"{triple_id or 'entrada'}: N_gt = 0, la métrica no está definida")
        self.triple_id = triple_id


class EmptyCellError(EvaluationError, ValueError):
    pass


class ExtractionError(EvaluationError):
    def __init__(self, triple_id: str, cause: Exception):
        super().__init__(f"{triple_id}: extracción fallida ({type(cause).__name__}: {cause})")
        self.triple_id = triple_id
        self.cause = cause


class EvaluationFormatError(EvaluationError, ValueError):
    def __init__(self, message: str, line_number: int, path: str = ""):
        where = f"{path}:{line_number}" if path else f"línea {line_number}"
        super().__init__(f"{where}: {message}")
        self.line_number = line_number
        self.path = path
