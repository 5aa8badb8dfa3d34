class PipelineError(Exception):
    """Error base de los pipelines de generación."""


class RecordInvariantError(PipelineError, ValueError):
    """Un RunRecord que viola su propio contrato (roles, revisiones, estado)."""

    def __init__(self, triple_id: str, message: str):
        super().__init__(f"{triple_id}: {message}")
        self.triple_id = triple_id


class TranscriptFormatError(PipelineError, ValueError):
    def __init__(self, message: str, line_number: int, path: str = ""):
        where = f"{path}:{line_number}" if path else f"línea {line_number}"
        super().__init__(f"{where}: {message}")
        self.line_number = line_number
        self.path = path
