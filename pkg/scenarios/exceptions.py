class ScenarioError(Exception):
    """Error base de generación/clasificación de tripletas."""


class InfeasibleParametersError(ScenarioError, ValueError):
    pass


class InvalidTripleError(ScenarioError, ValueError):
    pass


class UnclassifiableTripleError(ScenarioError, ValueError):
    def __init__(self, triple_id: str, reason: str):
        super().__init__(f"{triple_id}: {reason}")
        self.triple_id = triple_id
        self.reason = reason


class DatasetFormatError(ScenarioError, ValueError):
    def __init__(self, message: str, line_number: int, path: str = ""):
        where = f"{path}:{line_number}" if path else f"línea {line_number}"
        super().__init__(f"{where}: {message}")
        self.line_number = line_number
        self.path = path
