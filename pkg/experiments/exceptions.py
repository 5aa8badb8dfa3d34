class ExperimentError(Exception):
    """Error base de la orquestación de experimentos."""


class ConfigError(ExperimentError, ValueError):
    """Archivo de configuración inválido. `errors` trae los fallos campo por campo."""

    def __init__(self, message: str, errors=None, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.errors = errors or {}
        self.path = path


class MissingInputError(ExperimentError):
    def __init__(self, path, hint: str):
        super().__init__(f"no existe {path}; {hint}")
        self.path = str(path)
