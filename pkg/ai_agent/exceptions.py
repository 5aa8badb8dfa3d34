class AgentError(Exception):
    """Error base del runtime de agentes."""


class BackendConfigError(AgentError, ValueError):
    pass


class TransportError(AgentError):
    """Fallo de red/proveedor. Solo los transitorios se reintentan."""

    def __init__(self, backend: str, message: str, attempts: int = 1, transient: bool = True):
        super().__init__(f"[{backend}] {message} (intentos: {attempts})")
        self.backend = backend
        self.attempts = attempts
        self.transient = transient


class AuthenticationError(AgentError):
    def __init__(self, backend: str, message: str = "credencial ausente o rechazada"):
        super().__init__(f"[{backend}] {message}")
        self.backend = backend


class PromptTooLongError(AgentError, ValueError):
    def __init__(self, backend: str, length: int, limit: int):
        super().__init__(f"[{backend}] el prompt tiene {length} caracteres; límite {limit}")
        self.backend = backend
        self.length = length
        self.limit = limit


class FixtureMissingError(TransportError):
    def __init__(self, backend: str, digest: str, path: str):
        super().__init__(backend, f"no hay respuesta grabada para {digest} en {path}", transient=False)
        self.digest = digest
        self.path = path


class MalformedReportError(AgentError, ValueError):
    """Un informe de analista/pulidor/destilador que no cumple su esquema JSON."""

    def __init__(self, role: str, message: str, raw: str = "", errors=None):
        super().__init__(f"informe de {role} inválido: {message}")
        self.role = role
        self.raw = raw
        self.errors = errors or {}


class AgentContractError(AgentError, RuntimeError):
    pass
