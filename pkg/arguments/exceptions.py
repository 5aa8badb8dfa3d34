class ArgumentError(Exception):
    """Error base del modelo de argumentos."""


class MalformedOutputError(ArgumentError, ValueError):
    def __init__(self, message: str, raw: str = ""):
        super().__init__(message)
        self.raw = raw


class MissingPlyError(MalformedOutputError):
    def __init__(self, ply, raw: str = ""):
        super().__init__(f"falta la clave {ply.key!r} (ply {ply.index}) o está vacía", raw)
        self.ply = ply


class AmbiguousAttributionError(ArgumentError, ValueError):
    """Frases que nombran factores sin nombrar ningún caso."""

    def __init__(self, sentences, partial):
        super().__init__(f"{len(sentences)} frase(s) con factores sin caso: {sentences[:3]}")
        self.sentences = list(sentences)
        self.count = len(self.sentences)
        self.partial = partial
