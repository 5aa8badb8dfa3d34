class FactorError(Exception):
    """Error base del catálogo de factores."""


class CatalogFormatError(FactorError, ValueError):
    def __init__(self, message: str, line_number: int):
        super().__init__(f"línea {line_number}: {message}")
        self.line_number = line_number


class UnknownFactorError(FactorError, LookupError):
    def __init__(self, factor_id: int):
        super().__init__(f"F{factor_id} no existe en el catálogo")
        self.factor_id = factor_id


class FactorParseError(FactorError, ValueError):
    def __init__(self, text: str):
        super().__init__(f"no hay un token de factor en {text!r}")
        self.text = text


class FactorMismatchError(FactorError, ValueError):
    """El token trae una etiqueta o un lado que contradice al catálogo."""

    def __init__(self, token: str, factor, field: str):
        super().__init__(f"{token!r} contradice al catálogo ({field}); se esperaba {factor.render()}")
        self.token = token
        self.factor = factor
        self.field = field
