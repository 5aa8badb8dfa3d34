from rest_framework import serializers

# Gramática de etiquetas compartida con FACTOR_TOKEN_RE: palabras ASCII unidas por guiones
FACTOR_LABEL_PATTERN = r"[A-Z][A-Za-z]*(?:-[A-Za-z]+)*"


class FactorRecordSerializer(serializers.Serializer):
    """Una línea del archivo de catálogo: {"id", "label", "side", "provisional"?}."""

    id = serializers.IntegerField(min_value=1)
    label = serializers.RegexField(
        rf"^{FACTOR_LABEL_PATTERN}$",
        max_length=80,
        error_messages={"invalid": "la etiqueta debe ser palabras con guiones que empiecen en mayúscula (p. ej. Agreed-not-to-disclose)"},
    )
    side = serializers.ChoiceField(choices=["P", "D"])
    provisional = serializers.BooleanField(required=False, default=False)
