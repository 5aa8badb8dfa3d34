import re

from rest_framework import serializers


def normalize_choice(value) -> str:
    return re.sub(r"[\s_\-]+", "", str(value)).lower()


class NormalizedChoiceField(serializers.ChoiceField):
    """
    ChoiceField que compara sin mayúsculas, espacios, guiones ni guiones bajos
    ("Minor Inaccuracies" == "MinorInaccuracies"). `aliases` mapea prefijos
    normalizados a un valor canónico.
    """

    def __init__(self, choices, aliases=None, **kwargs):
        self.aliases = aliases or ()
        super().__init__(choices, **kwargs)

    def to_internal_value(self, data):
        if not isinstance(data, str):
            self.fail("invalid_choice", input=data)
        key = normalize_choice(data)
        for choice in self.choices:
            if normalize_choice(choice) == key:
                return choice
        for prefix, choice in self.aliases:
            if key.startswith(prefix):
                return choice
        self.fail("invalid_choice", input=data)


def _present(value) -> bool:
    return value not in (None, "", {}, [])


class AbstentionDetailsSerializer(serializers.Serializer):
    reason_for_abstention = NormalizedChoiceField(
        choices=["NoCommonFactors", "UnfavorableOutcome", "Both"],
        # Frases del formato de salida del analista
        aliases=(
            ("both", "Both"),
            ("nocommonfactor", "NoCommonFactors"),
            ("zerocommonfactor", "NoCommonFactors"),
            ("citedprecedentoutcomeisunfavorable", "UnfavorableOutcome"),
            ("unfavorable", "UnfavorableOutcome"),
        ),
    )


class CorrectionDetailsSerializer(serializers.Serializer):
    fabricated_or_misrepresented_factors = serializers.ListField(
        child=serializers.CharField(), required=False, default=list
    )
    misrepresented_tsc_outcome = serializers.CharField(required=False, allow_null=True, allow_blank=True)
    other_issues_for_correction = serializers.CharField(required=False, allow_null=True, allow_blank=True)

    def validate(self, attrs):
        if not any(_present(v) for v in attrs.values()):
            raise serializers.ValidationError("correction_details no describe ningún error")
        return attrs


class AnalystReportSerializer(serializers.Serializer):
    analysis_outcome = NormalizedChoiceField(
        choices=["REQUIRES_ABSTENTION", "REQUIRES_CORRECTION", "VALID_ARGUMENT"]
    )
    summary = serializers.CharField(allow_blank=True)
    abstention_details = AbstentionDetailsSerializer(required=False, allow_null=True)
    correction_details = CorrectionDetailsSerializer(required=False, allow_null=True)

    def to_internal_value(self, data):
        # Un bloque vacío cuenta como ausente
        if isinstance(data, dict):
            data = {k: v for k, v in data.items() if not (k.endswith("_details") and v in ({}, None))}
        return super().to_internal_value(data)

    def validate(self, attrs):
        outcome = attrs["analysis_outcome"]
        has_abstention = _present(attrs.get("abstention_details"))
        has_correction = _present(attrs.get("correction_details"))
        if has_abstention != (outcome == "REQUIRES_ABSTENTION"):
            raise serializers.ValidationError(
                {"abstention_details": "debe existir si y solo si analysis_outcome es REQUIRES_ABSTENTION"}
            )
        if has_correction != (outcome == "REQUIRES_CORRECTION"):
            raise serializers.ValidationError(
                {"correction_details": "debe existir si y solo si analysis_outcome es REQUIRES_CORRECTION"}
            )
        return attrs


class PolisherReportSerializer(serializers.Serializer):
    argument_segment_type = serializers.CharField()
    accuracy_assessment = NormalizedChoiceField(choices=["Accurate", "MinorInaccuracies", "MajorInaccuracies"])
    strength_assessment = NormalizedChoiceField(choices=["Strong", "Moderate", "Weak"])
    factor_utilization_assessment = NormalizedChoiceField(choices=["Excellent", "Good", "Fair", "Poor"])
    feedback_summary = serializers.CharField(allow_blank=True)
    revision_needed = serializers.BooleanField()
    instructions_for_developer = serializers.CharField(required=False, allow_null=True, allow_blank=True)
    polished_argument = serializers.CharField(required=False, allow_null=True, allow_blank=True)

    def validate(self, attrs):
        has_instructions = _present(attrs.get("instructions_for_developer"))
        if has_instructions != attrs["revision_needed"]:
            raise serializers.ValidationError(
                {"instructions_for_developer": "debe existir si y solo si revision_needed es true"}
            )
        return attrs


class DistilledFactorsSerializer(serializers.Serializer):
    """Salida del destilador: {"c1": [...], "c2": [...], "c3": [...]} con cadenas de factor."""

    c1 = serializers.ListField(child=serializers.CharField(), allow_empty=True)
    c2 = serializers.ListField(child=serializers.CharField(), allow_empty=True)
    c3 = serializers.ListField(child=serializers.CharField(), allow_empty=True)
