from rest_framework import serializers

from ai_agent.prompts import Method
from scenarios.cases import ScenarioMode

from .records import RunStatus


class ArgumentResultSerializer(serializers.Serializer):
    plies = serializers.DictField(child=serializers.CharField(trim_whitespace=False), required=False)
    abstention = serializers.DictField(required=False)
    terminate_in_prose = serializers.BooleanField(required=False, default=False)

    def validate(self, attrs):
        if ("plies" in attrs) == ("abstention" in attrs):
            raise serializers.ValidationError("el resultado lleva plies o una abstención, no ambos")
        abstention = attrs.get("abstention")
        if abstention is not None and abstention.get("ply_index") not in (1, 2, 3):
            raise serializers.ValidationError({"abstention": "ply_index debe ser 1, 2 o 3"})
        return attrs


class RunRecordSerializer(serializers.Serializer):
    """Forma de una línea de transcript; los informes se validan con sus propios parsers."""

    triple_id = serializers.CharField(max_length=80)
    method = serializers.ChoiceField(choices=[m.value for m in Method])
    backend = serializers.CharField()
    model = serializers.CharField(allow_blank=True)
    mode = serializers.ChoiceField(choices=[m.value for m in ScenarioMode])
    status = serializers.ChoiceField(choices=[s.value for s in RunStatus])
    result = ArgumentResultSerializer(allow_null=True)
    roles = serializers.ListField(child=serializers.ListField(child=serializers.CharField(), min_length=2, max_length=2))
    revision_count_per_ply = serializers.ListField(child=serializers.IntegerField(min_value=0))
    agent_reports = serializers.ListField(child=serializers.DictField(), required=False, default=list)
    decisions = serializers.ListField(child=serializers.CharField(), required=False, default=list)
    failure = serializers.DictField(required=False, allow_null=True, default=None)
    reprompts = serializers.IntegerField(min_value=0, required=False, default=0)
    timestamps = serializers.DictField(child=serializers.CharField(allow_blank=True), required=False, default=dict)
