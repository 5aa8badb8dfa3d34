from rest_framework import serializers

from .cases import Case, CaseTriple, Outcome, ScenarioMode


class CaseSerializer(serializers.Serializer):
    name = serializers.CharField(max_length=40)
    outcome = serializers.ChoiceField(choices=[o.value for o in Outcome], required=False, allow_null=True)
    factor_ids = serializers.ListField(child=serializers.IntegerField(min_value=1), allow_empty=False)

    def validate_factor_ids(self, value):
        if len(set(value)) != len(value):
            raise serializers.ValidationError("factor_ids tiene duplicados")
        return value

    def create(self, validated_data):
        outcome = validated_data.get("outcome")
        return Case(
            name=validated_data["name"],
            outcome=Outcome(outcome) if outcome else None,
            factors=tuple(validated_data["factor_ids"]),
        )

    def to_representation(self, case: Case):
        data = {"name": case.name}
        if case.outcome is not None:
            data["outcome"] = case.outcome.value
        data["factor_ids"] = list(case.factors)
        return data


class CaseTripleSerializer(serializers.Serializer):
    """Una línea del archivo de dataset (una tripleta por línea)."""

    id = serializers.CharField(max_length=80)
    mode = serializers.ChoiceField(choices=[m.value for m in ScenarioMode])
    complexity = serializers.IntegerField(min_value=2)
    seed = serializers.IntegerField(min_value=0)
    c1 = CaseSerializer()
    c2 = CaseSerializer()
    c3 = CaseSerializer()

    def validate(self, attrs):
        if attrs["c1"].get("outcome"):
            raise serializers.ValidationError({"c1": "el caso actual no lleva resultado"})
        for slot in ("c2", "c3"):
            if not attrs[slot].get("outcome"):
                raise serializers.ValidationError({slot: "los precedentes necesitan resultado"})
        return attrs

    def create(self, validated_data):
        cases = {
            slot: CaseSerializer().create(validated_data[slot]) for slot in ("c1", "c2", "c3")
        }
        return CaseTriple(
            id=validated_data["id"],
            mode=ScenarioMode(validated_data["mode"]),
            complexity=validated_data["complexity"],
            seed=validated_data["seed"],
            **cases,
        )

    def to_representation(self, triple: CaseTriple):
        case_serializer = CaseSerializer()
        return {
            "id": triple.id,
            "mode": triple.mode.value,
            "complexity": triple.complexity,
            "seed": triple.seed,
            "c1": case_serializer.to_representation(triple.c1),
            "c2": case_serializer.to_representation(triple.c2),
            "c3": case_serializer.to_representation(triple.c3),
        }
