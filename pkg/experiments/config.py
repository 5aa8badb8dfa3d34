"""
Configuración de un experimento: un único archivo YAML validado con serializers de DRF.

Las credenciales nunca viven en el archivo: cada backend nombra la variable de entorno
(`api_key_env`) de la que se leen.
"""
import dataclasses
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple

import yaml
from django.conf import settings
from rest_framework import serializers

from ai_agent.exceptions import BackendConfigError
from ai_agent.mocks import MockBehavior
from ai_agent.prompts import Method
from ai_agent.serializers import NormalizedChoiceField
from ai_agent.service import BackendConfig, BackendKind, GenerationParams, with_fixtures
from reports.extraction import CANONICAL
from scenarios.cases import ScenarioMode

from .exceptions import ConfigError

AGENT_KINDS = ("oracle", "llm")
ALL_MODES = tuple(mode.value for mode in ScenarioMode)


# =========================
# SERIALIZERS
# =========================
class DatasetSerializer(serializers.Serializer):
    modes = serializers.ListField(child=serializers.CharField(), required=False, default=list(ALL_MODES))
    complexity = serializers.IntegerField(min_value=2, default=5)
    count = serializers.IntegerField(min_value=1, default=90)
    master_seed = serializers.IntegerField(default=0)

    def validate_modes(self, value):
        if not value:
            raise serializers.ValidationError("hace falta al menos un modo")
        try:
            modes = [ScenarioMode.parse(v) for v in value]
        except ValueError as exc:
            raise serializers.ValidationError(str(exc))
        return list(dict.fromkeys(modes))


class BackendSerializer(serializers.Serializer):
    kind = serializers.ChoiceField(choices=[k.value for k in BackendKind])
    model = serializers.CharField(required=False, allow_blank=True, default="")
    endpoint = serializers.CharField(required=False, allow_null=True, default=None)
    api_key_env = serializers.CharField(required=False, allow_null=True, default=None)
    params = serializers.DictField(required=False, default=dict)
    max_retries = serializers.IntegerField(required=False, min_value=0)
    timeout = serializers.FloatField(required=False, min_value=0.1)
    behavior = NormalizedChoiceField(choices=[b.value for b in MockBehavior], required=False, default=MockBehavior.FAITHFUL.value)
    fabrications = serializers.IntegerField(required=False, min_value=1, default=1)
    seed = serializers.IntegerField(required=False, default=0)
    fixture_dir = serializers.CharField(required=False, allow_null=True, default=None)
    inner = serializers.CharField(required=False, allow_null=True, default=None)

    def validate_params(self, value):
        try:
            GenerationParams().merged(value)
        except (BackendConfigError, TypeError) as exc:
            raise serializers.ValidationError(str(exc))
        return value

    def validate(self, attrs):
        kind = attrs["kind"]
        if kind in (BackendKind.OPENAI.value, BackendKind.GEMINI.value) and not attrs.get("model"):
            raise serializers.ValidationError({"model": "obligatorio para backends de proveedor"})
        if kind == BackendKind.FIXTURE.value and not attrs.get("fixture_dir"):
            raise serializers.ValidationError({"fixture_dir": "obligatorio para backends fixture"})
        return attrs


class AgentsSerializer(serializers.Serializer):
    analyst = serializers.ChoiceField(choices=AGENT_KINDS, default="oracle")
    polisher = serializers.ChoiceField(choices=AGENT_KINDS, default="oracle")


class ExperimentConfigSerializer(serializers.Serializer):
    name = serializers.CharField(required=False, allow_blank=False)
    dataset = DatasetSerializer(required=False, default=dict)
    methods = serializers.ListField(child=serializers.CharField(), min_length=1)
    backends = serializers.DictField(child=BackendSerializer())
    generators = serializers.ListField(child=serializers.CharField(), min_length=1)
    evaluator = serializers.CharField(required=False, default=CANONICAL)
    agents = AgentsSerializer(required=False, default=dict)
    workers = serializers.IntegerField(min_value=1, required=False)
    output_dir = serializers.CharField(required=False)

    def validate_methods(self, value):
        try:
            return list(dict.fromkeys(Method.parse(v) for v in value))
        except ValueError as exc:
            raise serializers.ValidationError(str(exc))

    def validate(self, attrs):
        backends = attrs["backends"]
        errors = {}
        unknown = [name for name in attrs["generators"] if name not in backends]
        if unknown:
            errors["generators"] = f"backends no definidos: {unknown}"
        evaluator = attrs.get("evaluator", CANONICAL)
        if evaluator != CANONICAL:
            if evaluator not in backends:
                errors["evaluator"] = f"backend no definido: {evaluator!r}"
            elif backends[evaluator]["kind"] == BackendKind.MOCK.value:
                errors["evaluator"] = "el evaluador no puede ser un backend mock"
        for name, backend in backends.items():
            inner = backend.get("inner")
            if backend["kind"] == BackendKind.FIXTURE.value and inner is not None:
                if inner not in backends:
                    errors.setdefault("backends", {})[name] = f"inner no definido: {inner!r}"
                elif backends[inner]["kind"] in (BackendKind.FIXTURE.value, BackendKind.MOCK.value):
                    errors.setdefault("backends", {})[name] = "inner debe ser un proveedor real"
        agents = attrs.get("agents") or {}
        if "llm" in agents.values():
            mocks = [n for n in attrs["generators"] if backends.get(n, {}).get("kind") == BackendKind.MOCK.value]
            if mocks:
                errors["agents"] = f"los agentes llm necesitan generadores reales (mock: {mocks})"
        if errors:
            raise serializers.ValidationError(errors)
        return attrs


# =========================
# CONFIG
# =========================
@dataclass(frozen=True)
class DatasetSpec:
    modes: Tuple[ScenarioMode, ...]
    complexity: int
    count: int
    master_seed: int


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    dataset: DatasetSpec
    methods: Tuple[Method, ...]
    backends: Dict[str, BackendConfig]
    generators: Tuple[str, ...]
    evaluator: str
    agents: Dict[str, str]
    workers: int
    output_dir: Path
    digest: str
    fixture_dir: Optional[str] = None

    @property
    def datasets_dir(self) -> Path:
        return self.output_dir / "datasets"

    @property
    def reports_dir(self) -> Path:
        return self.output_dir / "reports"

    def backend(self, name: str) -> BackendConfig:
        config = self.backends[name]
        if self.fixture_dir:
            config = with_fixtures(config, self.fixture_dir)
        return config

    def metadata(self) -> Dict[str, object]:
        """Cabecera de los reportes: nada que dependa de la máquina o de la hora."""
        return {
            "config_digest": self.digest,
            "master_seed": self.dataset.master_seed,
            "complexity": self.dataset.complexity,
            "count": self.dataset.count,
            "evaluator": self.evaluator,
            "agents": f"analyst={self.agents['analyst']} polisher={self.agents['polisher']}",
        }


def _backend_config(name: str, data: Dict, all_data: Dict) -> BackendConfig:
    extra = {key: data[key] for key in ("max_retries", "timeout") if key in data}
    inner = None
    if data.get("inner"):
        inner = _backend_config(data["inner"], all_data[data["inner"]], all_data)
    return BackendConfig(
        name=name,
        kind=BackendKind(data["kind"]),
        model=data.get("model", ""),
        endpoint=data.get("endpoint"),
        api_key_env=data.get("api_key_env"),
        params=GenerationParams().merged(data.get("params")),
        behavior=data.get("behavior"),
        fabrications=data.get("fabrications", 1),
        seed=data.get("seed", 0),
        fixture_dir=data.get("fixture_dir"),
        inner=inner,
        **extra,
    )


def _digest(raw: Dict) -> str:
    # output_dir no forma parte de la identidad del experimento
    identity = {key: value for key, value in raw.items() if key != "output_dir"}
    payload = json.dumps(identity, sort_keys=True, ensure_ascii=False, default=str)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def parse_config(raw: Dict, name: str = "experiment", base_dir: Optional[Path] = None, source: str = "") -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("la configuración debe ser un mapa YAML", path=source)
    serializer = ExperimentConfigSerializer(data=raw)
    if not serializer.is_valid():
        errors = json.loads(json.dumps(serializer.errors, default=str))
        raise ConfigError(f"configuración inválida: {errors}", errors=errors, path=source)
    data = serializer.validated_data

    output_dir = Path(data.get("output_dir") or settings.ARGLAB["OUTPUT_DIR"])
    if base_dir is not None and not output_dir.is_absolute():
        output_dir = base_dir / output_dir
    dataset = data["dataset"]
    if not dataset:
        defaults = DatasetSerializer(data={})
        defaults.is_valid(raise_exception=True)
        dataset = defaults.validated_data
    backends = {n: _backend_config(n, b, data["backends"]) for n, b in data["backends"].items()}
    agents = {"analyst": "oracle", "polisher": "oracle", **dict(data.get("agents") or {})}
    return ExperimentConfig(
        name=data.get("name") or name,
        dataset=DatasetSpec(
            modes=tuple(dataset["modes"]),
            complexity=dataset["complexity"],
            count=dataset["count"],
            master_seed=dataset["master_seed"],
        ),
        methods=tuple(data["methods"]),
        backends=backends,
        generators=tuple(dict.fromkeys(data["generators"])),
        evaluator=data.get("evaluator", CANONICAL),
        agents=agents,
        workers=data.get("workers") or settings.ARGLAB["DEFAULT_WORKERS"],
        output_dir=output_dir,
        digest=_digest(raw),
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"no se pudo leer el archivo ({exc})", path=str(path)) from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"YAML inválido ({exc})", path=str(path)) from exc
    return parse_config(raw, name=path.stem, base_dir=path.parent, source=str(path))


def _split(values) -> Sequence[str]:
    if isinstance(values, str):
        values = [values]
    return [part.strip() for value in values for part in str(value).split(",") if part.strip()]


def with_overrides(config: ExperimentConfig, modes=None, methods=None, seed=None, workers=None,
                   fixture_dir=None) -> ExperimentConfig:
    """Flags de línea de comandos sobre la configuración del archivo."""
    dataset = config.dataset
    changes = {}
    try:
        if modes:
            dataset = dataclasses.replace(dataset, modes=tuple(dict.fromkeys(ScenarioMode.parse(m) for m in _split(modes))))
        if methods:
            changes["methods"] = tuple(dict.fromkeys(Method.parse(m) for m in _split(methods)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if seed is not None:
        dataset = dataclasses.replace(dataset, master_seed=int(seed))
    if workers is not None:
        if int(workers) < 1:
            raise ConfigError(f"--workers debe ser >= 1 (recibido {workers})")
        changes["workers"] = int(workers)
    if fixture_dir:
        changes["fixture_dir"] = str(fixture_dir)
    return dataclasses.replace(config, dataset=dataset, **changes)
