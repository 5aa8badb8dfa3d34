import dataclasses
import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional

import google.generativeai as genai
import openai
from django.conf import settings
from google.api_core import exceptions as google_exceptions
from openai import OpenAI

from .exceptions import (
    AuthenticationError,
    BackendConfigError,
    FixtureMissingError,
    PromptTooLongError,
    TransportError,
)

logger = logging.getLogger(__name__)


# =========================
# PARÁMETROS Y CONFIGURACIÓN
# =========================
@dataclass(frozen=True)
class GenerationParams:
    # Temperatura 0 por defecto: reproducibilidad (configurable por backend)
    max_tokens: int = 1000
    temperature: float = 0.0
    top_p: float = 1.0
    frequency_penalty: float = 0.0
    presence_penalty: float = 0.0

    def merged(self, overrides: Optional[Dict[str, Any]]) -> "GenerationParams":
        if not overrides:
            return self
        known = {f.name for f in dataclasses.fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise BackendConfigError(f"parámetros desconocidos: {sorted(unknown)}")
        return dataclasses.replace(self, **overrides)

    def as_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)


# Las llamadas del evaluador son siempre deterministas
EVALUATOR_PARAMS = GenerationParams(temperature=0.0, top_p=1.0)


class BackendKind(str, Enum):
    OPENAI = "openai"
    GEMINI = "gemini"
    MOCK = "mock"
    FIXTURE = "fixture"


def _arglab(key: str):
    return settings.ARGLAB[key]


@dataclass(frozen=True)
class BackendConfig:
    name: str
    kind: BackendKind
    model: str = ""
    endpoint: Optional[str] = None
    api_key_env: Optional[str] = None
    params: GenerationParams = field(default_factory=GenerationParams)
    max_retries: int = field(default_factory=lambda: _arglab("MAX_RETRIES"))
    timeout: float = field(default_factory=lambda: _arglab("REQUEST_TIMEOUT_SECONDS"))
    backoff: float = field(default_factory=lambda: _arglab("RETRY_BACKOFF_SECONDS"))
    max_prompt_chars: int = field(default_factory=lambda: _arglab("MAX_PROMPT_CHARS"))
    # mock
    behavior: Optional[str] = None
    fabrications: int = 1
    seed: int = 0
    # fixture
    fixture_dir: Optional[str] = None
    inner: Optional["BackendConfig"] = None

    @property
    def is_mock(self) -> bool:
        return self.kind == BackendKind.MOCK


def digest_text(*parts: str) -> str:
    h = hashlib.sha256()
    for part in parts:
        h.update(part.encode("utf-8"))
        h.update(b"\x00")
    return h.hexdigest()[:12]


# =========================
# BACKENDS
# =========================
class ChatBackend:
    """Un proveedor de chat. send() hace un solo intento; complete() gestiona reintentos."""

    kind: BackendKind

    def __init__(self, config: BackendConfig):
        self.config = config
        self.name = config.name

    @property
    def model(self) -> str:
        return self.config.model

    def send(self, system: str, user: str, params: GenerationParams) -> str:
        raise NotImplementedError


def _credential(config: BackendConfig, default_env: str, default_setting: Optional[str]) -> str:
    env_name = config.api_key_env or default_env
    value = os.getenv(env_name) or (default_setting if not config.api_key_env else None)
    if not value:
        raise AuthenticationError(config.name, f"la variable {env_name} no está definida")
    return value


class OpenAIBackend(ChatBackend):
    """Cualquier endpoint compatible con chat.completions (GPT, Llama alojado, ...)."""

    kind = BackendKind.OPENAI

    def __init__(self, config: BackendConfig):
        super().__init__(config)
        api_key = _credential(config, "OPENAI_API_KEY", getattr(settings, "OPENAI_API_KEY", None))
        # Los reintentos los hace complete(); el SDK no debe duplicarlos
        self._client = OpenAI(
            api_key=api_key,
            base_url=config.endpoint or None,
            timeout=config.timeout,
            max_retries=0,
        )

    def send(self, system: str, user: str, params: GenerationParams) -> str:
        try:
            response = self._client.chat.completions.create(
                model=self.config.model,
                messages=[
                    {"role": "system", "content": system},
                    {"role": "user", "content": user},
                ],
                max_tokens=params.max_tokens,
                temperature=params.temperature,
                top_p=params.top_p,
                frequency_penalty=params.frequency_penalty,
                presence_penalty=params.presence_penalty,
            )
        except (openai.AuthenticationError, openai.PermissionDeniedError) as exc:
            raise AuthenticationError(self.name, str(exc)) from exc
        except openai.BadRequestError as exc:
            if "context_length" in str(exc) or "maximum context" in str(exc):
                raise PromptTooLongError(self.name, len(system) + len(user), self.config.max_prompt_chars) from exc
            raise TransportError(self.name, str(exc), transient=False) from exc
        except (openai.APIConnectionError, openai.RateLimitError, openai.InternalServerError) as exc:
            raise TransportError(self.name, str(exc)) from exc
        except openai.APIStatusError as exc:
            raise TransportError(self.name, str(exc), transient=exc.status_code >= 500) from exc

        if not response.choices:
            return ""
        return response.choices[0].message.content or ""


# google-generativeai guarda una sola credencial por proceso (genai.configure)
_GEMINI_LOCK = threading.Lock()
_GEMINI_CONFIGURED: Dict[str, str] = {}


class GeminiBackend(ChatBackend):
    """
    AI Studio (google-generativeai). El SDK configura la clave de forma global, así que
    todos los backends gemini de un proceso deben compartirla; una segunda clave distinta
    es un error de configuración.
    """
    # NO mezclar con Vertex ni gRPC.
    kind = BackendKind.GEMINI

    def __init__(self, config: BackendConfig):
        super().__init__(config)
        api_key = _credential(config, "GEMINI_API_KEY", getattr(settings, "GEMINI_API_KEY", None))
        with _GEMINI_LOCK:
            current = _GEMINI_CONFIGURED.get("api_key")
            if current is not None and current != api_key:
                raise BackendConfigError(
                    f"{config.name}: ya hay una clave de Gemini configurada por "
                    f"{_GEMINI_CONFIGURED['backend']}; solo se admite una por proceso"
                )
            if current is None:
                genai.configure(api_key=api_key)
                _GEMINI_CONFIGURED.update(api_key=api_key, backend=config.name)

    def send(self, system: str, user: str, params: GenerationParams) -> str:
        model = genai.GenerativeModel(self.config.model, system_instruction=system)
        try:
            response = model.generate_content(
                [{"role": "user", "parts": [user]}],
                generation_config={
                    "max_output_tokens": params.max_tokens,
                    "temperature": params.temperature,
                    "top_p": params.top_p,
                },
                request_options={"timeout": self.config.timeout},
            )
        except (google_exceptions.Unauthenticated, google_exceptions.PermissionDenied) as exc:
            raise AuthenticationError(self.name, str(exc)) from exc
        except google_exceptions.InvalidArgument as exc:
            raise TransportError(self.name, str(exc), transient=False) from exc
        except google_exceptions.GoogleAPIError as exc:
            raise TransportError(self.name, str(exc)) from exc

        # Extraer el texto
        text = ""
        try:
            # Formato usual del SDK
            text = getattr(response, "text", "") or ""
        except ValueError:
            # .text falla cuando la respuesta viene bloqueada o sin partes
            text = ""
        if not text and getattr(response, "candidates", None):
            # Respaldo por si cambia el formato
            cand = response.candidates[0]
            if cand and getattr(cand, "content", None) and cand.content.parts:
                text = getattr(cand.content.parts[0], "text", "") or ""
        return text


class FixtureBackend(ChatBackend):
    """
    Respuestas grabadas por digest de la petición. Con un backend interno, las que faltan
    se piden y se guardan (captura); sin él, una petición no grabada es FixtureMissingError.
    """

    kind = BackendKind.FIXTURE

    def __init__(self, config: BackendConfig, inner: Optional[ChatBackend] = None):
        super().__init__(config)
        if not config.fixture_dir:
            raise BackendConfigError(f"{config.name}: el backend fixture necesita fixture_dir")
        self.directory = Path(config.fixture_dir)
        self.inner = inner
        self._lock = threading.Lock()

    @property
    def model(self) -> str:
        return self.inner.model if self.inner else self.config.model

    def request_digest(self, system: str, user: str, params: GenerationParams) -> str:
        payload = json.dumps(
            {"model": self.model, "system": system, "user": user, "params": params.as_dict()},
            sort_keys=True,
            ensure_ascii=False,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def path_for(self, digest: str) -> Path:
        return self.directory / f"{digest}.json"

    def send(self, system: str, user: str, params: GenerationParams) -> str:
        digest = self.request_digest(system, user, params)
        path = self.path_for(digest)
        if path.exists():
            logger.debug("[FIXTURE] replay %s", digest[:12])
            return json.loads(path.read_text(encoding="utf-8"))["response"]
        if self.inner is None:
            raise FixtureMissingError(self.name, digest[:12], str(self.directory))
        text = self.inner.send(system, user, params)
        self.store(system, user, params, text)
        return text

    def store(self, system: str, user: str, params: GenerationParams, response: str) -> Path:
        digest = self.request_digest(system, user, params)
        path = self.path_for(digest)
        record = {
            "model": self.model,
            "params": params.as_dict(),
            "system_digest": digest_text(system),
            "user_digest": digest_text(user),
            "response": response,
        }
        with self._lock:
            self.directory.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            tmp.write_text(json.dumps(record, ensure_ascii=False, indent=2, sort_keys=True), encoding="utf-8")
            tmp.replace(path)
        logger.info("[FIXTURE] capturada %s", digest[:12])
        return path


def build_backend(config: BackendConfig) -> ChatBackend:
    kind = BackendKind(config.kind)
    if kind == BackendKind.OPENAI:
        return OpenAIBackend(config)
    if kind == BackendKind.GEMINI:
        return GeminiBackend(config)
    if kind == BackendKind.FIXTURE:
        inner = build_backend(config.inner) if config.inner is not None else None
        return FixtureBackend(config, inner)
    raise BackendConfigError(f"{config.name}: un backend {kind.value} no es un proveedor de chat")


def with_fixtures(config: BackendConfig, fixture_dir: str) -> BackendConfig:
    """Envuelve un backend vivo en captura/replay (--fixture-dir)."""
    if config.kind in (BackendKind.MOCK, BackendKind.FIXTURE):
        return config
    return BackendConfig(
        name=config.name,
        kind=BackendKind.FIXTURE,
        model=config.model,
        params=config.params,
        max_retries=config.max_retries,
        backoff=config.backoff,
        max_prompt_chars=config.max_prompt_chars,
        fixture_dir=str(Path(fixture_dir) / config.name),
        inner=config,
    )


# =========================
# FUNCIÓN PÚBLICA
# =========================
def complete(backend: ChatBackend, system: str, user: str, params: Optional[GenerationParams] = None) -> str:
    """
    Devuelve el texto del asistente. Los fallos transitorios se reintentan hasta
    config.max_retries veces con backoff exponencial; en el log solo van digests.
    """
    params = params or backend.config.params
    length = len(system) + len(user)
    limit = backend.config.max_prompt_chars
    if limit and length > limit:
        raise PromptTooLongError(backend.name, length, limit)

    request = digest_text(system, user)
    attempts = backend.config.max_retries + 1
    last_error: Optional[TransportError] = None
    for attempt in range(1, attempts + 1):
        try:
            text = backend.send(system, user, params)
            if not text or not text.strip():
                raise TransportError(backend.name, "respuesta vacía")
        except TransportError as exc:
            if not exc.transient:
                raise
            last_error = exc
            logger.warning("[LLM] %s intento %d/%d falló: %s", backend.name, attempt, attempts, exc)
            if attempt < attempts:
                time.sleep(backend.config.backoff * (2 ** (attempt - 1)))
            continue
        logger.info("[LLM] %s model=%s req=%s resp=%s", backend.name, backend.model, request, digest_text(text))
        return text

    raise TransportError(backend.name, f"sin respuesta: {last_error}", attempts=attempts)
