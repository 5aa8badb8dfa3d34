"""
Roles de agente sobre un backend de chat (LLM) o sobre reglas/mocks.

Todas las salidas de los roles pasan por los mismos parsers estrictos; ante una salida
mal formada se reintenta una sola vez con un recordatorio de formato.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple, TypeVar

from arguments.exceptions import MalformedOutputError
from arguments.extraction import extract_ply_claims
from factors.catalog import FactorCatalog, load_catalog
from scenarios.cases import Outcome

from .context import PlyContext
from .exceptions import BackendConfigError, MalformedReportError
from .mocks import MockBehavior, MockDeveloper
from .oracles import oracle_analyst, oracle_polisher
from .prompts import (
    THREE_PLY_SCHEMA,
    Method,
    build_analyst_prompt,
    build_developer_prompt,
    build_polisher_prompt,
    format_reminder,
)
from .protocol import AnalystReport, PolisherReport, parse_analyst_report, parse_polisher_report, serialize_analyst_report
from .service import BackendConfig, BackendKind, ChatBackend, build_backend, complete

logger = logging.getLogger(__name__)

T = TypeVar("T")

PARSE_ERRORS = (MalformedOutputError, MalformedReportError)


def with_reprompt(call: Callable[[bool], str], parse: Callable[[str], T], label: str) -> Tuple[T, str, bool]:
    """
    call(reminder) -> texto crudo. Devuelve (valor, texto, hubo_reintento). Si el segundo
    intento tampoco parsea, el error se propaga y el pipeline marca la ejecución como Failed.
    """
    raw = call(False)
    try:
        return parse(raw), raw, False
    except PARSE_ERRORS as exc:
        logger.warning("[AGENT] %s: salida mal formada (%s); se reintenta con recordatorio", label, exc)
    raw = call(True)
    return parse(raw), raw, True


# =========================
# DESARROLLADOR
# =========================
class LLMDeveloper:
    def __init__(self, backend: ChatBackend, catalog: Optional[FactorCatalog] = None):
        self.backend = backend
        self.catalog = catalog or load_catalog()
        self.name = backend.name
        self.model = backend.model

    def generate(self, context: PlyContext, variant: Method, feedback: Optional[str] = None, reminder: bool = False) -> str:
        system, user = build_developer_prompt(context, feedback, variant, self.catalog)
        if reminder:
            schema = THREE_PLY_SCHEMA if variant in (Method.SA, Method.SA_EP) else f'{{"{context.ply.key}": "..."}}'
            user += format_reminder(schema)
        return complete(self.backend, system, user)


class MockDeveloperAgent:
    def __init__(self, mock: MockDeveloper):
        self.mock = mock
        self.name = mock.name
        self.model = mock.model

    def generate(self, context: PlyContext, variant: Method, feedback: Optional[str] = None, reminder: bool = False) -> str:
        return self.mock.respond(context, variant, feedback)


# =========================
# FACTOR ANALYST
# =========================
class OracleAnalyst:
    kind = "oracle"

    def __init__(self, catalog: Optional[FactorCatalog] = None):
        self.catalog = catalog or load_catalog()

    def review(self, context: PlyContext, ply_text: str) -> AnalystReport:
        claims = extract_ply_claims(ply_text, self.catalog, strict=False)
        return oracle_analyst(context, claims, self.catalog)


class LLMAnalyst:
    kind = "llm"

    def __init__(self, backend: ChatBackend, catalog: Optional[FactorCatalog] = None):
        self.backend = backend
        self.catalog = catalog or load_catalog()

    def review(self, context: PlyContext, ply_text: str) -> AnalystReport:
        system, user = build_analyst_prompt(context, ply_text, self.catalog)

        def call(reminder: bool) -> str:
            return complete(self.backend, system, user + (format_reminder('{"analysis_outcome": "...", "summary": "..."}') if reminder else ""))

        report, _, _ = with_reprompt(call, parse_analyst_report, f"analista ply {context.ply_index}")
        return report


# =========================
# ARGUMENT POLISHER
# =========================
class OraclePolisher:
    kind = "oracle"

    def __init__(self, catalog: Optional[FactorCatalog] = None):
        self.catalog = catalog or load_catalog()

    def review(self, context: PlyContext, ply_text: str, report: AnalystReport) -> PolisherReport:
        claims = extract_ply_claims(ply_text, self.catalog, strict=False)
        return oracle_polisher(context, report, claims, self.catalog)


class LLMPolisher:
    kind = "llm"

    def __init__(self, backend: ChatBackend, catalog: Optional[FactorCatalog] = None):
        self.backend = backend
        self.catalog = catalog or load_catalog()

    def review(self, context: PlyContext, ply_text: str, report: AnalystReport) -> PolisherReport:
        system, user = build_polisher_prompt(context, ply_text, serialize_analyst_report(report), self.catalog)

        def call(reminder: bool) -> str:
            hint = '{"argument_segment_type": "...", "accuracy_assessment": "...", "revision_needed": false, ...}'
            return complete(self.backend, system, user + (format_reminder(hint) if reminder else ""))

        polished, _, _ = with_reprompt(call, parse_polisher_report, f"pulidor ply {context.ply_index}")
        return polished


# =========================
# PLANTILLA DE AGENTES
# =========================
@dataclass
class AgentRoster:
    developer: object
    analyst: object
    polisher: object
    # MA: dos identidades (Plaintiff, Defendant); por defecto el mismo desarrollador
    developers_by_side: Dict[Outcome, object] = field(default_factory=dict)

    def developer_for(self, side: Outcome):
        return self.developers_by_side.get(side, self.developer)

    @property
    def backend_name(self) -> str:
        return self.developer.name

    @property
    def model(self) -> str:
        return self.developer.model


def build_developer(config: BackendConfig, catalog: Optional[FactorCatalog] = None):
    if config.kind == BackendKind.MOCK:
        mock = MockDeveloper(
            MockBehavior.parse(config.behavior or MockBehavior.FAITHFUL.value),
            seed=config.seed,
            fabrications=config.fabrications,
            catalog=catalog,
            name=config.name,
        )
        return MockDeveloperAgent(mock)
    return LLMDeveloper(build_backend(config), catalog)


def build_roster(
    generator: BackendConfig,
    analyst: str = "oracle",
    polisher: str = "oracle",
    catalog: Optional[FactorCatalog] = None,
    reviewer: Optional[BackendConfig] = None,
) -> AgentRoster:
    """
    Los roles "llm" usan el backend `reviewer` (por defecto el mismo generador).
    Un generador mock no puede alimentar agentes llm.
    """
    catalog = catalog or load_catalog()
    developer = build_developer(generator, catalog)
    reviewer = reviewer or generator
    if "llm" in (analyst, polisher) and reviewer.kind == BackendKind.MOCK:
        raise BackendConfigError(f"{generator.name}: los agentes llm necesitan un backend que no sea mock")
    review_backend = build_backend(reviewer) if "llm" in (analyst, polisher) else None

    analyst_agent = LLMAnalyst(review_backend, catalog) if analyst == "llm" else OracleAnalyst(catalog)
    polisher_agent = LLMPolisher(review_backend, catalog) if polisher == "llm" else OraclePolisher(catalog)
    return AgentRoster(
        developer=developer,
        analyst=analyst_agent,
        polisher=polisher_agent,
        developers_by_side={Outcome.PLAINTIFF: developer, Outcome.DEFENDANT: developer},
    )
