"""
Los cuatro pipelines de generación (SA, SA_EP, MA, RMA).

Cada tripleta se procesa de forma secuencial. Los errores de protocolo y de transporte
se convierten en un RunRecord Failed; nunca salen de aquí.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple, Union

from django.utils import timezone

from ai_agent.agents import AgentRoster, with_reprompt
from ai_agent.context import PlyContext
from ai_agent.exceptions import AgentError
from ai_agent.oracles import consolidated_feedback
from ai_agent.prompts import Method
from ai_agent.protocol import AnalystReport
from arguments.exceptions import ArgumentError
from arguments.parsing import parse_single_ply, parse_three_ply
from arguments.plies import PLIES, Abstention, ThreePlyArgument
from scenarios.cases import CaseTriple

from .records import PlyReview, RunRecord, RunStatus, roles_for

logger = logging.getLogger(__name__)

RUN_FAILURES = (ArgumentError, AgentError)


def _now() -> str:
    return timezone.now().isoformat()


class _RunFailed(Exception):
    def __init__(self, cause: Exception, ply_index: int):
        super().__init__(str(cause))
        self.cause = cause
        self.ply_index = ply_index


@dataclass
class _RunState:
    """Estado mutable de una ejecución; se congela en un RunRecord al final."""

    triple: CaseTriple
    method: Method
    roster: AgentRoster
    started_at: str = field(default_factory=_now)
    texts: List[str] = field(default_factory=list)
    reviews: List[PlyReview] = field(default_factory=list)
    revisions: List[int] = field(default_factory=list)
    decisions: List[str] = field(default_factory=list)
    reprompts: int = 0
    attempted: int = 0

    def decide(self, decision: str) -> None:
        self.decisions.append(decision)
        logger.info("[%s] %s: %s", self.method.value, self.triple.id, decision)

    def record(self, status: RunStatus, result: Optional[ThreePlyArgument] = None,
               failure: Optional[_RunFailed] = None) -> RunRecord:
        return RunRecord(
            triple_id=self.triple.id,
            method=self.method,
            backend=self.roster.backend_name,
            model=self.roster.model,
            mode=self.triple.mode,
            status=status,
            result=result,
            per_ply_reports=tuple(self.reviews),
            revision_count_per_ply=tuple(self.revisions),
            roles=roles_for(self.attempted),
            decisions=tuple(self.decisions),
            failure=f"{type(failure.cause).__name__}: {failure.cause}" if failure else None,
            failed_ply=failure.ply_index if failure else None,
            reprompts=self.reprompts,
            started_at=self.started_at,
            finished_at=_now(),
        )

    def abstain(self, ply_index: int, reason: str) -> RunRecord:
        return self.record(RunStatus.ABSTAINED, ThreePlyArgument.abstained_at(ply_index, reason))

    def complete(self, terminate_in_prose: bool = False) -> RunRecord:
        return self.record(RunStatus.COMPLETED, ThreePlyArgument.completed(*self.texts, terminate_in_prose=terminate_in_prose))

    def fail(self, failure: _RunFailed) -> RunRecord:
        logger.warning("[%s] %s: Failed en ply %d: %s", self.method.value, self.triple.id, failure.ply_index, failure.cause)
        return self.record(RunStatus.FAILED, failure=failure)


def _generate_ply(state: _RunState, context: PlyContext, feedback: Optional[str] = None) -> Union[str, Abstention]:
    developer = state.roster.developer_for(context.arguing_side)
    label = f"{state.method.value} {state.triple.id} ply {context.ply_index}"
    try:
        value, _, reprompted = with_reprompt(
            lambda reminder: developer.generate(context, state.method, feedback, reminder=reminder),
            lambda raw: parse_single_ply(raw, context.ply),
            label,
        )
    except RUN_FAILURES as exc:
        raise _RunFailed(exc, context.ply_index) from exc
    state.reprompts += int(reprompted)
    return value


# =========================
# SA / SA_EP
# =========================
def _run_single_turn(triple: CaseTriple, roster: AgentRoster, method: Method) -> RunRecord:
    state = _RunState(triple, method, roster)
    context = PlyContext.for_ply(triple, 1)
    state.attempted = 1
    try:
        argument, _, reprompted = with_reprompt(
            lambda reminder: roster.developer.generate(context, method, reminder=reminder),
            parse_three_ply,
            f"{method.value} {triple.id}",
        )
    except RUN_FAILURES as exc:
        return state.fail(_RunFailed(exc, 1))
    state.reprompts += int(reprompted)

    if argument.terminate_in_prose:
        state.decide("terminate_in_prose")
    if argument.abstained:
        state.attempted = argument.abstention.ply_index
        state.revisions = [0] * state.attempted
        state.decide(f"developer_abstained=ply{argument.abstention.ply_index}")
        return state.record(RunStatus.ABSTAINED, argument)
    state.attempted = len(PLIES)
    state.revisions = [0] * len(PLIES)
    return state.record(RunStatus.COMPLETED, argument)


def run_sa(triple: CaseTriple, roster: AgentRoster) -> RunRecord:
    return _run_single_turn(triple, roster, Method.SA)


def run_sa_ep(triple: CaseTriple, roster: AgentRoster) -> RunRecord:
    return _run_single_turn(triple, roster, Method.SA_EP)


# =========================
# MA (debate sin reflexión)
# =========================
def run_ma(triple: CaseTriple, roster: AgentRoster) -> RunRecord:
    state = _RunState(triple, Method.MA, roster)
    try:
        for ply in PLIES:
            context = PlyContext.for_ply(triple, ply.index, state.texts)
            state.attempted = ply.index
            state.revisions.append(0)
            value = _generate_ply(state, context)
            if isinstance(value, Abstention):
                state.decide(f"developer_abstained=ply{ply.index}")
                return state.abstain(ply.index, value.reason)
            state.texts.append(value)
    except _RunFailed as failure:
        return state.fail(failure)
    return state.complete()


# =========================
# RMA (reflexivo)
# =========================
def _revision_trigger(analyst: AnalystReport, polisher_wants: bool) -> Optional[str]:
    if analyst.requires_correction and polisher_wants:
        return "both"
    if analyst.requires_correction:
        return "analyst"
    if polisher_wants:
        return "polisher"
    return None


def _abstention_reason(report: AnalystReport) -> str:
    return f"{report.reason_for_abstention.value}. {report.summary}"


def _review(state: _RunState, context: PlyContext, text: str):
    """Analista y, si no manda abstenerse, pulidor. Devuelve (analista, pulidor o None)."""
    try:
        analyst = state.roster.analyst.review(context, text)
        if analyst.requires_abstention:
            return analyst, None
        return analyst, state.roster.polisher.review(context, text, analyst)
    except RUN_FAILURES as exc:
        raise _RunFailed(exc, context.ply_index) from exc


def _rma_ply(state: _RunState, context: PlyContext) -> Union[str, Abstention]:
    ply_index = context.ply_index
    draft = _generate_ply(state, context)
    if isinstance(draft, Abstention):
        state.revisions.append(0)
        state.decide(f"developer_abstained=ply{ply_index}")
        return draft

    analyst, polisher = _review(state, context, draft)
    if polisher is None:
        state.reviews.append(PlyReview(ply_index, analyst))
        state.revisions.append(0)
        state.decide(f"analyst_abstention=ply{ply_index}")
        return Abstention(ply_index, _abstention_reason(analyst))

    trigger = _revision_trigger(analyst, polisher.revision_needed)
    if trigger is None:
        state.reviews.append(PlyReview(ply_index, analyst, polisher))
        state.revisions.append(0)
        return polisher.polished_argument or draft

    # Una sola revisión por ply
    state.decide(f"revision_trigger=ply{ply_index}:{trigger}")
    state.revisions.append(1)
    feedback = consolidated_feedback(analyst, polisher)
    revised = _generate_ply(state, context, feedback)
    if isinstance(revised, Abstention):
        state.reviews.append(PlyReview(ply_index, analyst, polisher, feedback))
        state.decide(f"developer_abstained=ply{ply_index}")
        return revised

    re_analyst, re_polisher = _review(state, context, revised)
    state.reviews.append(PlyReview(ply_index, analyst, polisher, feedback, re_analyst, re_polisher))
    if re_polisher is None:
        state.decide(f"analyst_abstention=ply{ply_index}")
        return Abstention(ply_index, _abstention_reason(re_analyst))
    if re_analyst.requires_correction:
        state.decide(f"unresolved_correction=ply{ply_index}")
        logger.warning("[RMA] %s ply %d: la revisión no resolvió la corrección: %s",
                       state.triple.id, ply_index, re_analyst.summary)
    return re_polisher.polished_argument or revised


def run_rma(triple: CaseTriple, roster: AgentRoster) -> RunRecord:
    """
    Por ply: desarrollador → analista (la abstención corta aquí y cancela los plies
    siguientes) → pulidor → como mucho una revisión con el feedback consolidado, que
    vuelve a pasar por analista y pulidor.
    """
    state = _RunState(triple, Method.RMA, roster)
    try:
        for ply in PLIES:
            context = PlyContext.for_ply(triple, ply.index, state.texts)
            state.attempted = ply.index
            outcome = _rma_ply(state, context)
            if isinstance(outcome, Abstention):
                return state.abstain(ply.index, outcome.reason)
            state.texts.append(outcome)
    except _RunFailed as failure:
        return state.fail(failure)
    return state.complete()


PIPELINES: Dict[Method, Callable[[CaseTriple, AgentRoster], RunRecord]] = {
    Method.SA: run_sa,
    Method.SA_EP: run_sa_ep,
    Method.MA: run_ma,
    Method.RMA: run_rma,
}


def run_pipeline(method: Method, triple: CaseTriple, roster: AgentRoster) -> RunRecord:
    return PIPELINES[Method.parse(method)](triple, roster)
