"""
Versiones por reglas del Factor Analyst y del Argument Polisher.

Son funciones puras sobre (PlyContext, afirmaciones extraídas del ply). La abstención
se decide siempre antes que la corrección.
"""
import logging
from fractions import Fraction
from typing import FrozenSet, List, Optional

from arguments.plies import ExtractedFactors
from factors.catalog import FactorCatalog, Side, load_catalog
from factors.exceptions import UnknownFactorError
from scenarios.cases import SLOTS, CaseSlot, Outcome

from .context import PlyContext
from .exceptions import AgentContractError
from .protocol import (
    AbstentionReason,
    Accuracy,
    AnalysisOutcome,
    AnalystReport,
    CorrectionDetails,
    PolisherReport,
    Strength,
    Utilization,
)

logger = logging.getLogger(__name__)

SIDE_OF = {Outcome.PLAINTIFF: Side.P, Outcome.DEFENDANT: Side.D}


def _describe(catalog: FactorCatalog, factor_id: int) -> str:
    try:
        return catalog.lookup(factor_id).render()
    except UnknownFactorError:
        return f"F{factor_id} (not in the factor catalog)"


def _codes(factor_ids) -> str:
    return ", ".join(f"F{i}" for i in sorted(factor_ids))


def has_valid_distinction(context: PlyContext, claims: ExtractedFactors) -> bool:
    """Distinción real de c3: un factor de c3∖c1 atribuido a c3 o uno de c1∖c3 atribuido a c1."""
    c1 = context.triple.c1.factor_set
    c3 = context.triple.c3.factor_set
    return bool(
        (claims.factors_for(CaseSlot.C3) & (c3 - c1))
        or (claims.factors_for(CaseSlot.C1) & (c1 - c3))
    )


def abstention_reason(context: PlyContext, claims: ExtractedFactors) -> Optional[AbstentionReason]:
    no_common = not context.shared_with_primary
    if context.is_rebuttal:
        # En la réplica, 2a exige además que se cite c2 y que no haya distinción válida de c3
        no_common = (
            no_common
            and CaseSlot.C2 in claims.mentioned_slots
            and not has_valid_distinction(context, claims)
        )
    unfavorable = not context.primary_outcome_favorable
    if no_common and unfavorable:
        return AbstentionReason.BOTH
    if no_common:
        return AbstentionReason.NO_COMMON_FACTORS
    if unfavorable:
        return AbstentionReason.UNFAVORABLE_OUTCOME
    return None


def _correction_details(context: PlyContext, claims: ExtractedFactors, catalog: FactorCatalog) -> Optional[CorrectionDetails]:
    triple = context.triple
    factor_errors: List[str] = []
    for slot in SLOTS:
        actual = triple.case(slot).factor_set
        for factor_id in claims.per_case.get(slot, ()):
            if factor_id not in actual:
                factor_errors.append(
                    f"{_describe(catalog, factor_id)} - attributed to {slot.value} but not in {slot.value}'s factors"
                )
        for factor_id in claims.negated.get(slot, ()):
            if factor_id in actual:
                factor_errors.append(
                    f"{_describe(catalog, factor_id)} - claimed absent from {slot.value} but {slot.value} has it"
                )

    outcome_errors = []
    for slot, claimed in sorted(claims.outcomes.items()):
        actual = triple.case(slot).outcome
        if actual is None:
            outcome_errors.append(f"Argument gives {slot.value} an outcome ({claimed.value}) but it is undecided.")
        elif claimed != actual:
            outcome_errors.append(
                f"Argument claims {slot.value} outcome is {claimed.value}, but actual outcome is {actual.value}."
            )

    side_errors = [
        f"{_describe(catalog, factor_id)} is cited for {slot.value} with the wrong side"
        for slot, factor_id in claims.side_mismatches
    ]

    if not (factor_errors or outcome_errors or side_errors):
        return None
    return CorrectionDetails(
        fabricated_or_misrepresented_factors=tuple(factor_errors),
        misrepresented_tsc_outcome=" ".join(outcome_errors) or None,
        other_issues_for_correction="; ".join(side_errors) or None,
    )


def oracle_analyst(
    context: PlyContext,
    claims: ExtractedFactors,
    catalog: Optional[FactorCatalog] = None,
) -> AnalystReport:
    catalog = catalog or load_catalog()
    primary = context.primary_precedent_slot.value
    side = context.arguing_side.value

    reason = abstention_reason(context, claims)
    if reason is not None:
        messages = {
            AbstentionReason.NO_COMMON_FACTORS: f"there are no common factors between c1 and {primary}",
            AbstentionReason.UNFAVORABLE_OUTCOME: (
                f"{primary}'s actual outcome is {context.primary.outcome.value}, which does not favor the {side}"
            ),
            AbstentionReason.BOTH: (
                f"{primary} shares no factors with c1 and its outcome ({context.primary.outcome.value}) "
                f"does not favor the {side}"
            ),
        }
        return AnalystReport(
            AnalysisOutcome.REQUIRES_ABSTENTION,
            f"The argument for the {side}, citing {primary}, must be abstained from: {messages[reason]}.",
            reason_for_abstention=reason,
        )

    details = _correction_details(context, claims, catalog)
    if details is not None:
        count = len(details.fabricated_or_misrepresented_factors)
        return AnalystReport(
            AnalysisOutcome.REQUIRES_CORRECTION,
            f"The argument requires correction: {count} factor claim(s) contradict the case factors"
            + (" and a precedent outcome is misstated." if details.misrepresented_tsc_outcome else "."),
            correction_details=details,
        )

    return AnalystReport(
        AnalysisOutcome.VALID_ARGUMENT,
        f"The argument segment appears valid. {primary}'s outcome favors the {side} and every factor claim is verified.",
    )


# =========================
# POLISHER
# =========================
def favorable_shared(context: PlyContext, catalog: FactorCatalog) -> FrozenSet[int]:
    side = SIDE_OF[context.arguing_side]
    return frozenset(i for i in context.shared_with_primary if catalog.lookup(i).side == side)


def cited_shared(context: PlyContext, claims: ExtractedFactors) -> FrozenSet[int]:
    """Un factor compartido cuenta como citado si se atribuye a c1 y al precedente primario."""
    return claims.factors_for(CaseSlot.C1) & claims.factors_for(context.primary_precedent_slot)


def utilization_grade(ratio: Fraction) -> Utilization:
    if ratio >= 1:
        return Utilization.EXCELLENT
    if ratio >= Fraction(3, 4):
        return Utilization.GOOD
    if ratio >= Fraction(1, 2):
        return Utilization.FAIR
    return Utilization.POOR


def _accuracy(report: AnalystReport) -> Accuracy:
    if report.analysis_outcome == AnalysisOutcome.VALID_ARGUMENT:
        return Accuracy.ACCURATE
    details = report.correction_details
    if len(details.fabricated_or_misrepresented_factors) >= 2 or details.misrepresented_tsc_outcome:
        return Accuracy.MAJOR
    return Accuracy.MINOR


def _strength(accuracy: Accuracy, utilization: Utilization) -> Strength:
    if accuracy == Accuracy.ACCURATE and utilization in (Utilization.EXCELLENT, Utilization.GOOD):
        return Strength.STRONG
    if accuracy == Accuracy.MAJOR or utilization == Utilization.POOR:
        return Strength.WEAK
    return Strength.MODERATE


def oracle_polisher(
    context: PlyContext,
    report: AnalystReport,
    claims: ExtractedFactors,
    catalog: Optional[FactorCatalog] = None,
) -> PolisherReport:
    if report.requires_abstention:
        raise AgentContractError("el pulidor no revisa un ply que el analista mandó abstener")
    catalog = catalog or load_catalog()
    primary = context.primary_precedent_slot.value

    favorable = favorable_shared(context, catalog)
    used = favorable & cited_shared(context, claims)
    missing = favorable - used
    ratio = Fraction(len(used), len(favorable)) if favorable else Fraction(1)

    utilization = utilization_grade(ratio)
    accuracy = _accuracy(report)
    strength = _strength(accuracy, utilization)

    instructions = []
    if report.requires_correction:
        instructions.append("Correct these errors:\n" + report.correction_details.as_text())
    if missing:
        listed = ", ".join(catalog.lookup(i).render() for i in sorted(missing))
        instructions.append(
            f"Ensure all favorable factors for your side common to c1 and {primary} are mentioned: {listed}."
        )
    revision_needed = bool(instructions)

    summary = (
        f"Uses {len(used)} of {len(favorable)} favorable factors shared by c1 and {primary}"
        + (f"; missing {_codes(missing)}." if missing else ".")
    )
    if report.requires_correction:
        summary += " The Factor Analyst found factual errors."

    return PolisherReport(
        argument_segment_type=context.ply.key,
        accuracy_assessment=accuracy,
        strength_assessment=strength,
        factor_utilization_assessment=utilization,
        feedback_summary=summary,
        revision_needed=revision_needed,
        instructions_for_developer="\n".join(instructions) if revision_needed else None,
    )


def consolidated_feedback(analyst: AnalystReport, polisher: Optional[PolisherReport]) -> str:
    """Corrección del analista seguida de las instrucciones del pulidor."""
    parts = []
    if analyst.requires_correction:
        parts.append(f"Factor Analyst: {analyst.summary}\n{analyst.correction_details.as_text()}")
    if polisher is not None and polisher.instructions_for_developer:
        parts.append(f"Argument Polisher: {polisher.instructions_for_developer}")
    return "\n\n".join(parts)
