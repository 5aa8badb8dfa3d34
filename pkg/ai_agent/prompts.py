"""
Prompts de cada rol. Las claves JSON y los valores enumerados son el protocolo que
parsean arguments.parsing y ai_agent.protocol: no cambiarlos sin cambiar los parsers.
"""
from enum import Enum
from typing import Optional, Tuple

from arguments.plies import PLIES, Ply
from arguments.rendering import render_case
from factors.catalog import FactorCatalog, load_catalog
from scenarios.cases import SLOTS

from .context import PlyContext


class Method(str, Enum):
    SA = "SA"
    SA_EP = "SA_EP"
    MA = "MA"
    RMA = "RMA"

    @classmethod
    def parse(cls, value: str) -> "Method":
        if isinstance(value, cls):
            return value
        key = str(value).upper().replace("-", "_")
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"método desconocido: {value!r}") from None


# =========================
# DESARROLLADOR DE ARGUMENTOS
# =========================
DEVELOPER_SYSTEM = (
    "You draft factor-based legal arguments about trade secret misappropriation. "
    "Cases are described only by their factors; each factor favors the Plaintiff (P) or the Defendant (D)."
)

CANONICAL_STYLE = (
    "Name the case (c1, c2 or c3) in every sentence that mentions a factor, "
    "and write factors as they are listed, e.g. F4 Agreed-not-to-disclose (P)."
)

ENHANCED_INSTRUCTIONS = """Before writing, work through these checks step by step:
1. Grounding: use only the factors listed for each case. Never attribute a factor to a case whose list does not contain it, and never invent factors.
2. Abstention: if the precedent a party relies on shares no factor with c1, or its outcome does not favor that party, do not argue that ply. Write "TERMINATE: <reason>" as the value of that ply instead.
3. Utilization: mention every factor shared by c1 and the cited precedent that helps the arguing party, and every distinguishing factor that matters for the distinction."""

PLY_TASKS = {
    Ply.PLAINTIFF_ARGUMENT: "Plaintiff's Argument: cite c2, a precedent decided for the Plaintiff, and draw the analogy to c1 through the factors c1 and c2 share.",
    Ply.DEFENDANT_COUNTER: "Defendant's Counterargument: distinguish c2, then cite c3, a precedent decided for the Defendant, and draw the analogy to c1 through the factors c1 and c3 share.",
    Ply.PLAINTIFF_REBUTTAL: "Plaintiff's Rebuttal: distinguish c3 and reinforce the Plaintiff's position, for instance by returning to the factors shared by c1 and c2.",
}

THREE_PLY_SCHEMA = (
    '{"Plaintiff\'s Argument": "...", "Defendant\'s Counterargument": "...", "Plaintiff\'s Rebuttal": "..."}'
)


def render_cases(context: PlyContext, catalog: Optional[FactorCatalog] = None) -> str:
    catalog = catalog or load_catalog()
    return "\n".join(render_case(context.triple.case(slot), slot, catalog) for slot in SLOTS)


def _prior_plies_block(context: PlyContext) -> str:
    if not context.prior_plies:
        return ""
    lines = ["Argument so far:"]
    for ply, text in zip(PLIES, context.prior_plies):
        lines.append(f"{ply.key}: {text}")
    return "\n".join(lines)


def build_developer_prompt(
    context: PlyContext,
    feedback: Optional[str] = None,
    variant: Method = Method.SA,
    catalog: Optional[FactorCatalog] = None,
) -> Tuple[str, str]:
    """
    SA/SA_EP: los tres plies en un turno. MA/RMA: solo el ply actual, con los previos.
    En las revisiones de RMA el feedback consolidado se añade tal cual al final.
    """
    variant = Method(variant)
    cases = render_cases(context, catalog)
    parts = []

    if variant in (Method.SA, Method.SA_EP):
        if variant == Method.SA_EP:
            parts.append(ENHANCED_INSTRUCTIONS)
        parts.append("Construct a 3-ply argument for the current case c1:")
        parts.extend(f"{ply.index}. {PLY_TASKS[ply]}" for ply in PLIES)
        parts.append(f"Cases:\n{cases}")
        parts.append(CANONICAL_STYLE)
        parts.append(f"Answer with a single JSON object with exactly these keys:\n{THREE_PLY_SCHEMA}")
    else:
        ply = context.ply
        side = context.arguing_side.value
        parts.append(
            f"You argue for the {side}. Write only ply {ply.index} of a 3-ply argument "
            f"about the current case c1; your primary precedent is {context.primary_precedent_slot.value}."
        )
        parts.append(PLY_TASKS[ply])
        parts.append(f"Cases:\n{cases}")
        prior = _prior_plies_block(context)
        if prior:
            parts.append(prior)
        if variant == Method.RMA:
            parts.append(
                'If the primary precedent shares no factor with c1 or was not decided for your side, '
                'write "TERMINATE: <reason>" as the value instead of an argument.'
            )
        parts.append(CANONICAL_STYLE)
        parts.append(f'Answer with a single JSON object: {{"{ply.key}": "..."}}')

    if feedback:
        parts.append(f"Revise your previous answer according to this feedback:\n{feedback}")

    return DEVELOPER_SYSTEM, "\n\n".join(parts)


# =========================
# FACTOR ANALYST
# =========================
ANALYST_SYSTEM = """You are the Factor Analyst. You review one ply of a 3-ply argument and decide whether it must be abstained from, corrected, or accepted.

Apply the checks in this order and stop at the first one that applies:
1. Abstention (checked first, and only against the primary precedent of the ply: c2 for the Plaintiff's Argument, c3 for the Defendant's Counterargument, c2 for reinforcement in the Plaintiff's Rebuttal):
   a. the primary precedent shares no factor with c1 (for the Rebuttal: also no valid distinction of c3 is made), or
   b. the primary precedent was not decided for the arguing party.
2. Correction: any factor claimed as common or distinguishing that contradicts the factor lists of c1, c2 or c3, or any misstated precedent outcome.
3. Otherwise the ply is valid.

Reply with JSON only:
{
  "analysis_outcome": "REQUIRES_ABSTENTION" | "REQUIRES_CORRECTION" | "VALID_ARGUMENT",
  "summary": "<short explanation>",
  "abstention_details": {"reason_for_abstention": "NoCommonFactors" | "UnfavorableOutcome" | "Both"},
  "correction_details": {
    "fabricated_or_misrepresented_factors": ["<factor and what is wrong>"],
    "misrepresented_tsc_outcome": "<or null>",
    "other_issues_for_correction": "<or null>"
  }
}
Include abstention_details only for REQUIRES_ABSTENTION and correction_details only for REQUIRES_CORRECTION."""


def _review_header(context: PlyContext, catalog: Optional[FactorCatalog]) -> str:
    lines = [
        f"Ply under review: {context.ply.key} (ply {context.ply_index})",
        f"Arguing party: {context.arguing_side.value}",
        f"Primary precedent: {context.primary_precedent_slot.value}",
        f"Cases:\n{render_cases(context, catalog)}",
    ]
    prior = _prior_plies_block(context)
    if prior:
        lines.append(prior)
    return "\n".join(lines)


def build_analyst_prompt(context: PlyContext, ply_text: str, catalog: Optional[FactorCatalog] = None) -> Tuple[str, str]:
    user = f"{_review_header(context, catalog)}\n\nPly text:\n{ply_text}"
    return ANALYST_SYSTEM, user


# =========================
# ARGUMENT POLISHER
# =========================
POLISHER_SYSTEM = """You are the Argument Polisher. You receive one ply of a 3-ply argument, the case factors and the Factor Analyst's report.
Judge factual accuracy, persuasive strength and factor utilization: are all supporting factors shared by c1 and the cited precedent used, are the distinguishing factors on both sides highlighted, and is any important factor overlooked?
Ask for a revision only when it would fix an error or add a missing factor, and tell the developer exactly what to change.

Reply with JSON only:
{
  "argument_segment_type": "Plaintiff's Argument" | "Defendant's Counterargument" | "Plaintiff's Rebuttal",
  "accuracy_assessment": "Accurate" | "MinorInaccuracies" | "MajorInaccuracies",
  "strength_assessment": "Strong" | "Moderate" | "Weak",
  "factor_utilization_assessment": "Excellent" | "Good" | "Fair" | "Poor",
  "feedback_summary": "<short feedback>",
  "revision_needed": true | false,
  "instructions_for_developer": "<only when revision_needed is true>",
  "polished_argument": "<optional: the improved ply text>"
}"""


def build_polisher_prompt(
    context: PlyContext,
    ply_text: str,
    analyst_report_json: str,
    catalog: Optional[FactorCatalog] = None,
) -> Tuple[str, str]:
    user = (
        f"{_review_header(context, catalog)}\n\nPly text:\n{ply_text}\n\n"
        f"Factor Analyst report:\n{analyst_report_json}"
    )
    return POLISHER_SYSTEM, user


# =========================
# DESTILADOR DE FACTORES (evaluación)
# =========================
DISTILLER_SYSTEM = """You extract legal factors from a 3-ply argument given as JSON.
For each case c1, c2 and c3 list every factor the argument attributes to that case, written like "F4 Agreed-not-to-disclose (P)".
A factor the text says a case lacks is not attributed to that case. List each factor once per case.
Reply with JSON only: {"c1": [...], "c2": [...], "c3": [...]}"""


def build_distiller_prompt(argument_json: str) -> Tuple[str, str]:
    return DISTILLER_SYSTEM, f"Argument:\n{argument_json}"


def format_reminder(schema_hint: str) -> str:
    """Se añade al reintento cuando la respuesta no se pudo parsear."""
    return (
        "\n\nYour previous reply could not be parsed. Reply again with the JSON object only, "
        f"no prose and no code fences, following this shape:\n{schema_hint}"
    )
