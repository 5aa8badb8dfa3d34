from typing import Optional

from factors.catalog import FactorCatalog, load_catalog
from scenarios.cases import SLOT_CASE_NAMES, SLOTS, Case, CaseSlot, CaseTriple


def render_case(case: Case, slot: CaseSlot, catalog: Optional[FactorCatalog] = None) -> str:
    """
    "[TSC2] [outcome Plaintiff] [Factors: F4 Agreed-not-to-disclose (P), ...]"

    El segmento de resultado solo aparece en los precedentes.
    """
    catalog = catalog or load_catalog()
    slot = CaseSlot(slot)
    factors = ", ".join(catalog.lookup(i).render() for i in sorted(case.factors))
    parts = [f"[{SLOT_CASE_NAMES[slot]}]"]
    if slot != CaseSlot.C1 and case.outcome is not None:
        parts.append(f"[outcome {case.outcome.value}]")
    parts.append(f"[Factors: {factors}]")
    return " ".join(parts)


def render_triple(triple: CaseTriple, catalog: Optional[FactorCatalog] = None) -> str:
    catalog = catalog or load_catalog()
    return "\n".join(render_case(triple.case(slot), slot, catalog) for slot in SLOTS)
