"""
Extractor determinista para argumentos en sintaxis canónica.

Cada afirmación sobre factores vive en una frase que nombra el caso ("c1 and c2 share
F4 ...", "c1 does not have F5 ... which was in c3"). El texto libre no se intenta
entender aquí: para eso está el destilador LLM de reports.extraction.
"""
import logging
import re
from typing import Dict, Iterable, List, Optional, Set, Tuple

from factors.catalog import FactorCatalog, Side, find_factor_tokens, load_catalog
from factors.exceptions import UnknownFactorError
from scenarios.cases import SLOTS, CaseSlot, Outcome

from .exceptions import AmbiguousAttributionError
from .plies import ExtractedFactors, ThreePlyArgument

logger = logging.getLogger(__name__)

SENTENCE_SPLIT_RE = re.compile(r"[.!?;]")

SLOT_ALIASES = {
    CaseSlot.C1: r"(?:c1|TSC1|the\s+input\s+case|the\s+current\s+case)",
    CaseSlot.C2: r"(?:c2|TSC2)",
    CaseSlot.C3: r"(?:c3|TSC3)",
}

_MENTION_RE = {slot: re.compile(rf"\b{alias}\b", re.IGNORECASE) for slot, alias in SLOT_ALIASES.items()}

_NEGATION_TEMPLATES = (
    r"\b{a}\s+(?:does\s+not|doesn't|did\s+not|do\s+not)\s+(?:have|has|contain|include|share)\b",
    r"\b{a}\s+lacks?\b",
    r"\bnot\s+(?:present\s+)?in\s+{a}\b",
    r"\babsent\s+(?:from|in)\s+{a}\b",
    r"\bmissing\s+from\s+{a}\b",
)

_NEGATION_RE = {
    slot: re.compile("|".join(t.format(a=alias) for t in _NEGATION_TEMPLATES), re.IGNORECASE)
    for slot, alias in SLOT_ALIASES.items()
}

_OUTCOME_RE = {
    slot: re.compile(
        rf"\b{alias}\s*(?:[\(\[]\s*outcome:?\s*(?P<a>Plaintiff|Defendant)\s*[\)\]]"
        rf"|,?\s+(?:was\s+)?(?:decided|won|ruled)\s+(?:for|by|in\s+favor\s+of)\s+(?:the\s+)?(?P<b>Plaintiff|Defendant))",
        re.IGNORECASE,
    )
    for slot, alias in SLOT_ALIASES.items()
}


def split_sentences(text: str) -> List[str]:
    return [s.strip() for s in SENTENCE_SPLIT_RE.split(text or "") if s.strip()]


class _Accumulator:
    def __init__(self):
        self.per_case: Dict[CaseSlot, List[int]] = {slot: [] for slot in SLOTS}
        self.negated: Dict[CaseSlot, List[int]] = {slot: [] for slot in SLOTS}
        self.outcomes: Dict[CaseSlot, Outcome] = {}
        self.side_mismatches: List[Tuple[CaseSlot, int]] = []
        self.mentioned: Set[CaseSlot] = set()
        self.ambiguous: List[str] = []

    @staticmethod
    def _add(bucket: List, item) -> None:
        if item not in bucket:
            bucket.append(item)

    def feed(self, sentence: str, catalog: FactorCatalog) -> None:
        mentioned = {slot for slot in SLOTS if _MENTION_RE[slot].search(sentence)}
        negated = {slot for slot in mentioned if _NEGATION_RE[slot].search(sentence)}
        self.mentioned |= mentioned

        for slot in mentioned:
            match = _OUTCOME_RE[slot].search(sentence)
            if match:
                claimed = (match.group("a") or match.group("b")).capitalize()
                self.outcomes[slot] = Outcome(claimed)

        tokens = list(find_factor_tokens(sentence))
        if not tokens:
            return
        if not mentioned:
            self.ambiguous.append(sentence)
            return

        positive = [slot for slot in SLOTS if slot in mentioned and slot not in negated]
        for token in tokens:
            factor_id = int(token.group("id"))
            # Los ids desconocidos se conservan: son la señal de alucinación
            side = token.group("side")
            if side:
                try:
                    if catalog.lookup(factor_id).side != Side(side):
                        for slot in positive:
                            self._add(self.side_mismatches, (slot, factor_id))
                except UnknownFactorError:
                    pass
            for slot in positive:
                self._add(self.per_case[slot], factor_id)
            for slot in negated:
                self._add(self.negated[slot], factor_id)

    def result(self) -> ExtractedFactors:
        return ExtractedFactors(
            per_case={slot: tuple(ids) for slot, ids in self.per_case.items()},
            negated={slot: tuple(ids) for slot, ids in self.negated.items() if ids},
            outcomes=dict(self.outcomes),
            side_mismatches=tuple(self.side_mismatches),
            mentioned_slots=frozenset(self.mentioned),
        )


def _extract(texts: Iterable[str], catalog: FactorCatalog, strict: bool) -> ExtractedFactors:
    acc = _Accumulator()
    for text in texts:
        for sentence in split_sentences(text):
            acc.feed(sentence, catalog)
    result = acc.result()
    if acc.ambiguous:
        if strict:
            raise AmbiguousAttributionError(acc.ambiguous, result)
        logger.warning("[EXTRACT] %d frase(s) con factores sin caso; se ignoran", len(acc.ambiguous))
    return result


def extract_ply_claims(text: str, catalog: Optional[FactorCatalog] = None, strict: bool = True) -> ExtractedFactors:
    """Afirmaciones de un solo ply (lo que revisa el analista)."""
    return _extract([text], catalog or load_catalog(), strict)


def extract_factors_canonical(
    argument: ThreePlyArgument,
    catalog: Optional[FactorCatalog] = None,
    strict: bool = True,
) -> ExtractedFactors:
    catalog = catalog or load_catalog()
    if argument.abstained:
        return ExtractedFactors.empty()
    return _extract(argument.plies, catalog, strict)
