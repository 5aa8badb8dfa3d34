"""
Desarrolladores simulados (sin LLM) que escriben en sintaxis canónica.

Cada borrador declara las afirmaciones que hace, de modo que el extractor canónico
puede comprobarse contra ellas.
"""
import logging
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Tuple, Union

from arguments.parsing import serialize_single_ply, serialize_three_ply
from arguments.plies import PLIES, Abstention, ExtractedFactors, ThreePlyArgument
from factors.catalog import FactorCatalog, load_catalog
from scenarios.cases import SLOTS, CaseSlot, CaseTriple, Outcome

from .context import PlyContext
from .prompts import Method
from .protocol import AbstentionReason

logger = logging.getLogger(__name__)


class MockBehavior(str, Enum):
    FAITHFUL = "Faithful"
    FABRICATING = "Fabricating"
    NON_ABSTAINING = "NonAbstaining"

    @classmethod
    def parse(cls, value: str) -> "MockBehavior":
        if isinstance(value, cls):
            return value
        key = str(value).replace("_", "").replace("-", "").lower()
        for behavior in cls:
            if behavior.value.lower() == key:
                return behavior
        raise ValueError(f"comportamiento de mock desconocido: {value!r}")


class _Claims:
    def __init__(self):
        self.per_case: Dict[CaseSlot, List[int]] = {slot: [] for slot in SLOTS}
        self.negated: Dict[CaseSlot, List[int]] = {slot: [] for slot in SLOTS}
        self.outcomes: Dict[CaseSlot, Outcome] = {}

    def attribute(self, factor_ids: Iterable[int], *slots: CaseSlot) -> None:
        for factor_id in factor_ids:
            for slot in slots:
                if factor_id not in self.per_case[slot]:
                    self.per_case[slot].append(factor_id)

    def negate(self, factor_ids: Iterable[int], slot: CaseSlot) -> None:
        for factor_id in factor_ids:
            if factor_id not in self.negated[slot]:
                self.negated[slot].append(factor_id)

    def freeze(self) -> ExtractedFactors:
        return ExtractedFactors(
            per_case={slot: tuple(ids) for slot, ids in self.per_case.items()},
            negated={slot: tuple(ids) for slot, ids in self.negated.items() if ids},
            outcomes=dict(self.outcomes),
        )


@dataclass(frozen=True)
class PlyDraft:
    ply_index: int
    content: Union[str, Abstention]
    claims: ExtractedFactors = field(default_factory=ExtractedFactors.empty)

    @property
    def abstained(self) -> bool:
        return isinstance(self.content, Abstention)


class MockDeveloper:
    """
    Faithful: cita exactamente los factores compartidos/distintivos reales y se abstiene
    cuando el precedente primario no sirve. Fabricating: como Faithful, pero el primer
    borrador del ply 1 añade k factores que no están en ningún caso. NonAbstaining:
    argumenta siempre, inventando un factor compartido si hace falta.
    """

    def __init__(
        self,
        behavior: MockBehavior = MockBehavior.FAITHFUL,
        seed: int = 0,
        fabrications: int = 1,
        catalog: Optional[FactorCatalog] = None,
        name: str = "mock",
    ):
        self.behavior = MockBehavior(behavior)
        self.seed = seed
        self.fabrications = fabrications
        self.catalog = catalog or load_catalog()
        self.name = name

    @property
    def model(self) -> str:
        return f"mock-{self.behavior.value}"

    # =========================
    # FRASES CANÓNICAS
    # =========================
    def _list(self, factor_ids) -> str:
        return ", ".join(self.catalog.lookup(i).render() for i in sorted(factor_ids))

    def _share(self, sentences, claims, slot: CaseSlot, factor_ids) -> None:
        if factor_ids:
            sentences.append(f"c1 and {slot.value} share {self._list(factor_ids)}.")
            claims.attribute(sorted(factor_ids), CaseSlot.C1, slot)

    def _only_in(self, sentences, claims, slot: CaseSlot, factor_ids) -> None:
        # Factores del precedente que c1 no tiene
        if factor_ids:
            sentences.append(f"{slot.value} has {self._list(factor_ids)}, not in c1.")
            claims.attribute(sorted(factor_ids), slot)
            claims.negate(sorted(factor_ids), CaseSlot.C1)

    def _only_in_c1(self, sentences, claims, slot: CaseSlot, factor_ids) -> None:
        if factor_ids:
            sentences.append(f"c1 has {self._list(factor_ids)}, which {slot.value} does not have.")
            claims.attribute(sorted(factor_ids), CaseSlot.C1)
            claims.negate(sorted(factor_ids), slot)

    def _analogous(self, sentences, claims, slot: CaseSlot, outcome: Outcome) -> None:
        sentences.append(f"{slot.value} (outcome {outcome.value}) is analogous to c1.")
        claims.outcomes[slot] = outcome

    def _fabricated(self, triple: CaseTriple) -> List[int]:
        used = triple.c1.factor_set | triple.c2.factor_set | triple.c3.factor_set
        pool = [i for i in self.catalog.ids if i not in used]
        rng = random.Random(f"{self.seed}:{triple.id}")
        return sorted(rng.sample(pool, min(self.fabrications, len(pool))))

    # =========================
    # BORRADORES POR PLY
    # =========================
    def _should_abstain(self, context: PlyContext) -> Optional[str]:
        if self.behavior == MockBehavior.NON_ABSTAINING:
            return None
        primary = context.primary_precedent_slot.value
        if not context.primary_outcome_favorable:
            return (
                f"Generation stopped. {AbstentionReason.UNFAVORABLE_OUTCOME.value}: {primary} "
                f"was decided for the {context.primary.outcome.value}."
            )
        triple = context.triple
        no_common = not context.shared_with_primary
        if context.is_rebuttal:
            # Sin factores comunes con c2, la réplica aún vale si distingue c3
            no_common = no_common and triple.c1.factor_set == triple.c3.factor_set
        if no_common:
            return f"Generation stopped. {AbstentionReason.NO_COMMON_FACTORS.value}: {primary} shares no factors with c1."
        return None

    def draft(self, context: PlyContext, feedback: Optional[str] = None) -> PlyDraft:
        reason = self._should_abstain(context)
        if reason is not None:
            return PlyDraft(context.ply_index, Abstention(context.ply_index, reason))

        triple = context.triple
        c1 = triple.c1.factor_set
        claims = _Claims()
        sentences: List[str] = []
        primary_slot = context.primary_precedent_slot
        primary = context.primary
        shared = c1 & primary.factor_set

        if context.ply_index == 2:
            # Distinguir c2 antes de citar c3
            self._only_in(sentences, claims, CaseSlot.C2, triple.c2.factor_set - c1)
            self._only_in_c1(sentences, claims, CaseSlot.C2, c1 - triple.c2.factor_set)
        if context.is_rebuttal:
            self._only_in(sentences, claims, CaseSlot.C3, triple.c3.factor_set - c1)
            self._only_in_c1(sentences, claims, CaseSlot.C3, c1 - triple.c3.factor_set)

        self._analogous(sentences, claims, primary_slot, primary.outcome)
        if shared:
            self._share(sentences, claims, primary_slot, shared)
        elif self.behavior == MockBehavior.NON_ABSTAINING and not context.is_rebuttal:
            # Sin solapamiento real, afirma como compartido un factor del precedente
            invented = min(primary.factor_set)
            self._share(sentences, claims, primary_slot, {invented})

        if (
            self.behavior == MockBehavior.FABRICATING
            and context.ply_index == 1
            and not feedback
        ):
            for factor_id in self._fabricated(triple):
                sentences.append(f"c1 also has {self.catalog.lookup(factor_id).render()}.")
                claims.attribute([factor_id], CaseSlot.C1)

        return PlyDraft(context.ply_index, " ".join(sentences), claims.freeze())

    def draft_three_ply(self, triple: CaseTriple) -> Tuple[ThreePlyArgument, ExtractedFactors]:
        texts: List[str] = []
        merged = _Claims()
        for ply in PLIES:
            context = PlyContext.for_ply(triple, ply.index, texts)
            result = self.draft(context)
            if result.abstained:
                return ThreePlyArgument(abstention=result.content), ExtractedFactors.empty()
            texts.append(result.content)
            for slot in SLOTS:
                merged.attribute(result.claims.per_case.get(slot, ()), slot)
                merged.negate(result.claims.negated.get(slot, ()), slot)
            merged.outcomes.update(result.claims.outcomes)
        return ThreePlyArgument.completed(*texts), merged.freeze()

    # =========================
    # SALIDA CRUDA (lo que devolvería un modelo)
    # =========================
    def respond(self, context: PlyContext, variant: Method, feedback: Optional[str] = None) -> str:
        if Method(variant) in (Method.SA, Method.SA_EP):
            argument, _ = self.draft_three_ply(context.triple)
            return serialize_three_ply(argument)
        result = self.draft(context, feedback)
        return serialize_single_ply(context.ply, result.content)
