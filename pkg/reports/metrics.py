"""
Métricas de evaluación sobre conjuntos de factores.

Todo se calcula con Fraction; el redondeo a dos decimales solo ocurre al presentar
(render_percent), para poder comparar valores exactos.
"""
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, Mapping

from arguments.plies import ExtractedFactors
from scenarios.cases import SLOTS, CaseSlot, ScenarioMode

from .exceptions import DegenerateInputError, EmptyCellError, EvaluationError

HUNDRED = Fraction(100)
ABSTENTION_SCENARIOS = (ScenarioMode.MISMATCHED, ScenarioMode.NON_ARGUABLE)


@dataclass(frozen=True)
class MetricInputs:
    ground_truth: Mapping[CaseSlot, FrozenSet[int]]
    extracted: ExtractedFactors
    abstained: bool = False
    scenario: ScenarioMode = ScenarioMode.ARGUABLE

    def _extracted(self, slot: CaseSlot) -> FrozenSet[int]:
        # factors_for ya deduplica: las menciones repetidas cuentan una vez
        return self.extracted.factors_for(slot)

    @property
    def n_gt(self) -> int:
        return sum(len(self.ground_truth.get(slot, ())) for slot in SLOTS)

    @property
    def n_h(self) -> int:
        return sum(len(self._extracted(slot) - frozenset(self.ground_truth.get(slot, ()))) for slot in SLOTS)

    @property
    def n_util(self) -> int:
        return sum(len(self._extracted(slot) & frozenset(self.ground_truth.get(slot, ()))) for slot in SLOTS)


def _require_ground_truth(inputs: MetricInputs) -> int:
    n_gt = inputs.n_gt
    if n_gt == 0:
        raise DegenerateInputError()
    return n_gt


def hallucination_accuracy(inputs: MetricInputs) -> Fraction:
    """(1 - N_h / N_gt) · 100. Sin recortar: puede ser negativo si N_h > N_gt."""
    n_gt = _require_ground_truth(inputs)
    return (1 - Fraction(inputs.n_h, n_gt)) * HUNDRED


def factor_recall(inputs: MetricInputs) -> Fraction:
    n_gt = _require_ground_truth(inputs)
    if inputs.abstained:
        return Fraction(0)
    return Fraction(inputs.n_util, n_gt) * HUNDRED


def abstention_ratio(records: Iterable) -> Fraction:
    """
    N_sa / N_ta · 100 sobre los registros de una celda (cualquier objeto con
    `.abstained` y `.mode`). Solo tiene sentido en Mismatched y NonArguable.
    """
    records = list(records)
    if not records:
        raise EmptyCellError("celda vacía: no hay registros para el ratio de abstención")
    for record in records:
        if ScenarioMode(record.mode) not in ABSTENTION_SCENARIOS:
            raise EvaluationError(f"{record.triple_id}: el ratio de abstención no aplica a {ScenarioMode(record.mode).value}")
    n_sa = sum(1 for record in records if record.abstained)
    return Fraction(n_sa, len(records)) * HUNDRED


def render_percent(value: Fraction) -> str:
    quantized = (Decimal(value.numerator) / Decimal(value.denominator)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    return f"{quantized:.2f}"


def counts_for(ground_truth: Mapping[CaseSlot, Iterable[int]], extracted: ExtractedFactors) -> Dict[str, int]:
    inputs = MetricInputs({s: frozenset(ground_truth.get(s, ())) for s in SLOTS}, extracted)
    return {"n_gt": inputs.n_gt, "n_h": inputs.n_h, "n_util": inputs.n_util}
