"""
Agregación de EvaluationRecord en celdas (modelo, método, escenario).

La política por defecto suma N_h, N_gt y N_util de la celda y aplica la fórmula una vez
(pooled). Con `mean` se promedian los porcentajes por tripleta.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import groupby
from typing import Dict, Iterable, List, Optional, Tuple

from ai_agent.prompts import Method
from scenarios.cases import ScenarioMode

from .exceptions import EvaluationError
from .extraction import EvaluationRecord, EvaluationStatus
from .metrics import ABSTENTION_SCENARIOS, HUNDRED, abstention_ratio, factor_recall, hallucination_accuracy

logger = logging.getLogger(__name__)

METHOD_ORDER = (Method.SA, Method.SA_EP, Method.MA, Method.RMA)
SCENARIO_ORDER = (ScenarioMode.ARGUABLE, ScenarioMode.MISMATCHED, ScenarioMode.NON_ARGUABLE)
COUNT_KEYS = ("triples", "completed", "abstained", "failed", "evaluation_failed", "excluded_from_acc")


class AggregationPolicy(str, Enum):
    POOLED = "pooled"
    MEAN = "mean"

    @classmethod
    def parse(cls, value) -> "AggregationPolicy":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise EvaluationError(f"política de agregación desconocida: {value!r} (pooled | mean)") from None


@dataclass(frozen=True)
class CellReport:
    model: str
    method: Method
    scenario: ScenarioMode
    acc_h: Optional[Fraction] = None
    rec_u: Optional[Fraction] = None
    ratio_abstain: Optional[Fraction] = None
    counts: Dict[str, int] = field(default_factory=dict)
    policy: AggregationPolicy = AggregationPolicy.POOLED

    @property
    def key(self) -> Tuple[str, Method, ScenarioMode]:
        return self.model, self.method, self.scenario

    @property
    def negative_acc_h(self) -> bool:
        return self.acc_h is not None and self.acc_h < 0

    def to_dict(self) -> Dict:
        def text(value):
            return None if value is None else str(value)

        return {
            "model": self.model,
            "method": self.method.value,
            "scenario": self.scenario.value,
            "policy": self.policy.value,
            "acc_h": text(self.acc_h),
            "rec_u": text(self.rec_u),
            "ratio_abstain": text(self.ratio_abstain),
            "negative_acc_h": self.negative_acc_h,
            "counts": dict(self.counts),
        }


def _cell_key(record: EvaluationRecord):
    return (
        record.backend,
        METHOD_ORDER.index(Method.parse(record.method)),
        SCENARIO_ORDER.index(ScenarioMode(record.mode)),
    )


def _mean(values: List[Fraction]) -> Optional[Fraction]:
    return sum(values, Fraction(0)) / len(values) if values else None


def _pooled_acc_h(records: List[EvaluationRecord]) -> Optional[Fraction]:
    n_gt = sum(r.n_gt for r in records)
    if not records or n_gt == 0:
        return None
    return (1 - Fraction(sum(r.n_h for r in records), n_gt)) * HUNDRED


def _pooled_rec_u(records: List[EvaluationRecord]) -> Optional[Fraction]:
    n_gt = sum(r.n_gt for r in records)
    if not records or n_gt == 0:
        return None
    # las abstenciones aportan N_gt pero ningún factor utilizado
    return Fraction(sum(0 if r.abstained else r.n_util for r in records), n_gt) * HUNDRED


def _counts(records: List[EvaluationRecord]) -> Dict[str, int]:
    by_status = {status: sum(1 for r in records if r.status == status) for status in EvaluationStatus}
    return {
        "triples": len(records),
        "completed": by_status[EvaluationStatus.SCORED] + by_status[EvaluationStatus.EVALUATION_FAILED],
        "abstained": by_status[EvaluationStatus.ABSTAINED],
        "failed": by_status[EvaluationStatus.RUN_FAILED],
        "evaluation_failed": by_status[EvaluationStatus.EVALUATION_FAILED],
        "excluded_from_acc": by_status[EvaluationStatus.ABSTAINED],
    }


def aggregate_cell(records: List[EvaluationRecord], policy=AggregationPolicy.POOLED) -> CellReport:
    policy = AggregationPolicy.parse(policy)
    first = records[0]
    scenario = ScenarioMode(first.mode)
    scored = [r for r in records if r.scored]
    # Failed no entra en ninguna métrica ni cuenta como abstención
    ran = [r for r in records if r.status != EvaluationStatus.RUN_FAILED]

    if policy == AggregationPolicy.POOLED:
        acc_h = _pooled_acc_h(scored)
    else:
        acc_h = _mean([hallucination_accuracy(r.metric_inputs()) for r in scored])

    rec_u = None
    if scenario == ScenarioMode.ARGUABLE:
        recall_records = [r for r in ran if r.scored or r.abstained]
        if policy == AggregationPolicy.POOLED:
            rec_u = _pooled_rec_u(recall_records)
        else:
            rec_u = _mean([factor_recall(r.metric_inputs()) for r in recall_records])

    ratio = None
    if scenario in ABSTENTION_SCENARIOS and ran:
        ratio = abstention_ratio(ran)

    cell = CellReport(
        model=first.backend,
        method=Method.parse(first.method),
        scenario=scenario,
        acc_h=acc_h,
        rec_u=rec_u,
        ratio_abstain=ratio,
        counts=_counts(records),
        policy=policy,
    )
    if cell.negative_acc_h:
        logger.warning("[EVAL] %s/%s/%s: Acc_H negativo (%s), N_h supera a N_gt",
                       cell.model, cell.method.value, cell.scenario.value, float(acc_h))
    return cell


def aggregate(evaluations: Iterable[EvaluationRecord], policy=AggregationPolicy.POOLED) -> List[CellReport]:
    """Una CellReport por celda, en orden modelo, método (SA → RMA), escenario."""
    policy = AggregationPolicy.parse(policy)
    ordered = sorted(evaluations, key=lambda r: (_cell_key(r), r.triple_id))
    cells = []
    for _, group in groupby(ordered, key=_cell_key):
        records = list(group)
        ids = [r.triple_id for r in records]
        if len(ids) != len(set(ids)):
            raise EvaluationError(f"tripletas repetidas en la celda {records[0].backend}/{records[0].method}")
        cells.append(aggregate_cell(records, policy))
    return cells
