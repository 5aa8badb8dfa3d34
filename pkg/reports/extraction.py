"""
Extracción de factores de los argumentos generados y EvaluationRecord por ejecución.

Offline se usa el extractor canónico; con un evaluador configurado, el destilador LLM.
"""
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple

from ai_agent.agents import with_reprompt
from ai_agent.exceptions import AgentError, MalformedReportError
from ai_agent.prompts import Method, build_distiller_prompt, format_reminder
from ai_agent.serializers import DistilledFactorsSerializer
from ai_agent.service import EVALUATOR_PARAMS, ChatBackend, complete
from arguments.exceptions import AmbiguousAttributionError, ArgumentError
from arguments.extraction import extract_factors_canonical
from arguments.parsing import extract_json_object, serialize_three_ply
from arguments.plies import ExtractedFactors, ThreePlyArgument
from factors.catalog import FactorCatalog, Side, find_factor_tokens, load_catalog
from factors.exceptions import UnknownFactorError
from pipelines.records import RunRecord, RunStatus
from scenarios.cases import SLOTS, CaseSlot, CaseTriple, ScenarioMode

from .exceptions import EvaluationFormatError, ExtractionError
from .metrics import MetricInputs, counts_for, factor_recall, hallucination_accuracy

logger = logging.getLogger(__name__)

CANONICAL = "canonical"


# =========================
# DESTILADOR LLM
# =========================
def parse_distilled(text: str, catalog: Optional[FactorCatalog] = None) -> ExtractedFactors:
    """{"c1": [...], "c2": [...], "c3": [...]} → ExtractedFactors (por id, sin duplicados)."""
    catalog = catalog or load_catalog()
    data = extract_json_object(text)
    if data is None:
        raise MalformedReportError("destilador", "no hay un objeto JSON", raw=text or "")
    serializer = DistilledFactorsSerializer(data=data)
    if not serializer.is_valid():
        raise MalformedReportError("destilador", str(dict(serializer.errors)), raw=text, errors=serializer.errors)

    per_case: Dict[CaseSlot, List[int]] = {slot: [] for slot in SLOTS}
    side_mismatches: List[Tuple[CaseSlot, int]] = []
    for slot in SLOTS:
        for entry in serializer.validated_data[slot.value]:
            match = next(find_factor_tokens(entry), None)
            if match is None:
                raise MalformedReportError("destilador", f"{slot.value}: {entry!r} no es un factor", raw=text)
            factor_id = int(match.group("id"))
            if factor_id in per_case[slot]:
                continue
            per_case[slot].append(factor_id)
            side = match.group("side")
            try:
                if side and catalog.lookup(factor_id).side != Side(side):
                    side_mismatches.append((slot, factor_id))
            except UnknownFactorError:
                # Ids fuera del catálogo se conservan: cuentan como alucinación
                pass
    return ExtractedFactors(
        per_case={slot: tuple(ids) for slot, ids in per_case.items()},
        side_mismatches=tuple(side_mismatches),
    )


def extract_factors_llm(argument: ThreePlyArgument, backend: ChatBackend,
                        catalog: Optional[FactorCatalog] = None) -> ExtractedFactors:
    if argument.abstained:
        raise ValueError("un argumento abstenido no se destila")
    catalog = catalog or load_catalog()
    system, user = build_distiller_prompt(serialize_three_ply(argument))

    def call(reminder: bool) -> str:
        hint = '{"c1": ["F4 Agreed-not-to-disclose (P)"], "c2": [], "c3": []}'
        return complete(backend, system, user + (format_reminder(hint) if reminder else ""), EVALUATOR_PARAMS)

    extracted, _, _ = with_reprompt(call, lambda raw: parse_distilled(raw, catalog), "destilador")
    return extracted


class CanonicalExtractor:
    """Con `fallback` (un LLMExtractor), los argumentos con frases ambiguas se destilan."""

    name = CANONICAL

    def __init__(self, catalog: Optional[FactorCatalog] = None, fallback: Optional["LLMExtractor"] = None):
        self.catalog = catalog or load_catalog()
        self.fallback = fallback

    def extract(self, argument: ThreePlyArgument) -> ExtractedFactors:
        try:
            return extract_factors_canonical(argument, self.catalog, strict=True)
        except AmbiguousAttributionError as exc:
            if self.fallback is None:
                raise
            logger.info("[EVAL] %d frase(s) ambiguas; se usa el destilador %s", exc.count, self.fallback.name)
            return self.fallback.extract(argument)


class LLMExtractor:
    def __init__(self, backend: ChatBackend, catalog: Optional[FactorCatalog] = None):
        self.backend = backend
        self.catalog = catalog or load_catalog()
        self.name = backend.name

    def extract(self, argument: ThreePlyArgument) -> ExtractedFactors:
        return extract_factors_llm(argument, self.backend, self.catalog)


# =========================
# EVALUATION RECORD
# =========================
class EvaluationStatus(str, Enum):
    SCORED = "Scored"
    ABSTAINED = "Abstained"
    RUN_FAILED = "RunFailed"
    EVALUATION_FAILED = "EvaluationFailed"


@dataclass(frozen=True)
class EvaluationRecord:
    triple_id: str
    method: Method
    backend: str
    model: str
    mode: ScenarioMode
    status: EvaluationStatus
    extractor: str
    ground_truth: Mapping[CaseSlot, Tuple[int, ...]]
    extracted: Optional[ExtractedFactors] = None
    n_gt: int = 0
    n_h: int = 0
    n_util: int = 0
    error: Optional[str] = None

    @property
    def abstained(self) -> bool:
        return self.status == EvaluationStatus.ABSTAINED

    @property
    def scored(self) -> bool:
        return self.status == EvaluationStatus.SCORED

    def metric_inputs(self) -> MetricInputs:
        return MetricInputs(
            ground_truth={slot: frozenset(self.ground_truth.get(slot, ())) for slot in SLOTS},
            extracted=self.extracted or ExtractedFactors.empty(),
            abstained=self.abstained,
            scenario=self.mode,
        )

    def to_dict(self) -> Dict:
        data = {
            "triple_id": self.triple_id,
            "method": Method(self.method).value,
            "backend": self.backend,
            "model": self.model,
            "mode": ScenarioMode(self.mode).value,
            "status": EvaluationStatus(self.status).value,
            "extractor": self.extractor,
            "ground_truth": {slot.value: list(self.ground_truth.get(slot, ())) for slot in SLOTS},
            "extracted": self.extracted.to_dict() if self.extracted is not None else None,
            "counts": {"n_gt": self.n_gt, "n_h": self.n_h, "n_util": self.n_util},
        }
        if self.scored:
            inputs = self.metric_inputs()
            data["metrics"] = {
                "hallucination_accuracy": str(hallucination_accuracy(inputs)),
                "factor_recall": str(factor_recall(inputs)),
            }
        if self.error:
            data["error"] = self.error
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> "EvaluationRecord":
        counts = data.get("counts", {})
        extracted = data.get("extracted")
        return cls(
            triple_id=data["triple_id"],
            method=Method.parse(data["method"]),
            backend=data["backend"],
            model=data.get("model", ""),
            mode=ScenarioMode.parse(data["mode"]),
            status=EvaluationStatus(data["status"]),
            extractor=data["extractor"],
            ground_truth={CaseSlot(s): tuple(int(i) for i in ids) for s, ids in data["ground_truth"].items()},
            extracted=ExtractedFactors.from_dict(extracted) if extracted is not None else None,
            n_gt=int(counts.get("n_gt", 0)),
            n_h=int(counts.get("n_h", 0)),
            n_util=int(counts.get("n_util", 0)),
            error=data.get("error"),
        )


def evaluate_run(record: RunRecord, triple: CaseTriple, extractor) -> EvaluationRecord:
    """
    Abstenidas y fallidas no se extraen. Un fallo de extracción no lanza: deja el
    registro en EvaluationFailed (fuera de las métricas).
    """
    if record.triple_id != triple.id:
        raise ValueError(f"registro {record.triple_id} evaluado contra la tripleta {triple.id}")
    truth = {slot: triple.case(slot).factors for slot in SLOTS}
    base = dict(
        triple_id=record.triple_id,
        method=record.method,
        backend=record.backend,
        model=record.model,
        mode=triple.mode,
        extractor=extractor.name,
        ground_truth=truth,
        n_gt=triple.n_gt,
    )
    if record.status == RunStatus.FAILED:
        return EvaluationRecord(status=EvaluationStatus.RUN_FAILED, error=record.failure, **base)
    if record.status == RunStatus.ABSTAINED:
        return EvaluationRecord(status=EvaluationStatus.ABSTAINED, **base)

    try:
        extracted = extractor.extract(record.result)
    except (ArgumentError, AgentError) as exc:
        error = ExtractionError(record.triple_id, exc)
        logger.warning("[EVAL] %s", error)
        return EvaluationRecord(status=EvaluationStatus.EVALUATION_FAILED, error=str(error), **base)

    for slot, factor_id in extracted.side_mismatches:
        logger.info("[EVAL] %s: F%d citado en %s con el lado equivocado", record.triple_id, factor_id, slot.value)
    counts = counts_for(truth, extracted)
    return EvaluationRecord(
        status=EvaluationStatus.SCORED,
        extracted=extracted,
        n_h=counts["n_h"],
        n_util=counts["n_util"],
        **base,
    )


# =========================
# ARCHIVOS DE EVALUACIÓN
# =========================
def evaluation_path(output_dir, method: Method, backend: str) -> Path:
    return Path(output_dir) / "evaluations" / f"{Method.parse(method).value}__{backend}.jsonl"


def evaluate_records(records: List[RunRecord], triples: Mapping[str, CaseTriple], extractor,
                     workers: int = 1) -> List[EvaluationRecord]:
    """Mismo orden que `records`; las extracciones van en paralelo."""
    missing = [r.triple_id for r in records if r.triple_id not in triples]
    if missing:
        raise ValueError(f"tripletas ausentes del dataset: {missing[:5]}")
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        return list(pool.map(lambda r: evaluate_run(r, triples[r.triple_id], extractor), records))


def write_evaluations(path, evaluations: List[EvaluationRecord]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [json.dumps(e.to_dict(), ensure_ascii=False, sort_keys=True) for e in evaluations]
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    logger.info("[EVAL] %d evaluaciones escritas en %s", len(lines), path)
    return path


def read_evaluations(path) -> List[EvaluationRecord]:
    evaluations = []
    with open(path, encoding="utf-8") as fh:
        for line_number, raw in enumerate(fh, 1):
            if not raw.strip():
                continue
            try:
                evaluations.append(EvaluationRecord.from_dict(json.loads(raw)))
            except (ValueError, KeyError, TypeError) as exc:
                raise EvaluationFormatError(str(exc), line_number, str(path)) from exc
    return evaluations
