"""
Orquestación de los cuatro pasos de un experimento: gen-cases → run → evaluate → report.

Cada función devuelve un resultado con su código de salida; los comandos de gestión
solo traducen ese código y los errores a CommandError.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from django.db import DatabaseError
from django.utils import timezone

from ai_agent.agents import build_roster
from ai_agent.exceptions import AgentError
from ai_agent.prompts import Method
from ai_agent.service import build_backend
from factors.catalog import FactorCatalog, load_catalog
from pipelines.runner import MatrixSummary, fail_matrix, read_transcript, run_matrix, transcript_path
from reports.aggregation import AggregationPolicy, CellReport, aggregate
from reports.extraction import (
    CANONICAL,
    CanonicalExtractor,
    EvaluationRecord,
    EvaluationStatus,
    LLMExtractor,
    evaluate_records,
    evaluation_path,
    read_evaluations,
    write_evaluations,
)
from reports.tables import render_tables, write_tables
from reports.utils import build_summary_pdf
from scenarios.cases import CaseTriple, ScenarioMode
from scenarios.dataset import dataset_metadata, dataset_path, read_dataset, write_dataset
from scenarios.exceptions import UnclassifiableTripleError
from scenarios.generator import classify_triple, generate_set

from .config import ExperimentConfig
from .exceptions import MissingInputError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUN_FAILURES = 3
EXIT_EVALUATION_FAILURES = 4


# =========================
# GEN-CASES
# =========================
@dataclass
class ModeSummary:
    mode: ScenarioMode
    path: str
    count: int
    contract_violations: int
    factor_count_violations: int

    @property
    def ok(self) -> bool:
        return self.contract_violations == 0 and self.factor_count_violations == 0


@dataclass
class GenerationResult:
    modes: List[ModeSummary] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return EXIT_OK


def check_triples(triples: List[CaseTriple], complexity: int, catalog: FactorCatalog) -> Tuple[int, int]:
    """(tripletas que no cumplen su modo, casos fuera de complexity ± 1)."""
    contract = size = 0
    low, high = complexity - 1, complexity + 1
    for triple in triples:
        try:
            if classify_triple(triple, catalog) != triple.mode:
                contract += 1
        except UnclassifiableTripleError:
            contract += 1
        size += sum(1 for case in (triple.c1, triple.c2, triple.c3) if not low <= len(case.factors) <= high)
    return contract, size


def cmd_gen_cases(config: ExperimentConfig, catalog: Optional[FactorCatalog] = None) -> GenerationResult:
    catalog = catalog or load_catalog()
    dataset = config.dataset
    result = GenerationResult()
    for mode in dataset.modes:
        triples = generate_set(mode, dataset.complexity, dataset.count, dataset.master_seed, catalog)
        path = dataset_path(config.datasets_dir, mode)
        write_dataset(path, triples, dataset_metadata(mode, dataset.complexity, dataset.count, dataset.master_seed, catalog))
        contract, size = check_triples(triples, dataset.complexity, catalog)
        result.modes.append(ModeSummary(mode, str(path), len(triples), contract, size))
    return result


def load_triples(config: ExperimentConfig, catalog: Optional[FactorCatalog] = None) -> List[CaseTriple]:
    triples = []
    for mode in config.dataset.modes:
        path = dataset_path(config.datasets_dir, mode)
        if not path.exists():
            raise MissingInputError(path, "ejecuta primero gen_cases")
        triples.extend(read_dataset(path, catalog))
    return triples


def available_triples(config: ExperimentConfig, catalog: Optional[FactorCatalog] = None) -> Dict[str, CaseTriple]:
    """Todas las tripletas generadas, también las de modos fuera de --mode."""
    load_triples(config, catalog)
    triples = {}
    for mode in ScenarioMode:
        path = dataset_path(config.datasets_dir, mode)
        if path.exists():
            triples.update((t.id, t) for t in read_dataset(path, catalog))
    return triples


# =========================
# RUN
# =========================
@dataclass
class RunResult:
    summaries: List[MatrixSummary] = field(default_factory=list)

    @property
    def failed(self) -> int:
        return sum(s.failed for s in self.summaries)

    @property
    def exit_code(self) -> int:
        return EXIT_RUN_FAILURES if self.failed else EXIT_OK


def _register_run(config: ExperimentConfig, summary: MatrixSummary, started_at) -> None:
    from .models import ExperimentRun

    try:
        ExperimentRun.objects.update_or_create(
            name=config.name,
            method=summary.method.value,
            backend=summary.backend,
            defaults=dict(
                config_digest=config.digest,
                started_at=started_at,
                finished_at=timezone.now(),
                triples=summary.total,
                completed=summary.completed,
                abstained=summary.abstained,
                failed=summary.failed,
                transcript_path=str(summary.path),
            ),
        )
    except DatabaseError as exc:
        # Sin migraciones aplicadas el experimento sigue; solo se pierde el registro
        logger.warning("[RUN] no se pudo registrar %s/%s: %s", summary.method.value, summary.backend, exc)


def cmd_run(config: ExperimentConfig, overwrite: bool = False, catalog: Optional[FactorCatalog] = None) -> RunResult:
    """Matriz método × generador sobre los datasets de los modos configurados."""
    catalog = catalog or load_catalog()
    triples = load_triples(config, catalog)
    result = RunResult()
    for name in config.generators:
        backend = config.backend(name)
        setup_error: Optional[AgentError] = None
        try:
            roster = build_roster(
                backend,
                analyst=config.agents["analyst"],
                polisher=config.agents["polisher"],
                catalog=catalog,
            )
        except AgentError as exc:
            # el resto de generadores sigue; sus ejecuciones quedan como Failed
            logger.error("[RUN] %s: no se pudo preparar el generador: %s", name, exc)
            roster, setup_error = None, exc
        for method in config.methods:
            started_at = timezone.now()
            if roster is None:
                summary = fail_matrix(triples, method, name, backend.model, setup_error, config.output_dir, overwrite)
            else:
                summary = run_matrix(triples, method, roster, config.output_dir, config.workers, overwrite)
            # las tripletas saltadas ya estaban en el transcript: se cuentan desde el archivo
            if summary.skipped:
                summary = _summary_from_transcript(summary)
            _register_run(config, summary, started_at)
            result.summaries.append(summary)
    return result


def _summary_from_transcript(summary: MatrixSummary) -> MatrixSummary:
    total = MatrixSummary(summary.method, summary.backend, summary.path, skipped=summary.skipped)
    for record in read_transcript(summary.path):
        total.total += 1
        total.count(record)
    return total


# =========================
# EVALUATE
# =========================
@dataclass
class EvaluationResult:
    files: Dict[str, int] = field(default_factory=dict)
    evaluation_failed: int = 0

    @property
    def exit_code(self) -> int:
        return EXIT_EVALUATION_FAILURES if self.evaluation_failed else EXIT_OK


def build_extractor(config: ExperimentConfig, catalog: Optional[FactorCatalog] = None):
    if config.evaluator == CANONICAL:
        return CanonicalExtractor(catalog)
    return LLMExtractor(build_backend(config.backend(config.evaluator)), catalog)


def matrix_cells(config: ExperimentConfig) -> List[Tuple[Method, str]]:
    return [(method, name) for name in config.generators for method in config.methods]


def evaluate_transcript(config: ExperimentConfig, method: Method, backend: str, triples_by_id, extractor) -> List[EvaluationRecord]:
    source = transcript_path(config.output_dir, method, backend)
    if not source.exists():
        raise MissingInputError(source, "ejecuta primero run")
    records = read_transcript(source)
    evaluations = evaluate_records(records, triples_by_id, extractor, config.workers)
    write_evaluations(evaluation_path(config.output_dir, method, backend), evaluations)
    return evaluations


def cmd_evaluate(config: ExperimentConfig, catalog: Optional[FactorCatalog] = None) -> EvaluationResult:
    """Reescribe un archivo de evaluación por transcript; idempotente."""
    catalog = catalog or load_catalog()
    triples_by_id = available_triples(config, catalog)
    extractor = build_extractor(config, catalog)
    result = EvaluationResult()
    for method, backend in matrix_cells(config):
        evaluations = evaluate_transcript(config, method, backend, triples_by_id, extractor)
        failed = sum(1 for e in evaluations if e.status == EvaluationStatus.EVALUATION_FAILED)
        result.files[str(evaluation_path(config.output_dir, method, backend))] = len(evaluations)
        result.evaluation_failed += failed
        if failed:
            logger.warning("[EVAL] %s/%s: %d registros sin evaluar", method.value, backend, failed)
    return result


# =========================
# REPORT
# =========================
@dataclass
class ReportResult:
    cells: List[CellReport]
    files: List[str]
    evaluation_failed: int = 0

    @property
    def exit_code(self) -> int:
        # las tablas se escriben igual; los EvaluationFailed solo cambian el código
        return EXIT_EVALUATION_FAILURES if self.evaluation_failed else EXIT_OK


def _evaluations_for_report(config: ExperimentConfig, catalog: FactorCatalog) -> List[EvaluationRecord]:
    """Lee las evaluaciones; las que faltan se calculan a partir del transcript."""
    evaluations: List[EvaluationRecord] = []
    extractor = None
    triples_by_id = None
    for method, backend in matrix_cells(config):
        path = evaluation_path(config.output_dir, method, backend)
        if path.exists():
            evaluations.extend(read_evaluations(path))
            continue
        if extractor is None:
            extractor = build_extractor(config, catalog)
            triples_by_id = available_triples(config, catalog)
        logger.info("[REPORT] %s no existe; se evalúa el transcript", path)
        evaluations.extend(evaluate_transcript(config, method, backend, triples_by_id, extractor))
    modes = set(config.dataset.modes)
    return [e for e in evaluations if e.mode in modes]


def _register_report(config: ExperimentConfig, cells: List[CellReport], policy: AggregationPolicy) -> None:
    from .models import ReportSnapshot

    try:
        ReportSnapshot.objects.create(run_name=config.name, policy=policy.value, cells=[c.to_dict() for c in cells])
    except DatabaseError as exc:
        logger.warning("[REPORT] no se pudo guardar la instantánea: %s", exc)


def cmd_report(config: ExperimentConfig, policy=AggregationPolicy.POOLED, pdf: bool = False,
               catalog: Optional[FactorCatalog] = None) -> ReportResult:
    catalog = catalog or load_catalog()
    policy = AggregationPolicy.parse(policy)
    evaluations = _evaluations_for_report(config, catalog)
    cells = aggregate(evaluations, policy)
    metadata = {**config.metadata(), "catalog_digest": catalog.digest()}
    written = write_tables(config.reports_dir, render_tables(cells, policy, metadata))
    if pdf:
        written.append(build_summary_pdf(cells, config.reports_dir / "summary.pdf", policy, metadata))
    _register_report(config, cells, policy)
    logger.info("[REPORT] %d celdas, política %s", len(cells), policy.value)
    failed = sum(1 for e in evaluations if e.status == EvaluationStatus.EVALUATION_FAILED)
    if failed:
        logger.warning("[REPORT] %d registros EvaluationFailed quedan fuera de las métricas", failed)
    return ReportResult(cells, [str(p) for p in written], evaluation_failed=failed)
