"""
Ejecución de la matriz método × dataset con un pool de hilos y transcripts reanudables.
"""
import json
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Set

from django.conf import settings
from django.utils import timezone

from ai_agent.agents import AgentRoster
from ai_agent.prompts import Method
from scenarios.cases import CaseTriple

from .engine import run_pipeline
from .exceptions import PipelineError, TranscriptFormatError
from .records import RunRecord, RunStatus, dumps_record, loads_record

logger = logging.getLogger(__name__)


def transcript_path(output_dir, method: Method, backend: str) -> Path:
    return Path(output_dir) / "transcripts" / f"{Method.parse(method).value}__{backend}.jsonl"


def read_transcript(path, drop_partial_tail: bool = False) -> List[RunRecord]:
    """
    Con drop_partial_tail, una última línea con JSON cortado (escritura interrumpida)
    se elimina del archivo y esa tripleta vuelve a quedar pendiente.
    """
    records = []
    path = Path(path)
    if not path.exists():
        return records
    lines = path.read_text(encoding="utf-8").splitlines()
    last = max((i for i, raw in enumerate(lines) if raw.strip()), default=-1)
    for index, raw in enumerate(lines):
        if not raw.strip():
            continue
        try:
            records.append(loads_record(raw))
        except json.JSONDecodeError as exc:
            if drop_partial_tail and index == last:
                logger.warning("[RUN] %s: línea %d incompleta; se descarta y se repite esa ejecución", path, index + 1)
                kept = lines[:index]
                path.write_text("".join(line + "\n" for line in kept), encoding="utf-8")
                break
            raise TranscriptFormatError(str(exc), index + 1, str(path)) from exc
        except (ValueError, KeyError, TypeError) as exc:
            raise TranscriptFormatError(str(exc), index + 1, str(path)) from exc
    return records


class TranscriptWriter:
    """Único escritor de un transcript. Las líneas se añaden bajo un lock."""

    def __init__(self, path, overwrite: bool = False):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        if overwrite and self.path.exists():
            self.path.unlink()
        self.existing_ids: Set[str] = {r.triple_id for r in read_transcript(self.path, drop_partial_tail=True)}

    def write(self, record: RunRecord) -> None:
        with self._lock:
            if record.triple_id in self.existing_ids:
                raise PipelineError(f"{record.triple_id} ya está en {self.path}")
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(dumps_record(record) + "\n")
            self.existing_ids.add(record.triple_id)


@dataclass
class MatrixSummary:
    method: Method
    backend: str
    path: Path
    total: int = 0
    skipped: int = 0
    completed: int = 0
    abstained: int = 0
    failed: int = 0

    def count(self, record: RunRecord) -> None:
        if record.status == RunStatus.COMPLETED:
            self.completed += 1
        elif record.status == RunStatus.ABSTAINED:
            self.abstained += 1
        else:
            self.failed += 1

    @property
    def has_failures(self) -> bool:
        return self.failed > 0


def run_matrix(
    triples: Iterable[CaseTriple],
    method: Method,
    roster: AgentRoster,
    output_dir,
    workers: Optional[int] = None,
    overwrite: bool = False,
) -> MatrixSummary:
    """
    Corre `method` sobre todas las tripletas. Las que ya están en el transcript se saltan
    salvo con overwrite. Los registros se escriben en orden de triple_id aunque los hilos
    terminen en otro orden.
    """
    method = Method.parse(method)
    workers = workers or settings.ARGLAB["DEFAULT_WORKERS"]
    if workers < 1:
        raise PipelineError(f"workers debe ser >= 1 (recibido {workers})")

    writer, pending, summary = _open_matrix(triples, method, roster.backend_name, output_dir, overwrite)

    # map() devuelve en orden de envío: el archivo queda ordenado también si se interrumpe
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for record in pool.map(lambda triple: run_pipeline(method, triple, roster), pending):
            writer.write(record)
            summary.count(record)

    _log_summary(summary)
    return summary


def fail_matrix(
    triples: Iterable[CaseTriple],
    method: Method,
    backend: str,
    model: str,
    cause: Exception,
    output_dir,
    overwrite: bool = False,
) -> MatrixSummary:
    """
    Para un generador que no se pudo construir (credencial ausente, configuración):
    cada tripleta pendiente queda registrada como Failed en el ply 1.
    """
    method = Method.parse(method)
    writer, pending, summary = _open_matrix(triples, method, backend, output_dir, overwrite)
    now = timezone.now().isoformat()
    for triple in pending:
        record = RunRecord(
            triple_id=triple.id,
            method=method,
            backend=backend,
            model=model,
            mode=triple.mode,
            status=RunStatus.FAILED,
            failure=f"{type(cause).__name__}: {cause}",
            failed_ply=1,
            started_at=now,
            finished_at=now,
        )
        writer.write(record)
        summary.count(record)
    _log_summary(summary)
    return summary


def _open_matrix(triples, method: Method, backend: str, output_dir, overwrite: bool):
    path = transcript_path(output_dir, method, backend)
    writer = TranscriptWriter(path, overwrite=overwrite)
    ordered = sorted(triples, key=lambda t: t.id)
    pending = [t for t in ordered if t.id not in writer.existing_ids]
    summary = MatrixSummary(method, backend, path, total=len(ordered), skipped=len(ordered) - len(pending))
    if summary.skipped:
        logger.info("[RUN] %s/%s: %d tripletas ya registradas, se saltan", method.value, backend, summary.skipped)
    return writer, pending, summary


def _log_summary(summary: MatrixSummary) -> None:
    logger.info(
        "[RUN] %s/%s: %d completadas, %d abstenciones, %d fallidas, %d saltadas",
        summary.method.value, summary.backend, summary.completed, summary.abstained, summary.failed, summary.skipped,
    )
