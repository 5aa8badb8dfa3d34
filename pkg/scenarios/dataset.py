import json
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional

from factors.catalog import FactorCatalog, load_catalog
from factors.exceptions import FactorError

from .cases import CaseTriple, ScenarioMode
from .exceptions import DatasetFormatError, ScenarioError
from .serializers import CaseTripleSerializer

logger = logging.getLogger(__name__)


def dumps_triple(triple: CaseTriple) -> str:
    data = CaseTripleSerializer().to_representation(triple)
    return json.dumps(data, ensure_ascii=False, separators=(",", ":"))


def loads_triple(line: str, catalog: Optional[FactorCatalog] = None) -> CaseTriple:
    serializer = CaseTripleSerializer(data=json.loads(line))
    if not serializer.is_valid():
        raise ScenarioError(f"tripleta inválida: {dict(serializer.errors)}")
    triple = serializer.save()
    triple.validate(catalog or load_catalog())
    return triple


def dataset_path(directory: Path, mode: ScenarioMode) -> Path:
    return Path(directory) / f"{ScenarioMode(mode).value}.jsonl"


def write_dataset(path: Path, triples: Iterable[CaseTriple], metadata: Optional[Dict] = None) -> int:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [dumps_triple(t) for t in triples]
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    if metadata is not None:
        meta_path = path.with_suffix(".meta.json")
        meta_path.write_text(json.dumps(metadata, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info("[GEN] %d tripletas escritas en %s", len(lines), path)
    return len(lines)


def read_dataset(path: Path, catalog: Optional[FactorCatalog] = None) -> List[CaseTriple]:
    catalog = catalog or load_catalog()
    triples = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for line_number, raw in enumerate(fh, 1):
            if not raw.strip():
                continue
            try:
                triple = loads_triple(raw, catalog)
            except (ValueError, ScenarioError, FactorError) as exc:
                raise DatasetFormatError(str(exc), line_number, str(path)) from exc
            if triple.id in seen:
                raise DatasetFormatError(f"id repetido {triple.id}", line_number, str(path))
            seen.add(triple.id)
            triples.append(triple)
    return triples


def dataset_metadata(mode: ScenarioMode, complexity: int, count: int, master_seed: int,
                     catalog: FactorCatalog) -> Dict:
    return {
        "mode": ScenarioMode(mode).value,
        "complexity": complexity,
        "count": count,
        "master_seed": master_seed,
        "seed_derivation": "sha256('<master_seed>:<index>')[:8] big-endian",
        "catalog_digest": catalog.digest(),
        "catalog_source": catalog.source,
        "factors_per_case": [complexity - 1, complexity + 1],
        # c1 puede mezclar factores de ambos lados o de uno solo
        "c1_side_mix": "unconstrained",
    }
