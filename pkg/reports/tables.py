"""
Tablas de resultados (CSV y texto alineado) con la misma estructura fila/columna:
Model, Method y una columna por escenario.
"""
import csv
import io
import logging
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from scenarios.cases import ScenarioMode

from .aggregation import COUNT_KEYS, METHOD_ORDER, SCENARIO_ORDER, AggregationPolicy, CellReport
from .metrics import ABSTENTION_SCENARIOS, render_percent

logger = logging.getLogger(__name__)

BEST_MARK = "*"
NEGATIVE_MARK = "!"
EMPTY = "-"

# métrica → (atributo de CellReport, escenarios con columna)
METRIC_TABLES: Dict[str, Tuple[str, Tuple[ScenarioMode, ...]]] = {
    "hallucination_accuracy": ("acc_h", SCENARIO_ORDER),
    "factor_recall": ("rec_u", (ScenarioMode.ARGUABLE,)),
    "abstention_ratio": ("ratio_abstain", ABSTENTION_SCENARIOS),
}
COUNTS_TABLE = "counts"


def _rows(cells: Sequence[CellReport]) -> List[Tuple[str, object]]:
    keys = {(cell.model, cell.method) for cell in cells}
    return sorted(keys, key=lambda k: (k[0], METHOD_ORDER.index(k[1])))


def best_values(cells: Sequence[CellReport], attribute: str) -> Dict[Tuple[str, ScenarioMode], object]:
    """Mejor valor por (modelo, escenario); solo cuando compiten al menos dos métodos."""
    grouped: Dict[Tuple[str, ScenarioMode], list] = {}
    for cell in cells:
        value = getattr(cell, attribute)
        if value is not None:
            grouped.setdefault((cell.model, cell.scenario), []).append(value)
    return {key: max(values) for key, values in grouped.items() if len(values) > 1}


def metric_rows(cells: Sequence[CellReport], metric: str) -> Tuple[List[str], List[List[str]]]:
    attribute, scenarios = METRIC_TABLES[metric]
    by_key = {cell.key: cell for cell in cells}
    best = best_values(cells, attribute)
    header = ["Model", "Method"] + [s.value for s in scenarios]
    rows = []
    for model, method in _rows(cells):
        row = [model, method.value]
        for scenario in scenarios:
            cell = by_key.get((model, method, scenario))
            value = getattr(cell, attribute) if cell else None
            if value is None:
                row.append(EMPTY)
                continue
            text = render_percent(value)
            if best.get((model, scenario)) == value:
                text += BEST_MARK
            if attribute == "acc_h" and cell.negative_acc_h:
                text += NEGATIVE_MARK
            row.append(text)
        rows.append(row)
    return header, rows


def count_rows(cells: Sequence[CellReport]) -> Tuple[List[str], List[List[str]]]:
    header = ["Model", "Method", "Scenario"] + list(COUNT_KEYS)
    rows = [
        [cell.model, cell.method.value, cell.scenario.value] + [str(cell.counts.get(k, 0)) for k in COUNT_KEYS]
        for cell in cells
    ]
    return header, rows


def _metadata_lines(metadata: Mapping[str, object]) -> List[str]:
    return [f"# {key}: {metadata[key]}" for key in sorted(metadata)]


def _csv(header: List[str], rows: List[List[str]], meta: List[str]) -> str:
    buf = io.StringIO()
    for line in meta:
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _txt(header: List[str], rows: List[List[str]], meta: List[str], text_columns: int) -> str:
    widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]

    def line(values):
        parts = [
            v.ljust(widths[i]) if i < text_columns else v.rjust(widths[i])
            for i, v in enumerate(values)
        ]
        return "  ".join(parts).rstrip()

    out = list(meta)
    out.append(line(header))
    out.append("  ".join("-" * w for w in widths))
    out.extend(line(r) for r in rows)
    return "\n".join(out) + "\n"


def render_tables(cells: Sequence[CellReport], policy=AggregationPolicy.POOLED,
                  metadata: Optional[Mapping[str, object]] = None) -> Dict[str, Dict[str, str]]:
    """{métrica: {"csv": ..., "txt": ...}} para las tres métricas y la tabla de conteos."""
    meta = dict(metadata or {})
    meta["policy"] = AggregationPolicy.parse(policy).value
    meta_lines = _metadata_lines(meta)
    if any(cell.negative_acc_h for cell in cells):
        meta_lines.append(f"# {NEGATIVE_MARK}: Acc_H negativo (N_h > N_gt), sin recortar")

    rendered = {}
    for metric in METRIC_TABLES:
        header, rows = metric_rows(cells, metric)
        rendered[metric] = {"csv": _csv(header, rows, meta_lines), "txt": _txt(header, rows, meta_lines, 2)}
    header, rows = count_rows(cells)
    rendered[COUNTS_TABLE] = {"csv": _csv(header, rows, meta_lines), "txt": _txt(header, rows, meta_lines, 3)}
    return rendered


def write_tables(directory, rendered: Mapping[str, Mapping[str, str]]) -> List[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for metric in sorted(rendered):
        for extension in ("csv", "txt"):
            path = directory / f"{metric}.{extension}"
            path.write_text(rendered[metric][extension], encoding="utf-8")
            written.append(path)
    logger.info("[REPORT] %d tablas escritas en %s", len(written), directory)
    return written
