# reports/utils.py
from io import BytesIO
from pathlib import Path
from xml.sax.saxutils import escape

import matplotlib
matplotlib.use("Agg")  # backend sin GUI
import matplotlib.pyplot as plt

from .aggregation import AggregationPolicy
from .tables import METRIC_TABLES, count_rows, metric_rows

TITLES = {
    "hallucination_accuracy": "Hallucination Accuracy (%)",
    "factor_recall": "Factor Utilization Recall (%)",
    "abstention_ratio": "Abstention Ratio (%)",
}
BLUE = "#0d6efd"


def matplotlib_to_png_bytes(plt_figure):
    buf = BytesIO()
    # sin metadatos de versión: el PNG sale igual en cada ejecución
    plt_figure.savefig(buf, format="png", bbox_inches="tight", metadata={"Software": None})
    plt.close(plt_figure)
    buf.seek(0)
    return buf


def plot_metric(cells, metric):
    """Barras agrupadas: una serie por escenario, un grupo por (modelo, método)."""
    attribute, scenarios = METRIC_TABLES[metric]
    by_key = {cell.key: cell for cell in cells}
    groups = []
    for cell in cells:
        if (cell.model, cell.method) not in groups:
            groups.append((cell.model, cell.method))

    fig = plt.figure(figsize=(7, 3.5))
    width = 0.8 / max(1, len(scenarios))
    for offset, scenario in enumerate(scenarios):
        values = []
        for model, method in groups:
            cell = by_key.get((model, method, scenario))
            value = getattr(cell, attribute) if cell else None
            values.append(float(value) if value is not None else 0.0)
        positions = [i + offset * width for i in range(len(groups))]
        plt.bar(positions, values, width=width, label=scenario.value)

    plt.title(TITLES[metric])
    plt.xticks([i + width * (len(scenarios) - 1) / 2 for i in range(len(groups))],
               [f"{model}\n{method.value}" for model, method in groups], fontsize=7)
    plt.ylim(min(0, *[float(getattr(c, attribute) or 0) for c in cells]) if cells else 0, 100)
    plt.ylabel("%")
    plt.legend(fontsize=7)
    return matplotlib_to_png_bytes(fig)


def _pdf_table(header, rows, bold_cells):
    from reportlab.lib import colors
    from reportlab.platypus import Table, TableStyle

    table = Table([header] + rows, hAlign="LEFT", repeatRows=1)
    style = [
        ("BACKGROUND", (0, 0), (-1, 0), colors.HexColor(BLUE)),
        ("TEXTCOLOR", (0, 0), (-1, 0), colors.white),
        ("GRID", (0, 0), (-1, -1), 0.25, colors.grey),
        ("ALIGN", (2, 1), (-1, -1), "RIGHT"),
        ("FONTNAME", (0, 0), (-1, 0), "Helvetica-Bold"),
        ("FONTSIZE", (0, 0), (-1, -1), 8),
        ("BOTTOMPADDING", (0, 0), (-1, 0), 6),
    ]
    for column, row in bold_cells:
        style.append(("FONTNAME", (column, row), (column, row), "Helvetica-Bold"))
    table.setStyle(TableStyle(style))
    return table


def build_summary_pdf(cells, path, policy=AggregationPolicy.POOLED, metadata=None):
    """Tablas y un gráfico por métrica. Modo invariante: mismo contenido, mismos bytes."""
    from reportlab.lib import colors
    from reportlab.lib.pagesizes import A4
    from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
    from reportlab.platypus import Image, PageBreak, Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

    meta = dict(metadata or {})
    meta["policy"] = AggregationPolicy.parse(policy).value

    buffer = BytesIO()
    doc = SimpleDocTemplate(buffer, pagesize=A4, leftMargin=50, rightMargin=50, topMargin=70, bottomMargin=60,
                            invariant=1, title="arglab summary")
    styles = getSampleStyleSheet()
    Story = []

    # HEADER
    Story.append(Paragraph("<b>Resumen del experimento – arglab</b>", styles["Title"]))
    Story.append(Spacer(1, 10))
    line = Table([[""]], colWidths=[450])
    line.setStyle(TableStyle([("LINEBELOW", (0, 0), (-1, -1), 2, colors.HexColor(BLUE))]))
    Story.append(line)
    Story.append(Spacer(1, 12))
    Story.append(Paragraph("<br/>".join(f"<b>{k}:</b> {escape(str(meta[k]))}" for k in sorted(meta)), styles["Normal"]))
    Story.append(Spacer(1, 20))

    if not cells:
        Story.append(Paragraph("No hay ejecuciones evaluadas.", styles["Italic"]))

    # TABLAS + GRAFICOS
    for number, metric in enumerate(METRIC_TABLES if cells else (), 1):
        header, rows = metric_rows(cells, metric)
        bold = [
            (c, r + 1)
            for r, row in enumerate(rows)
            for c, value in enumerate(row)
            if c >= 2 and "*" in value
        ]
        # la marca de mejor valor se ve en negrita
        plain_rows = [[value.replace("*", "") for value in row] for row in rows]
        Story.append(Paragraph(f"<b>Tabla {number}:</b> {TITLES[metric]}", styles["Heading3"]))
        Story.append(_pdf_table(header, plain_rows, bold))
        Story.append(Spacer(1, 12))
        Story.append(Image(plot_metric(cells, metric), width=420, height=210))
        Story.append(Spacer(1, 20))

    if cells:
        Story.append(PageBreak())
        header, rows = count_rows(cells)
        Story.append(Paragraph("<b>Conteos por celda</b>", styles["Heading3"]))
        Story.append(_pdf_table(header, rows, []))

    Story.append(Spacer(1, 30))
    Story.append(Paragraph(
        "<b>Generado por arglab</b><br/>Porcentajes con dos decimales; el mejor método por escenario va en negrita.",
        ParagraphStyle("footer", fontSize=9, textColor=colors.grey),
    ))

    doc.build(Story)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(buffer.getvalue())
    buffer.close()
    return path
