"""
PDF Export Module.
Generates run reports (parameters, error norms, entropy history) and
convergence-study reports (error and order tables).
"""
import logging
from datetime import datetime

from reportlab.lib import colors
from reportlab.lib.enums import TA_CENTER
from reportlab.lib.pagesizes import A4
from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
from reportlab.lib.units import cm
from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

import settings
from core.diagnostics import entropy_increases

logger = logging.getLogger(__name__)


def _styles():
    styles = getSampleStyleSheet()
    title = ParagraphStyle(
        'ReportTitle',
        parent=styles['Heading1'],
        fontSize=22,
        textColor=colors.HexColor(settings.REPORT_TITLE_COLOR),
        spaceAfter=24,
        alignment=TA_CENTER
    )
    heading = ParagraphStyle(
        'ReportHeading',
        parent=styles['Heading2'],
        fontSize=15,
        textColor=colors.HexColor(settings.REPORT_ACCENT_COLOR),
        spaceAfter=10,
        spaceBefore=12
    )
    footer = ParagraphStyle(
        'Footer',
        parent=styles['Normal'],
        fontSize=8,
        textColor=colors.grey,
        alignment=TA_CENTER
    )
    return styles, title, heading, footer


def _summary_table(rows):
    table = Table(rows, colWidths=[5 * cm, 9 * cm])
    table.setStyle(TableStyle([
        ('ALIGN', (0, 0), (-1, -1), 'LEFT'),
        ('FONTNAME', (0, 0), (0, -1), 'Helvetica-Bold'),
        ('FONTNAME', (1, 0), (1, -1), 'Helvetica'),
        ('FONTSIZE', (0, 0), (-1, -1), 11),
        ('TEXTCOLOR', (0, 0), (-1, -1), colors.HexColor(settings.REPORT_TEXT_COLOR)),
    ]))
    return table


def _data_table(rows, widths):
    table = Table(rows, colWidths=widths)
    table.setStyle(TableStyle([
        # Header row
        ('BACKGROUND', (0, 0), (-1, 0), colors.HexColor(settings.REPORT_TITLE_COLOR)),
        ('TEXTCOLOR', (0, 0), (-1, 0), colors.whitesmoke),
        ('FONTNAME', (0, 0), (-1, 0), 'Helvetica-Bold'),
        ('FONTSIZE', (0, 0), (-1, 0), 10),
        ('BOTTOMPADDING', (0, 0), (-1, 0), 8),
        # Data rows
        ('ALIGN', (0, 0), (-1, -1), 'RIGHT'),
        ('FONTNAME', (0, 1), (-1, -1), 'Courier'),
        ('FONTSIZE', (0, 1), (-1, -1), 9),
        ('ROWBACKGROUNDS', (0, 1), (-1, -1), [colors.white, colors.HexColor('#F5F5F5')]),
        ('GRID', (0, 0), (-1, -1), 0.5, colors.HexColor(settings.REPORT_GRID_COLOR)),
    ]))
    return table


def _footer(story, footer_style):
    story.append(Spacer(1, 1.5 * cm))
    story.append(Paragraph(f"Generated on {datetime.now().strftime('%B %d, %Y at %I:%M %p')}", footer_style))
    story.append(Paragraph("rmhd-esdg run ledger", footer_style))


def _fmt(value, spec=".3e"):
    return "-" if value is None else format(value, spec)


def generate_run_pdf(run, filepath):
    """
    Generates the report of one simulation run.

    Args:
        run: SimulationRun with its errors and entropy samples loaded
        filepath: Output PDF path
    """
    doc = SimpleDocTemplate(filepath, pagesize=A4,
                            rightMargin=2 * cm, leftMargin=2 * cm,
                            topMargin=2 * cm, bottomMargin=2 * cm)
    styles, title_style, heading_style, footer_style = _styles()
    story = [Paragraph(f"RUN {run.id}: {run.problem.upper()}", title_style)]

    mesh = f"{run.nx}" if run.ny is None else f"{run.nx} x {run.ny}"
    story.append(_summary_table([
        ['Status:', run.status],
        ['Mesh:', mesh],
        ['Degree:', str(run.degree)],
        ['CFL:', f"{run.cfl:g}"],
        ['Flux:', run.flux_mode],
        ['Limiter:', "on" if run.limiter else "off"],
        ['Final time:', _fmt(run.final_time, ".6g")],
        ['Steps:', "-" if run.steps is None else str(run.steps)],
        ['Message:', run.message or "-"],
    ]))
    story.append(Spacer(1, 0.8 * cm))

    if run.errors:
        story.append(Paragraph("ERROR NORMS", heading_style))
        rows = [['Variable', 'l1', 'l2', 'linf']]
        rows += [[e.variable, _fmt(e.l1), _fmt(e.l2), _fmt(e.linf)] for e in run.errors]
        story.append(_data_table(rows, [3 * cm, 3.5 * cm, 3.5 * cm, 3.5 * cm]))
        story.append(Spacer(1, 0.8 * cm))

    story.append(Paragraph("TOTAL ENTROPY", heading_style))
    values = [s.entropy for s in run.entropy_samples]
    if values:
        rises = entropy_increases(values, settings.ENTROPY_SLACK)
        verdict = "nonincreasing" if not rises else f"rose at {len(rises)} step(s)"
        story.append(_summary_table([
            ['First:', f"{values[0]:.12e}"],
            ['Last:', f"{values[-1]:.12e}"],
            ['Minimum:', f"{min(values):.12e}"],
            ['Maximum:', f"{max(values):.12e}"],
            ['Samples:', str(len(values))],
            ['Monotonicity:', verdict],
        ]))
        if rises:
            warn = ParagraphStyle('Warn', parent=styles['Normal'],
                                  textColor=colors.HexColor(settings.REPORT_WARNING_COLOR))
            story.append(Paragraph(f"First rise at step {run.entropy_samples[rises[0]].step}.", warn))
    else:
        story.append(Paragraph("No entropy samples recorded.", styles['Normal']))

    _footer(story, footer_style)
    doc.build(story)
    logger.info("PDF generated: %s", filepath)
    return filepath


def generate_convergence_pdf(study, filepath):
    """
    Generates the error/order table of a convergence study.
    """
    doc = SimpleDocTemplate(filepath, pagesize=A4,
                            rightMargin=2 * cm, leftMargin=2 * cm,
                            topMargin=2 * cm, bottomMargin=2 * cm)
    styles, title_style, heading_style, footer_style = _styles()
    story = [Paragraph(f"CONVERGENCE: {study.problem.upper()}", title_style)]

    story.append(_summary_table([
        ['Problem:', study.problem],
        ['Variable:', study.variable],
        ['Degree:', str(study.degree)],
        ['Levels:', str(len(study.levels))],
        ['Table:', study.table_path or "-"],
    ]))
    story.append(Spacer(1, 0.8 * cm))

    story.append(Paragraph(f"ERRORS AND ORDERS IN {study.variable}", heading_style))
    rows = [['N', 'l1', 'order', 'l2', 'order', 'linf', 'order']]
    for level in study.levels:
        rows.append([str(level.n), _fmt(level.l1), _fmt(level.order_l1, ".2f"),
                     _fmt(level.l2), _fmt(level.order_l2, ".2f"),
                     _fmt(level.linf), _fmt(level.order_linf, ".2f")])
    story.append(_data_table(rows, [1.6 * cm, 2.6 * cm, 1.6 * cm, 2.6 * cm, 1.6 * cm, 2.6 * cm, 1.6 * cm]))

    _footer(story, footer_style)
    doc.build(story)
    logger.info("PDF generated: %s", filepath)
    return filepath
