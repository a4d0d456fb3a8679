from typing import Sequence

from reportlab.graphics import renderSVG
from reportlab.graphics.charts.legends import Legend
from reportlab.graphics.charts.lineplots import LinePlot
from reportlab.graphics.shapes import Drawing, String
from reportlab.lib import colors

from core.mean_mechanisms import SweepRow

PANEL_WIDTH = 460
PANEL_HEIGHT = 200
MARGIN = 50

MU_COLOR = colors.HexColor("#1f77b4")
MSS_COLOR = colors.HexColor("#d62728")


def _line_plot(series: list[list[tuple[float, float]]], line_colors: list, y: float) -> LinePlot:
    plot = LinePlot()
    plot.x = MARGIN
    plot.y = y
    plot.width = PANEL_WIDTH
    plot.height = PANEL_HEIGHT
    plot.data = series
    plot.joinedLines = 1
    for i, color in enumerate(line_colors):
        plot.lines[i].strokeColor = color
        plot.lines[i].strokeWidth = 1.2

    xs = [x for line in series for x, _ in line]
    ys = [v for line in series for _, v in line]
    plot.xValueAxis.valueMin = min(xs)
    plot.xValueAxis.valueMax = max(xs)
    plot.yValueAxis.valueMin = 0
    plot.yValueAxis.valueMax = max(ys) * 1.05
    plot.xValueAxis.labels.fontSize = 7
    plot.yValueAxis.labels.fontSize = 7
    return plot


def _panel_title(drawing: Drawing, text: str, y: float):
    drawing.add(String(MARGIN + PANEL_WIDTH / 2, y + PANEL_HEIGHT + 10, text,
                       fontSize=10, textAnchor="middle"))


def sweep_drawing(rows: Sequence[SweepRow], zoom_from: int = 100) -> Drawing:
    """
    표준편차 비교 결과를 세 패널로 그립니다.

    1. 전체 n 범위의 두 표준편차
    2. n >= zoom_from 확대
    3. 표준편차 비율 sd_mss / sd_mu
    """
    rows = sorted(rows, key=lambda r: r.n)
    zoomed = [r for r in rows if r.n >= zoom_from] or rows
    panel_span = PANEL_HEIGHT + 60
    drawing = Drawing(PANEL_WIDTH + 2 * MARGIN, 3 * panel_span + 40)

    panels = [
        ("Standard deviation (all n)", rows),
        (f"Standard deviation (n >= {zoomed[0].n})", zoomed),
    ]
    for i, (title, subset) in enumerate(panels):
        y = (2 - i) * panel_span + 40
        series = [[(r.n, r.sd_mu) for r in subset], [(r.n, r.sd_mss) for r in subset]]
        drawing.add(_line_plot(series, [MU_COLOR, MSS_COLOR], y))
        _panel_title(drawing, title, y)

    ratio = [[(r.n, r.ratio) for r in rows]]
    drawing.add(_line_plot(ratio, [colors.black], 40))
    _panel_title(drawing, "Ratio sd(M_SS) / sd(M_U)", 40)

    legend = Legend()
    legend.x = MARGIN + PANEL_WIDTH - 80
    legend.y = 2 * panel_span + 40 + PANEL_HEIGHT - 10
    legend.fontSize = 8
    legend.colorNamePairs = [(MU_COLOR, "M_U"), (MSS_COLOR, "M_SS")]
    drawing.add(legend)
    return drawing


def render_sweep_svg(rows: Sequence[SweepRow]) -> str:
    return renderSVG.drawToString(sweep_drawing(rows))
