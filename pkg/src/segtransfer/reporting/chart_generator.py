"""Static charts summarizing a transfer experiment."""

import logging
from pathlib import Path
from typing import Dict, List, Tuple, Union

from reportlab.graphics import renderPDF
from reportlab.graphics.charts.barcharts import HorizontalBarChart, VerticalBarChart
from reportlab.graphics.charts.legends import Legend
from reportlab.graphics.shapes import Circle, Drawing, Line, String
from reportlab.lib import colors

try:
    from reportlab.graphics import renderPM
except ImportError:  # reportlab built without its raster backend
    renderPM = None

from segtransfer.harness.results import TransferMatrix

logger = logging.getLogger(__name__)

PANEL_WIDTH = 520
PANEL_HEIGHT = 230
PALETTE = [
    colors.HexColor("#1f77b4"), colors.HexColor("#ff7f0e"), colors.HexColor("#2ca02c"),
    colors.HexColor("#d62728"), colors.HexColor("#9467bd"), colors.HexColor("#8c564b"),
    colors.HexColor("#e377c2"), colors.HexColor("#7f7f7f"),
]


def success_rate_ranges(matrix: TransferMatrix) -> Dict[str, Dict[str, Tuple[float, float]]]:
    """Min/max Sr over each attack's target cells, excluding the self-cell.

    Attacks whose source has no other target are left out.
    """
    ranges: Dict[str, Dict[str, Tuple[float, float]]] = {}
    for source in matrix.sources():
        per_attack = {}
        for attack in matrix.attacks():
            values = [
                cell.sr for cell in matrix.cells
                if cell.source_id == source and cell.attack_name == attack and cell.target_id != source
            ]
            if values:
                per_attack[attack] = (min(values), max(values))
        ranges[source] = per_attack
    return ranges


class ChartGenerator:
    """Renders the success-rate range, mIoU and SSIM ranking charts.

    Every chart is written as PDF, plus a PNG copy when reportlab can raster.
    """

    def __init__(self, output_dir: Union[str, Path], png: bool = True):
        """Initialize chart generator.

        Args:
            output_dir: Directory to save generated charts
            png: Also write PNG copies when the raster backend is available
        """
        self.output_dir = Path(output_dir)
        self.png = png and renderPM is not None
        self.output_dir.mkdir(parents=True, exist_ok=True)
        logger.info(f"Initialized ChartGenerator with output directory: {self.output_dir}")

    def _save(self, drawing: Drawing, stem: str, title: str) -> List[Path]:
        path = self.output_dir / f"{stem}.pdf"
        try:
            renderPDF.drawToFile(drawing, str(path), msg=title)
        except Exception as e:
            logger.error(f"Error rendering chart {path}: {str(e)}")
            raise
        logger.info(f"Generated chart: {path}")
        written = [path]
        if self.png:
            raster = self.output_dir / f"{stem}.png"
            try:
                renderPM.drawToFile(drawing, str(raster), fmt="PNG")
            except Exception as e:
                logger.warning(f"PNG charts disabled, raster rendering failed: {str(e)}")
                self.png = False
                if raster.exists():
                    raster.unlink()
            else:
                written.append(raster)
        return written

    @staticmethod
    def _canvas(panels: int) -> Drawing:
        return Drawing(PANEL_WIDTH, PANEL_HEIGHT * max(panels, 1) + 30)

    def success_range_chart(self, matrix: TransferMatrix) -> List[Path]:
        """Per source model, the range of Sr each attack reaches on the other targets."""
        ranges = success_rate_ranges(matrix)
        sources = list(ranges)
        drawing = self._canvas(len(sources))
        drawing.add(String(10, 10, "Self-cells (source == target) are excluded from the ranges.", fontSize=8))

        for panel, source in enumerate(reversed(sources)):
            base = 30 + panel * PANEL_HEIGHT
            left, bottom, width, height = 60, base + 40, PANEL_WIDTH - 90, PANEL_HEIGHT - 80
            drawing.add(String(left, base + PANEL_HEIGHT - 25, f"Source: {source}", fontSize=11))
            attacks = list(ranges[source])
            if not attacks:
                drawing.add(String(left, bottom + height / 2, "no transfer targets", fontSize=9))
                continue
            values = [value for pair in ranges[source].values() for value in pair]
            low, high = min(0.0, min(values)), max(1.0, max(values))

            def y(value: float) -> float:
                return bottom + (value - low) / (high - low) * height

            drawing.add(Line(left, bottom, left, bottom + height))
            drawing.add(Line(left, bottom, left + width, bottom))
            for tick in (low, (low + high) / 2, high):
                drawing.add(String(left - 35, y(tick) - 3, f"{tick:.2f}", fontSize=7))
            step = width / len(attacks)
            for i, attack in enumerate(attacks):
                lo, hi = ranges[source][attack]
                x = left + step * (i + 0.5)
                color = PALETTE[i % len(PALETTE)]
                drawing.add(Line(x, y(lo), x, y(hi), strokeColor=color, strokeWidth=3))
                drawing.add(Circle(x, y(lo), 2.5, fillColor=color, strokeColor=color))
                drawing.add(Circle(x, y(hi), 2.5, fillColor=color, strokeColor=color))
                drawing.add(String(x - 12, bottom - 14, attack, fontSize=7))
        return self._save(drawing, "success_rate_range", "Success rate range")

    def miou_chart(self, matrix: TransferMatrix) -> List[Path]:
        """Per source model, grouped bars of target mIoU for each attack."""
        sources = matrix.sources()
        attacks = matrix.attacks()
        targets = matrix.targets()
        drawing = self._canvas(len(sources))

        for panel, source in enumerate(reversed(sources)):
            base = 30 + panel * PANEL_HEIGHT
            drawing.add(String(60, base + PANEL_HEIGHT - 25, f"Source: {source}", fontSize=11))
            chart = VerticalBarChart()
            chart.x, chart.y = 60, base + 40
            chart.width, chart.height = PANEL_WIDTH - 180, PANEL_HEIGHT - 80
            chart.data = [
                tuple(matrix.cell(source, attack, target).miou for attack in attacks)
                for target in targets
            ]
            chart.categoryAxis.categoryNames = attacks
            chart.categoryAxis.labels.fontSize = 7
            chart.valueAxis.valueMin = 0.0
            chart.valueAxis.valueMax = 1.0
            chart.valueAxis.valueStep = 0.25
            for i in range(len(targets)):
                chart.bars[i].fillColor = PALETTE[i % len(PALETTE)]
            drawing.add(chart)

            legend = Legend()
            legend.x, legend.y = PANEL_WIDTH - 100, base + PANEL_HEIGHT - 50
            legend.fontSize = 7
            legend.colorNamePairs = [(PALETTE[i % len(PALETTE)], target) for i, target in enumerate(targets)]
            drawing.add(legend)
        return self._save(drawing, "miou_per_attack", "mIoU per attack")

    def ssim_ranking_chart(self, matrix: TransferMatrix) -> List[Path]:
        """Per source model, attacks ranked by SSIM of their adversarial examples."""
        sources = matrix.sources()
        drawing = self._canvas(len(sources))

        for panel, source in enumerate(reversed(sources)):
            base = 30 + panel * PANEL_HEIGHT
            drawing.add(String(60, base + PANEL_HEIGHT - 25, f"Source: {source}", fontSize=11))
            ranked: List[Tuple[str, float]] = sorted(
                (
                    (row.attack_name, row.ssim) for row in matrix.image_quality
                    if row.source_id == source and row.ssim is not None
                ),
                key=lambda item: item[1],
            )
            if not ranked:
                drawing.add(String(80, base + PANEL_HEIGHT // 2, "SSIM not available for this image size", fontSize=9))
                continue
            chart = HorizontalBarChart()
            chart.x, chart.y = 80, base + 30
            chart.width, chart.height = PANEL_WIDTH - 120, PANEL_HEIGHT - 70
            chart.data = [tuple(score for _, score in ranked)]
            chart.categoryAxis.categoryNames = [name for name, _ in ranked]
            chart.categoryAxis.labels.fontSize = 7
            chart.valueAxis.valueMin = min(0.0, min(score for _, score in ranked))
            chart.valueAxis.valueMax = 1.0
            chart.bars[0].fillColor = PALETTE[0]
            drawing.add(chart)
        return self._save(drawing, "ssim_ranking", "SSIM ranking")

    def generate_all(self, matrix: TransferMatrix) -> List[Path]:
        """Render every chart; returns the PDF paths followed by any PNG copies."""
        written = self.success_range_chart(matrix) + self.miou_chart(matrix) + self.ssim_ranking_chart(matrix)
        return sorted(written, key=lambda path: (path.suffix != ".pdf", path.name))
