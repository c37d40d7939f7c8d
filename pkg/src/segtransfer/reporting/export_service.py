"""Persisting and reloading experiment results."""

import csv
import io
import json
import logging
import os
from pathlib import Path
from typing import Dict, List, Optional, Union

from segtransfer import __version__
from segtransfer.exceptions import ResultsSchemaError
from segtransfer.harness.results import SCHEMA_VERSION, SweepRow, TransferMatrix

logger = logging.getLogger(__name__)

RESULT_COLUMNS = ["source", "attack", "psnr", "ssim", "target", "miou", "sr"]
SWEEP_COLUMNS = ["source", "attack", "iterations", "target", "ssim", "one_minus_miou"]


def format_value(value: Optional[float]) -> str:
    """Shortest text that round-trips the float; shared by CSV and printed tables.

    A missing value (SSIM on images smaller than its window) is an empty field.
    """
    if value is None:
        return ""
    return repr(float(value))


class ExportService:
    """Writes results.json / results.csv / sweep.csv into an export directory."""

    def __init__(self, export_dir: Union[str, Path]):
        """Initialize export service.

        Args:
            export_dir: Directory to save exported data
        """
        self.export_dir = Path(export_dir)
        self.export_dir.mkdir(parents=True, exist_ok=True)
        logger.info(f"Initialized ExportService with export directory: {self.export_dir}")

    def _write_all(self, documents: Dict[str, str]) -> Dict[str, Path]:
        """Write every document or none: temporaries are renamed only after all succeed."""
        staged: Dict[str, Path] = {}
        written: List[Path] = []
        try:
            for name, text in documents.items():
                temporary = self.export_dir / f".{name}.tmp"
                with open(temporary, "w", encoding="utf-8", newline="") as f:
                    f.write(text)
                staged[name] = temporary
            for name, temporary in staged.items():
                final = self.export_dir / name
                os.replace(temporary, final)
                written.append(final)
        except OSError as e:
            logger.error(f"Error writing results to {self.export_dir}: {str(e)}")
            for path in list(staged.values()) + written:
                if path.exists():
                    path.unlink()
            raise
        return {name: self.export_dir / name for name in documents}

    def results_json(self, matrix: TransferMatrix) -> str:
        document = {
            "schema_version": SCHEMA_VERSION,
            "tool_version": __version__,
            **matrix.to_dict(),
        }
        return json.dumps(document, indent=2, sort_keys=True) + "\n"

    def results_csv(self, matrix: TransferMatrix) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(RESULT_COLUMNS)
        for source, attack, psnr, ssim, target, miou, sr in matrix.rows():
            writer.writerow([
                source, attack, format_value(psnr), format_value(ssim),
                target, format_value(miou), format_value(sr),
            ])
        return buffer.getvalue()

    def persist_results(self, matrix: TransferMatrix) -> Dict[str, Path]:
        """Write results.json and results.csv.

        Args:
            matrix: Experiment results

        Returns:
            Paths of the written files keyed by file name
        """
        paths = self._write_all({
            "results.json": self.results_json(matrix),
            "results.csv": self.results_csv(matrix),
        })
        logger.info(f"Persisted {len(matrix.cells)} cells to {self.export_dir}")
        return paths

    def export_sweep(self, rows: List[SweepRow]) -> Path:
        """Write sweep.csv, one row per (source, attack, iterations, target)."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow([
                row.source_id, row.attack_name, row.iterations, row.target_id,
                format_value(row.ssim), format_value(row.one_minus_miou),
            ])
        path = self._write_all({"sweep.csv": buffer.getvalue()})["sweep.csv"]
        logger.info(f"Exported {len(rows)} sweep rows to {path}")
        return path


def persist_results(matrix: TransferMatrix, directory: Union[str, Path]) -> Dict[str, Path]:
    """Write results.json and results.csv into ``directory``."""
    return ExportService(directory).persist_results(matrix)


def load_results(path: Union[str, Path]) -> TransferMatrix:
    """Read a results.json written by :func:`persist_results`.

    Raises:
        ResultsSchemaError: If the schema version is missing or unsupported
    """
    with open(path, "r", encoding="utf-8") as f:
        document = json.load(f)
    version = document.pop("schema_version", None)
    if version != SCHEMA_VERSION:
        raise ResultsSchemaError(
            f"{path}: schema_version {version!r} is not supported (expected {SCHEMA_VERSION})"
        )
    document.pop("tool_version", None)
    return TransferMatrix.from_dict(document)
