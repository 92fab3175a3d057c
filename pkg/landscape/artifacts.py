"""Writers for run artifacts: JSON documents, JSON-lines records and CSV tables."""

import csv
import logging
from pathlib import Path
from typing import Iterable, Sequence

from pydantic import BaseModel

logger = logging.getLogger(__name__)


def _ensure_parent(path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_json(path: Path, model: BaseModel) -> Path:
    path = _ensure_parent(path)
    path.write_text(model.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.debug("wrote %s", path)
    return path


def write_jsonl(path: Path, models: Iterable[BaseModel]) -> Path:
    path = _ensure_parent(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for model in models:
            fh.write(model.model_dump_json() + "\n")
    logger.debug("wrote %s", path)
    return path


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[float]]) -> Path:
    """Header row, '.' decimal separator, newline-terminated rows; floats use repr."""
    path = _ensure_parent(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])
    logger.debug("wrote %s", path)
    return path
