import csv
import io
import logging
import math
from pathlib import Path
from typing import Iterable, Sequence

from django.core.files.base import ContentFile
from django.core.files.storage import FileSystemStorage

from .conf import numeric_default

logger = logging.getLogger(__name__)


class ResultStorage(FileSystemStorage):
    """
    Storage for CSV result tables.

    Tables are written under OUTPUT_DIR unless a location is given. Saving a
    table under an existing name replaces it, so reruns are reproducible.
    """

    def __init__(self, location=None):
        # Define the base directory for result tables
        self.base_location = location or numeric_default("OUTPUT_DIR", "outputs")
        super().__init__(location=str(self.base_location))

    def get_available_name(self, name, max_length=None):
        """
        Keep the requested name, replacing any previous table.
        """
        if self.exists(name):
            self.delete(name)
        return name


def format_value(value) -> str:
    """Render a cell: floats with 17 significant digits, everything else as text."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.17g}"
    try:
        return f"{float(value):.17g}"
    except (TypeError, ValueError):
        return str(value)


def render_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(value) for value in row])
    return buffer.getvalue()


def write_table(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """Write a CSV table and return its absolute path."""
    target = Path(path)
    storage = ResultStorage(target.parent.resolve())
    rows = list(rows)
    text = render_csv(header, rows)
    name = storage.save(target.name, ContentFile(text.encode("utf-8")))
    saved = Path(storage.path(name))
    logger.info(f"Wrote {len(rows)} rows to {saved}")
    return saved
