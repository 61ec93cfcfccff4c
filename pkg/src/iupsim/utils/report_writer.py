"""Fixed-format table writers for scenario output.

Every float is written with 17 significant digits and rows keep the order
in which they were produced, so identical inputs give byte-identical files.
"""
import csv
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

import numpy as np
import yaml

FLOAT_FORMAT = ".17g"


class OutputFormat(str, Enum):
    CSV = "csv"
    STRUCTURED_TEXT = "structured-text"

    @property
    def suffix(self) -> str:
        return ".csv" if self is OutputFormat.CSV else ".yaml"


def format_value(value: Any) -> str:
    """Render one cell for CSV output."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), FLOAT_FORMAT)
    if isinstance(value, Enum):
        return str(value.value)
    return str(value)


def _plain(value: Any) -> Any:
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, Enum):
        return value.value
    return value


class ReportWriter:
    """Write named tables to an output directory.

    Attributes:
        output_dir: Target directory, created on first write
        output_format: CSV or structured text (YAML)
    """

    def __init__(self, output_dir: Union[str, Path], output_format: OutputFormat = OutputFormat.CSV):
        self.output_dir = Path(output_dir)
        self.output_format = OutputFormat(output_format)

    def write_table(self, name: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> Path:
        """Write one table.

        Args:
            name: File stem
            header: Column names
            rows: Row values, same length as ``header``

        Returns:
            Path: Written file

        Raises:
            ValueError: If a row does not match the header width
        """
        for index, row in enumerate(rows):
            if len(row) != len(header):
                raise ValueError(f"{name}: row {index} has {len(row)} cells, header has {len(header)}")
        self.output_dir.mkdir(parents=True, exist_ok=True)
        path = self.output_dir / f"{name}{self.output_format.suffix}"
        if self.output_format is OutputFormat.CSV:
            with path.open("w", newline="", encoding="utf-8") as handle:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(header)
                for row in rows:
                    writer.writerow([format_value(cell) for cell in row])
        else:
            document = {
                "table": name,
                "columns": list(header),
                "rows": [[_plain(cell) for cell in row] for row in rows],
            }
            write_yaml(path, document)
        return path

    def write_mapping(self, name: str, values: Dict[str, Any]) -> Path:
        """Write a ``key,value`` table in insertion order."""
        return self.write_table(name, ("key", "value"), list(values.items()))


def write_yaml(path: Union[str, Path], document: Dict[str, Any]) -> Path:
    """Dump a document as block-style YAML with keys in insertion order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        yaml.safe_dump(document, handle, sort_keys=False, default_flow_style=False, allow_unicode=True)
    return path


def read_csv(path: Union[str, Path]) -> List[Dict[str, str]]:
    """Read a CSV table back as a list of row dicts."""
    with Path(path).open(newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))
