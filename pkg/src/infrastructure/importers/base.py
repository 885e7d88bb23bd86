# src/infrastructure/importers/base.py

import csv
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, List, Sequence, Tuple

from src.core.exceptions import ParseError

COMMENT_PREFIX = '#'


@dataclass
class ImportResult:
    source_type: str
    row_count: int
    records: List[Any] = field(default_factory=list)


class BaseImporter(ABC):
    """
    Abstract base class for all dataset importers
    """

    source_type = "CSV"
    columns: Sequence[str] = ()

    @abstractmethod
    def import_file(self, file_path: str) -> ImportResult:
        """
        Parse a file into typed records

        Raises ParseError naming the file and line of the first bad row.
        """

    def can_handle(self, file_path: str) -> bool:
        """
        Check if the first non-comment line of the file is this importer's header
        """
        try:
            header = next(self._rows(file_path), None)
        except (OSError, UnicodeDecodeError, ParseError):
            return False
        return header is not None and [c.strip() for c in header[1]] == list(self.columns)

    def _rows(self, file_path: str) -> Iterator[Tuple[int, List[str]]]:
        """(line number, cells) for every non-blank, non-comment line"""
        with open(file_path, 'r', encoding='utf-8', newline='') as f:
            for line_number, line in enumerate(f, start=1):
                stripped = line.strip()
                if not stripped or stripped.startswith(COMMENT_PREFIX):
                    continue
                yield line_number, next(csv.reader([stripped]))

    def _data_rows(self, file_path: str) -> Iterator[Tuple[int, List[str]]]:
        """Rows after a validated header"""
        if not Path(file_path).is_file():
            raise ParseError("file not found", path=str(file_path))
        rows = self._rows(file_path)
        first = next(rows, None)
        if first is None:
            raise ParseError("file is empty", path=str(file_path))
        line_number, header = first
        if [c.strip() for c in header] != list(self.columns):
            raise ParseError(f"expected header {','.join(self.columns)}, got {','.join(header)}",
                             path=str(file_path), line=line_number)
        for line_number, cells in rows:
            if len(cells) != len(self.columns):
                raise ParseError(f"expected {len(self.columns)} fields, got {len(cells)}",
                                 path=str(file_path), line=line_number)
            yield line_number, cells

    @staticmethod
    def _parse_float(value: str, name: str, file_path: str, line: int) -> float:
        try:
            number = float(value)
        except ValueError:
            raise ParseError(f"{name}: not a number: {value!r}", path=str(file_path), line=line) from None
        if not math.isfinite(number):
            raise ParseError(f"{name}: non-finite value {value!r}", path=str(file_path), line=line)
        return number

    @staticmethod
    def _parse_int(value: str, name: str, file_path: str, line: int) -> int:
        try:
            return int(value)
        except ValueError:
            raise ParseError(f"{name}: not an integer: {value!r}", path=str(file_path), line=line) from None

    def _result(self, rows: int, records: List[Any]) -> ImportResult:
        return ImportResult(source_type=self.source_type, row_count=rows, records=records)
