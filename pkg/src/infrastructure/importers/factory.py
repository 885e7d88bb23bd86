# src/infrastructure/importers/factory.py

from pathlib import Path
from typing import List, Optional

from src.core.constants import LINE_ATTENUATION_DB, SWEEP_SPAN_HZ
from src.core.exceptions import ParseError

from .base import BaseImporter, ImportResult
from .spectrum_csv import SpectrumCSVImporter
from .sweep_csv import SweepCSVImporter


class ImporterFactory:
    """
    Factory to pick the importer whose header matches the file
    """

    def __init__(self, span: float = SWEEP_SPAN_HZ, attenuation_db: float = LINE_ATTENUATION_DB):
        self._importers: List[BaseImporter] = [
            SweepCSVImporter(span=span, attenuation_db=attenuation_db),
            SpectrumCSVImporter(),
        ]

    def get_importer(self, file_path: str) -> Optional[BaseImporter]:
        """
        Get appropriate importer for the given file

        Returns None if no importer can handle the file
        """
        for importer in self._importers:
            if importer.can_handle(file_path):
                return importer

        return None

    def import_file(self, file_path: str, source_type: Optional[str] = None) -> ImportResult:
        """
        Import with the importer matching the file's header

        `source_type` restricts the accepted kind (e.g. "SWEEP_CSV"). A file
        no importer recognizes is parsed by the expected importer, if any, so
        the error names the offending line.
        """
        if not Path(file_path).is_file():
            raise ParseError("file not found", path=str(file_path))
        importer = self.get_importer(file_path)
        if importer is None:
            expected = [i for i in self._importers if i.source_type == source_type]
            if not expected:
                raise ParseError("header matches no known data format", path=str(file_path), line=1)
            importer = expected[0]
        elif source_type is not None and importer.source_type != source_type:
            raise ParseError(f"expected {source_type} data, got {importer.source_type}", path=str(file_path))
        return importer.import_file(file_path)
