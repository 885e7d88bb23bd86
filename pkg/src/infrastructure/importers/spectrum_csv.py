# src/infrastructure/importers/spectrum_csv.py

import pandas as pd
import structlog

from src.core.exceptions import ParseError

from .base import BaseImporter, ImportResult

log = structlog.get_logger(__name__)

SPECTRUM_COLUMNS = ['freq_hz', 'r_up', 'shots', 'snapshot_index', 'wallclock_min']


class SpectrumCSVImporter(BaseImporter):
    """
    Importer for ESR spectra, one row per (snapshot, frequency)

    The single record is a DataFrame with SPECTRUM_COLUMNS.
    """

    source_type = "SPECTRUM_CSV"
    columns = SPECTRUM_COLUMNS

    def import_file(self, file_path: str) -> ImportResult:
        rows = []
        for line, cells in self._data_rows(file_path):
            freq = self._parse_float(cells[0], 'freq_hz', file_path, line)
            r_up = self._parse_float(cells[1], 'r_up', file_path, line)
            shots = self._parse_int(cells[2], 'shots', file_path, line)
            index = self._parse_int(cells[3], 'snapshot_index', file_path, line)
            minute = self._parse_float(cells[4], 'wallclock_min', file_path, line)
            if not 0.0 <= r_up <= 1.0:
                raise ParseError(f"r_up must lie in [0, 1], got {r_up}", path=str(file_path), line=line)
            if shots < 1:
                raise ParseError(f"shots must be positive, got {shots}", path=str(file_path), line=line)
            if index < 0:
                raise ParseError(f"snapshot_index must be non-negative, got {index}", path=str(file_path),
                                 line=line)
            rows.append((freq, r_up, shots, index, minute))

        if not rows:
            raise ParseError("no data rows", path=str(file_path))

        frame = pd.DataFrame(rows, columns=SPECTRUM_COLUMNS)
        log.info("spectrum_csv_imported", path=str(file_path), rows=len(rows),
                 snapshots=int(frame['snapshot_index'].nunique()))
        return self._result(len(rows), [frame])
