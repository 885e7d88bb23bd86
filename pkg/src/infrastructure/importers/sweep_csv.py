# src/infrastructure/importers/sweep_csv.py

from collections import OrderedDict
from typing import Dict, List

import structlog
from pydantic import ValidationError

from src.core.constants import LINE_ATTENUATION_DB, SWEEP_SPAN_HZ
from src.core.exceptions import ParseError
from src.domain.entities.measurement import MeasuredPoint, SweepDataset
from src.domain.value_objects.power_setting import PowerSetting

from .base import BaseImporter, ImportResult

log = structlog.get_logger(__name__)

SWEEP_COLUMNS = ['sweep_time_s', 'r_up', 'shots', 'power_dbm']


class SweepCSVImporter(BaseImporter):
    """
    Importer for R_up vs sweep time data

    Rows are grouped into one SweepDataset per power, in order of first
    appearance.
    """

    source_type = "SWEEP_CSV"
    columns = SWEEP_COLUMNS

    def __init__(self, span: float = SWEEP_SPAN_HZ, attenuation_db: float = LINE_ATTENUATION_DB,
                 center_offset: float = 0.0):
        self.span = span
        self.attenuation_db = attenuation_db
        self.center_offset = center_offset

    def import_file(self, file_path: str) -> ImportResult:
        groups: Dict[float, List[MeasuredPoint]] = OrderedDict()
        first_line: Dict[float, int] = {}
        rows = 0
        for line, cells in self._data_rows(file_path):
            sweep_time = self._parse_float(cells[0], 'sweep_time_s', file_path, line)
            r_up = self._parse_float(cells[1], 'r_up', file_path, line)
            shots = self._parse_int(cells[2], 'shots', file_path, line)
            power = self._parse_float(cells[3], 'power_dbm', file_path, line)
            try:
                point = MeasuredPoint(sweep_time=sweep_time, r_up=r_up, shots=shots)
            except ValidationError as e:
                raise ParseError(_first_error(e), path=str(file_path), line=line) from None
            groups.setdefault(power, []).append(point)
            first_line.setdefault(power, line)
            rows += 1

        if not groups:
            raise ParseError("no data rows", path=str(file_path))

        datasets = []
        for power, points in groups.items():
            try:
                datasets.append(SweepDataset(
                    power=PowerSetting(p_mw_dbm=power, attenuation_db=self.attenuation_db),
                    points=points,
                    protocol_span=self.span,
                    center_offset=self.center_offset,
                ))
            except ValidationError as e:
                raise ParseError(f"dataset at {power:g} dBm: {_first_error(e)}", path=str(file_path),
                                 line=first_line[power]) from None

        log.info("sweep_csv_imported", path=str(file_path), rows=rows, datasets=len(datasets))
        return self._result(rows, datasets)


def _first_error(error: ValidationError) -> str:
    detail = error.errors()[0]
    location = '.'.join(str(part) for part in detail.get('loc', ()))
    return f"{location}: {detail['msg']}" if location else detail['msg']

