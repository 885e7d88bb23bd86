# src/infrastructure/exporters/csv_export.py
"""
CSV output with a leading '#' comment block, readable by gnuplot and by
pandas.read_csv(comment='#').
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List

import pandas as pd
import structlog

from src import __version__

log = structlog.get_logger(__name__)

TOOL_NAME = "adiabatic-inversion"
FLOAT_FORMAT = '%.10g'


@dataclass(frozen=True)
class CsvHeader:
    command: str
    seed: int
    config_hash: str
    metadata: Dict[str, str] = field(default_factory=dict)

    def lines(self) -> List[str]:
        lines = [
            f"# tool: {TOOL_NAME} {__version__}",
            f"# command: {self.command}",
            f"# seed: {self.seed}",
            f"# config_hash: {self.config_hash}",
        ]
        lines.extend(f"# {key}: {value}" for key, value in self.metadata.items())
        return lines


def write_csv(frame: pd.DataFrame, path: Path, header: CsvHeader) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        for line in header.lines():
            f.write(line + '\n')
        frame.to_csv(f, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    log.info("csv_written", path=str(path), rows=len(frame))
    return path
