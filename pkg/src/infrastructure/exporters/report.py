# src/infrastructure/exporters/report.py

from pathlib import Path
from typing import Any, Iterator, Mapping, Tuple

import structlog

log = structlog.get_logger(__name__)


def _format(value: Any) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.10g}"
    if isinstance(value, (list, tuple)):
        return ','.join(_format(v) for v in value)
    return str(value)


def _flatten(mapping: Mapping[str, Any], prefix: str = '') -> Iterator[Tuple[str, Any]]:
    for key, value in mapping.items():
        name = f"{prefix}{key}"
        if isinstance(value, Mapping):
            yield from _flatten(value, name + '.')
        else:
            yield name, value


def format_report(mapping: Mapping[str, Any]) -> str:
    """key = value lines; nested mappings become dotted keys"""
    return ''.join(f"{key} = {_format(value)}\n" for key, value in _flatten(mapping))


def write_report(mapping: Mapping[str, Any], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_report(mapping), encoding='utf-8')
    log.info("report_written", path=str(path))
    return path
