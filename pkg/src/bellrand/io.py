"""
Reading ensembles and writing JSON / CSV results
"""

import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterable, Sequence, Union

from .config import CSV_DIGITS
from .errors import ValidationError
from .models.ensemble import LhvEnsemble

PathLike = Union[str, Path]


def read_json(path: PathLike) -> Any:
    """Load JSON from a file, or from stdin when path is "-"."""
    try:
        if str(path) == "-":
            return json.load(sys.stdin)
        with open(path) as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path}: not valid JSON ({e})") from None
    except OSError as e:
        raise ValidationError(f"{path}: cannot read ({e.strerror})") from None


def read_ensemble(path: PathLike) -> LhvEnsemble:
    data = read_json(path)
    try:
        return LhvEnsemble.from_dict(data)
    except ValidationError as e:
        raise ValidationError(f"{path}: {e}") from None


def dumps(data: Dict) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False)


def _atomic_write(path: PathLike, text: str) -> None:
    target = Path(path)
    directory = target.parent if str(target.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, target)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def write_json(path: PathLike, data: Dict) -> None:
    """Write JSON atomically; no partial file remains on failure."""
    _atomic_write(path, dumps(data) + "\n")


def format_number(value: Any) -> str:
    """Fixed 12-significant-digit rendering, independent of locale."""
    if isinstance(value, float):
        return f"{value:.{CSV_DIGITS}g}"
    return "" if value is None else str(value)


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(v) for v in row])
    return buffer.getvalue()


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    _atomic_write(path, render_csv(header, rows))
