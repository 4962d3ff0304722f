from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .errors import IngestionError


def read_values(path: str | Path, negate: bool = False) -> np.ndarray:
    """Read one numeric value per line.

    A single non-numeric first line is taken as a header. LF and CRLF line
    endings are accepted; blank lines are skipped.
    """
    p = Path(path)
    try:
        text = p.read_bytes().decode("ascii")
    except FileNotFoundError:
        raise IngestionError(f"file not found: {p}") from None
    except UnicodeDecodeError:
        raise IngestionError(f"{p}: not an ASCII text file") from None
    except OSError as exc:
        raise IngestionError(f"{p}: {exc.strerror}") from None
    lines = [ln.strip() for ln in text.splitlines()]
    values = []
    for i, ln in enumerate(lines):
        if not ln:
            continue
        try:
            v = float(ln)
        except ValueError:
            if i == 0:
                continue
            raise IngestionError(f"{p}:{i + 1}: not a number: {ln!r}") from None
        if not math.isfinite(v):
            raise IngestionError(f"{p}:{i + 1}: non-finite value {ln!r}")
        values.append(v)
    if not values:
        raise IngestionError(f"{p}: no data values")
    out = np.asarray(values, dtype=np.float64)
    return -out if negate else out


def write_values(path: str | Path, values, header: str | None = None) -> None:
    with open(path, "w", newline="\n") as fh:
        if header:
            fh.write(header + "\n")
        for v in np.asarray(values, dtype=np.float64):
            fh.write(repr(float(v)) + "\n")
