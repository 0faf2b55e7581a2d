"""Parsers for the simulator's delimited outputs.

Three shapes are understood, all with '#'-prefixed metadata lines:

* sweep results: header ``snr_db,frames,symbols,symbol_errors,ser,
  ser_stderr,bit_errors,ber,wall_seconds``
* bound curves: header ``snr_db,bound_value``
* Shannon-limit lookups: header containing a ``gamma_lim_db`` column
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SWEEP_COLUMNS = (
    "snr_db",
    "frames",
    "symbols",
    "symbol_errors",
    "ser",
    "ser_stderr",
    "bit_errors",
    "ber",
    "wall_seconds",
)


class CsvSchemaError(ValueError):
    """File does not match the expected simulator CSV schema."""


@dataclass
class SweepResult:
    snr_db: np.ndarray
    ser: np.ndarray
    ser_stderr: np.ndarray
    ber: np.ndarray
    metadata: dict = field(default_factory=dict)


@dataclass
class BoundCurve:
    snr_db: np.ndarray
    value: np.ndarray
    metadata: dict = field(default_factory=dict)


@dataclass
class LimitValue:
    gamma_lim_db: float
    metadata: dict = field(default_factory=dict)


def _read_table(path) -> tuple[list[str], list[list[str]], dict]:
    meta: dict = {}
    header: list[str] | None = None
    rows: list[list[str]] = []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                k, v = body.split("=", 1)
                meta[k.strip()] = v.strip()
            continue
        if header is None:
            header = [h.strip() for h in line.split(",")]
            continue
        rows.append([v.strip() for v in line.split(",")])
    if header is None:
        raise CsvSchemaError(f"{path}: no header row")
    return header, rows, meta


def read_sweep(path) -> SweepResult:
    header, rows, meta = _read_table(path)
    if tuple(header) != SWEEP_COLUMNS:
        raise CsvSchemaError(
            f"{path}: expected sweep columns {SWEEP_COLUMNS}, got {tuple(header)}"
        )
    data = np.array([[float(v) for v in row] for row in rows])
    if data.size == 0:
        data = data.reshape(0, len(SWEEP_COLUMNS))
    return SweepResult(
        snr_db=data[:, 0],
        ser=data[:, 4],
        ser_stderr=data[:, 5],
        ber=data[:, 7],
        metadata=meta,
    )


def read_bound_curve(path) -> BoundCurve:
    header, rows, meta = _read_table(path)
    if tuple(header) != ("snr_db", "bound_value"):
        raise CsvSchemaError(
            f"{path}: expected columns (snr_db, bound_value), got {tuple(header)}"
        )
    data = np.array([[float(v) for v in row] for row in rows])
    if data.size == 0:
        data = data.reshape(0, 2)
    return BoundCurve(snr_db=data[:, 0], value=data[:, 1], metadata=meta)


def read_limit(path) -> LimitValue:
    header, rows, meta = _read_table(path)
    if "gamma_lim_db" not in header:
        raise CsvSchemaError(f"{path}: no gamma_lim_db column in {header}")
    if len(rows) != 1:
        raise CsvSchemaError(f"{path}: expected exactly one limit row")
    idx = header.index("gamma_lim_db")
    return LimitValue(gamma_lim_db=float(rows[0][idx]), metadata=meta)
