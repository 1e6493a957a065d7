"""Documented weakmeas CSV schemas and a strict loader.

The producing tool pins its column order per file kind; this module carries
an independent copy of those column lists (schema version 1) and refuses
any file whose header hash does not match a known one.  Infinities arrive
as the token ``inf`` and are loaded as NaN so downstream plots show gaps.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

SCHEMA_VERSION = 1

TRAJECTORY_COLUMNS = ["t", "P_L_real", "P_L_est", "P_L_ideal", "C_fid",
                      "B_fid", "one_minus_C_fid", "one_minus_B_fid", "C_re",
                      "B_re", "E_re"]
ENSEMBLE_COLUMNS = TRAJECTORY_COLUMNS + [
    "P_L_real_stderr", "P_L_est_stderr", "C_fid_stderr", "B_fid_stderr",
    "C_re_stderr", "B_re_stderr", "E_re_stderr", "C_fid_mom", "B_fid_mom",
    "C_re_mom", "B_re_mom", "E_re_mom"]
ENSEMBLE_ME2_COLUMNS = ENSEMBLE_COLUMNS + ["P_L_me2"]
SWEEP_COLUMNS = ["t", "kappa", "C_re", "B_re", "E_re", "cross"]
GOALPROG_COLUMNS = ["t", "kappa", "O", "d1p", "d1m", "d2p", "d2m"]


def header_hash(columns: list[str]) -> str:
    return hashlib.sha256(",".join(columns).encode("utf-8")).hexdigest()[:16]


# header hashes accepted per figure kind
KIND_SCHEMAS: dict[str, list[list[str]]] = {
    "timeseries": [TRAJECTORY_COLUMNS, ENSEMBLE_COLUMNS, ENSEMBLE_ME2_COLUMNS],
    "overlay": [ENSEMBLE_ME2_COLUMNS],
    "heatmap": [SWEEP_COLUMNS],
    "goalmap": [GOALPROG_COLUMNS],
}
KIND_HASHES = {kind: {header_hash(cols) for cols in schemas}
               for kind, schemas in KIND_SCHEMAS.items()}


class SchemaError(ValueError):
    """The CSV does not match any documented schema for the figure kind."""


@dataclass(frozen=True)
class Table:
    """A loaded CSV: column-name -> float array (inf tokens as NaN)."""

    comment: str
    columns: list[str]
    data: dict[str, np.ndarray]

    def __getitem__(self, name: str) -> np.ndarray:
        if name not in self.data:
            raise SchemaError(f"missing column {name!r}")
        return self.data[name]


def _parse_cell(cell: str) -> float:
    if cell == "inf":
        return float("nan")  # rendered as a gap
    if cell == "-inf":
        return float("nan")
    return float(cell)


def load_table(path: str, kind: str) -> Table:
    """Read and validate a weakmeas CSV for the given figure kind."""
    if kind not in KIND_HASHES:
        raise SchemaError(f"unknown figure kind {kind!r}")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [line.rstrip("\n") for line in fh]
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    lines = [line for line in lines if line]
    if len(lines) < 3:
        raise SchemaError(f"{path}: too short to contain comment, header, data")
    comment = lines[0]
    if not comment.startswith("#"):
        raise SchemaError(f"{path}: missing the tool comment line")
    columns = lines[1].split(",")
    if header_hash(columns) not in KIND_HASHES[kind]:
        raise SchemaError(
            f"{path}: header does not match any schema-v{SCHEMA_VERSION} "
            f"layout for kind {kind!r}")
    rows = [line.split(",") for line in lines[2:]]
    width = len(columns)
    if any(len(r) != width for r in rows):
        raise SchemaError(f"{path}: ragged rows")
    arr = np.array([[_parse_cell(c) for c in row] for row in rows])
    data = {name: arr[:, i] for i, name in enumerate(columns)}
    return Table(comment=comment, columns=columns, data=data)
