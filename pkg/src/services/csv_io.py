"""CSV and JSON artifacts: numeric data in, run-length trace and changepoints out"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from lib.bocd_errors import CsvParseError
from models.segmentation_result import SegmentationResult

logger = logging.getLogger(__name__)

# shortest repr that round-trips an IEEE double
FLOAT_FORMAT = "%.17g"

RUNLENGTH_FILE = "runlength.csv"
CHANGEPOINTS_FILE = "changepoints.json"
SUMMARY_FILE = "summary.json"
TIMING_FILE = "timing.json"

PathLike = Union[str, Path]


def load_csv(
    path: PathLike,
    header: bool = True,
    delimiter: str = ",",
    columns: Optional[Sequence[str]] = None,
) -> np.ndarray:
    """Read a numeric T x d matrix; ``columns`` selects by header name or 0-based index.

    Rows are numbered from 1 over data rows, header excluded.
    """
    path = Path(path)
    try:
        frame = pd.read_csv(
            path,
            sep=delimiter,
            header=0 if header else None,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
        )
    except FileNotFoundError as exc:
        raise CsvParseError(f"No such file: '{path}'") from exc
    except pd.errors.EmptyDataError as exc:
        raise CsvParseError(f"'{path}' is empty") from exc
    except pd.errors.ParserError as exc:
        raise CsvParseError(f"'{path}' is not well-formed CSV: {exc}") from exc

    frame = _reject_blank_rows(frame, path)
    if columns:
        frame = _select_columns(frame, columns, path)
    if frame.shape[0] == 0 or frame.shape[1] == 0:
        raise CsvParseError(f"'{path}' contains no data rows")

    matrix = np.empty(frame.shape, dtype=float)
    for j, name in enumerate(frame.columns):
        cells = frame[name].str.strip()
        for i, cell in enumerate(cells):
            try:
                value = float(cell)
            except ValueError:
                value = float("nan")
            if not np.isfinite(value):
                raise CsvParseError(
                    f"'{path}': non-numeric or missing value '{cell}' at row {i + 1}, column '{name}'",
                    row=i + 1,
                    column=str(name),
                )
            matrix[i, j] = value
    logger.debug("Loaded %d x %d matrix from %s", matrix.shape[0], matrix.shape[1], path)
    return matrix


def _reject_blank_rows(frame: pd.DataFrame, path: Path) -> pd.DataFrame:
    """Drop trailing blank lines; a blank line inside the data is an error"""
    cells = frame.fillna("").to_numpy(dtype=str)
    blank = (np.char.strip(cells) == "").all(axis=1)
    end = len(blank)
    while end > 0 and blank[end - 1]:
        end -= 1
    interior = np.flatnonzero(blank[:end])
    if interior.size:
        row = int(interior[0]) + 1
        raise CsvParseError(f"'{path}': blank row {row} inside the data", row=row)
    return frame.iloc[:end]


def _select_columns(frame: pd.DataFrame, columns: Sequence[str], path: Path) -> pd.DataFrame:
    picked = []
    names = [str(c) for c in frame.columns]
    for column in columns:
        if column in names:
            picked.append(frame.columns[names.index(column)])
        elif column.isdigit() and int(column) < frame.shape[1]:
            picked.append(frame.columns[int(column)])
        else:
            raise CsvParseError(f"'{path}' has no column '{column}'", column=column)
    return frame[picked]


def write_matrix_csv(path: PathLike, matrix, column_names: Optional[List[str]] = None) -> Path:
    path = Path(path)
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim == 1:
        matrix = matrix[:, None]
    names = column_names or [f"x{j + 1}" for j in range(matrix.shape[1])]
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(matrix, columns=names).to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def runlength_frame(result: SegmentationResult) -> pd.DataFrame:
    """Long-format trace: one row per (t, retained run length)"""
    steps = result.runlength_trace
    if not steps:
        return pd.DataFrame({"t": [], "r": [], "log_prob": []})
    return pd.DataFrame({
        "t": np.concatenate([np.full(len(s.run_lengths), s.t) for s in steps]),
        "r": np.concatenate([s.run_lengths for s in steps]),
        "log_prob": np.concatenate([s.log_probs for s in steps]),
    })


def _write_json(path: Path, payload) -> Path:
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return path


def write_artifacts(out_dir: PathLike, result: SegmentationResult) -> Dict[str, Path]:
    """Write the run-length trace, changepoints, summary and timing files.

    Everything except the timing file is a deterministic function of the
    data, config and seed.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}

    paths["runlength"] = out_dir / RUNLENGTH_FILE
    runlength_frame(result).to_csv(paths["runlength"], index=False, float_format=FLOAT_FORMAT)

    paths["changepoints"] = _write_json(out_dir / CHANGEPOINTS_FILE, [int(t) for t in result.map_changepoints])
    paths["summary"] = _write_json(out_dir / SUMMARY_FILE, {
        "length": result.length,
        "map_changepoints": [int(t) for t in result.map_changepoints],
        "modal_changepoints": [int(t) for t in result.modal_changepoints],
        "log_evidence": float(result.log_evidence),
        "omega": result.omega,
        "error": result.error,
    })
    paths["timing"] = _write_json(out_dir / TIMING_FILE, {
        "per_step_nanos": [int(n) for n in result.per_step_nanos],
        "total_ms": result.total_ms,
    })
    logger.info("Wrote detector artifacts to %s", out_dir)
    return paths


def read_changepoints(path: PathLike) -> List[int]:
    return [int(t) for t in json.loads(Path(path).read_text(encoding="utf-8"))]
