"""File formats: the versioned model text format and the CSV surfaces.

Model files round-trip exactly: every value is printed with 17 significant
digits, enough to reproduce any double bit for bit. Sample CSVs carry a
header row of variable names, 1-based integer codes, and empty cells for
missing values.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError
from .model import FactorModel, SampleTable
from .report import FitReport

MODEL_MAGIC = "PMFREC"
MODEL_VERSION = 1


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_model(model: FactorModel, path) -> None:
    lines = [f"{MODEL_MAGIC} {MODEL_VERSION}", f"{model.num_vars} {model.rank}"]
    lines.append(" ".join(str(i) for i in model.alphabet_sizes))
    lines.append(" ".join(_fmt(x) for x in model.prior))
    for a in model.factors:
        for row in a:
            lines.append(" ".join(_fmt(x) for x in row))
    Path(path).write_text("\n".join(lines) + "\n")


def is_model_file(path) -> bool:
    """True when the file starts with the model-format magic line."""
    try:
        with open(path, "r") as fh:
            return fh.readline().split() == [MODEL_MAGIC, str(MODEL_VERSION)]
    except OSError:
        return False


def read_model(path) -> FactorModel:
    try:
        raw = Path(path).read_text()
    except OSError as err:
        raise DataError(f"cannot read model file {path}: {err}") from err
    lines = [ln for ln in raw.splitlines() if ln.strip()]
    try:
        if lines[0].split() != [MODEL_MAGIC, str(MODEL_VERSION)]:
            raise DataError(f"{path} is not a {MODEL_MAGIC} {MODEL_VERSION} model file")
        n_vars, rank = (int(x) for x in lines[1].split())
        sizes = [int(x) for x in lines[2].split()]
        if len(sizes) != n_vars:
            raise DataError(f"{path}: expected {n_vars} alphabet sizes")
        prior = np.array([float(x) for x in lines[3].split()])
        if prior.size != rank:
            raise DataError(f"{path}: prior line must hold {rank} values")
        factors = []
        cursor = 4
        for n, size in enumerate(sizes):
            rows = lines[cursor : cursor + size]
            if len(rows) != size:
                raise DataError(f"{path}: truncated factor block {n}")
            mat = np.array([[float(x) for x in row.split()] for row in rows])
            if mat.shape != (size, rank):
                raise DataError(f"{path}: factor block {n} has the wrong width")
            factors.append(mat)
            cursor += size
        return FactorModel(factors, prior)
    except DataError:
        raise
    except (ValueError, IndexError) as err:
        raise DataError(f"{path}: malformed model file ({err})") from err


def write_samples(table: SampleTable, path, names: Sequence[str] | None = None) -> None:
    if names is None:
        names = [f"x{n + 1}" for n in range(table.num_vars)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for row in table.cells:
            writer.writerow(["" if c == 0 else str(int(c)) for c in row])


def read_samples(path, alphabet_sizes: Sequence[int] | None = None) -> SampleTable:
    """Load a sample CSV; alphabet sizes default to the column maxima."""
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise DataError(f"{path} is empty") from None
            rows = []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(header):
                    raise DataError(
                        f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}"
                    )
                try:
                    rows.append([0 if c.strip() == "" else int(c) for c in row])
                except ValueError as err:
                    raise DataError(f"{path}:{lineno}: non-integer code ({err})") from err
    except OSError as err:
        raise DataError(f"cannot read samples file {path}: {err}") from err
    if not rows:
        raise DataError(f"{path} holds no samples")
    cells = np.array(rows, dtype=np.int64)
    if cells.min() < 0:
        raise DataError(f"{path}: codes must be positive (empty cell means missing)")
    if alphabet_sizes is None:
        alphabet_sizes = [max(int(cells[:, n].max()), 1) for n in range(cells.shape[1])]
    try:
        return SampleTable(cells, alphabet_sizes)
    except ValueError as err:
        raise DataError(f"{path}: {err}") from err


def write_report_csv(report: FitReport, path, include_timing: bool = False) -> None:
    """One row per outer iteration; timing is zeroed unless requested,
    keeping same-seed reruns byte-identical."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", report.metric, "seconds"])
        for i, value in enumerate(report.trace, start=1):
            secs = report.seconds[i - 1] if include_timing else 0.0
            writer.writerow([i, repr(float(value)), repr(float(secs))])


BENCHMARK_COLUMNS = [
    "method",
    "N",
    "F",
    "I",
    "p",
    "eps",
    "S",
    "trial",
    "mse",
    "mre",
    "seconds",
]


def write_benchmark_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=BENCHMARK_COLUMNS)
        writer.writeheader()
        for row in rows:
            out = dict(row)
            for key in ("mse", "mre", "seconds"):
                if out.get(key) is None:
                    out[key] = ""
                elif isinstance(out[key], float):
                    out[key] = repr(out[key])
            writer.writerow(out)
