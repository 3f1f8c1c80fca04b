"""Readers for the solver's output files (CSV time series, snapshots, EOC
tables, JSON manifests)."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np


class MissingDataError(FileNotFoundError):
    pass


def _read_csv_columns(path: Path) -> dict:
    if not path.exists():
        raise MissingDataError(f"missing file: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise MissingDataError(f"empty CSV: {path}")
        columns = {name: [] for name in reader.fieldnames}
        for row in reader:
            for name in reader.fieldnames:
                value = row[name]
                columns[name].append(float(value) if value != "" else np.nan)
    return {name: np.asarray(values) for name, values in columns.items()}


def read_timeseries(run_dir) -> dict:
    data = _read_csv_columns(Path(run_dir) / "timeseries.csv")
    for needed in ("t", "total_energy", "kinetic_energy", "mass"):
        if needed not in data:
            raise MissingDataError(
                f"timeseries in {run_dir} lacks column {needed!r}")
    return data


def read_manifest(run_dir) -> dict:
    path = Path(run_dir) / "manifest.json"
    if not path.exists():
        raise MissingDataError(f"missing file: {path}")
    with open(path) as fh:
        return json.load(fh)


def list_snapshots(run_dir) -> list:
    """Snapshot files sorted by step index."""
    out = []
    for path in Path(run_dir).glob("snap_*.csv"):
        try:
            step = int(path.stem.split("_")[1])
        except (IndexError, ValueError):
            continue
        out.append((step, path))
    if not out:
        raise MissingDataError(f"no snapshots in {run_dir}")
    return sorted(out)


def read_snapshot(path) -> dict:
    """A snapshot plus its dimensionality ('dim' key, 1 or 2)."""
    data = _read_csv_columns(Path(path))
    data["dim"] = 2 if "y" in data else 1
    return data


def read_eoc_table(path) -> dict:
    """An errors-and-orders table written by the solver's eoc driver."""
    path = Path(path)
    if path.is_dir():
        path = path / "eoc.csv"
    data = _read_csv_columns(path)
    for needed in ("K", "err_rho", "err_v"):
        if needed not in data:
            raise MissingDataError(f"EOC table {path} lacks column {needed!r}")
    return data
