"""Plot-ready CSV/JSON writers.

Schemas:

* fit curve: ``alpha,divergence``
* sweep, one file per gamma: ``alpha,mean_slope,slope_sd,mean_coverage,coverage_sd,runs,noburst``
  (empty slope fields when no run of the cell had a detectable burst)
* cumulative curve: ``x,y``
* markers: JSON object with ``x_A, y_A, x_P, y_P, slope, normalized_slope``
"""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path

from .burst import BurstMarkers, CumulativeCurve
from .calibration import FitResult, SweepResult


def _num(x) -> str:
    return "" if x is None else repr(float(x)) if isinstance(x, float) else str(x)


def write_json(path, doc) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_num(v) for v in row])


def gamma_tag(gamma: float) -> str:
    return format(gamma, ".12g")


def write_fit(fit: FitResult, path) -> None:
    write_csv(path, ["alpha", "divergence"], fit.curve)


def write_sweep(result: SweepResult, directory, stem: str = "sweep") -> list[Path]:
    directory = Path(directory)
    paths = []
    header = ["alpha", "mean_slope", "slope_sd", "mean_coverage", "coverage_sd", "runs", "noburst"]
    for gamma in result.gammas:
        path = directory / f"{stem}_gamma_{gamma_tag(gamma)}.csv"
        rows = [(c.alpha, c.mean_slope, c.slope_sd, c.mean_coverage, c.coverage_sd, c.runs, c.noburst)
                for c in result.for_gamma(gamma)]
        write_csv(path, header, rows)
        paths.append(path)
    path = directory / f"{stem}.csv"
    write_csv(path, ["gamma"] + header, [
        (c.gamma, c.alpha, c.mean_slope, c.slope_sd, c.mean_coverage, c.coverage_sd, c.runs, c.noburst)
        for c in result.cells
    ])
    paths.append(path)
    return paths


def write_curve(curve: CumulativeCurve, path) -> None:
    write_csv(path, ["x", "y"], zip(curve.x.tolist(), curve.y.tolist()))


def write_markers(markers: BurstMarkers, path) -> None:
    write_json(path, markers.to_dict())


def read_markers(path) -> BurstMarkers:
    with open(path, encoding="utf-8") as fh:
        return BurstMarkers.from_dict(json.load(fh))


def emit_plot_data(result, path) -> list[Path]:
    """Write ``result`` as plot-ready data at ``path`` (a directory for sweeps)."""
    if isinstance(result, SweepResult):
        os.makedirs(path, exist_ok=True)
        return write_sweep(result, path)
    if isinstance(result, FitResult):
        write_fit(result, path)
    elif isinstance(result, CumulativeCurve):
        write_curve(result, path)
    elif isinstance(result, BurstMarkers):
        write_markers(result, path)
    elif hasattr(result, "to_dict"):
        write_json(path, result.to_dict())
    else:
        raise TypeError(f"no plot-data writer for {type(result).__name__}")
    return [Path(path)]
