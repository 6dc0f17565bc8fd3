"""Parameter grids: phase diagram, line cuts and steady-state surfaces.

Each cell enumerates the eight fixed points and classifies the existing
ones. Spectra for a whole block of cells are computed in one batched LAPACK
call; the verdict rules are the same :func:`classify_spectrum` used for
single points (pass ``backend="qr"`` to use the package's own QR instead).
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import ModelParams
from .errors import ParameterError
from .stability import Verdict, classify_spectrum, jacobian
from .steadystate import (LABEL_ORDER, PhaseLabel, all_fixed_points, critical_couplings,
                          steady_observables)

QUANTITIES = ("Sx", "Sz", "dSx", "E0", "nphot")

AXIS_NAMES = {
    "n2_over_n1": "n2_over_n1",
    "n2_ratio": "n2_over_n1",
    "lambda": "lam",
    "lambda_over_kappa": "lam",
    "lam": "lam",
    "omega_c": "omega_c",
    "omega_a": "omega_a",
    "kappa": "kappa",
}


@dataclass(frozen=True)
class Axis:
    name: str
    min: float
    max: float
    count: int

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ParameterError(f"unknown axis {self.name!r}; choose from {sorted(AXIS_NAMES)}")
        if self.count < 2:
            raise ParameterError(f"axis {self.name}: count must be >= 2")
        if not self.min < self.max:
            raise ParameterError(f"axis {self.name}: min must be < max")

    def values(self, centers: bool = False) -> np.ndarray:
        if centers:
            step = (self.max - self.min) / self.count
            return self.min + step * (np.arange(self.count) + 0.5)
        return np.linspace(self.min, self.max, self.count)


@dataclass(frozen=True)
class GridSpec:
    """Two-axis grid over a base parameter set.

    With ``centers=True`` the coordinates are the centres of ``count`` equal
    cells instead of ``count`` nodes including both ends.
    """

    axis1: Axis
    axis2: Axis
    base: ModelParams = field(default_factory=ModelParams)
    centers: bool = False

    def coordinates(self):
        return self.axis1.values(self.centers), self.axis2.values(self.centers)

    def params_at(self, x1: float, x2: float) -> ModelParams:
        changes = {}
        for axis, value in ((self.axis1, x1), (self.axis2, x2)):
            key = AXIS_NAMES[axis.name]
            if key == "n2_over_n1":
                changes["n2"] = float(value) * self.base.n1
            else:
                changes[key] = float(value)
        return self.base.replace(**changes)

    def to_dict(self) -> dict:
        return {
            "axis1": vars(self.axis1).copy(), "axis2": vars(self.axis2).copy(),
            "base": vars(self.base).copy(), "centers": self.centers,
        }


@dataclass(frozen=True)
class LabelResult:
    exists: bool
    verdict: str | None  # Verdict value, None when absent
    observables: dict

    @property
    def stable(self) -> bool:
        return self.verdict == Verdict.STABLE.value


@dataclass(frozen=True)
class PhaseCell:
    x1: float
    x2: float
    n_fixed_points: int
    stable_labels: frozenset
    labels: dict  # PhaseLabel -> LabelResult


def _cells_for(points, backend: str) -> list[PhaseCell]:
    """Evaluate ``[(x1, x2, params), ...]``; order is preserved."""
    records = [all_fixed_points(p) for _, _, p in points]
    # one Jacobian per existing fixed point, parity partners share theirs
    jobs = []
    for ci, (recs, (_, _, p)) in enumerate(zip(records, points)):
        for rec in recs:
            if rec.exists and not (rec.label.is_superradiant and rec.label.value[0] == "-"):
                jobs.append((ci, rec.label, jacobian(rec.state, p)))
    if backend == "lapack" and jobs:
        spectra = np.linalg.eigvals(np.stack([j[2] for j in jobs]))
    else:
        spectra = [None] * len(jobs)
    verdicts: dict[tuple[int, PhaseLabel], str] = {}
    for (ci, label, J), ev in zip(jobs, spectra):
        rep = classify_spectrum(J, spectrum=ev)
        verdicts[(ci, label)] = rep.verdict.value
        if label.is_superradiant:
            verdicts[(ci, label.parity_partner)] = rep.verdict.value

    cells = []
    for ci, (recs, (x1, x2, _)) in enumerate(zip(records, points)):
        labels = {}
        for rec in recs:
            verdict = verdicts.get((ci, rec.label)) if rec.exists else None
            labels[rec.label] = LabelResult(rec.exists, verdict, steady_observables(rec))
        stable = frozenset(lab for lab, res in labels.items() if res.stable)
        n = sum(res.exists for res in labels.values())
        cells.append(PhaseCell(float(x1), float(x2), n, stable, labels))
    return cells


def _row_task(args):
    grid, x1, backend = args
    _, xs2 = grid.coordinates()
    return _cells_for([(x1, x2, grid.params_at(x1, x2)) for x2 in xs2], backend)


def phase_diagram(grid: GridSpec, jobs: int = 1, backend: str = "lapack") -> list[PhaseCell]:
    """All cells in row-major order (axis1 outer, axis2 inner)."""
    if backend not in ("lapack", "qr"):
        raise ParameterError("backend must be 'lapack' or 'qr'")
    xs1, xs2 = grid.coordinates()
    if jobs <= 1:
        pts = [(x1, x2, grid.params_at(x1, x2)) for x1 in xs1 for x2 in xs2]
        return _cells_for(pts, backend)
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        rows = pool.map(_row_task, [(grid, x1, backend) for x1 in xs1])
        return [cell for row in rows for cell in row]


def cell_matrix(cells, grid: GridSpec, fn) -> np.ndarray:
    n1, n2 = grid.axis1.count, grid.axis2.count
    return np.array([fn(c) for c in cells], dtype=float).reshape(n1, n2)


def surface(quantity: str, label: PhaseLabel, grid: GridSpec, cells=None) -> np.ndarray:
    """Matrix [axis1, axis2] of one steady-state quantity; NaN where absent."""
    if quantity not in QUANTITIES:
        raise ParameterError(f"quantity must be one of {QUANTITIES}")
    label = PhaseLabel(label)
    if cells is None:
        xs1, xs2 = grid.coordinates()
        out = np.empty((xs1.size, xs2.size))
        for i, x1 in enumerate(xs1):
            for k, x2 in enumerate(xs2):
                rec = next(r for r in all_fixed_points(grid.params_at(x1, x2)) if r.label is label)
                out[i, k] = steady_observables(rec)[quantity]
        return out
    return cell_matrix(cells, grid, lambda c: c.labels[label].observables[quantity])


def region_boundaries(cells, grid: GridSpec) -> list[dict]:
    """Axis-2 positions where the fixed-point count changes, per axis-1 row."""
    counts = cell_matrix(cells, grid, lambda c: c.n_fixed_points)
    xs1, xs2 = grid.coordinates()
    out = []
    for i, x1 in enumerate(xs1):
        row = counts[i]
        for k in np.flatnonzero(row[1:] != row[:-1]):
            out.append({grid.axis1.name: float(x1), "from": int(row[k]), "to": int(row[k + 1]),
                        grid.axis2.name: 0.5 * float(xs2[k] + xs2[k + 1])})
    return out


LINE_CUT_COLUMNS = ("lambda", "label", "exists", "verdict", "dashed") + QUANTITIES


def line_cut(params: ModelParams, lambda_grid) -> list[dict]:
    """Per-lambda observables of all eight labels; ``dashed`` marks non-stable branches."""
    lams = [float(x) for x in lambda_grid]
    if any(b <= a for a, b in zip(lams, lams[1:])):
        raise ParameterError("lambda grid must be strictly ascending")
    pts = [(lam, 0.0, params.replace(lam=lam)) for lam in lams]
    rows = []
    for lam, cell in zip(lams, _cells_for(pts, "lapack")):
        for label in LABEL_ORDER:
            res = cell.labels[label]
            row = {"lambda": lam, "label": label.value, "exists": res.exists,
                   "verdict": res.verdict or "absent",
                   "dashed": res.exists and not res.stable}
            row.update(res.observables)
            rows.append(row)
    return rows


# output

def _fmt(v) -> str:
    if v is None:
        return "nan"
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def metadata(grid_or_params, reproducible: bool, version: str) -> dict:
    meta = {"code_version": version}
    if isinstance(grid_or_params, GridSpec):
        meta["grid"] = grid_or_params.to_dict()
    else:
        meta["params"] = vars(grid_or_params).copy()
    if not reproducible:
        meta["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    return meta


def _header(meta: dict) -> str:
    return "".join(f"# {k}: {json.dumps(v, sort_keys=True)}\n" for k, v in meta.items())


def write_phase_csv(cells, grid: GridSpec, path, meta: dict) -> None:
    cols = [grid.axis1.name, grid.axis2.name, "n_fixed_points", "label", "exists",
            "stable", "verdict", *QUANTITIES]
    with open(path, "w") as fh:
        fh.write(_header(meta))
        fh.write(",".join(cols) + "\n")
        for c in cells:
            for label in LABEL_ORDER:
                res = c.labels[label]
                vals = [c.x1, c.x2, c.n_fixed_points, label.value, res.exists, res.stable,
                        res.verdict or "absent", *(res.observables[q] for q in QUANTITIES)]
                fh.write(",".join(_fmt(v) for v in vals) + "\n")


def write_matrix(path, xs1, xs2, mat, meta: dict | None = None) -> None:
    """gnuplot ``matrix nonuniform``: rows follow axis 2, columns axis 1."""
    with open(path, "w") as fh:
        if meta:
            fh.write(_header(meta))
        fh.write(" ".join([str(len(xs1))] + [_fmt(float(x)) for x in xs1]) + "\n")
        for k, y in enumerate(xs2):
            fh.write(" ".join([_fmt(float(y))] + [_fmt(float(mat[i, k]))
                                                   for i in range(len(xs1))]) + "\n")


def write_line_cut_csv(rows, path, meta: dict) -> None:
    with open(path, "w") as fh:
        fh.write(_header(meta))
        fh.write(",".join(LINE_CUT_COLUMNS) + "\n")
        for r in rows:
            fh.write(",".join(_fmt(r[c]) for c in LINE_CUT_COLUMNS) + "\n")


def summary(cells, grid: GridSpec) -> dict:
    """JSON-ready overview: count histogram, stable sets and region boundaries."""
    hist: dict[str, int] = {}
    sets: dict[str, int] = {}
    for c in cells:
        hist[str(c.n_fixed_points)] = hist.get(str(c.n_fixed_points), 0) + 1
        key = ",".join(sorted(lab.value for lab in c.stable_labels))
        sets[key] = sets.get(key, 0) + 1
    out = {"cells": len(cells), "fixed_point_counts": hist, "stable_sets": sets,
           "boundaries": region_boundaries(cells, grid)}
    if {AXIS_NAMES[grid.axis1.name], AXIS_NAMES[grid.axis2.name]} == {"n2_over_n1", "lam"}:
        ratio_axis = grid.axis1 if AXIS_NAMES[grid.axis1.name] == "n2_over_n1" else grid.axis2
        curves = []
        for r in ratio_axis.values(grid.centers):
            xfo, xfi = critical_couplings(grid.base.replace(n2=float(r) * grid.base.n1))
            curves.append({"n2_over_n1": float(r), "lambda_c_xFo": None if math.isinf(xfo) else xfo,
                           "lambda_c_xFi": xfi})
        out["critical_curves"] = curves
    return out


__all__ = [
    "Axis", "GridSpec", "PhaseCell", "LabelResult", "phase_diagram", "surface", "line_cut",
    "region_boundaries", "summary", "write_phase_csv", "write_matrix", "write_line_cut_csv",
    "metadata", "QUANTITIES", "LINE_CUT_COLUMNS",
]
