"""Reference configurations and the (error rate, punishment) sweep harness.

Three presets ship built in so every analysis runs without external data:

* ``three-class``: sizes {1, 2, 3} with a correlated size/estimate matrix
  and lambda = 0.5 (load 0.8725).
* ``four-class``: geometric sizes 0.4/0.8/1.6/3.2 with probabilities
  1/2, 1/4, 1/8, 1/8 and lambda = 0.8; estimates follow the uniform-error
  family parameterized by an error rate x.
* ``two-class-rare``: sizes {1, 1.1} with probabilities {0.99, 0.01},
  perfect estimates, lambda = 0.8 — a near-deterministic workload where
  BlindTrust needs punishment probabilities close to 1.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .incentives import DEFAULT_TOL_B, ic_indicator, ic_region
from .model import (Policy, SizeGrid, SizeEstimateMatrix, SystemConfig,
                    diagonal_matrix, uniform_error_matrix)
from .soap import fcfs_mean_response, overall_curve, scf_mean_response

MT = Policy.MEASURED_TRUST
BT = Policy.BLIND_TRUST


def three_class_example() -> SystemConfig:
    """3-class correlated-estimate workload at load 0.8725."""
    grid = SizeGrid([1.0, 2.0, 3.0])
    matrix = SizeEstimateMatrix([
        [0.425, 0.03, 0.01],
        [0.05, 0.255, 0.02],
        [0.025, 0.015, 0.17],
    ])
    return SystemConfig(lam=0.5, grid=grid, matrix=matrix)


def four_class_family() -> tuple[np.ndarray, SizeGrid, float]:
    """Size distribution, grid and arrival rate of the uniform-error family."""
    return np.array([0.5, 0.25, 0.125, 0.125]), SizeGrid([0.4, 0.8, 1.6, 3.2]), 0.8


def four_class_example(error_rate: float = 0.1) -> SystemConfig:
    probs, grid, lam = four_class_family()
    return SystemConfig(lam=lam, grid=grid,
                        matrix=uniform_error_matrix(probs, grid, error_rate))


def rare_long_job_example() -> SystemConfig:
    """Two sizes, 1% chance of the longer one, perfect estimates."""
    grid = SizeGrid([1.0, 1.1])
    return SystemConfig(lam=0.8, grid=grid,
                        matrix=diagonal_matrix([0.99, 0.01], grid))


PRESETS = {
    "three-class": three_class_example,
    "four-class": four_class_example,
    "two-class-rare": rare_long_job_example,
}


@dataclass(frozen=True)
class SweepRow:
    x: float
    b: float
    ic_mt: bool
    ic_bt: bool
    et_mt: float
    et_bt: float


@dataclass(frozen=True)
class CurveRow:
    x: float
    best_b_mt: float | None
    et_mt: float | None
    best_b_bt: float | None
    et_bt: float | None
    et_fcfs: float
    et_scf: float


def _grid(step: float, upper: float = 1.0) -> np.ndarray:
    count = int(round(upper / step))
    return np.round(np.linspace(0.0, upper, count + 1), 12)


def _sweep_column(args):
    size_probs, sizes, lam, x, bs = args
    grid = SizeGrid(sizes)
    config = SystemConfig(lam=lam, grid=grid,
                          matrix=uniform_error_matrix(size_probs, grid, x))
    ok_mt = ic_indicator(config, MT, bs)
    ok_bt = ic_indicator(config, BT, bs)
    et_mt = overall_curve(config, MT, bs)
    et_bt = overall_curve(config, BT, bs)
    return ok_mt, ok_bt, et_mt, et_bt


def sweep_region(size_probs, grid: SizeGrid, lam: float,
                 x_step: float = 0.005, b_step: float = 0.001,
                 x_max: float = 1.0, workers: int = 1) -> list[SweepRow]:
    """Incentive-compatibility indicators and mean responses on an (x, b) grid."""
    xs = _grid(x_step, x_max)
    bs = _grid(b_step)
    tasks = [(np.asarray(size_probs, float), np.asarray(grid.sizes), lam, float(x), bs)
             for x in xs]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            columns = list(pool.map(_sweep_column, tasks))
    else:
        columns = [_sweep_column(t) for t in tasks]
    rows = []
    for x, (ok_mt, ok_bt, et_mt, et_bt) in zip(xs, columns):
        for t, b in enumerate(bs):
            rows.append(SweepRow(float(x), float(b), bool(ok_mt[t]), bool(ok_bt[t]),
                                 float(et_mt[t]), float(et_bt[t])))
    return rows


def _refine_minimum(fn, lo: float, hi: float, tol: float = 1e-9) -> float:
    """Golden-section minimum of a smooth scalar function on [lo, hi]."""
    phi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def _best_b(config: SystemConfig, kind: Policy, b_step: float,
            tol_b: float) -> tuple[float, float] | None:
    region = ic_region(config, kind, grid_step=b_step, tol_b=tol_b)
    if region.is_empty:
        return None
    bs = _grid(b_step)
    candidates = []
    for iv in region.intervals:
        mask = (bs >= iv.lo - 1e-15) & (bs <= iv.hi + 1e-15)
        pts = bs[mask]
        if len(pts) == 0:
            pts = np.array([0.5 * (iv.lo + iv.hi)])
        et = overall_curve(config, kind, pts)
        t = int(np.argmin(et))           # first minimum: ties go to smallest b
        lo = max(iv.lo, float(pts[t]) - b_step)
        hi = min(iv.hi, float(pts[t]) + b_step)
        b_ref = _refine_minimum(lambda b: float(overall_curve(config, kind, [b])[0]), lo, hi)
        candidates.append((float(overall_curve(config, kind, [b_ref])[0]), b_ref))
    et, best = min(candidates)
    return best, et


def optimal_b_curve(size_probs, grid: SizeGrid, lam: float,
                    x_step: float = 0.005, b_step: float = 0.001,
                    x_max: float = 1.0, tol_b: float = DEFAULT_TOL_B) -> list[CurveRow]:
    """Per error rate: the IC-region punishment minimizing overall E[T].

    Blind baseline columns are x-independent since neither FCFS nor SCF
    reads estimates.
    """
    probs = np.asarray(size_probs, float)
    base_cfg = SystemConfig(lam=lam, grid=grid, matrix=diagonal_matrix(probs, grid))
    et_fcfs = fcfs_mean_response(base_cfg)
    et_scf, _ = scf_mean_response(base_cfg)
    rows = []
    for x in _grid(x_step, x_max):
        config = SystemConfig(lam=lam, grid=grid,
                              matrix=uniform_error_matrix(probs, grid, float(x)))
        best_mt = _best_b(config, MT, b_step, tol_b)
        best_bt = _best_b(config, BT, b_step, tol_b)
        rows.append(CurveRow(
            x=float(x),
            best_b_mt=None if best_mt is None else best_mt[0],
            et_mt=None if best_mt is None else best_mt[1],
            best_b_bt=None if best_bt is None else best_bt[0],
            et_bt=None if best_bt is None else best_bt[1],
            et_fcfs=et_fcfs,
            et_scf=et_scf,
        ))
    return rows


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    return f"{value:.6g}"


SWEEP_HEADER = "x,b,ic_mt,ic_bt,et_mt,et_bt"
CURVE_HEADER = "x,best_b_mt,et_mt,best_b_bt,et_bt,et_fcfs,et_scf"


def write_sweep_csv(rows, path) -> None:
    with open(path, "w") as fh:
        fh.write(SWEEP_HEADER + "\n")
        for r in rows:
            fh.write(",".join([_fmt(r.x), _fmt(r.b), _fmt(r.ic_mt), _fmt(r.ic_bt),
                               _fmt(r.et_mt), _fmt(r.et_bt)]) + "\n")


def write_curve_csv(rows, path) -> None:
    with open(path, "w") as fh:
        fh.write("# best_b ties are broken toward the smallest b\n")
        fh.write(CURVE_HEADER + "\n")
        for r in rows:
            fh.write(",".join([_fmt(r.x), _fmt(r.best_b_mt), _fmt(r.et_mt),
                               _fmt(r.best_b_bt), _fmt(r.et_bt),
                               _fmt(r.et_fcfs), _fmt(r.et_scf)]) + "\n")
