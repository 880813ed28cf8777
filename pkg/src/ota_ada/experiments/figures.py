"""Datasets behind the bound figures: one list of :class:`SweepRow` per figure."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .. import bounds
from ..bounds import AccuracySpec, Budget, SystemConfig
from ..special_functions import DomainError
from .config import SweepSpec

# the fixed noise-to-amplitude ratio of the federation sweeps
FIXED_RATIO_L = 0.5

# c grid of g_vs_c: (lo, hi, points), log-spaced
G_GRID = (0.1, 100.0, 500)
DEFAULT_GRIDS = {
    "k_vs_ratio": SweepSpec("sigma_over_At", 0.001, 0.02, 400),
    "kmax_vs_n": SweepSpec("n", 1e5, 1e7, 21, "log"),
    "k_vs_L": SweepSpec("L", 1, 500, 500),
    "k_vs_L_optimized": SweepSpec("L", 1, 500, 500),
}
DEFAULT_N = (100_000, 1_000_000, 10_000_000)
DEFAULT_N0 = (10_000, 100_000, 1_000_000)

FIGURE_AXIS = {
    "g_vs_c": "c",
    "k_vs_ratio": "sigma_over_At",
    "kmax_vs_n": "n",
    "k_vs_L": "L",
    "k_vs_L_optimized": "L",
}
FIGURES = tuple(FIGURE_AXIS)


@dataclass
class SweepRow:
    """One point of a sweep; ``columns`` holds every input and output."""

    axis: str
    axis_value: float
    columns: dict[str, Any] = field(default_factory=dict)

    def as_dict(self) -> dict[str, Any]:
        return {self.axis: self.axis_value, **self.columns}


def _budget_columns(b: Budget) -> dict[str, Any]:
    # k2 is left blank when it overflows; log10_k2 and the flag carry it
    return {
        "k": b.k,
        "k_floor": b.k_floor,
        "k1": b.k1,
        "k2": "" if b.k2_saturated else b.k2,
        "log10_k2": b.log_k2 / math.log(10.0),
        "k2_saturated": int(b.k2_saturated),
        "k1_in_range": int(b.k1_in_range),
        "limited_by": b.limited_by,
    }


def _axis_values(name: str, sweep: SweepSpec | None, integer: bool = False) -> np.ndarray:
    if sweep is not None and sweep.axis != FIGURE_AXIS[name]:
        raise ValueError(f"figure {name} sweeps {FIGURE_AXIS[name]}, config sweeps {sweep.axis}")
    values = (sweep or DEFAULT_GRIDS[name]).values()
    if integer:
        values = np.unique(np.rint(values).astype(np.int64))
        values = values[values >= 1]
    return values


def g_vs_c(acc: AccuracySpec | None = None, sweep: SweepSpec | None = None, **_) -> list[SweepRow]:
    if sweep is not None:
        raise ValueError("g_vs_c uses a fixed c grid and takes no sweep")
    cs = np.geomspace(*G_GRID)
    return [SweepRow("c", float(c), {"g": bounds.g(float(c))}) for c in cs]


def k_vs_ratio(acc: AccuracySpec, sweep: SweepSpec | None = None,
               n_values: Sequence[int] | None = None, **_) -> list[SweepRow]:
    rows = []
    for n in n_values or DEFAULT_N:
        for ratio in _axis_values("k_vs_ratio", sweep):
            b = bounds.k_budget(float(ratio), int(n), acc)
            rows.append(SweepRow("sigma_over_At", float(ratio), {
                "n": int(n), "alpha": acc.alpha, "beta": acc.beta, **_budget_columns(b)}))
    return rows


def kmax_vs_n(acc: AccuracySpec, sweep: SweepSpec | None = None, **_) -> list[SweepRow]:
    rows = []
    for n in _axis_values("kmax_vs_n", sweep, integer=True):
        n = int(n)
        try:
            ratio = bounds.s_opt(n, acc)
        except DomainError:
            rows.append(SweepRow("n", n, {"alpha": acc.alpha, "beta": acc.beta, "ratio_opt": "",
                                          "k_max": 0.0, "k_max_floor": 0, "snr_db_opt": "",
                                          "k1_in_range": 0}))
            continue
        b = bounds.k_budget(ratio, n, acc)
        snr = bounds.snr_db(SystemConfig(n0=n, sigma_ch=ratio, A_t=1.0))
        rows.append(SweepRow("n", n, {
            "alpha": acc.alpha, "beta": acc.beta, "ratio_opt": ratio, "k_max": b.k,
            "k_max_floor": b.k_floor, "snr_db_opt": snr, "k1_in_range": 1}))
    return rows


def k_vs_L(acc: AccuracySpec, sweep: SweepSpec | None = None,
           n0_values: Sequence[int] | None = None, ratio: float = FIXED_RATIO_L, **_) -> list[SweepRow]:
    rows = []
    for n0 in n0_values or DEFAULT_N0:
        for L in _axis_values("k_vs_L", sweep, integer=True):
            cfg = SystemConfig(n0=int(n0), L=int(L), sigma_ch=ratio, A_t=1.0)
            eq = bounds.to_equivalent(cfg)
            b = bounds.k_budget(eq.sigma_eq_normalized, eq.n_eq, acc)
            rows.append(SweepRow("L", int(L), {
                "n0": int(n0), "n_eq": eq.n_eq, "sigma_over_At": ratio,
                "ratio_eq": eq.sigma_eq_normalized, "alpha": acc.alpha, "beta": acc.beta,
                **_budget_columns(b)}))
    return rows


def k_vs_L_optimized(acc: AccuracySpec, sweep: SweepSpec | None = None,
                     n0_values: Sequence[int] | None = None, ratio: float = FIXED_RATIO_L,
                     **_) -> list[SweepRow]:
    """Budget with the amplitude re-tuned for every ``L``.

    ``sigma_ch`` is fixed at ``ratio`` (unit baseline amplitude); ``k_fixed``
    is the budget at that baseline amplitude, for comparison.
    """
    rows = []
    for n0 in n0_values or DEFAULT_N0:
        for L in _axis_values("k_vs_L_optimized", sweep, integer=True):
            base = SystemConfig(n0=int(n0), L=int(L), sigma_ch=ratio, A_t=1.0)
            eq = bounds.to_equivalent(base)
            fixed = bounds.k_budget(eq.sigma_eq_normalized, eq.n_eq, acc)
            cols = {"n0": int(n0), "n_eq": eq.n_eq, "sigma_ch": ratio,
                    "alpha": acc.alpha, "beta": acc.beta}
            try:
                a_opt = bounds.optimal_amplitude(base, acc)
            except DomainError:
                cols.update({"A_t_opt": "", "ratio_eq_opt": "", "k": fixed.k,
                             "k_floor": fixed.k_floor, "k_fixed": fixed.k, "optimized": 0})
                rows.append(SweepRow("L", int(L), cols))
                continue
            opt = bounds.to_equivalent(SystemConfig(n0=int(n0), L=int(L), sigma_ch=ratio, A_t=a_opt))
            b = bounds.k_budget(opt.sigma_eq_normalized, opt.n_eq, acc)
            cols.update({"A_t_opt": a_opt, "ratio_eq_opt": opt.sigma_eq_normalized, "k": b.k,
                         "k_floor": b.k_floor, "k_fixed": fixed.k, "optimized": 1})
            rows.append(SweepRow("L", int(L), cols))
    return rows


BUILDERS: dict[str, Callable[..., list[SweepRow]]] = {
    "g_vs_c": g_vs_c,
    "k_vs_ratio": k_vs_ratio,
    "kmax_vs_n": kmax_vs_n,
    "k_vs_L": k_vs_L,
    "k_vs_L_optimized": k_vs_L_optimized,
}


def figure_rows(name: str, acc: AccuracySpec, sweep: SweepSpec | None = None, **kwargs) -> list[SweepRow]:
    if name not in BUILDERS:
        raise KeyError(name)
    return BUILDERS[name](acc=acc, sweep=sweep, **kwargs)


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])
