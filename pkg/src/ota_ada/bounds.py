"""Accuracy / query-budget bounds for the Gaussian answering mechanism.

All noise levels here are on the normalized scale (answers in [0, 1]); a
physical channel with noise std ``sigma_ch`` and amplitude ``A_t`` enters as
``sigma_ch / A_t``. The central quantity is

    g(c) = min_{0 < lam < 1} (c - log(1 - lam)) / lam,    c = k / (n sigma^2),

which has a closed form through the lower Lambert branch. Query budgets
follow as ``k = min(k1, k2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .special_functions import (
    BracketedRoot,
    DomainError,
    RootFindingError,
    find_root,
    lambert_wm1_offset,
)

__all__ = [
    "AccuracySpec",
    "MechanismPoint",
    "SystemConfig",
    "EquivalentPoint",
    "LinearFit",
    "Budget",
    "OutOfRangeError",
    "BracketError",
    "TOLERANCES",
    "G_INFIMUM",
    "f_lambda",
    "lambda_star",
    "g",
    "g_inverse",
    "alpha_of",
    "k1",
    "k2",
    "log_k2",
    "k2_threshold_sigma",
    "k_budget",
    "khat1_fit",
    "s_opt",
    "to_equivalent",
    "optimal_amplitude",
    "snr_db",
    "amplitude_ratio",
    "min_dataset_size",
]


class OutOfRangeError(DomainError):
    """Requested value lies outside the attainable range of g."""


class BracketError(RootFindingError):
    def __init__(self, message: str, lo: float, hi: float):
        super().__init__(f"{message} (searched [{lo!r}, {hi!r}])")
        self.lo, self.hi = lo, hi


@dataclass(frozen=True)
class Tolerances:
    oracle_rel: float = 1e-5
    root_rel: float = 1e-9
    stationarity_abs: float = 1e-8
    # lower end of the c search range used by g_inverse
    c_floor: float = 1e-12


TOLERANCES = Tolerances()

# g(c) -> 1 as c -> 0+ and g is strictly increasing, so 1 is the infimum
# (approached, never attained).
G_INFIMUM = 1.0

# exp() overflows past this exponent
_MAX_EXP = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class AccuracySpec:
    alpha: float = 0.1
    beta: float = 0.05

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise DomainError(f"alpha must lie in (0, 1], got {self.alpha!r}")
        if not 0.0 < self.beta < 1.0:
            raise DomainError(f"beta must lie in (0, 1), got {self.beta!r}")


@dataclass(frozen=True)
class MechanismPoint:
    n: int
    sigma: float
    k: float

    def __post_init__(self):
        if not self.n >= 1:
            raise DomainError(f"n must be >= 1, got {self.n!r}")
        if not self.sigma > 0:
            raise DomainError(f"sigma must be > 0, got {self.sigma!r}")
        if not self.k > 0:
            raise DomainError(f"k must be > 0, got {self.k!r}")

    @property
    def c(self) -> float:
        return self.k / (self.n * self.sigma ** 2)


@dataclass(frozen=True)
class SystemConfig:
    """Physical parameters: ``L`` edge points with ``n0`` samples each.

    ``sigma_ch == 0`` is accepted as a noiseless channel for simulation; the
    bound functions reject it.
    """

    n0: int
    L: int = 1
    sigma_ch: float = 1.0
    A_t: float = 1.0

    def __post_init__(self):
        if not self.n0 >= 1:
            raise DomainError(f"n0 must be >= 1, got {self.n0!r}")
        if not self.L >= 1:
            raise DomainError(f"L must be >= 1, got {self.L!r}")
        if not self.sigma_ch >= 0 or math.isinf(self.sigma_ch):
            raise DomainError(f"sigma_ch must be finite and >= 0, got {self.sigma_ch!r}")
        if not self.A_t > 0 or math.isinf(self.A_t):
            raise DomainError(f"A_t must be finite and > 0, got {self.A_t!r}")


@dataclass(frozen=True)
class EquivalentPoint:
    """Point-to-point view of an ``L``-EP federation."""

    n_eq: int
    sigma_eq: float  # sigma_ch / L, physical scale
    sigma_eq_normalized: float  # sigma_ch / (L * A_t)


@dataclass(frozen=True)
class LinearFit:
    w: float
    b: float
    fit_range_c: tuple[float, float]
    max_rel_residual: float
    slope: float
    intercept: float

    def khat1(self, sigma: float, n: int, acc: AccuracySpec) -> float:
        """Approximate k1 as ``w * n^2 sigma^2 alpha^2 beta / 2 + b * n sigma^2``."""
        return self.w * n * n * sigma ** 2 * acc.alpha ** 2 * acc.beta / 2.0 + self.b * n * sigma ** 2


@dataclass(frozen=True)
class Budget:
    """Result of :func:`k_budget`.

    ``k1`` is 0 when ``n alpha^2 beta / 2`` does not exceed the infimum of g,
    in which case ``reason`` says so. ``k2`` is ``inf`` when its exponent
    overflows; ``k2_saturated`` flags that and ``log_k2`` stays finite.
    """

    k: float
    k1: float
    k2: float
    log_k2: float
    k1_in_range: bool
    k2_saturated: bool
    reason: str = ""

    @property
    def limited_by(self) -> str:
        return "k1" if self.k1 <= self.k2 else "k2"

    @property
    def regime(self) -> str:
        # k1 binds when noise is too small to stop leakage
        return "over-leakage" if self.limited_by == "k1" else "under-leakage"

    @property
    def k_floor(self) -> int:
        return int(math.floor(self.k))

    def __float__(self) -> float:
        return float(self.k)


def _check_c(c: float) -> float:
    c = float(c)
    if not c > 0 or math.isinf(c):
        raise DomainError(f"c = k/(n sigma^2) must be finite and > 0, got {c!r}")
    return c


def f_lambda(lam: float, c: float) -> float:
    """``(c - log(1 - lam)) / lam`` on ``0 < lam < 1``."""
    if not 0.0 < lam < 1.0:
        raise DomainError(f"lambda must lie in (0, 1), got {lam!r}")
    if not c >= 0:
        raise DomainError(f"c must be >= 0, got {c!r}")
    return (c - math.log1p(-lam)) / lam


def lambda_star(c: float) -> float:
    """Minimizer of :func:`f_lambda`: ``1 + 1/W_{-1}(-exp(-(c + 1)))``.

    Evaluated as ``t / (1 + t)`` with ``t = -1 - W_{-1}(...)``, which is the
    same expression without the cancellation near ``c -> 0``.
    """
    t = lambert_wm1_offset(_check_c(c))
    return t / (1.0 + t)


def g(c: float) -> float:
    """Minimum of ``f_lambda(., c)`` in closed form.

    With ``W = W_{-1}(-exp(-(c + 1)))`` the value is
    ``W (c + log(-W)) / (1 + W)``; substituting ``W = -1 - t`` gives
    ``(1 + t)(c + log1p(t)) / t``, grouped so huge ``c`` cannot overflow.
    """
    c = _check_c(c)
    t = lambert_wm1_offset(c)
    return (c + math.log1p(t)) * (1.0 + 1.0 / t)


@lru_cache(maxsize=4096)
def g_inverse(y: float) -> float:
    """Solve ``g(c) = y`` for ``c > 0``.

    g is strictly increasing from its infimum 1 (at ``c -> 0+``), so the root
    is bracketed on ``log c`` between ``log(1e-12)`` and an upper end doubled
    until ``g`` exceeds ``y``.

    Raises:
        OutOfRangeError: ``y`` is not above ``g(1e-12)``.
    """
    y = float(y)
    lo = TOLERANCES.c_floor
    if not y > g(lo) or math.isinf(y):
        raise OutOfRangeError(
            f"g^-1({y!r}) undefined: g(c) > {g(lo)!r} for every c >= {lo!r} "
            f"(infimum of g is {G_INFIMUM})"
        )
    hi = max(1.0, y)
    while g(hi) < y:
        hi *= 2.0
    log_c = find_root(
        lambda s: g(math.exp(s)) - y,
        BracketedRoot(math.log(lo), math.log(hi), 1e-15),
    )
    return math.exp(log_c)


def alpha_of(point: MechanismPoint, beta: float) -> float:
    """Accuracy ``alpha`` achieved for ``k`` queries at ``(n, sigma)``.

    ``max(sqrt(2 g(c) / (n beta)), sqrt(8 sigma^2 log(4k/beta)))``. The log
    term is clamped at 0 when ``4k < beta``.
    """
    if not 0.0 < beta < 1.0:
        raise DomainError(f"beta must lie in (0, 1), got {beta!r}")
    leak = math.sqrt(2.0 / (point.n * beta) * g(point.c))
    utility = math.sqrt(8.0 * point.sigma ** 2 * max(math.log(4.0 * point.k / beta), 0.0))
    return max(leak, utility)


def _check_sigma(sigma: float) -> float:
    sigma = float(sigma)
    if not sigma > 0 or math.isinf(sigma):
        raise DomainError(f"sigma must be finite and > 0, got {sigma!r}")
    return sigma


def k1(sigma: float, n: int, acc: AccuracySpec) -> float:
    """Leakage-limited budget ``n sigma^2 g^-1(n alpha^2 beta / 2)``."""
    sigma = _check_sigma(sigma)
    return n * sigma ** 2 * g_inverse(n * acc.alpha ** 2 * acc.beta / 2.0)


def log_k2(sigma: float, acc: AccuracySpec) -> float:
    sigma = _check_sigma(sigma)
    return math.log(acc.beta / 4.0) + acc.alpha ** 2 / (8.0 * sigma ** 2)


def k2(sigma: float, acc: AccuracySpec) -> float:
    """Noise-limited budget ``(beta/4) exp(alpha^2 / (8 sigma^2))``.

    Returns ``inf`` once the value exceeds the float range; use
    :func:`log_k2` or :func:`k_budget` for a flagged, finite report.
    """
    lk = log_k2(sigma, acc)
    return math.inf if lk > _MAX_EXP else math.exp(lk)


def k2_threshold_sigma(acc: AccuracySpec) -> float:
    """The sigma at which ``k2 == 1``: ``alpha / sqrt(8 log(4/beta))``."""
    return acc.alpha / math.sqrt(8.0 * math.log(4.0 / acc.beta))


def min_dataset_size(acc: AccuracySpec) -> float:
    """Dataset size below which k1 does not exist (``n alpha^2 beta / 2 <= 1``)."""
    return 2.0 * G_INFIMUM / (acc.alpha ** 2 * acc.beta)


def k_budget(sigma: float, n: int, acc: AccuracySpec) -> Budget:
    """Number of ``(alpha, beta)``-accurately answerable queries, ``min(k1, k2)``."""
    sigma = _check_sigma(sigma)
    lk2 = log_k2(sigma, acc)
    saturated = lk2 > _MAX_EXP
    kk2 = math.inf if saturated else math.exp(lk2)
    try:
        kk1 = k1(sigma, n, acc)
    except OutOfRangeError:
        return Budget(
            k=0.0, k1=0.0, k2=kk2, log_k2=lk2, k1_in_range=False, k2_saturated=saturated,
            reason=f"n={n} too small: n*alpha^2*beta/2 must exceed {G_INFIMUM}",
        )
    return Budget(k=min(kk1, kk2), k1=kk1, k2=kk2, log_k2=lk2, k1_in_range=True,
                  k2_saturated=saturated)


def khat1_fit(c_range: tuple[float, float] = (10.0, 1e4), samples: int = 1000) -> LinearFit:
    """Fit ``g(c) ~ slope * c + intercept`` over the near-linear regime.

    Samples are log-spaced and residuals weighted by ``1/g`` so the fit
    minimizes relative error across decades. Returns the constants of
    ``khat1 = w n^2 sigma^2 alpha^2 beta / 2 + b n sigma^2`` with
    ``w = 1/slope`` and ``b = -intercept/slope``.
    """
    lo, hi = float(c_range[0]), float(c_range[1])
    if not (lo >= 10.0 and hi > lo and samples >= 2):
        raise ValueError(f"degenerate fit range {c_range!r} / samples={samples}")
    cs = np.geomspace(lo, hi, samples)
    gs = np.array([g(c) for c in cs])
    slope, intercept = np.polyfit(cs, gs, 1, w=1.0 / gs)
    resid = np.max(np.abs(slope * cs + intercept - gs) / gs)
    return LinearFit(
        w=float(1.0 / slope),
        b=float(-intercept / slope),
        fit_range_c=(lo, hi),
        max_rel_residual=float(resid),
        slope=float(slope),
        intercept=float(intercept),
    )


def s_opt(n: int, acc: AccuracySpec) -> float:
    """Normalized noise level at which ``k1 == k2``, maximizing the budget.

    k1 grows as sigma^2 and k2 falls, so ``log k1 - log k2`` is strictly
    increasing in sigma; its root is found on ``log sigma``.

    Raises:
        OutOfRangeError: k1 does not exist for this ``n``.
        BracketError: no sign change within the expanded search interval.
    """
    scale = n * g_inverse(n * acc.alpha ** 2 * acc.beta / 2.0)
    log_ratio = math.log(scale) - math.log(acc.beta / 4.0)

    def gap(log_sigma: float) -> float:
        return log_ratio + 2.0 * log_sigma - acc.alpha ** 2 / (8.0 * math.exp(2.0 * log_sigma))

    lo, hi = math.log(acc.alpha * 1e-3), math.log(acc.alpha)
    for _ in range(60):
        if gap(lo) < 0 < gap(hi):
            break
        if gap(lo) >= 0:
            lo -= math.log(10.0)
        if gap(hi) <= 0:
            hi += math.log(10.0)
    else:
        raise BracketError("k1 - k2 crossing not bracketed", math.exp(lo), math.exp(hi))
    return math.exp(find_root(gap, BracketedRoot(lo, hi, 1e-14)))


def to_equivalent(cfg: SystemConfig) -> EquivalentPoint:
    """Pool ``L`` EPs into one: ``n_eq = L n0`` and ``sigma_eq = sigma_ch / L``."""
    return EquivalentPoint(
        n_eq=cfg.L * cfg.n0,
        sigma_eq=cfg.sigma_ch / cfg.L,
        sigma_eq_normalized=cfg.sigma_ch / (cfg.L * cfg.A_t),
    )


def optimal_amplitude(cfg: SystemConfig, acc: AccuracySpec) -> float:
    """Amplitude ``sigma_ch / (L s_opt(L n0))`` placing the federation at s_opt."""
    if not cfg.sigma_ch > 0:
        raise DomainError("optimal amplitude needs sigma_ch > 0")
    return cfg.sigma_ch / (cfg.L * s_opt(cfg.L * cfg.n0, acc))


def amplitude_ratio(cfg: SystemConfig) -> float:
    return cfg.A_t / cfg.sigma_ch


def snr_db(cfg: SystemConfig) -> float:
    """``10 log10(A_t^2 / (2 sigma_ch^2))``.

    Reconstructed convention: it maps amplitude ratios 58.8, 100 and 125 to
    32.4, 37.0 and 38.9 dB.
    """
    return 10.0 * math.log10(cfg.A_t ** 2 / (2.0 * cfg.sigma_ch ** 2))
