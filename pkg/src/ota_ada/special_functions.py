"""Real Lambert W branches and a bracketing root finder.

Both W branches are computed with Halley iterations from series or
asymptotic starting points, with a bisection fallback. The lower branch is
also available in a log-argument form, ``W_{-1}(-exp(-(1 + c)))``, which
never forms the (possibly underflowing) argument itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

EPS = 2.220446049250313e-16
INV_E = math.exp(-1.0)
# Inputs this far below -1/e are still treated as the branch point.
BRANCH_SLACK = 1e-15


class DomainError(ValueError):
    """Argument outside the domain of a function."""


class RootFindingError(ArithmeticError):
    """Base class for root finder failures."""


class NoSignChangeError(RootFindingError):
    def __init__(self, lo: float, hi: float, f_lo: float, f_hi: float):
        super().__init__(
            f"no sign change on [{lo!r}, {hi!r}]: f(lo)={f_lo!r}, f(hi)={f_hi!r}"
        )
        self.lo, self.hi = lo, hi


class ConvergenceError(RootFindingError):
    def __init__(self, lo: float, hi: float, iterations: int):
        super().__init__(
            f"no convergence after {iterations} iterations; best bracket [{lo!r}, {hi!r}]"
        )
        self.lo, self.hi = lo, hi


@dataclass(frozen=True)
class BracketedRoot:
    """Interval ``[lo, hi]`` known to contain a sign change.

    ``tolerance`` is an absolute width target; a relative term of a few ulps
    is always added on top of it.
    """

    lo: float
    hi: float
    tolerance: float = 0.0

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"bracket needs lo < hi, got [{self.lo!r}, {self.hi!r}]")
        if self.tolerance < 0:
            raise ValueError("tolerance must be non-negative")


def find_root(f: Callable[[float], float], bracket: BracketedRoot, maxiter: int = 200) -> float:
    """Brent's method (inverse quadratic interpolation guarded by bisection).

    Returns ``b`` with the sign change of ``f`` located inside an interval of
    width at most ``2 * (tolerance/2 + 2*eps*|b|)`` around it.

    Raises:
        NoSignChangeError: ``f(lo)`` and ``f(hi)`` have the same sign.
        ConvergenceError: ``maxiter`` exhausted; carries the best bracket.
    """
    a, b = float(bracket.lo), float(bracket.hi)
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa > 0) == (fb > 0):
        raise NoSignChangeError(a, b, fa, fb)

    c, fc = a, fa
    d = e = b - a
    for _ in range(maxiter):
        if (fb > 0) == (fc > 0):
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol = 2.0 * EPS * abs(b) + 0.5 * bracket.tolerance
        m = 0.5 * (c - b)
        if abs(m) <= tol or fb == 0.0:
            return b
        if abs(e) < tol or abs(fa) <= abs(fb):
            d = e = m
        else:
            s = fb / fa
            if a == c:
                p = 2.0 * m * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0:
                q = -q
            else:
                p = -p
            if 2.0 * p < min(3.0 * m * q - abs(tol * q), abs(e * q)):
                e = d
                d = p / q
            else:
                d = e = m
        a, fa = b, fb
        b += d if abs(d) > tol else math.copysign(tol, m)
        fb = f(b)
    raise ConvergenceError(min(b, c), max(b, c), maxiter)


def _t_minus_log1p(t: float) -> float:
    """``t - log(1 + t)`` without cancellation for small ``t``."""
    if abs(t) < 0.1:
        # alternating series sum_{k>=2} (-1)^k t^k / k; 25 terms reach 1e-25 relative
        total = 0.0
        power = t * t
        for k in range(2, 27):
            total += power / k if k % 2 == 0 else -power / k
            power *= t
        return total
    return t - math.log1p(t)


def lambert_wm1_offset(c: float) -> float:
    """Return ``t = -1 - W_{-1}(-exp(-(1 + c)))`` for ``c >= 0``.

    Equivalently the positive root of ``t - log(1 + t) = c``. Working with the
    offset from the branch point keeps full relative precision both for tiny
    ``c`` (where ``1 + W`` cancels) and for huge ``c`` (where the W argument
    underflows).
    """
    if not c >= 0 or math.isinf(c):
        raise DomainError(f"offset form needs finite c >= 0, got {c!r}")
    if c == 0.0:
        return 0.0

    if c < 1.5:
        p = math.sqrt(2.0 * c)
        t = p + p * p / 3.0 + p ** 3 / 36.0
    else:
        s = c + 1.0
        u = s + math.log(s)
        u = s + math.log(u)
        t = u - 1.0

    for _ in range(64):
        r = _t_minus_log1p(t) - c
        inv = 1.0 / (1.0 + t)
        d1 = t * inv
        d2 = inv * inv
        step = 2.0 * r * d1 / (2.0 * d1 * d1 - r * d2)
        t_new = t - step
        if t_new <= 0.0:
            t_new = 0.5 * t
        if abs(t_new - t) <= 4.0 * EPS * t_new:
            return t_new
        t = t_new

    hi = 2.0 * (c + 1.0) + 1.0
    return find_root(lambda x: _t_minus_log1p(x) - c, BracketedRoot(0.0, hi))


def lambert_w_minus1_exp(s: float) -> float:
    """``W_{-1}(-exp(-s))`` for ``s >= 1`` without evaluating ``exp(-s)``."""
    if not s >= 1.0 - BRANCH_SLACK:
        raise DomainError(f"need s >= 1, got {s!r}")
    return -1.0 - lambert_wm1_offset(max(s - 1.0, 0.0))


def lambert_w_minus1(x: float) -> float:
    """Lower real branch ``W_{-1}`` on ``[-1/e, 0)``.

    Values are <= -1. Arguments near zero are handled through ``-log(-x)``,
    so subnormal inputs are fine.
    """
    x = float(x)
    if math.isnan(x) or x >= 0.0 or x < -INV_E - BRANCH_SLACK:
        raise DomainError(f"W_-1 is defined on [-1/e, 0), got {x!r}")
    if x <= -INV_E:
        return -1.0
    return lambert_w_minus1_exp(-math.log(-x))


def lambert_w0(x: float) -> float:
    """Principal real branch ``W_0`` on ``[-1/e, inf)``; values are >= -1."""
    x = float(x)
    if math.isnan(x) or x < -INV_E - BRANCH_SLACK:
        raise DomainError(f"W_0 is defined on [-1/e, inf), got {x!r}")
    if x <= -INV_E:
        return -1.0
    if x == 0.0 or math.isinf(x):
        return x

    if x < -0.25:
        p = math.sqrt(max(2.0 * (math.e * x + 1.0), 0.0))
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p ** 3
    elif x < 3.0:
        w = math.log1p(x)
    else:
        l1 = math.log(x)
        l2 = math.log(l1)
        w = l1 - l2 + l2 / l1

    for _ in range(100):
        ew = math.exp(w)
        f = w * ew - x
        if f == 0.0:
            return w
        w1 = w + 1.0
        if w1 == 0.0:
            break
        step = f / (ew * w1 - (w + 2.0) * f / (2.0 * w1))
        w -= step
        if abs(step) <= 4.0 * EPS * abs(w):
            return w

    hi = max(1.0, math.log1p(x) + 1.0) if x > 0 else 0.0
    return find_root(lambda v: v * math.exp(v) - x, BracketedRoot(-1.0, hi))
