"""Lyapunov spectra from a pressure curve.

The entropy spectrum is the conjugate ``L_E(alpha) = inf_t (T(t) + t alpha)``
and the dimension spectrum is ``L_D(alpha) = L_E(alpha) / alpha``.  A
counting oracle on weighted full shifts gives an independent check: the
level sets of ``lambda_n`` are unions of frequency classes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import ConfigError, InvalidDepth, NumericalError, OutOfRange
from .symbolic import ShiftSystem
from .thermo import T_CLAMP, PressureCurve

ALPHA_EDGE = 1e-6
RANGE_TOL = 1e-12


@dataclass(frozen=True)
class LegendreValue:
    value: float
    t: float
    boundary: bool


def alpha_range(curve: PressureCurve) -> tuple[float, float]:
    """Endpoints of the range of ``-T'``."""
    return curve.alpha_range


def legendre_entropy(curve: PressureCurve, alpha: float) -> LegendreValue:
    """``L_E(alpha)`` and the minimising ``t``.

    Closed-form curves solve ``-T'(t) = alpha`` by bisection on the
    clamped domain; when the minimiser runs off the domain the value there
    is returned as the endpoint limit and flagged ``boundary``.  Sampled
    curves take the minimum over the samples, which is the infimum over
    their piecewise-linear (convex) interpolation.
    """
    a1, a2 = curve.alpha_range
    if alpha < a1 - RANGE_TOL or alpha > a2 + RANGE_TOL:
        raise OutOfRange(f"alpha={alpha} outside [{a1}, {a2}]")
    if curve.mode == "sampled":
        ts, vs = curve.samples
        vals = vs + ts * alpha
        i = int(np.argmin(vals))
        return LegendreValue(float(vals[i]), float(ts[i]), i in (0, len(ts) - 1))
    if a2 - a1 <= RANGE_TOL:  # linear curve: every t minimises
        return LegendreValue(curve(0.0), 0.0, False)
    lo, hi = -T_CLAMP, T_CLAMP
    if -curve.slope(lo) <= alpha:
        return LegendreValue(curve(lo) + lo * alpha, lo, True)
    if -curve.slope(hi) >= alpha:
        return LegendreValue(curve(hi) + hi * alpha, hi, True)
    # -T' decreases in t
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if -curve.slope(mid) > alpha:
            lo = mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    return LegendreValue(curve(t) + t * alpha, t, False)


def level_set_dimension(alpha: float, h: float) -> float:
    """``h / alpha``."""
    if not alpha > 0:
        raise OutOfRange(f"alpha must be positive, got {alpha}")
    if h < 0:
        raise ValueError(f"entropy must be >= 0, got {h}")
    return h / alpha


def dimension_spectrum(curve: PressureCurve, alpha: float) -> float:
    if not alpha > 0:
        raise OutOfRange(f"alpha must be positive, got {alpha}")
    return legendre_entropy(curve, alpha).value / alpha


@dataclass
class SpectrumRow:
    alpha: float
    L_E: float
    L_D: float
    t: float
    boundary: bool


@dataclass
class SpectrumTable:
    rows: list[SpectrumRow]
    alpha1: float
    alpha2: float
    provenance: str
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)


def spectrum_row(curve: PressureCurve, alpha: float) -> SpectrumRow:
    lv = legendre_entropy(curve, alpha)
    if not alpha > 0:
        raise OutOfRange(f"alpha must be positive, got {alpha}")
    L_D = lv.value / alpha
    # store L_E as L_D * alpha so the quotient identity holds bit for bit
    return SpectrumRow(float(alpha), L_D * alpha, L_D, lv.t, lv.boundary)


def spectrum_table(curve: PressureCurve, n_points: int = 101, include_endpoints: bool = False) -> SpectrumTable:
    """Spectrum rows on a uniform grid just inside ``[alpha_1, alpha_2]``.

    With ``include_endpoints`` the two endpoint rows are added, marked
    ``boundary``; for weighted full shifts their values are the limits.
    """
    if n_points < 2:
        raise ValueError("need at least two grid points")
    a1, a2 = curve.alpha_range
    if a1 <= 0:
        raise OutOfRange("dimension spectrum needs a positive exponent range")
    if a2 - a1 <= 2 * ALPHA_EDGE:
        grid = np.array([a1])
    else:
        grid = np.linspace(a1 + ALPHA_EDGE, a2 - ALPHA_EDGE, n_points)
    rows = [spectrum_row(curve, float(a)) for a in grid]
    if include_endpoints and a2 > a1:
        ends = []
        for a in (a1, a2):
            r = spectrum_row(curve, a)
            r.boundary = True
            ends.append(r)
        rows = [ends[0]] + rows + [ends[1]]
    for r in rows:
        if r.L_D * r.alpha != r.L_E:
            raise NumericalError(f"quotient identity broken at alpha={r.alpha}")
    return SpectrumTable(rows, a1, a2, curve.mode)


# ---------------------------------------------------------------------------
# counting oracle


def _weighted_full(sys: ShiftSystem) -> np.ndarray:
    if sys.transition is not None:
        raise ConfigError("the counting oracle needs a full shift")
    return np.asarray(sys.log_a, dtype=float)


def _compositions(n: int, k: int):
    """All ``k``-tuples of nonnegative ints summing to ``n``."""
    for bars in combinations(range(n + k - 1), k - 1):
        prev = -1
        out = []
        for b in bars:
            out.append(b - prev - 1)
            prev = b
        out.append(n + k - 2 - prev)
        yield tuple(out)


def _multinomial(n: int, counts) -> int:
    out, left = 1, n
    for c in counts:
        out *= math.comb(left, c)
        left -= c
    return out


def frequency_entropy_oracle(sys: ShiftSystem, alpha: float, n: int, tol_alpha: float | None = None) -> float:
    """``(1/n) log #{w : |lambda_n(w) - alpha| <= tol}`` by exact counting.

    ``tol`` defaults to half the gap between neighbouring frequency classes
    for two symbols.  Returns ``-inf`` for an empty class.
    """
    if n < 1:
        raise InvalidDepth(f"word length must be >= 1, got {n}")
    la = _weighted_full(sys)
    if tol_alpha is None:
        tol_alpha = (la.max() - la.min()) / (2 * n)
    total = 0
    slack = 1e-12 * max(1.0, abs(alpha))
    if len(la) == 2:
        for c1 in range(n + 1):
            lam = (c1 * la[0] + (n - c1) * la[1]) / n
            if abs(lam - alpha) <= tol_alpha + slack:
                total += math.comb(n, c1)
    else:
        for counts in _compositions(n, len(la)):
            lam = float(np.dot(counts, la)) / n
            if abs(lam - alpha) <= tol_alpha + slack:
                total += _multinomial(n, counts)
    if total == 0:
        return -math.inf
    return math.log(total) / n
