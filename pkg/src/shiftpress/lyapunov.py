"""Birkhoff sums of ``log a``, tempered-contraction certificates and the
ball-inclusion verifier.

Orbit weights are the sequence ``n -> log a(f^n x)``.  Since ``log a``
depends only on the first symbol, on an eventually periodic point they are
the per-symbol values read off the symbol sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import InvalidDepth, OutOfRange
from .symbolic import (
    Geometric,
    SequencePoint,
    ShiftSystem,
    Table,
    WeightedProduct,
    ball_depth_of,
    bowen_ball_to_cylinder,
)

Orbit = Union[SequencePoint, Sequence[float], np.ndarray]


def orbit_log_weights(sys: ShiftSystem | None, x: Orbit, n: int) -> np.ndarray:
    """First ``n`` values of ``log a`` along the orbit of ``x``.

    ``x`` may also be a raw array of weights, in which case ``sys`` is
    ignored and the array must be long enough.
    """
    if isinstance(x, SequencePoint):
        la = np.asarray(sys.log_a)
        return la[np.asarray(x.prefix(n), dtype=int) - 1] if n else np.zeros(0)
    w = np.asarray(x, dtype=float)
    if w.ndim != 1 or len(w) < n:
        raise InvalidDepth(f"need {n} orbit weights, got {w.size}")
    if not np.isfinite(w[:n]).all():
        raise ValueError("orbit weights must be finite")
    return w[:n]


def birkhoff(sys: ShiftSystem | None, x: Orbit, n: int) -> float:
    """``lambda_n(x) = S_n log a(x) / n``."""
    if n < 1:
        raise InvalidDepth(f"Birkhoff average needs n >= 1, got {n}")
    return float(math.fsum(orbit_log_weights(sys, x, n)) / n)


def exact_exponent(sys: ShiftSystem, x: SequencePoint) -> float:
    """Lyapunov exponent of an eventually periodic point (period average)."""
    la = sys.log_a
    return math.fsum(la[s - 1] for s in x.period) / len(x.period)


@dataclass(frozen=True)
class ExponentBounds:
    lower: float
    upper: float
    exact: float | None


def exponent_bounds(sys: ShiftSystem | None, x: Orbit, n_min: int, n_max: int) -> ExponentBounds:
    """Extremes of ``lambda_n`` for ``n_min <= n <= n_max``."""
    if not 1 <= n_min <= n_max:
        raise InvalidDepth(f"need 1 <= n_min <= n_max, got {n_min}, {n_max}")
    S = np.cumsum(orbit_log_weights(sys, x, n_max))
    lam = S[n_min - 1:] / np.arange(n_min, n_max + 1)
    exact = exact_exponent(sys, x) if isinstance(x, SequencePoint) else None
    return ExponentBounds(float(lam.min()), float(lam.max()), exact)


# ---------------------------------------------------------------------------
# tempered contraction


@dataclass(frozen=True)
class TemperedCertificate:
    """``I_D = min_{0 <= k <= n <= D} S_{n-k} log a(f^k x) + n eps``."""

    eps: float
    depth: int
    infimum: float
    eta: float
    stabilized: bool
    argmin: tuple[int, int]


def _tempered_scan(S: np.ndarray, eps: float) -> tuple[np.ndarray, np.ndarray]:
    # S has S_0 = 0 first; best over k for each n is S_n - max_{k<=n} S_k
    run_max = np.maximum.accumulate(S)
    vals = S - run_max + eps * np.arange(len(S))
    return vals, np.minimum.accumulate(vals)


def tempered_certificate(sys: ShiftSystem | None, x: Orbit, eps: float, D: int) -> TemperedCertificate:
    """Finite-horizon tempered-contraction certificate.

    ``eps = 0`` gives the bounded-contraction certificate.  Since ``n = 0``
    is included, ``I_D <= 0`` and ``eta = exp(I_D) <= 1``, with equality
    whenever no contraction has been seen.
    """
    if eps < 0:
        raise ValueError(f"slack eps must be >= 0, got {eps}")
    if D < 1:
        raise InvalidDepth(f"certificate depth must be >= 1, got {D}")
    S = np.concatenate([[0.0], np.cumsum(orbit_log_weights(sys, x, D))])
    vals, best = _tempered_scan(S, eps)
    n = int(np.argmin(vals))
    k = int(np.argmax(S[: n + 1]))
    I_D = float(best[D])
    return TemperedCertificate(eps, D, I_D, math.exp(I_D), bool(best[D // 2] == I_D), (n, k))


# ---------------------------------------------------------------------------
# level sets


@dataclass(frozen=True)
class Interval:
    """Real interval with open or closed ends; ``inf`` ends are always open."""

    lo: float
    hi: float
    lo_closed: bool = False
    hi_closed: bool = False

    def __post_init__(self):
        if self.lo > self.hi or (self.lo == self.hi and not (self.lo_closed and self.hi_closed)):
            raise ValueError(f"empty interval {self}")

    def __contains__(self, v: float) -> bool:
        above = v > self.lo or (self.lo_closed and v == self.lo)
        below = v < self.hi or (self.hi_closed and v == self.hi)
        return above and below

    def __str__(self):
        return f"{'[' if self.lo_closed else '('}{self.lo}, {self.hi}{']' if self.hi_closed else ')'}"


def classify_level_set(sys: ShiftSystem | None, x: Orbit, E: Interval, n_window: tuple[int, int] = (50, 200)) -> str:
    """Is ``[lower exponent, upper exponent]`` inside ``E``?

    Exact for eventually periodic points.  Otherwise the window extremes of
    ``lambda_n`` are compared with ``E``; ``'undecided'`` when they
    straddle its boundary.
    """
    if isinstance(x, SequencePoint):
        return "in" if exact_exponent(sys, x) in E else "out"
    b = exponent_bounds(sys, x, *n_window)
    lo_in, hi_in = b.lower in E, b.upper in E
    if lo_in and hi_in:
        return "in"
    if b.upper < E.lo or b.lower > E.hi:
        return "out"
    return "undecided"


# ---------------------------------------------------------------------------
# ball inclusions


def distortion_radius(sys: ShiftSystem, eps: float) -> float | None:
    """A radius below which ``psi`` ratios are within ``e^eps`` of the
    conformal factor.

    Product metrics without the harmonic factor are exactly conformal at
    every depth, so the radius is 1.  With the harmonic factor the ratio is
    ``theta * n / (n-1)``, which is close enough once balls are deeper than
    ``n_eps``.  Tabulated metrics have no known bound (``None``).
    """
    psi = sys.psi
    if isinstance(psi, Geometric) or (isinstance(psi, WeightedProduct) and not psi.harmonic_factor):
        return 1.0
    if isinstance(psi, Table):
        return None
    if eps <= 0:
        return None
    n_eps = math.ceil(1.0 / (1.0 - math.exp(-eps)))
    # balls smaller than every depth-(n_eps - 1) cylinder are deeper than n_eps - 1
    t_max = max(psi.thetas)
    return float(t_max ** (-(n_eps - 1)) / max(n_eps - 1, 1))


@dataclass(frozen=True)
class BallInclusionReport:
    lower_holds: bool
    upper_holds: bool
    inner_depth: int
    bowen_depth: int
    outer_depth: int
    log_inner_radius: float
    log_outer_radius: float

    @property
    def ok(self) -> bool:
        return self.lower_holds and self.upper_holds


def ball_inclusion_check(
    sys: ShiftSystem,
    x: SequencePoint,
    n: int,
    delta: float,
    eps: float,
    eta: float,
    delta0: float | None = None,
    max_depth: int | None = None,
) -> BallInclusionReport:
    """Check ``B(x, r_in) in B(x, n, delta) in B(x, r_out)`` via cylinder depths.

    ``r_in = eta * delta * exp(-S_n - n eps)`` and
    ``r_out = delta * exp(-S_n + n eps)``.  All three sets are cylinders
    around ``x``, and ``[x|a]`` is inside ``[x|b]`` exactly when ``a >= b``.
    """
    if n < 0:
        raise InvalidDepth(f"order must be >= 0, got {n}")
    if not delta > 0 or not eta > 0:
        raise ValueError("delta and eta must be positive")
    if delta0 is not None and delta >= delta0:
        raise OutOfRange(f"delta={delta} is not below the supplied delta0={delta0}")
    S_n = float(math.fsum(orbit_log_weights(sys, x, n)))
    log_in = math.log(eta) + math.log(delta) - S_n - n * eps
    log_out = math.log(delta) - S_n + n * eps
    m_in = ball_depth_of(sys, x, log_in, max_depth)
    m_out = ball_depth_of(sys, x, log_out, max_depth)
    M = bowen_ball_to_cylinder(sys, x, n, delta, max_depth)
    return BallInclusionReport(m_in >= M, M >= m_out, m_in, M, m_out, log_in, log_out)
