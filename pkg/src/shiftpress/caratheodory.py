"""Finite-scale Caratheodory set functions on cylinder covers.

Three families are provided, each as a *problem* object that builds its
cylinder tree once and can then be evaluated for many exponents ``s``:

* :class:`HausdorffProblem` -- covers by small cylinders, in the ``diam``,
  ``ball_diam`` and ``two_r`` conventions;
* :class:`PressureProblem` -- covers by Bowen balls of order ``>= N``;
* :class:`PesinProblem` -- covers by strings of depth-``m`` cylinders.

:func:`critical_exponent` locates where a set function crosses 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Sequence

import numpy as np

from .cover import build_tree, optimal_cover_dp
from .errors import BracketInvalid, Infeasible, InsufficientDepth, InvalidDepth
from .symbolic import LOG_TOL, Geometric, ShiftSystem, Table, WeightedProduct, Word, log_psi_rows, psi_depth_cap
from .targets import Full, TargetSet

VARIANTS = ("diam", "ball_diam", "two_r")
LOG2 = math.log(2.0)
WITNESS_LIMIT = 100_000


@dataclass
class SetFunctionValue:
    """Value of a finite-scale set function together with its witness."""

    value: float
    log_value: float
    kind: str
    s: float
    scale: dict
    depth: int
    witness: tuple[Word, ...] | None
    witness_size: int

    @property
    def infinite(self) -> bool:
        return self.value == math.inf


def _value(kind, s, scale, depth, sol) -> SetFunctionValue:
    lv = sol.log_cost
    val = 0.0 if lv == -math.inf else (math.inf if lv > 709.0 else math.exp(lv))
    return SetFunctionValue(val, lv, kind, float(s), scale, depth, sol.witness, sol.witness_size)


def max_psi_at_depth(sys: ShiftSystem, n: int) -> float:
    """``max log psi`` over admissible words of length ``n``."""
    if n == 0:
        return 0.0
    tree = build_tree(sys, Full(), n, lump=not isinstance(sys.psi, Table), track_counts=True)
    return float(log_psi_rows(sys.psi, tree.levels[n].words).max())


def min_psi_at_depth(sys: ShiftSystem, n: int) -> float:
    if n == 0:
        return 0.0
    tree = build_tree(sys, Full(), n, lump=not isinstance(sys.psi, Table), track_counts=True)
    return float(log_psi_rows(sys.psi, tree.levels[n].words).min())


def ball_depth_cost(sys: ShiftSystem, log_r: float, cap: int | None = None) -> int:
    """Largest depth of a ball of radius ``exp(log_r)`` over all centres."""
    if log_r > LOG_TOL:
        return 0
    cap = min(cap or 512, psi_depth_cap(sys.psi))
    best = 0
    stack: list[Word] = [()]
    while stack:
        w = stack.pop()
        for j in sys.successors(w[-1] if w else None):
            c = w + (j,)
            if sys.psi.log_weight(c) >= log_r - LOG_TOL:
                if len(c) >= cap:
                    raise InsufficientDepth(f"balls of this radius are deeper than {cap}")
                stack.append(c)
            else:
                best = max(best, len(c))
    return best


def _tree_mode(sys: ShiftSystem, needs_prefix_sums: bool) -> dict:
    psi = sys.psi
    if isinstance(psi, Table):
        return {"lump": False}
    if needs_prefix_sums and not (isinstance(psi, Geometric) and sys.constant_log_a):
        return {"lump": False}
    return {"lump": True, "track_counts": isinstance(psi, WeightedProduct)}


def _prefix_sums(sys: ShiftSystem, words: np.ndarray) -> np.ndarray:
    """``S[:, n]`` = sum of ``log a`` over the first ``n`` symbols."""
    la = np.asarray(sys.log_a)
    n, d = words.shape
    out = np.zeros((n, d + 1))
    if d:
        out[:, 1:] = np.cumsum(la[words - 1], axis=1)
    return out


# ---------------------------------------------------------------------------
# Hausdorff


class HausdorffProblem:
    """``m_H(Z, s, eps)`` at depth ``D`` in one of three cover conventions.

    ``diam`` uses cylinders of diameter ``<= eps`` weighted by ``diam^s``;
    ``ball_diam`` uses balls of radius ``<= eps`` (cylinders with
    ``psi(w) < eps`` that are balls, i.e. ``psi(w) < psi(parent)``) weighted
    by their diameter; ``two_r`` weighs the same balls by ``(2 psi(w))^s``.
    """

    def __init__(self, sys: ShiftSystem, Z: TargetSet, eps: float, variant: str = "diam", depth: int = 12):
        if variant not in VARIANTS:
            raise ValueError(f"unknown Hausdorff variant {variant!r}; expected one of {VARIANTS}")
        if not 0 < eps <= 1:
            raise ValueError(f"eps must lie in (0, 1], got {eps}")
        if depth < 1:
            raise InvalidDepth(f"depth must be >= 1, got {depth}")
        self.sys, self.Z, self.eps, self.variant, self.depth = sys, Z, float(eps), variant, depth
        self.tree = build_tree(sys, Z, depth, **_tree_mode(sys, False))
        log_eps = math.log(eps)
        self._base: list[np.ndarray] = []
        self._eligible: list[np.ndarray] = []
        for d, lv in enumerate(self.tree.levels):
            lpsi = log_psi_rows(sys.psi, lv.words)
            if sys.transition is None:
                ldiam = lpsi
            else:
                ldiam = np.array([sys.cylinder_log_diameter(tuple(int(v) for v in w)) for w in lv.words])
            if variant == "diam":
                ok = ldiam <= log_eps + LOG_TOL
            else:
                lpar = log_psi_rows(sys.psi, lv.words[:, :-1]) if d else np.full(lv.size, math.inf)
                ok = (lpsi < log_eps - LOG_TOL) & (lpsi < lpar - LOG_TOL)
            self._eligible.append(ok & lv.in_target)
            self._base.append(lpsi + LOG2 if variant == "two_r" else ldiam)
        if not self.tree.empty and not any(e.any() for e in self._eligible):
            raise InsufficientDepth(f"no cylinder of depth <= {depth} is small enough for eps={eps}")

    def log_weights(self, s: float) -> list[np.ndarray]:
        out = []
        for base, ok in zip(self._base, self._eligible):
            with np.errstate(invalid="ignore"):
                lw = np.zeros_like(base) if s == 0 else s * base
            out.append(np.where(ok, lw, math.inf))
        return out

    def value(self, s: float, witness: bool = True) -> SetFunctionValue:
        if s < 0:
            raise ValueError("exponent s must be >= 0")
        self.tree.log_weights = self.log_weights(s)
        try:
            sol = optimal_cover_dp(self.tree, witness_limit=WITNESS_LIMIT if witness else 0)
        except Infeasible as exc:
            raise InsufficientDepth(f"depth {self.depth} too shallow for eps={self.eps}") from exc
        return _value(f"hausdorff:{self.variant}", s, {"eps": self.eps}, self.depth, sol)

    __call__ = value


def default_eps(sys: ShiftSystem) -> float:
    """Largest scale excluding the root: the biggest depth-1 cylinder."""
    return math.exp(max_psi_at_depth(sys, 1))


def hausdorff_value(sys, Z, s, eps, variant="diam", depth=12) -> SetFunctionValue:
    return HausdorffProblem(sys, Z, eps, variant, depth).value(s)


# ---------------------------------------------------------------------------
# Bowen-ball pressure


class PressureProblem:
    """``m_P(Z, s, -t log a, N, delta)`` at depth ``D``.

    Every node ``[w]`` that equals a Bowen ball ``B(x, n, delta)`` of some
    order ``n >= N`` is a candidate, weighted by the cheapest such order:
    ``min_n exp(-n s - t S_n log a(x))``.
    """

    def __init__(self, sys: ShiftSystem, Z: TargetSet, t: float, N: int, delta: float, depth: int):
        if not 0 < delta <= 1:
            raise ValueError(f"Bowen radius must lie in (0, 1], got {delta}")
        if N < 1:
            raise InvalidDepth(f"minimal order N must be >= 1, got {N}")
        if depth < 1:
            raise InvalidDepth(f"depth must be >= 1, got {depth}")
        self.sys, self.Z, self.t, self.N, self.delta, self.depth = sys, Z, float(t), int(N), float(delta), depth
        self.tree = build_tree(sys, Z, depth, bowen_log_delta=math.log(delta), **_tree_mode(sys, True))
        # flattened (class, n, S_n) triples per level
        self._pairs = []
        for lv in self.tree.levels:
            lo = lv.extra.get("order_lo")
            if lo is None:
                self._pairs.append(None)
                continue
            lo = np.maximum(lo, self.N)
            hi = lv.extra["order_hi"]
            counts = np.where((lv.extra["order_lo"] >= 0) & (hi >= lo), hi - lo + 1, 0)
            counts[~lv.in_target] = 0
            if counts.sum() == 0:
                self._pairs.append(None)
                continue
            cls = np.repeat(np.arange(lv.size), counts)
            offs = np.arange(cls.size) - np.repeat(np.cumsum(counts) - counts, counts)
            n = lo[cls] + offs
            S = _prefix_sums(sys, lv.words)[cls, n]
            self._pairs.append((cls, n.astype(float), S, np.flatnonzero(np.r_[True, np.diff(cls) != 0])))

    def log_weights(self, s: float) -> list[np.ndarray]:
        out = []
        for lv, pr in zip(self.tree.levels, self._pairs):
            lw = np.full(lv.size, math.inf)
            if pr is not None:
                cls, n, S, starts = pr
                vals = -n * s - self.t * S
                lw[cls[starts]] = np.minimum.reduceat(vals, starts)
            out.append(lw)
        return out

    def value(self, s: float, witness: bool = True) -> SetFunctionValue:
        self.tree.log_weights = self.log_weights(s)
        try:
            sol = optimal_cover_dp(self.tree, witness_limit=WITNESS_LIMIT if witness else 0)
        except Infeasible as exc:
            raise InsufficientDepth(
                f"depth {self.depth} too shallow for N={self.N}, delta={self.delta}"
            ) from exc
        scale = {"N": self.N, "delta": self.delta, "t": self.t}
        return _value("pressure", s, scale, self.depth, sol)

    __call__ = value


def pressure_value(sys, Z, s, t, N, delta, depth) -> SetFunctionValue:
    return PressureProblem(sys, Z, t, N, delta, depth).value(s)


# ---------------------------------------------------------------------------
# open-cover (string) pressure


class PesinProblem:
    """String-cover pressure for the cover by depth-``m`` cylinders.

    A string ``U_0 .. U_{l-1}`` with ``U_i`` a depth-``m`` cylinder picks out
    ``X(U) = {x : f^i x in U_i}``, a cylinder of depth ``m + l - 1``.  It is
    weighted by ``exp(-s l + sup_{X(U)} S_l phi)`` with ``phi = -t log a``;
    for per-symbol ``log a`` the supremum is exact.
    """

    def __init__(self, sys: ShiftSystem, Z: TargetSet, t: float, cover_depth: int, N: int, depth: int):
        if cover_depth < 1:
            raise InvalidDepth(f"cover depth m must be >= 1, got {cover_depth}")
        if N < 1:
            raise InvalidDepth(f"minimal string length N must be >= 1, got {N}")
        self.sys, self.Z, self.t, self.m, self.N, self.depth = sys, Z, float(t), cover_depth, int(N), depth
        self.tree = build_tree(sys, Z, depth, **_tree_mode(sys, True))
        self._terms = []
        for d, lv in enumerate(self.tree.levels):
            ell = d - cover_depth + 1
            if ell < self.N:
                self._terms.append(None)
            else:
                self._terms.append((ell, _prefix_sums(sys, lv.words)[:, ell], lv.in_target))

    def log_weights(self, s: float) -> list[np.ndarray]:
        out = []
        for lv, term in zip(self.tree.levels, self._terms):
            if term is None:
                out.append(np.full(lv.size, math.inf))
            else:
                ell, S, ok = term
                out.append(np.where(ok, -s * ell - self.t * S, math.inf))
        return out

    def value(self, s: float, witness: bool = True) -> SetFunctionValue:
        self.tree.log_weights = self.log_weights(s)
        try:
            sol = optimal_cover_dp(self.tree, witness_limit=WITNESS_LIMIT if witness else 0)
        except Infeasible as exc:
            raise InsufficientDepth(f"depth {self.depth} < m + N - 1 = {self.m + self.N - 1}") from exc
        return _value("pesin", s, {"m": self.m, "N": self.N, "t": self.t}, self.depth, sol)

    __call__ = value


def pesin_pressure_value(sys, Z, s, t, cover_depth, N, depth) -> SetFunctionValue:
    return PesinProblem(sys, Z, t, cover_depth, N, depth).value(s)


def lebesgue_number(sys: ShiftSystem, cover_depth: int) -> float:
    """Every ball of this radius lies inside one depth-``m`` cylinder."""
    return math.exp(min_psi_at_depth(sys, cover_depth - 1))


# ---------------------------------------------------------------------------
# critical exponents


@dataclass
class Scale:
    """One rung of a scale schedule: an evaluator ``s -> value`` and its depth."""

    label: str
    depth: int
    evaluator: Callable[[float], object]
    order: float | None = None  # the N (or depth) used for extrapolation


@dataclass
class CriticalExponent:
    value: float
    crossings: list[tuple[str, int, float]]
    extrapolated: float | None
    tol: float
    brackets: list[tuple[float, float]] = field(default_factory=list)

    @property
    def drift(self) -> float | None:
        if len(self.crossings) < 2:
            return None
        return self.crossings[-1][2] - self.crossings[-2][2]


def _log_of(v) -> float:
    if isinstance(v, SetFunctionValue):
        return v.log_value
    v = float(v)
    if v <= 0:
        return -math.inf
    return math.log(v)


def crossing(
    evaluator: Callable[[float], object],
    bracket: tuple[float, float] | None = None,
    tol: float = 1e-9,
    max_expand: int = 60,
) -> tuple[float, tuple[float, float]]:
    """Bisection for the ``s`` where a non-increasing set function crosses 1."""

    def g(s):
        return _log_of(evaluator(s))

    if bracket is not None:
        lo, hi = map(float, bracket)
        if not lo < hi:
            raise BracketInvalid(f"bracket [{lo}, {hi}] is empty")
        glo, ghi = g(lo), g(hi)
        if glo < ghi:
            raise BracketInvalid("set function increases across the bracket")
        if not (glo > 0 > ghi):
            raise BracketInvalid(f"no crossing of 1 in [{lo}, {hi}] (log values {glo:.3g}, {ghi:.3g})")
    else:
        lo, hi, width = 0.0, 1.0, 1.0
        glo, ghi = g(lo), g(hi)
        for _ in range(max_expand):
            if glo > 0:
                break
            hi, ghi = lo, glo
            lo -= width
            width *= 2
            glo = g(lo)
        for _ in range(max_expand):
            if ghi < 0:
                break
            lo, glo = hi, ghi
            hi += width
            width *= 2
            ghi = g(hi)
        if not (glo > 0 > ghi):
            raise BracketInvalid("could not bracket a crossing of 1")
        if glo < ghi:
            raise BracketInvalid("set function is not monotone in s")
    used = (lo, hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm > 0:
            lo = mid
        elif gm < 0:
            hi = mid
        else:
            return mid, used
    return 0.5 * (lo + hi), used


def critical_exponent(
    evaluator: Callable[[float], object] | Sequence[Scale],
    bracket: tuple[float, float] | None = None,
    schedule: Sequence[Scale] | None = None,
    tol: float = 1e-9,
) -> CriticalExponent:
    """Crossing of 1 by a finite-scale set function, over a scale schedule.

    Parameters
    ----------
    evaluator : callable or sequence of Scale
        Either a single ``s -> value`` map or the schedule itself.
    schedule : sequence of Scale, optional
        Scales ordered from coarse to fine.  The reported value is the
        crossing at the finest scale; when two or more scales are present a
        Richardson extrapolation in ``1/order`` from the two finest is
        also reported.
    """
    if schedule is None:
        schedule = evaluator if not callable(evaluator) else [Scale("single", 0, evaluator)]
    schedule = list(schedule)
    if not schedule:
        raise ValueError("empty scale schedule")
    crossings, brackets = [], []
    for sc in schedule:
        s, used = crossing(sc.evaluator, bracket, tol)
        crossings.append((sc.label, sc.depth, s))
        brackets.append(used)
    extra = None
    if len(schedule) >= 2:
        a, b = schedule[-2], schedule[-1]
        na = a.order if a.order is not None else a.depth
        nb = b.order if b.order is not None else b.depth
        if na and nb and na != nb:
            sa, sb = crossings[-2][2], crossings[-1][2]
            extra = (nb * sb - na * sa) / (nb - na)
    return CriticalExponent(crossings[-1][2], crossings, extra, tol, brackets)


def dimension_schedule(
    sys: ShiftSystem, Z: TargetSet, depths: Sequence[int], variant: str = "diam", eps: float | None = None
) -> list[Scale]:
    eps = default_eps(sys) if eps is None else eps
    out = []
    for D in depths:
        prob = HausdorffProblem(sys, Z, eps, variant, D)
        out.append(Scale(f"eps={eps:.6g},D={D}", D, partial(prob.value, witness=False)))
    return out


def pressure_schedule(
    sys: ShiftSystem, Z: TargetSet, t: float, depths: Sequence[int], delta: float = 0.3
) -> list[Scale]:
    cost = ball_depth_cost(sys, math.log(delta))
    out = []
    for D in depths:
        N = D - cost
        if N < 1:
            raise InsufficientDepth(f"depth {D} leaves no room for Bowen balls of radius {delta}")
        prob = PressureProblem(sys, Z, t, N, delta, D)
        out.append(Scale(f"N={N},delta={delta:.6g},D={D}", D, partial(prob.value, witness=False), order=N))
    return out


def dimension_estimate(sys, Z, depths=(10, 12), variant="diam", eps=None, tol=1e-9) -> CriticalExponent:
    return critical_exponent(dimension_schedule(sys, Z, depths, variant, eps), bracket=(0.0, 64.0), tol=tol)


def pressure_estimate(sys, Z, t, depths=(12, 14), delta=0.3, tol=1e-9) -> CriticalExponent:
    return critical_exponent(pressure_schedule(sys, Z, t, depths, delta), tol=tol)
