"""Pressure curves ``T(t) = P(-t log a)`` for per-symbol ``log a``.

For subshifts of finite type the pressure is the log of the Perron root of
a transfer matrix on the higher-block graph; the full shift has the closed
form ``log sum_j exp(-t log a_j)``.  Also: the Bowen root ``T(t*) = 0`` and
the cone (Lipschitz-slope) bounds on ``T``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.special import logsumexp

from .errors import BracketInvalid, ConfigError, NotIrreducible, NumericalError
from .symbolic import ShiftSystem, Word
from .targets import Full, Subshift, TargetSet, is_sft, validate_target

T_CLAMP = 64.0
POWER_TOL = 1e-13
POWER_MAXITER = 10_000
CONE_SLACK = 1e-10


# ---------------------------------------------------------------------------
# the block graph


@dataclass(frozen=True)
class BlockGraph:
    """Higher-block presentation of an SFT: states are allowed words of a
    fixed length, trimmed to the part that supports infinite paths."""

    states: tuple[Word, ...]
    adjacency: np.ndarray  # 0/1
    log_a: np.ndarray  # log a of the symbol entered by each edge target
    components: np.ndarray  # strong component label per state

    @property
    def n_components(self) -> int:
        return int(self.components.max()) + 1 if len(self.components) else 0

    def component_mask(self, c: int) -> np.ndarray:
        return self.components == c

    def recurrent_components(self) -> list[np.ndarray]:
        """Strong components carrying at least one cycle."""
        out = []
        for c in range(self.n_components):
            m = self.component_mask(c)
            if self.adjacency[np.ix_(m, m)].any():
                out.append(m)
        return out


def block_graph(sys: ShiftSystem, Z: TargetSet) -> BlockGraph:
    if not is_sft(Z):
        raise ConfigError("closed-form pressure needs a Full or Subshift target")
    validate_target(sys, Z)
    forbidden = Z.forbidden if isinstance(Z, Subshift) else ()
    L = max([1] + [len(f) - 1 for f in forbidden])

    def clean(w: Word) -> bool:
        return all(
            w[i : i + len(f)] != f for f in forbidden for i in range(len(w) - len(f) + 1)
        )

    states = [w for w in itertools.product(range(1, sys.k + 1), repeat=L) if sys.is_admissible(w) and clean(w)]
    index = {w: i for i, w in enumerate(states)}
    n = len(states)
    A = np.zeros((n, n), dtype=np.int8)
    for i, u in enumerate(states):
        for j in sys.successors(u[-1]):
            ext = u + (j,)
            if clean(ext):
                v = index.get(ext[1:])
                if v is not None:
                    A[i, v] = 1
    # trim states that cannot lie on a bi-infinite path
    keep = np.ones(n, dtype=bool)
    while True:
        sub = A[np.ix_(keep, keep)]
        ok = (sub.sum(axis=0) > 0) & (sub.sum(axis=1) > 0)
        if ok.all():
            break
        idx = np.flatnonzero(keep)
        keep[idx[~ok]] = False
    idx = np.flatnonzero(keep)
    states = tuple(states[i] for i in idx)
    A = A[np.ix_(idx, idx)]
    la = np.array([sys.log_a[w[-1] - 1] for w in states])
    if len(states):
        _, labels = connected_components(A, directed=True, connection="strong")
    else:
        labels = np.zeros(0, dtype=int)
    return BlockGraph(states, A, la, labels)


# ---------------------------------------------------------------------------
# Perron root


@dataclass(frozen=True)
class PerronResult:
    log_rho: float
    right: np.ndarray
    left: np.ndarray
    iterations: int
    rel_gap: float


def _power(B: np.ndarray, tol: float, maxiter: int) -> tuple[float, np.ndarray, int, float]:
    v = np.full(B.shape[0], 1.0 / B.shape[0])
    lo = hi = 0.0
    for it in range(1, maxiter + 1):
        w = B @ v
        ratios = w / v
        lo, hi = float(ratios.min()), float(ratios.max())
        v = w / w.sum()
        if hi - lo <= tol * lo:
            return 0.5 * (lo + hi), v, it, (hi - lo) / lo
    raise NumericalError(f"power iteration did not reach relative gap {tol} in {maxiter} steps ({(hi - lo) / lo:.2e})")


def perron(M: np.ndarray, tol: float = POWER_TOL, maxiter: int = POWER_MAXITER) -> PerronResult:
    """Perron root of an irreducible nonnegative matrix by power iteration.

    Iterates ``B = M / max(M) + I`` from the uniform vector; the shift makes
    ``B`` primitive.  Convergence is certified by the Collatz-Wielandt
    bounds ``min (Bv)_i / v_i <= rho(B) <= max (Bv)_i / v_i``.
    """
    c = float(M.max())
    if c <= 0:
        raise NumericalError("matrix has no positive entry")
    B = M / c + np.eye(M.shape[0])
    rb, right, it1, gap = _power(B, tol * 0.25, maxiter)
    _, left, it2, _ = _power(B.T.copy(), tol * 0.25, maxiter)
    rho = (rb - 1.0) * c
    if not rho > 0:
        raise NumericalError("spectral radius is not positive")
    return PerronResult(math.log(rho), right, left, max(it1, it2), gap)


def _clamp(t: float) -> float:
    return min(max(float(t), -T_CLAMP), T_CLAMP)


@dataclass(frozen=True)
class PressurePoint:
    value: float
    slope: float


def _pressure_on_graph(g: BlockGraph, t: float, allow_reducible: bool) -> PressurePoint:
    comps = g.recurrent_components()
    if not comps:
        raise NotIrreducible("the target contains no infinite sequence")
    if len(comps) > 1 or comps[0].sum() != len(g.states):
        if not allow_reducible:
            raise NotIrreducible(f"transition graph of the target is reducible ({len(comps)} recurrent classes)")
    best = None
    for m in comps:
        A = g.adjacency[np.ix_(m, m)].astype(float)
        la = g.log_a[m]
        # normalise the exponent so the largest entry is 1
        e = -t * la
        e = e - e.max()
        M = A * np.exp(e)[None, :]
        pr = perron(M)
        logT = pr.log_rho + float((-t * la).max())
        dM = -(A * np.exp(e)[None, :] * la[None, :])
        slope = float(pr.left @ dM @ pr.right) / (math.exp(pr.log_rho) * float(pr.left @ pr.right))
        if best is None or logT > best.value:
            best = PressurePoint(logT, slope)
    return best


def _full_pressure(log_a: np.ndarray, t: float) -> PressurePoint:
    e = -t * log_a
    val = float(logsumexp(e))
    p = np.exp(e - val)
    return PressurePoint(val, -float(p @ log_a))


def pressure_point(sys: ShiftSystem, Z: TargetSet, t: float, allow_reducible: bool = False) -> PressurePoint:
    t = _clamp(t)
    if isinstance(Z, Full) and sys.transition is None:
        return _full_pressure(np.asarray(sys.log_a), t)
    return _pressure_on_graph(block_graph(sys, Z), t, allow_reducible)


def pressure_closed_form(sys: ShiftSystem, Z: TargetSet, t: float, allow_reducible: bool = False) -> float:
    """``T(t) = P_Z(-t log a)``, the log spectral radius of ``M_t``."""
    return pressure_point(sys, Z, t, allow_reducible).value


def entropy(sys: ShiftSystem, Z: TargetSet) -> float:
    """Topological entropy ``T(0)``; reducible graphs use their largest class."""
    return pressure_point(sys, Z, 0.0, allow_reducible=True).value


def transfer_matrix(sys: ShiftSystem, t: float) -> np.ndarray:
    """``M_t[i][j] = A[i][j] * exp(-t log a_j)`` on the symbol graph."""
    A = np.ones((sys.k, sys.k)) if sys.transition is None else sys.transition.astype(float)
    return A * np.exp(-_clamp(t) * np.asarray(sys.log_a))[None, :]


# ---------------------------------------------------------------------------
# exponent extremes


def _karp(A: np.ndarray, w: np.ndarray, maximise: bool) -> float:
    """Min (or max) mean weight of a cycle in a strongly connected graph;
    the weight of an edge is ``w`` of its target."""
    sign = -1.0 if maximise else 1.0
    n = A.shape[0]
    W = np.where(A > 0, sign * w[None, :], np.inf)
    D = np.full((n + 1, n), np.inf)
    D[0, 0] = 0.0
    for k in range(1, n + 1):
        D[k] = np.min(D[k - 1][:, None] + W, axis=0)
    best = np.inf
    for v in range(n):
        if not np.isfinite(D[n, v]):
            continue
        ks = np.arange(n)
        with np.errstate(invalid="ignore"):
            vals = (D[n, v] - D[ks, v]) / (n - ks)
        vals = vals[np.isfinite(D[ks, v])]
        best = min(best, float(vals.max()))
    return sign * best


def cycle_mean_range(sys: ShiftSystem, Z: TargetSet) -> tuple[float, float]:
    """Range of Lyapunov exponents of periodic orbits in ``Z``."""
    g = block_graph(sys, Z)
    comps = g.recurrent_components()
    if not comps:
        raise NotIrreducible("the target contains no infinite sequence")
    lo = min(_karp(g.adjacency[np.ix_(m, m)], g.log_a[m], False) for m in comps)
    hi = max(_karp(g.adjacency[np.ix_(m, m)], g.log_a[m], True) for m in comps)
    return lo, hi


def log_a_bounds(sys: ShiftSystem, Z: TargetSet) -> tuple[float, float]:
    """``inf`` and ``sup`` of ``log a`` over the symbols used by ``Z``."""
    g = block_graph(sys, Z)
    if not len(g.states):
        raise NotIrreducible("the target contains no infinite sequence")
    return float(g.log_a.min()), float(g.log_a.max())


# ---------------------------------------------------------------------------
# curves


@dataclass
class PressureCurve:
    """A pressure curve ``t -> T(t)`` with its slope.

    ``mode`` is ``'closed_form'`` or ``'sampled'``.  ``alpha`` and ``beta``
    bound ``log a`` on the target; ``alpha_range`` is the range of
    ``-T'``.  ``error`` is the sampling error for sampled curves.
    """

    fn: Callable[[float], float]
    slope_fn: Callable[[float], float]
    mode: str
    domain: tuple[float, float]
    alpha: float
    beta: float
    h_top: float
    alpha_range: tuple[float, float]
    error: float = 0.0
    samples: tuple[np.ndarray, np.ndarray] | None = None
    meta: dict = field(default_factory=dict)

    def __call__(self, t: float) -> float:
        return self.fn(t)

    def slope(self, t: float) -> float:
        return self.slope_fn(t)


def closed_form_curve(sys: ShiftSystem, Z: TargetSet | None = None) -> PressureCurve:
    Z = Full() if Z is None else Z
    if isinstance(Z, Full) and sys.transition is None:
        la = np.asarray(sys.log_a)

        def point(t):
            return _full_pressure(la, _clamp(t))
    else:
        g = block_graph(sys, Z)

        def point(t):
            return _pressure_on_graph(g, _clamp(t), False)
    h = point(0.0).value  # raises early if reducible
    alpha, beta = log_a_bounds(sys, Z)
    ar = cycle_mean_range(sys, Z)
    return PressureCurve(
        fn=lambda t: point(t).value,
        slope_fn=lambda t: point(t).slope,
        mode="closed_form",
        domain=(-T_CLAMP, T_CLAMP),
        alpha=alpha,
        beta=beta,
        h_top=h,
        alpha_range=ar,
    )


def sampled_curve(
    ts: Sequence[float], values: Sequence[float], error: float = 0.0, alpha: float | None = None, beta: float | None = None
) -> PressureCurve:
    """Piecewise-linear curve through samples (e.g. cover estimates)."""
    ts = np.asarray(ts, dtype=float)
    vs = np.asarray(values, dtype=float)
    order = np.argsort(ts)
    ts, vs = ts[order], vs[order]
    if len(ts) < 2 or np.any(np.diff(ts) <= 0):
        raise ValueError("sampled curve needs at least two distinct t values")
    secants = -np.diff(vs) / np.diff(ts)

    def fn(t):
        return float(np.interp(t, ts, vs))

    def slope(t):
        i = int(np.clip(np.searchsorted(ts, t, side="right") - 1, 0, len(ts) - 2))
        return float(-secants[i])

    h = fn(0.0) if ts[0] <= 0 <= ts[-1] else float("nan")
    return PressureCurve(
        fn, slope, "sampled", (float(ts[0]), float(ts[-1])),
        float(secants.min()) if alpha is None else alpha,
        float(secants.max()) if beta is None else beta,
        h, (float(secants.min()), float(secants.max())), float(error), (ts, vs),
    )


def corrupt(curve: PressureCurve, t0: float, bump: float) -> PressureCurve:
    """Copy of ``curve`` with ``T(t0)`` raised by ``bump`` (negative tests)."""
    base = curve.fn

    def fn(t):
        v = base(t)
        return v + bump if math.isclose(t, t0, rel_tol=0.0, abs_tol=1e-12) else v

    return replace(curve, fn=fn, meta={**curve.meta, "corrupted_at": t0})


# ---------------------------------------------------------------------------
# Bowen root


@dataclass(frozen=True)
class BowenRoot:
    t: float
    residual: float
    bracket: tuple[float, float]
    iterations: int


def bowen_root(
    curve: PressureCurve,
    h_top: float | None = None,
    alpha: float | None = None,
    beta: float | None = None,
    tol: float = 1e-12,
) -> BowenRoot:
    """Root of ``T(t) = 0`` bracketed by ``[h/beta, h/alpha]``.

    Stops once ``|T(t)| <= alpha * tol``; since ``T`` decreases at rate at
    least ``alpha`` this puts ``t`` within ``tol`` of the root.
    """
    h = curve.h_top if h_top is None else h_top
    a = curve.alpha if alpha is None else alpha
    b = curve.beta if beta is None else beta
    if not 0 < a <= b < math.inf:
        raise BracketInvalid(f"need 0 < alpha <= beta < inf, got alpha={a}, beta={b}")
    if h < 0:
        raise BracketInvalid(f"entropy must be >= 0, got {h}")
    if h == 0:
        return BowenRoot(0.0, curve(0.0), (0.0, 0.0), 0)
    lo, hi = h / b, h / a
    slack = CONE_SLACK + curve.error
    flo, fhi = curve(lo), curve(hi)
    if flo < -slack or fhi > slack:
        raise BracketInvalid(f"T(h/beta)={flo:.3g} and T(h/alpha)={fhi:.3g} fail the sign condition")
    target = a * tol
    for end, val in ((lo, flo), (hi, fhi)):
        if abs(val) <= target:
            return BowenRoot(end, val, (lo, hi), 0)
    it = 0
    x0, x1 = lo, hi
    while it < 400:
        it += 1
        mid = 0.5 * (x0 + x1)
        fm = curve(mid)
        if abs(fm) <= target or x1 - x0 <= 4 * np.finfo(float).eps * max(1.0, abs(mid)):
            return BowenRoot(mid, fm, (lo, hi), it)
        if fm > 0:
            x0 = mid
        else:
            x1 = mid
    raise NumericalError("Bowen root bisection did not converge")


# ---------------------------------------------------------------------------
# cone bounds


@dataclass(frozen=True)
class ConeViolation:
    t: float
    h: float
    side: str  # 'lower' (T(t+h) < T(t) - beta h) or 'upper' (T(t+h) > T(t) - alpha h)
    margin: float


@dataclass
class ConeReport:
    checked: int
    violations: list[ConeViolation]
    worst_margin: float
    slack: float

    @property
    def ok(self) -> bool:
        return not self.violations


def cone_check(
    curve: PressureCurve,
    grid: Iterable[tuple[float, float]],
    alpha: float | None = None,
    beta: float | None = None,
    slack: float = CONE_SLACK,
) -> ConeReport:
    """Check ``T(t) - beta h <= T(t+h) <= T(t) - alpha h`` on a grid.

    Margins are positive when the inequality holds.  Sampled curves get the
    slack widened by twice their reported error.
    """
    a = curve.alpha if alpha is None else alpha
    b = curve.beta if beta is None else beta
    slack = slack + 2.0 * curve.error
    out: list[ConeViolation] = []
    worst = math.inf
    n = 0
    for t, h in grid:
        if not h > 0:
            raise ValueError(f"cone step h must be positive, got {h}")
        g0, g1 = curve(t), curve(t + h)
        lower = g1 - (g0 - b * h)
        upper = (g0 - a * h) - g1
        n += 1
        for side, m in (("lower", lower), ("upper", upper)):
            worst = min(worst, m)
            if m < -slack:
                out.append(ConeViolation(float(t), float(h), side, float(m)))
    if n == 0:
        raise ValueError("cone grid is empty")
    return ConeReport(n, out, worst, slack)


def cone_grid(t_lo: float = -3.0, t_hi: float = 3.0, step: float = 0.1, hs: Sequence[float] = (0.1, 0.5, 1.0)):
    ts = np.round(np.arange(t_lo, t_hi + step / 2, step), 12)
    return [(float(t), float(h)) for t in ts for h in hs]
